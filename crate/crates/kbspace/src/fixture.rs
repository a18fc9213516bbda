//! The bundled 2018 World Cup sample KB under `data/worldcup/`.

use std::path::{Path, PathBuf};

use crate::bundle::build_knowledge_base;
use crate::embedding::EmbeddingStore;
use crate::engine::Engine;
use crate::error::Result;
use crate::eval::{read_instances, BenchmarkInstance};
use crate::ingest::{aggregate_reified, read_items, read_triples, DEFAULT_FACT_ID_PREFIX};
use crate::store::KnowledgeBase;
use crate::text::Stopwords;

pub const RUNNING_EXAMPLE: &str = "Who scored in the 2018 final between France and Croatia?";

pub fn dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/worldcup")
}

pub fn items_path() -> PathBuf {
    dir().join("items.jsonl")
}

pub fn triples_path() -> PathBuf {
    dir().join("triples.tsv")
}

pub fn embeddings_path() -> PathBuf {
    dir().join("embeddings.txt")
}

pub fn questions_path() -> PathBuf {
    dir().join("questions.jsonl")
}

pub fn knowledge_base() -> Result<KnowledgeBase> {
    let items = read_items(&items_path())?;
    let facts = aggregate_reified(read_triples(&triples_path())?.records, DEFAULT_FACT_ID_PREFIX)?;
    build_knowledge_base(&items, &facts.records)
}

pub fn engine() -> Result<Engine> {
    Engine::new(knowledge_base()?, EmbeddingStore::load(&embeddings_path())?, Stopwords::default())
}

pub fn questions() -> Result<Vec<BenchmarkInstance>> {
    read_instances(&questions_path())
}
