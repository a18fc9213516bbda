//! Reified triples in, index bundle out, and back again.
//!
//! ```sh
//! cargo run --example ingest_fixture
//! ```

use kbspace::bundle;
use kbspace::fixture;
use kbspace::ingest::{aggregate_reified, read_items, read_triples, DEFAULT_FACT_ID_PREFIX};

pub fn run() -> anyhow::Result<()> {
    let items = read_items(&fixture::items_path())?;
    let triples = read_triples(&fixture::triples_path())?;
    println!("{} item records, {} triples", items.len(), triples.records.len());

    let facts = aggregate_reified(triples.records, DEFAULT_FACT_ID_PREFIX)?;
    println!("{} facts after joining reified statements", facts.records.len());
    let qualified = facts.records.iter().find(|f| f.qualifiers.len() == 2).expect("fixture has one");
    println!(
        "e.g. {} {} {} with {:?}",
        qualified.subject, qualified.predicate, qualified.object, qualified.qualifiers
    );

    let kb = bundle::build_knowledge_base(&items, &facts.records)?;
    let dir = tempfile::tempdir()?;
    bundle::save(&kb, dir.path())?;
    let loaded = bundle::load(dir.path())?;
    assert_eq!(loaded, kb);
    println!(
        "bundle round trip ok: {} items ({} literals registered from facts), {} facts",
        loaded.num_items(),
        loaded.num_items() - items.len(),
        loaded.num_facts()
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run()
}
