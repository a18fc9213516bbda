//! Question-driven reduction of a large knowledge base to a small answer
//! search space: disambiguate question terms to KB items with a
//! threshold-algorithm top-k, then collect and prune their facts.

pub mod auto;
pub mod bundle;
pub mod config;
pub mod embedding;
pub mod engine;
pub mod error;
pub mod eval;
pub mod fixture;
pub mod ingest;
pub mod kb;
pub mod lexical;
pub mod question;
pub mod report;
pub mod scoring;
pub mod service;
pub mod space;
pub mod store;
pub mod synth;
pub mod text;
pub mod topk;

pub use auto::{KSetting, PrunePolicy, PruneSetting};
pub use embedding::EmbeddingStore;
pub use engine::{Engine, QueryConfig};
pub use error::{Error, Result};
pub use kb::{Fact, FactId, ItemId, ItemKind, KbItem};
pub use report::SearchSpaceReport;
pub use scoring::{SignalMask, SignalWeights};
pub use space::SearchSpace;
pub use store::{Distance, FrequencyProfile, KnowledgeBase};
