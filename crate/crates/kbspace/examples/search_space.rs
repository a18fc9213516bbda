//! The full pipeline for one question, printed as the JSON report.
//!
//! ```sh
//! cargo run --example search_space -- "Which stadium hosted the 2018 World Cup final?"
//! ```

use kbspace::{fixture, QueryConfig, SearchSpaceReport};

pub fn run_question(question: &str) -> anyhow::Result<String> {
    let engine = fixture::engine()?;
    let space = engine.search_space(question, None, &QueryConfig::default())?;
    Ok(SearchSpaceReport::new(engine.kb(), &space, true).to_json())
}

pub fn run() -> anyhow::Result<()> {
    print!("{}", run_question(fixture::RUNNING_EXAMPLE)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    match std::env::args().nth(1) {
        Some(q) => print!("{}", run_question(&q)?),
        None => run()?,
    }
    Ok(())
}
