//! Question segmentation and lexical candidate lists.

use kbspace::fixture;

pub fn run() -> anyhow::Result<()> {
    let engine = fixture::engine()?;
    let question = engine.segment(fixture::RUNNING_EXAMPLE)?;
    println!("{}\n  -> terms {:?}", question.raw, question.terms);

    for list in engine.candidate_lists(&question, 20)? {
        println!("\n{:?} ({} candidates)", list.term, list.len());
        for c in &list.entries {
            println!("  {:>2}. {:<40} bm25 {:.3}", c.rank, engine.kb().label(c.item), c.lexical_score);
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run()
}
