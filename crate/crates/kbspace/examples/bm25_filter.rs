//! Shrinking a search space further by BM25 over verbalized facts.

use kbspace::eval::answer_presence;
use kbspace::space::verbalize_fact;
use kbspace::{fixture, QueryConfig};

pub fn run() -> anyhow::Result<()> {
    let engine = fixture::engine()?;
    let kb = engine.kb();
    let gold = vec!["pogba".to_string(), "perisic".to_string()];
    for n in [None, Some(10), Some(3)] {
        let cfg = QueryConfig {
            bm25_top_n: n,
            ..Default::default()
        };
        let space = engine.search_space(fixture::RUNNING_EXAMPLE, None, &cfg)?;
        println!(
            "top-n {:?}: {} facts, {} items, answer present: {}",
            n,
            space.facts.len(),
            space.items.len(),
            answer_presence(kb, &space, &gold)
        );
        if n == Some(3) {
            for &f in &space.facts {
                println!("  {}", verbalize_fact(kb, kb.fact(f).expect("fact in KB")));
            }
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run()
}
