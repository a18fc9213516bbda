//! Choosing k from candidate ambiguity and p from k.

use kbspace::auto::{auto_k, auto_p, entropy, PrunePolicy};
use kbspace::fixture;

pub fn run() -> anyhow::Result<()> {
    let engine = fixture::engine()?;
    let kb = engine.kb();
    let question = engine.segment(fixture::RUNNING_EXAMPLE)?;
    for list in engine.candidate_lists(&question, 20)? {
        let freqs: Vec<u64> = list
            .entries
            .iter()
            .map(|c| kb.frequency(c.item).map(|f| f.total))
            .collect::<Result<_, _>>()?;
        println!(
            "{:<12} |NF| {:?}  entropy {:.3}  k = {}",
            list.term,
            freqs,
            entropy(&freqs),
            auto_k(kb, &list, 20, 5)?
        );
    }

    println!("\n k  10^(5-k)  10^(5-0.5k)  10^(4-0.5k)");
    for k in 1..=5 {
        println!(
            "{k:>2}  {:>8}  {:>11}  {:>11}",
            auto_p(k, PrunePolicy::Steep),
            auto_p(k, PrunePolicy::Smooth),
            auto_p(k, PrunePolicy::SmoothLow)
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run()
}
