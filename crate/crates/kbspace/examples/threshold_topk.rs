//! Top-k per question term with the threshold algorithm, compared with a
//! full scan of every candidate.

use kbspace::fixture;
use kbspace::scoring::{score_lists, KbSignals, SignalMask, SignalWeights};
use kbspace::topk::{rank_order, threshold_topk};

pub fn run() -> anyhow::Result<()> {
    let engine = fixture::engine()?;
    let question = engine.segment(fixture::RUNNING_EXAMPLE)?;
    let lists = engine.candidate_lists(&question, 20)?;
    let weights = SignalWeights::default();
    let source = KbSignals::new(engine.kb(), engine.embeddings(), &question.terms);
    let scored = score_lists(&lists, &source, &weights, SignalMask::ALL);

    for (term, cands) in question.terms.iter().zip(&scored) {
        let top = threshold_topk(cands, &weights, 3);
        let mut scan = cands.clone();
        scan.sort_by(rank_order);
        scan.truncate(3);
        assert_eq!(top.items, scan);
        println!(
            "{term:?}: {} candidates, {} sorted / {} random accesses",
            cands.len(),
            top.sorted_accesses,
            top.random_accesses
        );
        for c in &top.items {
            let s = &c.signals;
            println!(
                "  {:<35} agg {:.3}  coh {:.3} conn {:.3} rel {:.3} match {:.3}",
                engine.kb().label(c.item),
                c.agg,
                s.coh,
                s.conn,
                s.rel,
                s.term_match
            );
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run()
}
