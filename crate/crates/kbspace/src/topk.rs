//! Threshold algorithm over the four score-ordered signal lists of one term.
//!
//! Each round performs one sorted access per list, scores newly seen items by
//! random access into the precomputed signals, and stops once `k` items have
//! been seen whose aggregate reaches the threshold `δ`, the aggregate of the
//! last scores read under sorted access. Results are ordered by aggregate
//! descending, then item code ascending; the stopping test compares in that
//! same order so that an unseen item tied with the k-th at `δ` but carrying a
//! smaller code is never skipped.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::kb::ItemId;
use crate::scoring::{ScoredCandidate, SignalWeights, Signals};

pub const NUM_SIGNALS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopK {
    pub items: Vec<ScoredCandidate>,
    pub sorted_accesses: usize,
    pub random_accesses: usize,
}

/// Total order used for every ranking: aggregate descending, code ascending.
#[inline]
pub fn ranks_before(a: &ScoredCandidate, b: &ScoredCandidate) -> bool {
    a.agg > b.agg || (a.agg == b.agg && a.item < b.item)
}

pub fn rank_order(a: &ScoredCandidate, b: &ScoredCandidate) -> std::cmp::Ordering {
    b.agg.total_cmp(&a.agg).then(a.item.cmp(&b.item))
}

/// Runs the threshold algorithm over `candidates`, all belonging to one term.
/// Aggregates are recomputed from the signals under `weights`. `k` larger than
/// the candidate count returns every candidate.
pub fn threshold_topk(candidates: &[ScoredCandidate], weights: &SignalWeights, k: usize) -> TopK {
    let n = candidates.len();
    let mut out = TopK {
        items: Vec::new(),
        sorted_accesses: 0,
        random_accesses: 0,
    };
    if n == 0 || k == 0 {
        return out;
    }

    let sorted: [Vec<usize>; NUM_SIGNALS] = std::array::from_fn(|s| {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| {
            let (ca, cb) = (&candidates[a], &candidates[b]);
            cb.signals
                .get(s)
                .total_cmp(&ca.signals.get(s))
                .then(ca.item.cmp(&cb.item))
        });
        idx
    });

    let mut seen = vec![false; n];
    let mut unseen: BTreeSet<(ItemId, usize)> = candidates.iter().enumerate().map(|(i, c)| (c.item, i)).collect();
    let mut last = [0.0; NUM_SIGNALS];
    let mut best: Vec<ScoredCandidate> = Vec::with_capacity(k + 1);

    for depth in 0..n {
        for (s, list) in sorted.iter().enumerate() {
            let idx = list[depth];
            out.sorted_accesses += 1;
            last[s] = candidates[idx].signals.get(s);
            if seen[idx] {
                continue;
            }
            seen[idx] = true;
            unseen.remove(&(candidates[idx].item, idx));
            out.random_accesses += 1;
            let c = ScoredCandidate::new(candidates[idx].item, candidates[idx].term_index, candidates[idx].signals, weights);
            insert_bounded(&mut best, c, k);
        }

        let Some(&(min_unseen, _)) = unseen.first() else {
            break;
        };
        if best.len() == k {
            let threshold = weights.aggregate(&Signals {
                coh: last[0],
                conn: last[1],
                rel: last[2],
                term_match: last[3],
            });
            let kth = &best[k - 1];
            if kth.agg > threshold || (kth.agg == threshold && kth.item < min_unseen) {
                break;
            }
        }
    }
    out.items = best;
    out
}

fn insert_bounded(best: &mut Vec<ScoredCandidate>, c: ScoredCandidate, k: usize) {
    if best.len() == k && !ranks_before(&c, &best[k - 1]) {
        return;
    }
    let pos = best.iter().position(|b| ranks_before(&c, b)).unwrap_or(best.len());
    best.insert(pos, c);
    best.truncate(k);
}
