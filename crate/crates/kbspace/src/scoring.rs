//! The four per-candidate relevance signals and their aggregate.
//!
//! For candidate `x` in list `i` of `m` lists:
//!
//! * coherence: mean over the other lists of the best embedding similarity
//!   between `x` and any item of that list;
//! * connectivity: the same with KB connectivity (1, 0.5 or 0);
//! * relatedness: mean embedding similarity between `x` and every other
//!   question term;
//! * term match: reciprocal lexical rank of `x` in its own list.
//!
//! The three context signals are 0 when the question has a single term. An
//! empty other list contributes 0 to the mean, which shifts every candidate of
//! a list equally and leaves rankings unchanged.

use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embedding::{sim_vectors, EmbeddingStore, NEUTRAL_SIMILARITY};
use crate::error::{Error, Result};
use crate::kb::ItemId;
use crate::lexical::CandidateList;
use crate::store::KnowledgeBase;

/// Non-negative weights of the linear aggregate, summing to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalWeights {
    pub coh: f64,
    pub conn: f64,
    pub rel: f64,
    #[serde(rename = "match")]
    pub term_match: f64,
}

impl Default for SignalWeights {
    fn default() -> Self {
        Self {
            coh: 0.1,
            conn: 0.3,
            rel: 0.2,
            term_match: 0.4,
        }
    }
}

impl SignalWeights {
    pub const SUM_TOLERANCE: f64 = 1e-9;

    pub fn new(coh: f64, conn: f64, rel: f64, term_match: f64) -> Result<Self> {
        let w = Self {
            coh,
            conn,
            rel,
            term_match,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        let all = self.as_array();
        if all.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidArgument(format!("weights must be non-negative: {all:?}")));
        }
        let sum: f64 = all.iter().sum();
        if (sum - 1.0).abs() > Self::SUM_TOLERANCE {
            return Err(Error::InvalidArgument(format!("weights must sum to 1, got {sum}")));
        }
        Ok(())
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.coh, self.conn, self.rel, self.term_match]
    }

    pub fn from_array([coh, conn, rel, term_match]: [f64; 4]) -> Result<Self> {
        Self::new(coh, conn, rel, term_match)
    }

    /// `h_coh·coh + h_conn·conn + h_rel·rel + h_match·match`, accumulated in
    /// that fixed order.
    #[inline]
    pub fn aggregate(&self, s: &Signals) -> f64 {
        self.coh * s.coh + self.conn * s.conn + self.rel * s.rel + self.term_match * s.term_match
    }

    /// Zeroes the weights of disabled signals and renormalizes the rest.
    pub fn ablate(&self, mask: SignalMask) -> Result<Self> {
        let keep = mask.as_array();
        let mut w = self.as_array();
        for (w, on) in w.iter_mut().zip(keep) {
            if !on {
                *w = 0.0;
            }
        }
        let sum: f64 = w.iter().sum();
        if sum <= 0.0 {
            return Err(Error::InvalidArgument("ablation leaves no weighted signal".into()));
        }
        Self::from_array(w.map(|x| x / sum))
    }

    /// Signals with zero weight; their computation can be skipped.
    pub fn active_mask(&self) -> SignalMask {
        SignalMask {
            coh: self.coh > 0.0,
            conn: self.conn > 0.0,
            rel: self.rel > 0.0,
            term_match: self.term_match > 0.0,
        }
    }
}

/// Which signals to compute. Disabled signals are reported as 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SignalMask {
    pub coh: bool,
    pub conn: bool,
    pub rel: bool,
    #[serde(rename = "match")]
    pub term_match: bool,
}

impl Default for SignalMask {
    fn default() -> Self {
        Self::ALL
    }
}

impl SignalMask {
    pub const ALL: SignalMask = SignalMask {
        coh: true,
        conn: true,
        rel: true,
        term_match: true,
    };

    pub fn as_array(&self) -> [bool; 4] {
        [self.coh, self.conn, self.rel, self.term_match]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Signals {
    pub coh: f64,
    pub conn: f64,
    pub rel: f64,
    #[serde(rename = "match")]
    pub term_match: f64,
}

impl Signals {
    pub fn get(&self, s: usize) -> f64 {
        match s {
            0 => self.coh,
            1 => self.conn,
            2 => self.rel,
            3 => self.term_match,
            _ => panic!("signal index {s} out of range"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScoredCandidate {
    pub item: ItemId,
    pub term_index: usize,
    #[serde(flatten)]
    pub signals: Signals,
    pub agg: f64,
}

impl ScoredCandidate {
    pub fn new(item: ItemId, term_index: usize, signals: Signals, weights: &SignalWeights) -> Self {
        Self {
            item,
            term_index,
            signals,
            agg: weights.aggregate(&signals),
        }
    }
}

/// Pairwise relatedness between candidates and question terms. Values must
/// lie in [0, 1]; `connectivity` is one of 1, 0.5, 0.
pub trait SignalSource: Sync {
    fn item_similarity(&self, a: ItemId, b: ItemId) -> f64;
    fn connectivity(&self, a: ItemId, b: ItemId) -> f64;
    fn term_similarity(&self, x: ItemId, term_index: usize) -> f64;
}

/// Signals backed by the KB and embedding store. Counts similarity lookups
/// that fell back to the neutral value because a vector was missing.
pub struct KbSignals<'a> {
    kb: &'a KnowledgeBase,
    embeddings: &'a EmbeddingStore,
    term_vectors: Vec<Option<Vec<f32>>>,
    missing: AtomicUsize,
}

impl<'a> KbSignals<'a> {
    pub fn new(kb: &'a KnowledgeBase, embeddings: &'a EmbeddingStore, terms: &[String]) -> Self {
        Self {
            kb,
            embeddings,
            term_vectors: terms.iter().map(|t| embeddings.phrase_vector(t)).collect(),
            missing: AtomicUsize::new(0),
        }
    }

    pub fn missing_lookups(&self) -> usize {
        self.missing.load(Ordering::Relaxed)
    }

    fn item_vector(&self, x: ItemId) -> Option<&[f32]> {
        let v = self
            .kb
            .items()
            .get(x.index())
            .and_then(|it| self.embeddings.vector(&it.external_id));
        if v.is_none() {
            self.missing.fetch_add(1, Ordering::Relaxed);
        }
        v
    }
}

impl SignalSource for KbSignals<'_> {
    fn item_similarity(&self, a: ItemId, b: ItemId) -> f64 {
        match (self.item_vector(a), self.item_vector(b)) {
            (Some(va), Some(vb)) => sim_vectors(va, vb),
            _ => NEUTRAL_SIMILARITY,
        }
    }

    fn connectivity(&self, a: ItemId, b: ItemId) -> f64 {
        self.kb.distance(a, b).map_or(0.0, |d| d.connectivity())
    }

    fn term_similarity(&self, x: ItemId, term_index: usize) -> f64 {
        let q = self.term_vectors.get(term_index).and_then(Option::as_deref);
        if q.is_none() {
            self.missing.fetch_add(1, Ordering::Relaxed);
        }
        match (self.item_vector(x), q) {
            (Some(vx), Some(vq)) => sim_vectors(vx, vq),
            _ => NEUTRAL_SIMILARITY,
        }
    }
}

/// Pairwise similarity and connectivity between all candidates of different
/// lists, computed once and read by index.
pub struct PairwiseCache {
    offsets: Vec<usize>,
    n: usize,
    sim: Vec<f64>,
    conn: Vec<f64>,
}

impl PairwiseCache {
    pub fn build(lists: &[CandidateList], source: &dyn SignalSource, mask: SignalMask) -> Self {
        let mut offsets = Vec::with_capacity(lists.len() + 1);
        offsets.push(0);
        for l in lists {
            offsets.push(offsets.last().unwrap() + l.len());
        }
        let n = *offsets.last().unwrap();
        let flat: Vec<(usize, ItemId)> = lists
            .iter()
            .enumerate()
            .flat_map(|(i, l)| l.entries.iter().map(move |c| (i, c.item)))
            .collect();

        let need_sim = mask.coh;
        let need_conn = mask.conn;
        let rows: Vec<(Vec<f64>, Vec<f64>)> = (0..n)
            .into_par_iter()
            .map(|g| {
                let (li, x) = flat[g];
                let mut sim = vec![0.0; n];
                let mut conn = vec![0.0; n];
                // Upper triangle only; the lower half is mirrored below.
                for h in g + 1..n {
                    let (lk, y) = flat[h];
                    if lk == li {
                        continue;
                    }
                    if need_sim {
                        sim[h] = source.item_similarity(x, y);
                    }
                    if need_conn {
                        conn[h] = source.connectivity(x, y);
                    }
                }
                (sim, conn)
            })
            .collect();

        let mut sim = vec![0.0; n * n];
        let mut conn = vec![0.0; n * n];
        for (g, (srow, crow)) in rows.into_iter().enumerate() {
            for h in g + 1..n {
                sim[g * n + h] = srow[h];
                sim[h * n + g] = srow[h];
                conn[g * n + h] = crow[h];
                conn[h * n + g] = crow[h];
            }
        }
        Self { offsets, n, sim, conn }
    }

    fn global(&self, list: usize, pos: usize) -> usize {
        self.offsets[list] + pos
    }

    fn list_len(&self, list: usize) -> usize {
        self.offsets[list + 1] - self.offsets[list]
    }

    pub fn sim(&self, list_a: usize, pos_a: usize, list_b: usize, pos_b: usize) -> f64 {
        self.sim[self.global(list_a, pos_a) * self.n + self.global(list_b, pos_b)]
    }

    pub fn conn(&self, list_a: usize, pos_a: usize, list_b: usize, pos_b: usize) -> f64 {
        self.conn[self.global(list_a, pos_a) * self.n + self.global(list_b, pos_b)]
    }

    /// Mean over other lists of the best pairwise value: the shared shape of
    /// coherence and connectivity.
    fn mean_of_best(&self, matrix: &[f64], list: usize, pos: usize) -> f64 {
        let m = self.offsets.len() - 1;
        if m < 2 {
            return 0.0;
        }
        let row = &matrix[self.global(list, pos) * self.n..][..self.n];
        let mut total = 0.0;
        for k in (0..m).filter(|&k| k != list) {
            let best = row[self.offsets[k]..self.offsets[k + 1]]
                .iter()
                .copied()
                .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))))
                .unwrap_or(0.0);
            total += best;
        }
        total / (m - 1) as f64
    }

    pub fn coherence(&self, list: usize, pos: usize) -> f64 {
        self.mean_of_best(&self.sim, list, pos)
    }

    pub fn connectivity(&self, list: usize, pos: usize) -> f64 {
        self.mean_of_best(&self.conn, list, pos)
    }
}

/// Mean similarity between `x` and every question term other than its own.
pub fn relatedness(source: &dyn SignalSource, x: ItemId, term_index: usize, num_terms: usize) -> f64 {
    if num_terms < 2 {
        return 0.0;
    }
    let total: f64 = (0..num_terms)
        .filter(|&k| k != term_index)
        .map(|k| source.term_similarity(x, k))
        .sum();
    total / (num_terms - 1) as f64
}

/// Reciprocal lexical rank.
pub fn term_match(rank: usize) -> f64 {
    1.0 / rank as f64
}

/// Computes all four signals for every candidate of every list.
pub fn score_lists(
    lists: &[CandidateList],
    source: &dyn SignalSource,
    weights: &SignalWeights,
    mask: SignalMask,
) -> Vec<Vec<ScoredCandidate>> {
    let cache = PairwiseCache::build(lists, source, mask);
    let m = lists.len();
    lists
        .par_iter()
        .enumerate()
        .map(|(i, list)| {
            debug_assert_eq!(cache.list_len(i), list.len());
            list.entries
                .iter()
                .enumerate()
                .map(|(j, c)| {
                    let signals = Signals {
                        coh: if mask.coh { cache.coherence(i, j) } else { 0.0 },
                        conn: if mask.conn { cache.connectivity(i, j) } else { 0.0 },
                        rel: if mask.rel { relatedness(source, c.item, i, m) } else { 0.0 },
                        term_match: if mask.term_match { term_match(c.rank) } else { 0.0 },
                    };
                    ScoredCandidate::new(c.item, i, signals, weights)
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexical::Candidate;

    struct Table {
        sim: fn(ItemId, ItemId) -> f64,
        conn: fn(ItemId, ItemId) -> f64,
        term: fn(ItemId, usize) -> f64,
    }

    impl SignalSource for Table {
        fn item_similarity(&self, a: ItemId, b: ItemId) -> f64 {
            (self.sim)(a, b)
        }
        fn connectivity(&self, a: ItemId, b: ItemId) -> f64 {
            (self.conn)(a, b)
        }
        fn term_similarity(&self, x: ItemId, k: usize) -> f64 {
            (self.term)(x, k)
        }
    }

    fn list(term: &str, items: &[u32]) -> CandidateList {
        CandidateList {
            term: term.into(),
            entries: items
                .iter()
                .enumerate()
                .map(|(i, &x)| Candidate {
                    item: ItemId(x),
                    lexical_score: 10.0 - i as f64,
                    rank: i + 1,
                })
                .collect(),
        }
    }

    fn neutral() -> Table {
        Table {
            sim: |_, _| 0.5,
            conn: |_, _| 0.0,
            term: |_, _| 0.5,
        }
    }

    #[test]
    fn coherence_takes_best_match_in_other_list() {
        let src = Table {
            sim: |a, b| {
                let (lo, hi) = if a < b { (a.0, b.0) } else { (b.0, a.0) };
                match (lo, hi) {
                    (0, 10) => 0.3,
                    (0, 11) => 0.9,
                    (0, 12) => 0.4,
                    _ => 0.0,
                }
            },
            ..neutral()
        };
        let lists = [list("a", &[0]), list("b", &[10, 11, 12])];
        let cache = PairwiseCache::build(&lists, &src, SignalMask::ALL);
        assert_eq!(cache.coherence(0, 0), 0.9);
    }

    #[test]
    fn neutral_similarities_give_half() {
        let lists = [list("a", &[0, 1]), list("b", &[2]), list("c", &[3, 4])];
        let scored = score_lists(&lists, &neutral(), &SignalWeights::default(), SignalMask::ALL);
        for c in scored.iter().flatten() {
            assert_eq!(c.signals.coh, 0.5);
            assert_eq!(c.signals.rel, 0.5);
            assert_eq!(c.signals.conn, 0.0);
        }
    }

    #[test]
    fn connectivity_mixed_hops() {
        // 0 is one hop from 10 and two hops from 21.
        let src = Table {
            conn: |a, b| match (a.0.min(b.0), a.0.max(b.0)) {
                (0, 10) => 1.0,
                (0, 21) => 0.5,
                _ => 0.0,
            },
            ..neutral()
        };
        let lists = [list("a", &[0]), list("b", &[10, 11]), list("c", &[20, 21])];
        let cache = PairwiseCache::build(&lists, &src, SignalMask::ALL);
        assert_eq!(cache.connectivity(0, 0), 0.75);
        assert_eq!(cache.connectivity(1, 1), 0.0);
    }

    #[test]
    fn single_term_has_no_context_signals() {
        let lists = [list("a", &[0, 1, 2, 3])];
        let scored = score_lists(&lists, &neutral(), &SignalWeights::default(), SignalMask::ALL);
        let s = &scored[0];
        assert!(s.iter().all(|c| c.signals.coh == 0.0 && c.signals.conn == 0.0 && c.signals.rel == 0.0));
        assert_eq!(s[3].signals.term_match, 0.25);
        let aggs: Vec<f64> = s.iter().map(|c| c.agg).collect();
        assert!(aggs.windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn relatedness_excludes_own_term() {
        let src = Table {
            term: |_, k| if k == 1 { 0.8 } else { 0.0 },
            ..neutral()
        };
        assert_eq!(relatedness(&src, ItemId(0), 0, 2), 0.8);
        assert_eq!(relatedness(&src, ItemId(0), 1, 2), 0.0);
        assert_eq!(relatedness(&src, ItemId(0), 0, 1), 0.0);
    }

    #[test]
    fn term_match_values() {
        assert_eq!(term_match(1), 1.0);
        assert_eq!(term_match(4), 0.25);
        assert_eq!(term_match(20), 0.05);
    }

    #[test]
    fn aggregate_anchor_values() {
        let w = SignalWeights::default();
        let one = Signals {
            coh: 1.0,
            conn: 1.0,
            rel: 1.0,
            term_match: 1.0,
        };
        assert!((w.aggregate(&one) - 1.0).abs() < 1e-15);
        assert_eq!(w.aggregate(&Signals::default()), 0.0);
        let s = Signals {
            coh: 0.5,
            conn: 1.0,
            rel: 0.5,
            term_match: 0.25,
        };
        assert!((w.aggregate(&s) - 0.55).abs() < 1e-15);
    }

    #[test]
    fn weight_validation_and_ablation() {
        assert!(SignalWeights::new(0.5, 0.5, 0.1, 0.0).is_err());
        assert!(SignalWeights::new(-0.1, 0.5, 0.2, 0.4).is_err());
        let w = SignalWeights::default()
            .ablate(SignalMask {
                coh: false,
                conn: false,
                ..SignalMask::ALL
            })
            .unwrap();
        assert_eq!(w.coh, 0.0);
        assert_eq!(w.conn, 0.0);
        assert!((w.rel - 1.0 / 3.0).abs() < 1e-12);
        assert!((w.term_match - 2.0 / 3.0).abs() < 1e-12);
        let none = SignalMask {
            coh: false,
            conn: false,
            rel: false,
            term_match: false,
        };
        assert!(SignalWeights::default().ablate(none).is_err());
    }

    #[test]
    fn masked_signals_are_zero() {
        let lists = [list("a", &[0, 1]), list("b", &[2])];
        let src = Table {
            sim: |_, _| 0.9,
            conn: |_, _| 1.0,
            term: |_, _| 0.7,
        };
        let mask = SignalMask {
            coh: false,
            rel: false,
            ..SignalMask::ALL
        };
        let scored = score_lists(&lists, &src, &SignalWeights::default(), mask);
        for c in scored.iter().flatten() {
            assert_eq!((c.signals.coh, c.signals.rel), (0.0, 0.0));
            assert_eq!(c.signals.conn, 1.0);
        }
    }
}
