//! Brute-force reference implementations shared by the integration tests and
//! the acceptance suite.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet, VecDeque};

use kbspace::embedding::EmbeddingStore;
use kbspace::kb::{Fact, FactId, ItemId};
use kbspace::lexical::{Candidate, CandidateList};
use kbspace::scoring::{ScoredCandidate, SignalWeights, Signals};
use kbspace::synth::{self, SyntheticSpec};
use kbspace::{Distance, KnowledgeBase};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Small KB with random shape: from very sparse to densely connected.
pub fn random_kb(seed: u64, max_facts: usize) -> KnowledgeBase {
    let mut rng = StdRng::seed_from_u64(seed);
    let num_facts = rng.random_range(1..=max_facts);
    let num_entities = rng.random_range(2..=(2 * num_facts).clamp(2, 3000));
    let spec = SyntheticSpec {
        num_facts,
        num_entities,
        num_predicates: rng.random_range(1..=12),
        qualifier_rate: rng.random_range(0.0..0.6),
        seed: rng.random(),
    };
    synth::generate(&spec).expect("synthetic kb")
}

fn constituents(f: &Fact) -> Vec<ItemId> {
    let mut v = vec![f.subject, f.predicate, f.object];
    for &(p, o) in &f.qualifiers {
        v.push(p);
        v.push(o);
    }
    v
}

pub fn naive_nf(kb: &KnowledgeBase, x: ItemId) -> Vec<FactId> {
    kb.facts()
        .iter()
        .filter(|f| constituents(f).contains(&x))
        .map(|f| f.id)
        .collect()
}

pub fn naive_ni(kb: &KnowledgeBase, x: ItemId) -> Vec<ItemId> {
    let set: BTreeSet<ItemId> = kb
        .facts()
        .iter()
        .map(constituents)
        .filter(|c| c.contains(&x))
        .flatten()
        .filter(|&y| y != x)
        .collect();
    set.into_iter().collect()
}

/// (subject, object, qualifier-object, total) counts by full scan.
pub fn naive_frequency(kb: &KnowledgeBase, x: ItemId) -> (u64, u64, u64, u64) {
    let (mut s, mut o, mut q, mut t) = (0, 0, 0, 0);
    for f in kb.facts() {
        if !constituents(f).contains(&x) {
            continue;
        }
        t += 1;
        s += u64::from(f.subject == x);
        o += u64::from(f.object == x);
        q += u64::from(f.qualifiers.iter().any(|&(_, qo)| qo == x));
    }
    (s, o, q, t)
}

/// Item co-occurrence graph: an edge joins any two items of one fact.
pub struct CoGraph {
    adj: Vec<HashSet<usize>>,
}

impl CoGraph {
    pub fn new(kb: &KnowledgeBase) -> Self {
        let mut adj = vec![HashSet::new(); kb.num_items()];
        for f in kb.facts() {
            let c = constituents(f);
            for &a in &c {
                for &b in &c {
                    if a != b {
                        adj[a.index()].insert(b.index());
                    }
                }
            }
        }
        Self { adj }
    }

    /// Shortest path length by BFS, explored up to `limit` hops.
    pub fn hops(&self, a: ItemId, b: ItemId, limit: usize) -> Option<usize> {
        let (a, b) = (a.index(), b.index());
        if a == b {
            return Some(0);
        }
        let mut seen = HashSet::from([a]);
        let mut queue = VecDeque::from([(a, 0usize)]);
        while let Some((x, d)) = queue.pop_front() {
            if d == limit {
                continue;
            }
            for &y in &self.adj[x] {
                if y == b {
                    return Some(d + 1);
                }
                if seen.insert(y) {
                    queue.push_back((y, d + 1));
                }
            }
        }
        None
    }

    pub fn distance(&self, a: ItemId, b: ItemId) -> Distance {
        match self.hops(a, b, 2) {
            Some(0) | Some(1) => Distance::Hop1,
            Some(2) => Distance::Hop2,
            _ => Distance::Far,
        }
    }

    pub fn connectivity(&self, a: ItemId, b: ItemId) -> f64 {
        match self.distance(a, b) {
            Distance::Hop1 => 1.0,
            Distance::Hop2 => 0.5,
            Distance::Far => 0.0,
        }
    }

    /// A random item reached from `x` by up to `steps` random edges.
    pub fn walk(&self, x: ItemId, steps: usize, rng: &mut StdRng) -> ItemId {
        let mut cur = x.index();
        for _ in 0..steps {
            let n = &self.adj[cur];
            if n.is_empty() {
                break;
            }
            let mut v: Vec<usize> = n.iter().copied().collect();
            v.sort_unstable();
            cur = v[rng.random_range(0..v.len())];
        }
        ItemId(cur as u32)
    }
}

pub fn aggregate(w: &SignalWeights, s: &Signals) -> f64 {
    w.coh * s.coh + w.conn * s.conn + w.rel * s.rel + w.term_match * s.term_match
}

/// Full scan: every candidate scored, sorted by (score desc, code asc), truncated.
pub fn full_scan_topk(cands: &[ScoredCandidate], w: &SignalWeights, k: usize) -> Vec<(ItemId, f64)> {
    let mut all: Vec<(ItemId, f64)> = cands.iter().map(|c| (c.item, aggregate(w, &c.signals))).collect();
    all.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    all.truncate(k);
    all
}

/// BM25 with k1 = 1.5 and b = 0.75, distinct query tokens, straight from
/// the formula.
pub fn bm25_scores(docs: &[Vec<String>], query: &[String]) -> Vec<f64> {
    let n = docs.len() as f64;
    let avg = docs.iter().map(Vec::len).sum::<usize>() as f64 / n;
    let mut distinct: Vec<&String> = Vec::new();
    for q in query {
        if !distinct.contains(&q) {
            distinct.push(q);
        }
    }
    let idf: Vec<f64> = distinct
        .iter()
        .map(|q| {
            let df = docs.iter().filter(|d| d.contains(q)).count() as f64;
            (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
        })
        .collect();
    docs.iter()
        .map(|d| {
            let len = d.len() as f64;
            distinct
                .iter()
                .zip(&idf)
                .map(|(q, idf)| {
                    let tf = d.iter().filter(|t| t == q).count() as f64;
                    if tf == 0.0 {
                        return 0.0;
                    }
                    idf * tf * 2.5 / (tf + 1.5 * (0.25 + 0.75 * len / avg))
                })
                .sum()
        })
        .collect()
}

pub fn candidate_list(term: &str, items: &[ItemId]) -> CandidateList {
    CandidateList {
        term: term.into(),
        entries: items
            .iter()
            .enumerate()
            .map(|(i, &item)| Candidate {
                item,
                lexical_score: (items.len() - i) as f64,
                rank: i + 1,
            })
            .collect(),
    }
}

/// Random vectors for roughly 80% of the items and of the words `w0..w9`.
pub fn random_embeddings(kb: &KnowledgeBase, rng: &mut StdRng, dim: usize) -> EmbeddingStore {
    let mut vectors: Vec<(String, Vec<f32>)> = Vec::new();
    let random_vec = |rng: &mut StdRng| -> Vec<f32> { (0..dim).map(|_| rng.random_range(-1.0f32..1.0)).collect() };
    for it in kb.items() {
        if rng.random_bool(0.8) {
            let v = random_vec(rng);
            vectors.push((it.external_id.clone(), v));
        }
    }
    for w in 0..10 {
        if rng.random_bool(0.8) {
            let v = random_vec(rng);
            vectors.push((format!("w{w}"), v));
        }
    }
    EmbeddingStore::from_vectors(dim, vectors).expect("embeddings")
}

/// Rescaled cosine computed from scratch; 0.5 when a vector is missing or zero.
pub fn oracle_sim(a: Option<&[f32]>, b: Option<&[f32]>) -> f64 {
    let (Some(a), Some(b)) = (a, b) else {
        return 0.5;
    };
    let dot: f64 = a.iter().zip(b).map(|(&x, &y)| x as f64 * y as f64).sum();
    let na: f64 = a.iter().map(|&x| x as f64 * x as f64).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|&x| x as f64 * x as f64).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.5;
    }
    ((dot / (na * nb)).clamp(-1.0, 1.0) + 1.0) / 2.0
}

/// The four signals of every candidate by nested loops over the raw inputs.
/// Terms are single words looked up directly in the embedding store.
pub fn oracle_signals(
    kb: &KnowledgeBase,
    emb: &EmbeddingStore,
    graph: &CoGraph,
    lists: &[CandidateList],
) -> Vec<Vec<Signals>> {
    let m = lists.len();
    let vec_of = |x: ItemId| emb.vector(&kb.items()[x.index()].external_id);
    let mut out = Vec::new();
    for (i, li) in lists.iter().enumerate() {
        let mut row = Vec::new();
        for c in &li.entries {
            let (mut coh, mut conn, mut rel) = (0.0, 0.0, 0.0);
            if m > 1 {
                for (k, lk) in lists.iter().enumerate() {
                    if k == i {
                        continue;
                    }
                    let mut best_sim: Option<f64> = None;
                    let mut best_conn: Option<f64> = None;
                    for y in &lk.entries {
                        let s = oracle_sim(vec_of(c.item), vec_of(y.item));
                        let cn = graph.connectivity(c.item, y.item);
                        best_sim = Some(best_sim.map_or(s, |b| b.max(s)));
                        best_conn = Some(best_conn.map_or(cn, |b| b.max(cn)));
                    }
                    coh += best_sim.unwrap_or(0.0);
                    conn += best_conn.unwrap_or(0.0);
                    rel += oracle_sim(vec_of(c.item), emb.vector(&lk.term));
                }
                coh /= (m - 1) as f64;
                conn /= (m - 1) as f64;
                rel /= (m - 1) as f64;
            }
            row.push(Signals {
                coh,
                conn,
                rel,
                term_match: 1.0 / c.rank as f64,
            });
        }
        out.push(row);
    }
    out
}

/// Random candidate lists over the items of `kb`; lists may be empty or overlap.
pub fn random_lists(kb: &KnowledgeBase, rng: &mut StdRng, max_terms: usize, max_depth: usize) -> Vec<CandidateList> {
    let m = rng.random_range(1..=max_terms);
    (0..m)
        .map(|_| {
            let len = rng.random_range(0..=max_depth.min(kb.num_items()));
            let mut seen = HashSet::new();
            let mut items = Vec::new();
            while items.len() < len {
                let x = ItemId(rng.random_range(0..kb.num_items()) as u32);
                if seen.insert(x) {
                    items.push(x);
                }
            }
            candidate_list(&format!("w{}", rng.random_range(0..12)), &items)
        })
        .collect()
}
