//! The reduced answer search space: selected items, their pruned facts, and
//! the optional BM25 re-filtering over verbalized facts.

use std::collections::BTreeSet;
use std::time::Duration;

use serde::Serialize;

use crate::error::Result;
use crate::kb::{Fact, FactId, ItemId, ItemKind};
use crate::lexical::Bm25Index;
use crate::question::Question;
use crate::scoring::ScoredCandidate;
use crate::store::KnowledgeBase;
use crate::text::{tokenize, Stopwords};

/// Disambiguation outcome for one question term.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TermResult {
    pub term_index: usize,
    pub term: String,
    pub k_used: usize,
    /// Pruning threshold applied to this term's items; `None` = unbounded.
    pub p_used: Option<u64>,
    pub num_candidates: usize,
    pub items: Vec<ScoredCandidate>,
    pub sorted_accesses: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct StageTimings {
    pub segment: Duration,
    pub candidates: Duration,
    pub signals: Duration,
    pub topk: Duration,
    pub facts: Duration,
    pub filter: Duration,
}

impl StageTimings {
    pub fn total(&self) -> Duration {
        self.segment + self.candidates + self.signals + self.topk + self.facts + self.filter
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct SpaceStats {
    pub num_facts: usize,
    pub num_items: usize,
    pub missing_embeddings: usize,
    /// Selected predicates whose facts were dropped for exceeding `p`.
    pub pruned_predicates: Vec<ItemId>,
    pub timings: StageTimings,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpace {
    pub question: Question,
    pub per_term: Vec<TermResult>,
    /// Ascending fact ids.
    pub facts: Vec<FactId>,
    /// Entities, types and literals occurring in `facts`, ascending.
    pub items: Vec<ItemId>,
    pub stats: SpaceStats,
}

impl SearchSpace {
    /// Union of the per-term selections, ascending.
    pub fn selected_items(&self) -> Vec<ItemId> {
        let set: BTreeSet<ItemId> = self.per_term.iter().flat_map(|t| t.items.iter().map(|c| c.item)).collect();
        set.into_iter().collect()
    }

    pub fn contains_item(&self, x: ItemId) -> bool {
        self.items.binary_search(&x).is_ok()
    }

    pub(crate) fn set_facts(&mut self, kb: &KnowledgeBase, facts: Vec<FactId>) {
        self.items = answer_items(kb, &facts);
        self.facts = facts;
        self.stats.num_facts = self.facts.len();
        self.stats.num_items = self.items.len();
    }
}

/// Items of the given facts that count as answer candidates.
pub fn answer_items(kb: &KnowledgeBase, facts: &[FactId]) -> Vec<ItemId> {
    let set: BTreeSet<ItemId> = facts
        .iter()
        .filter_map(|&f| kb.fact(f))
        .flat_map(Fact::items)
        .filter(|&x| kb.kind(x).is_some_and(ItemKind::is_answer_candidate))
        .collect();
    set.into_iter().collect()
}

/// Facts of `x` admitted under threshold `p` (`None` = keep everything).
///
/// Entities, types and literals whose object plus qualifier-object count
/// exceeds `p` keep only the facts they are the subject of. Predicates
/// more frequent than `p` contribute no facts.
pub fn prune_facts(kb: &KnowledgeBase, x: ItemId, p: Option<u64>) -> Result<Vec<FactId>> {
    let nf = kb.neighborhood(x)?;
    let Some(p) = p else {
        return Ok(nf.to_vec());
    };
    let freq = kb.frequency(x)?;
    if kb.kind(x) == Some(ItemKind::Predicate) {
        return Ok(if freq.total > p { Vec::new() } else { nf.to_vec() });
    }
    if freq.object_count + freq.qualifier_object_count > p {
        Ok(kb.subject_facts(x)?.map(|f| f.id).collect())
    } else {
        Ok(nf.to_vec())
    }
}

/// Space-joined labels: subject, predicate, object, then each qualifier pair.
pub fn verbalize_fact(kb: &KnowledgeBase, f: &Fact) -> String {
    let mut out = String::new();
    for x in f.items() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(kb.label(x));
    }
    out
}

/// Query tokens of a question for fact filtering: word tokens minus stopwords.
pub fn question_query(question: &Question, stopwords: &Stopwords) -> Vec<String> {
    tokenize(&question.raw)
        .into_iter()
        .filter(|t| !stopwords.contains(t))
        .collect()
}

/// Keeps the `n` facts whose verbalizations best match the question under
/// BM25, ties broken by fact id. Leaves the space untouched when `n` covers it.
pub fn bm25_filter(kb: &KnowledgeBase, space: &SearchSpace, stopwords: &Stopwords, n: usize) -> SearchSpace {
    let mut out = space.clone();
    if n >= space.facts.len() {
        return out;
    }
    let ranked = rank_facts(kb, &space.facts, &question_query(&space.question, stopwords));
    let mut kept: Vec<FactId> = ranked.into_iter().take(n).collect();
    kept.sort_unstable();
    out.set_facts(kb, kept);
    out
}

/// All `facts` ordered by BM25 score against `query`, descending, ties and
/// unmatched facts by ascending id.
pub fn rank_facts(kb: &KnowledgeBase, facts: &[FactId], query: &[String]) -> Vec<FactId> {
    let docs = facts
        .iter()
        .filter_map(|&id| kb.fact(id))
        .map(|f| (f.id, tokenize(&verbalize_fact(kb, f))));
    let Ok(index) = Bm25Index::build(docs) else {
        return facts.to_vec();
    };
    let scored = index.score_all(query);
    let matched: BTreeSet<FactId> = scored.iter().map(|&(id, _)| id).collect();
    scored
        .into_iter()
        .map(|(id, _)| id)
        .chain(facts.iter().copied().filter(|id| !matched.contains(id)))
        .collect()
}
