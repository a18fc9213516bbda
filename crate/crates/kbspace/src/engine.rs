//! End-to-end pipeline: question → candidate lists → signals → threshold
//! top-k per term → pruned fact union → optional BM25 filter.

use std::collections::BTreeSet;
use std::path::Path;
use std::time::Instant;

use log::debug;
use serde::{Deserialize, Serialize};

use crate::auto::{auto_k, KSetting, PruneSetting, DEFAULT_K_MAX};
use crate::bundle;
use crate::embedding::EmbeddingStore;
use crate::error::{Error, Result};
use crate::kb::{FactId, ItemId, ItemKind};
use crate::lexical::{CandidateList, LexicalIndex};
use crate::question::Question;
use crate::scoring::{score_lists, KbSignals, ScoredCandidate, SignalMask, SignalSource, SignalWeights};
use crate::space::{bm25_filter, prune_facts, SearchSpace, SpaceStats, StageTimings, TermResult};
use crate::store::KnowledgeBase;
use crate::text::Stopwords;
use crate::topk::threshold_topk;

pub const DEFAULT_DEPTH: usize = 20;

/// Per-query parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QueryConfig {
    pub weights: SignalWeights,
    /// Candidate list depth `d`.
    pub depth: usize,
    pub k: KSetting,
    pub k_max: usize,
    pub p: PruneSetting,
    pub bm25_top_n: Option<usize>,
    /// Signals switched off for ablation; their weight is redistributed.
    pub ablation: SignalMask,
}

impl Default for QueryConfig {
    fn default() -> Self {
        Self {
            weights: SignalWeights::default(),
            depth: DEFAULT_DEPTH,
            k: KSetting::Auto,
            k_max: DEFAULT_K_MAX,
            p: PruneSetting::Fixed(1000),
            bm25_top_n: None,
            ablation: SignalMask::ALL,
        }
    }
}

impl QueryConfig {
    pub fn validate(&self) -> Result<()> {
        self.weights.validate()?;
        if self.depth < 1 {
            return Err(Error::InvalidArgument("depth d must be at least 1".into()));
        }
        if self.k_max < 1 {
            return Err(Error::InvalidArgument("k_max must be at least 1".into()));
        }
        if let KSetting::Fixed(0) = self.k {
            return Err(Error::InvalidArgument("k must be at least 1".into()));
        }
        if self.bm25_top_n == Some(0) {
            return Err(Error::InvalidArgument("bm25 top-n must be at least 1".into()));
        }
        self.effective_weights().map(|_| ())
    }

    /// Weights after applying the ablation switches.
    pub fn effective_weights(&self) -> Result<SignalWeights> {
        if self.ablation == SignalMask::ALL {
            Ok(self.weights)
        } else {
            self.weights.ablate(self.ablation)
        }
    }
}

/// Per-term top-k disambiguation over already-built candidate lists.
///
/// `mask` selects which signals are computed; `k_for` gives the `k` of each
/// term index.
pub fn disambiguate(
    lists: &[CandidateList],
    source: &dyn SignalSource,
    weights: &SignalWeights,
    mask: SignalMask,
    k_for: impl Fn(usize) -> usize,
) -> Vec<(Vec<ScoredCandidate>, usize)> {
    let scored = score_lists(lists, source, weights, mask);
    scored
        .iter()
        .enumerate()
        .map(|(i, cands)| {
            let r = threshold_topk(cands, weights, k_for(i));
            (r.items, r.sorted_accesses)
        })
        .collect()
}

/// Immutable stores plus segmentation resources. Safe to share across threads.
pub struct Engine {
    kb: KnowledgeBase,
    lexical: LexicalIndex,
    embeddings: EmbeddingStore,
    stopwords: Stopwords,
}

impl Engine {
    pub fn new(kb: KnowledgeBase, embeddings: EmbeddingStore, stopwords: Stopwords) -> Result<Self> {
        let lexical = LexicalIndex::build(kb.items())?;
        Ok(Self {
            kb,
            lexical,
            embeddings,
            stopwords,
        })
    }

    /// Loads a bundle directory and an embedding file.
    pub fn open(bundle_dir: &Path, embeddings: &Path, stopwords: Option<&Path>) -> Result<Self> {
        let kb = bundle::load(bundle_dir)?;
        let embeddings = EmbeddingStore::load(embeddings)?;
        let stopwords = match stopwords {
            Some(p) => Stopwords::from_file(p)?,
            None => Stopwords::default(),
        };
        Self::new(kb, embeddings, stopwords)
    }

    pub fn kb(&self) -> &KnowledgeBase {
        &self.kb
    }

    pub fn lexical(&self) -> &LexicalIndex {
        &self.lexical
    }

    pub fn embeddings(&self) -> &EmbeddingStore {
        &self.embeddings
    }

    pub fn stopwords(&self) -> &Stopwords {
        &self.stopwords
    }

    pub fn segment(&self, question: &str) -> Result<Question> {
        Question::segment(question, &self.lexical, &self.stopwords)
    }

    pub fn candidate_lists(&self, question: &Question, depth: usize) -> Result<Vec<CandidateList>> {
        question.terms.iter().map(|t| self.lexical.candidates(t, depth)).collect()
    }

    /// Segments `question` (or uses `terms` verbatim) and builds its search space.
    pub fn search_space(&self, question: &str, terms: Option<&[String]>, cfg: &QueryConfig) -> Result<SearchSpace> {
        cfg.validate()?;
        let t = Instant::now();
        let question = match terms {
            Some(terms) => Question::from_terms(question, terms.iter().cloned())?,
            None => self.segment(question)?,
        };
        let segment = t.elapsed();
        let mut space = self.search_space_for(question, cfg)?;
        space.stats.timings.segment = segment;
        Ok(space)
    }

    pub fn search_space_for(&self, question: Question, cfg: &QueryConfig) -> Result<SearchSpace> {
        cfg.validate()?;
        let mut timings = StageTimings::default();
        let weights = cfg.effective_weights()?;
        let mask = weights.active_mask();

        let t = Instant::now();
        let lists = self.candidate_lists(&question, cfg.depth)?;
        let ks = lists
            .iter()
            .map(|l| match cfg.k {
                KSetting::Fixed(k) => Ok(k),
                KSetting::Auto if l.is_empty() => Ok(1),
                KSetting::Auto => auto_k(&self.kb, l, cfg.depth, cfg.k_max),
            })
            .collect::<Result<Vec<usize>>>()?;
        timings.candidates = t.elapsed();

        let t = Instant::now();
        let source = KbSignals::new(&self.kb, &self.embeddings, &question.terms);
        let scored = score_lists(&lists, &source, &weights, mask);
        timings.signals = t.elapsed();

        let t = Instant::now();
        let per_term: Vec<TermResult> = scored
            .iter()
            .zip(&lists)
            .enumerate()
            .map(|(i, (cands, list))| {
                let r = threshold_topk(cands, &weights, ks[i]);
                TermResult {
                    term_index: i,
                    term: list.term.clone(),
                    k_used: ks[i],
                    p_used: cfg.p.resolve(ks[i]),
                    num_candidates: list.len(),
                    items: r.items,
                    sorted_accesses: r.sorted_accesses,
                }
            })
            .collect();
        timings.topk = t.elapsed();

        let t = Instant::now();
        let mut facts: BTreeSet<FactId> = BTreeSet::new();
        let mut pruned_predicates = BTreeSet::new();
        for term in &per_term {
            for c in &term.items {
                let kept = prune_facts(&self.kb, c.item, term.p_used)?;
                if kept.is_empty()
                    && self.kb.kind(c.item) == Some(ItemKind::Predicate)
                    && !self.kb.neighborhood(c.item)?.is_empty()
                {
                    debug!("predicate {} exceeds p={:?}, facts dropped", self.kb.label(c.item), term.p_used);
                    pruned_predicates.insert(c.item);
                }
                facts.extend(kept);
            }
        }
        let mut space = SearchSpace {
            question,
            per_term,
            facts: Vec::new(),
            items: Vec::new(),
            stats: SpaceStats {
                missing_embeddings: source.missing_lookups(),
                pruned_predicates: pruned_predicates.into_iter().collect::<Vec<ItemId>>(),
                ..Default::default()
            },
        };
        space.set_facts(&self.kb, facts.into_iter().collect());
        timings.facts = t.elapsed();

        if let Some(n) = cfg.bm25_top_n {
            let t = Instant::now();
            space = bm25_filter(&self.kb, &space, &self.stopwords, n);
            timings.filter = t.elapsed();
        }
        space.stats.timings = timings;
        Ok(space)
    }
}
