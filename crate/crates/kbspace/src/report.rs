//! JSON payload shared by the CLI `query` command and the HTTP service.

use serde::Serialize;

use crate::kb::{Fact, ItemId, ItemKind};
use crate::space::SearchSpace;
use crate::store::KnowledgeBase;

#[derive(Debug, Serialize)]
pub struct ItemRef<'a> {
    pub id: &'a str,
    pub label: &'a str,
}

#[derive(Debug, Serialize)]
pub struct Disambiguation<'a> {
    pub id: &'a str,
    pub label: &'a str,
    pub kind: ItemKind,
    pub coh: f64,
    pub conn: f64,
    pub rel: f64,
    #[serde(rename = "match")]
    pub term_match: f64,
    pub agg: f64,
}

#[derive(Debug, Serialize)]
pub struct TermReport<'a> {
    pub term: &'a str,
    pub k_used: usize,
    pub p_used: Option<u64>,
    pub num_candidates: usize,
    pub items: Vec<Disambiguation<'a>>,
}

#[derive(Debug, Serialize)]
pub struct FactReport<'a> {
    pub id: u32,
    pub subject: ItemRef<'a>,
    pub predicate: ItemRef<'a>,
    pub object: ItemRef<'a>,
    pub qualifiers: Vec<[ItemRef<'a>; 2]>,
}

#[derive(Debug, Serialize)]
pub struct TimingReport {
    pub segment_ms: f64,
    pub candidates_ms: f64,
    pub signals_ms: f64,
    pub topk_ms: f64,
    pub facts_ms: f64,
    pub filter_ms: f64,
    pub total_ms: f64,
}

#[derive(Debug, Serialize)]
pub struct StatsReport<'a> {
    pub num_facts: usize,
    pub num_items: usize,
    pub missing_embeddings: usize,
    pub pruned_predicates: Vec<ItemRef<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<TimingReport>,
}

#[derive(Debug, Serialize)]
pub struct SearchSpaceReport<'a> {
    pub question: &'a str,
    pub terms: &'a [String],
    pub per_term: Vec<TermReport<'a>>,
    pub facts: Vec<FactReport<'a>>,
    pub stats: StatsReport<'a>,
}

fn item_ref(kb: &KnowledgeBase, x: ItemId) -> ItemRef<'_> {
    match kb.item(x) {
        Ok(it) => ItemRef {
            id: &it.external_id,
            label: &it.label,
        },
        Err(_) => ItemRef { id: "", label: "" },
    }
}

fn fact_report<'a>(kb: &'a KnowledgeBase, f: &Fact) -> FactReport<'a> {
    FactReport {
        id: f.id.0,
        subject: item_ref(kb, f.subject),
        predicate: item_ref(kb, f.predicate),
        object: item_ref(kb, f.object),
        qualifiers: f
            .qualifiers
            .iter()
            .map(|&(p, o)| [item_ref(kb, p), item_ref(kb, o)])
            .collect(),
    }
}

fn ms(d: std::time::Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

impl<'a> SearchSpaceReport<'a> {
    /// `with_timings = false` gives a payload that depends only on inputs.
    pub fn new(kb: &'a KnowledgeBase, space: &'a SearchSpace, with_timings: bool) -> Self {
        let t = &space.stats.timings;
        Self {
            question: &space.question.raw,
            terms: &space.question.terms,
            per_term: space
                .per_term
                .iter()
                .map(|t| TermReport {
                    term: &t.term,
                    k_used: t.k_used,
                    p_used: t.p_used,
                    num_candidates: t.num_candidates,
                    items: t
                        .items
                        .iter()
                        .map(|c| {
                            let r = item_ref(kb, c.item);
                            Disambiguation {
                                id: r.id,
                                label: r.label,
                                kind: kb.kind(c.item).unwrap_or(ItemKind::Entity),
                                coh: c.signals.coh,
                                conn: c.signals.conn,
                                rel: c.signals.rel,
                                term_match: c.signals.term_match,
                                agg: c.agg,
                            }
                        })
                        .collect(),
                })
                .collect(),
            facts: space
                .facts
                .iter()
                .filter_map(|&f| kb.fact(f))
                .map(|f| fact_report(kb, f))
                .collect(),
            stats: StatsReport {
                num_facts: space.stats.num_facts,
                num_items: space.stats.num_items,
                missing_embeddings: space.stats.missing_embeddings,
                pruned_predicates: space.stats.pruned_predicates.iter().map(|&x| item_ref(kb, x)).collect(),
                timings: with_timings.then(|| TimingReport {
                    segment_ms: ms(t.segment),
                    candidates_ms: ms(t.candidates),
                    signals_ms: ms(t.signals),
                    topk_ms: ms(t.topk),
                    facts_ms: ms(t.facts),
                    filter_ms: ms(t.filter),
                    total_ms: ms(t.total()),
                }),
            },
        }
    }

    /// Pretty-printed JSON terminated by a newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Facts of one item, as served by the neighborhood endpoint.
pub fn neighborhood_json(kb: &KnowledgeBase, x: ItemId) -> crate::Result<String> {
    #[derive(Serialize)]
    struct Payload<'a> {
        item: ItemRef<'a>,
        facts: Vec<FactReport<'a>>,
    }
    let facts = kb.neighborhood_facts(x)?.map(|f| fact_report(kb, f)).collect();
    let mut s = serde_json::to_string_pretty(&Payload {
        item: item_ref(kb, x),
        facts,
    })
    .expect("payload serializes");
    s.push('\n');
    Ok(s)
}
