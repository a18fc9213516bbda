//! BM25 inverted index over item documents (label, aliases, description) and
//! the depth-`d` candidate lists fed to disambiguation.

use std::collections::{HashMap, HashSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kb::{ItemId, KbItem};
use crate::text::tokenize;

pub const BM25_K1: f64 = 1.5;
pub const BM25_B: f64 = 0.75;

/// Generic BM25 index over documents keyed by `K`.
#[derive(Debug, Clone)]
pub struct Bm25Index<K> {
    postings: HashMap<String, Vec<(K, u32)>>,
    doc_len: HashMap<K, u32>,
    num_docs: usize,
    avg_doc_len: f64,
}

impl<K> Bm25Index<K>
where
    K: Copy + Ord + std::hash::Hash,
{
    /// Documents must be supplied in ascending key order with unique keys.
    pub fn build(docs: impl IntoIterator<Item = (K, Vec<String>)>) -> Result<Self> {
        let mut postings: HashMap<String, Vec<(K, u32)>> = HashMap::new();
        let mut doc_len = HashMap::new();
        let mut total_len = 0usize;
        for (key, tokens) in docs {
            total_len += tokens.len();
            doc_len.insert(key, tokens.len() as u32);
            let mut tf: HashMap<&str, u32> = HashMap::new();
            for t in &tokens {
                *tf.entry(t.as_str()).or_default() += 1;
            }
            for (t, n) in tf {
                postings.entry(t.to_string()).or_default().push((key, n));
            }
        }
        let num_docs = doc_len.len();
        if num_docs == 0 || total_len == 0 {
            return Err(Error::EmptyCorpus);
        }
        for list in postings.values_mut() {
            list.sort_unstable_by_key(|&(k, _)| k);
        }
        Ok(Self {
            postings,
            doc_len,
            num_docs,
            avg_doc_len: total_len as f64 / num_docs as f64,
        })
    }

    pub fn num_docs(&self) -> usize {
        self.num_docs
    }

    pub fn avg_doc_len(&self) -> f64 {
        self.avg_doc_len
    }

    pub fn document_frequency(&self, token: &str) -> usize {
        self.postings.get(token).map_or(0, Vec::len)
    }

    pub fn postings(&self, token: &str) -> &[(K, u32)] {
        self.postings.get(token).map_or(&[], Vec::as_slice)
    }

    fn idf(&self, df: usize) -> f64 {
        let n = self.num_docs as f64;
        let df = df as f64;
        (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
    }

    /// Scores every document matching at least one query token. Repeated query
    /// tokens count once; contributions are summed in query-token order.
    pub fn score_all(&self, query: &[String]) -> Vec<(K, f64)> {
        let mut seen = HashSet::new();
        let mut scores: HashMap<K, f64> = HashMap::new();
        for token in query {
            if !seen.insert(token.as_str()) {
                continue;
            }
            let list = self.postings(token);
            if list.is_empty() {
                continue;
            }
            let idf = self.idf(list.len());
            for &(key, tf) in list {
                let tf = f64::from(tf);
                let len = f64::from(self.doc_len[&key]);
                let norm = 1.0 - BM25_B + BM25_B * len / self.avg_doc_len;
                *scores.entry(key).or_insert(0.0) += idf * tf * (BM25_K1 + 1.0) / (tf + BM25_K1 * norm);
            }
        }
        let mut out: Vec<(K, f64)> = scores.into_iter().collect();
        out.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        out
    }

    /// Top-`n` documents by score, ties broken by ascending key.
    pub fn top(&self, query: &[String], n: usize) -> Vec<(K, f64)> {
        let mut all = self.score_all(query);
        all.truncate(n);
        all
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Candidate {
    pub item: ItemId,
    pub lexical_score: f64,
    /// 1-based position in the list.
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateList {
    pub term: String,
    pub entries: Vec<Candidate>,
}

impl CandidateList {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn rank_of(&self, x: ItemId) -> Option<usize> {
        self.entries.iter().find(|c| c.item == x).map(|c| c.rank)
    }
}

/// Tokens of an item document: label, then aliases, then description.
pub fn item_document(item: &KbItem) -> Vec<String> {
    let mut tokens = tokenize(&item.label);
    for alias in &item.aliases {
        tokens.extend(tokenize(alias));
    }
    tokens.extend(tokenize(&item.description));
    tokens
}

#[derive(Debug, Clone)]
pub struct LexicalIndex {
    bm25: Bm25Index<ItemId>,
    phrases: HashSet<String>,
    max_phrase_len: usize,
}

impl LexicalIndex {
    pub fn build(items: &[KbItem]) -> Result<Self> {
        let bm25 = Bm25Index::build(items.iter().map(|it| (it.code, item_document(it))))?;
        let mut phrases = HashSet::new();
        let mut max_phrase_len = 1;
        for it in items {
            for name in std::iter::once(&it.label).chain(&it.aliases) {
                let tokens = tokenize(name);
                if tokens.len() >= 2 {
                    max_phrase_len = max_phrase_len.max(tokens.len());
                    phrases.insert(tokens.join(" "));
                }
            }
        }
        Ok(Self {
            bm25,
            phrases,
            max_phrase_len,
        })
    }

    pub fn bm25(&self) -> &Bm25Index<ItemId> {
        &self.bm25
    }

    /// Whether `tokens` spell out a multi-word label or alias.
    pub fn is_phrase(&self, tokens: &[String]) -> bool {
        tokens.len() >= 2 && tokens.len() <= self.max_phrase_len && self.phrases.contains(&tokens.join(" "))
    }

    pub fn max_phrase_len(&self) -> usize {
        self.max_phrase_len
    }

    /// Top-`depth` items for a question term. Unknown terms give an empty list.
    pub fn candidates(&self, term: &str, depth: usize) -> Result<CandidateList> {
        if depth < 1 {
            return Err(Error::InvalidArgument("candidate depth must be at least 1".into()));
        }
        let query = tokenize(term);
        let entries = self
            .bm25
            .top(&query, depth)
            .into_iter()
            .enumerate()
            .map(|(i, (item, lexical_score))| Candidate {
                item,
                lexical_score,
                rank: i + 1,
            })
            .collect();
        Ok(CandidateList {
            term: term.to_string(),
            entries,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::ItemKind;

    fn item(code: u32, label: &str, aliases: &[&str], description: &str) -> KbItem {
        KbItem {
            code: ItemId(code),
            external_id: format!("Q{code}"),
            label: label.into(),
            aliases: aliases.iter().map(|s| s.to_string()).collect(),
            description: description.into(),
            kind: ItemKind::Entity,
        }
    }

    #[test]
    fn single_document() {
        let idx = LexicalIndex::build(&[item(0, "Luzhniki Stadium", &[], "")]).unwrap();
        let l = idx.candidates("stadium", 5).unwrap();
        assert_eq!(l.entries.len(), 1);
        assert_eq!(l.entries[0].item, ItemId(0));
        assert_eq!(l.entries[0].rank, 1);
        assert!(idx.candidates("moscow", 5).unwrap().is_empty());
        assert!(idx.bm25().postings("moscow").is_empty());
    }

    #[test]
    fn depth_zero_is_rejected() {
        let idx = LexicalIndex::build(&[item(0, "x", &[], "")]).unwrap();
        assert!(matches!(idx.candidates("x", 0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn empty_corpus_is_rejected() {
        assert!(matches!(LexicalIndex::build(&[]), Err(Error::EmptyCorpus)));
    }

    #[test]
    fn document_frequencies_match_hand_counts() {
        let items = [
            item(0, "Croatia", &["Republic of Croatia"], "country in Europe"),
            item(1, "Croatia national football team", &[], "men's national association football team"),
            item(2, "589 Croatia", &[], "asteroid"),
            item(3, "France", &[], "country in Europe"),
        ];
        let idx = LexicalIndex::build(&items).unwrap();
        assert_eq!(idx.bm25().document_frequency("croatia"), 3);
        assert_eq!(idx.bm25().document_frequency("europe"), 2);
        assert_eq!(idx.bm25().document_frequency("football"), 1);
        assert_eq!(idx.bm25().document_frequency("team"), 1);
        assert_eq!(idx.bm25().num_docs(), 4);
        // 7 + 9 + 3 + 4 tokens
        assert!((idx.bm25().avg_doc_len() - 23.0 / 4.0).abs() < 1e-12);
    }

    #[test]
    fn stronger_match_ranks_first_and_depth_one_is_argmax() {
        let items = [
            item(0, "Croatia national football team", &[], "national association football team representing Croatia"),
            item(1, "Croatia", &["Republic of Croatia", "Hrvatska"], "country in Europe"),
        ];
        let idx = LexicalIndex::build(&items).unwrap();
        let l = idx.candidates("Croatia", 20).unwrap();
        assert_eq!(l.entries[0].item, ItemId(1));
        assert_eq!(l.rank_of(ItemId(0)), Some(2));
        let top1 = idx.candidates("Croatia", 1).unwrap();
        assert_eq!(top1.entries, l.entries[..1]);
    }

    #[test]
    fn phrase_lexicon() {
        let idx = LexicalIndex::build(&[item(0, "2018 FIFA World Cup Final", &["2018 final"], "")]).unwrap();
        let toks = |s: &str| tokenize(s);
        assert!(idx.is_phrase(&toks("2018 final")));
        assert!(idx.is_phrase(&toks("2018 FIFA world cup final")));
        assert!(!idx.is_phrase(&toks("final")));
        assert!(!idx.is_phrase(&toks("world cup")));
    }
}
