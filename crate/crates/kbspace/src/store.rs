//! Read-only, memory-resident, fact-centric KB.
//!
//! Two adjacency indexes are kept in compressed-row form: `NF` maps an item to
//! the ids of all facts it occurs in, `NI` maps an item to the sorted set of
//! other items it co-occurs with in some fact. Both are built once and never
//! mutated, so a `KnowledgeBase` can be shared freely across threads.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kb::{Fact, FactId, ItemId, ItemKind, KbItem};

/// Compressed sparse rows: row `i` is `values[offsets[i]..offsets[i + 1]]`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Csr<T> {
    pub(crate) offsets: Vec<usize>,
    pub(crate) values: Vec<T>,
}

impl<T> Csr<T> {
    pub(crate) fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let mut offsets = Vec::with_capacity(rows.len() + 1);
        offsets.push(0);
        let total = rows.iter().map(Vec::len).sum();
        let mut values = Vec::with_capacity(total);
        for row in rows {
            values.extend(row);
            offsets.push(values.len());
        }
        Self { offsets, values }
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.values[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn rows(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }
}

/// KB distance category between two items.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Distance {
    Hop1,
    Hop2,
    Far,
}

impl Distance {
    /// Inverse hop distance: 1, 0.5, and 0 beyond two hops.
    pub fn connectivity(self) -> f64 {
        match self {
            Distance::Hop1 => 1.0,
            Distance::Hop2 => 0.5,
            Distance::Far => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct FrequencyProfile {
    pub subject_count: u64,
    pub object_count: u64,
    pub qualifier_object_count: u64,
    pub total: u64,
}

impl FrequencyProfile {
    pub fn of(x: ItemId, facts: impl IntoIterator<Item = impl std::borrow::Borrow<Fact>>) -> Self {
        let mut p = FrequencyProfile::default();
        for f in facts {
            let f = f.borrow();
            p.total += 1;
            p.subject_count += u64::from(f.subject == x);
            p.object_count += u64::from(f.object == x);
            p.qualifier_object_count += u64::from(f.qualifiers.iter().any(|&(_, o)| o == x));
        }
        p
    }
}

#[derive(Debug, Clone)]
pub struct KnowledgeBase {
    items: Vec<KbItem>,
    facts: Vec<Fact>,
    nf: Csr<FactId>,
    ni: Csr<ItemId>,
    frequencies: Vec<FrequencyProfile>,
    codes: HashMap<String, ItemId>,
}

impl PartialEq for KnowledgeBase {
    fn eq(&self, other: &Self) -> bool {
        self.items == other.items && self.facts == other.facts && self.nf == other.nf && self.ni == other.ni
    }
}

impl KnowledgeBase {
    /// Builds both indexes. `items` must be indexed by code and every fact
    /// constituent must be a valid code; `facts[i].id` must equal `i`.
    pub fn new(items: Vec<KbItem>, facts: Vec<Fact>) -> Result<Self> {
        let n = items.len();
        for (i, it) in items.iter().enumerate() {
            if it.code.index() != i {
                return Err(Error::CorruptIndex(format!(
                    "item {} has code {} at position {i}",
                    it.external_id, it.code.0
                )));
            }
        }
        for (i, f) in facts.iter().enumerate() {
            if f.id.index() != i {
                return Err(Error::CorruptIndex(format!("fact at position {i} has id {}", f.id.0)));
            }
            if let Some(bad) = f.items().find(|x| x.index() >= n) {
                return Err(Error::NotFound(format!("fact {i} refers to item code {}", bad.0)));
            }
        }
        let nf = build_nf(n, &facts);
        let ni = build_ni(n, &facts, &nf);
        Ok(Self::assemble(items, facts, nf, ni))
    }

    pub(crate) fn assemble(items: Vec<KbItem>, facts: Vec<Fact>, nf: Csr<FactId>, ni: Csr<ItemId>) -> Self {
        let frequencies = (0..items.len())
            .into_par_iter()
            .map(|i| FrequencyProfile::of(ItemId(i as u32), nf.row(i).iter().map(|f| &facts[f.index()])))
            .collect();
        let codes = items.iter().map(|it| (it.external_id.clone(), it.code)).collect();
        Self {
            items,
            facts,
            nf,
            ni,
            frequencies,
            codes,
        }
    }

    pub fn num_items(&self) -> usize {
        self.items.len()
    }

    pub fn num_facts(&self) -> usize {
        self.facts.len()
    }

    pub fn items(&self) -> &[KbItem] {
        &self.items
    }

    pub fn facts(&self) -> &[Fact] {
        &self.facts
    }

    pub(crate) fn nf_index(&self) -> &Csr<FactId> {
        &self.nf
    }

    pub(crate) fn ni_index(&self) -> &Csr<ItemId> {
        &self.ni
    }

    fn check(&self, x: ItemId) -> Result<usize> {
        let i = x.index();
        if i < self.items.len() {
            Ok(i)
        } else {
            Err(Error::NotFound(format!("item code {}", x.0)))
        }
    }

    pub fn item(&self, x: ItemId) -> Result<&KbItem> {
        Ok(&self.items[self.check(x)?])
    }

    pub fn label(&self, x: ItemId) -> &str {
        self.items.get(x.index()).map_or("", |i| i.label.as_str())
    }

    pub fn kind(&self, x: ItemId) -> Option<ItemKind> {
        self.items.get(x.index()).map(|i| i.kind)
    }

    pub fn lookup(&self, external_id: &str) -> Option<ItemId> {
        self.codes.get(external_id).copied()
    }

    pub fn fact(&self, id: FactId) -> Option<&Fact> {
        self.facts.get(id.index())
    }

    /// `NF(x)`: ids of all facts containing `x`, ascending.
    pub fn neighborhood(&self, x: ItemId) -> Result<&[FactId]> {
        Ok(self.nf.row(self.check(x)?))
    }

    /// `NF(x)` materialized as fact references.
    pub fn neighborhood_facts(&self, x: ItemId) -> Result<impl Iterator<Item = &Fact> + '_> {
        Ok(self.neighborhood(x)?.iter().map(|f| &self.facts[f.index()]))
    }

    /// `NI(x)`: items co-occurring with `x` in some fact, ascending, without `x`.
    pub fn neighbors(&self, x: ItemId) -> Result<&[ItemId]> {
        Ok(self.ni.row(self.check(x)?))
    }

    pub fn frequency(&self, x: ItemId) -> Result<FrequencyProfile> {
        Ok(self.frequencies[self.check(x)?])
    }

    /// Facts of `NF(x)` in which `x` is the subject.
    pub fn subject_facts(&self, x: ItemId) -> Result<impl Iterator<Item = &Fact> + '_> {
        Ok(self.neighborhood_facts(x)?.filter(move |f| f.subject == x))
    }

    /// Fact-centric distance: one hop if the items share a fact, two hops if
    /// their neighbor sets overlap, far otherwise. An item is one hop from itself.
    pub fn distance(&self, a: ItemId, b: ItemId) -> Result<Distance> {
        let (ia, ib) = (self.check(a)?, self.check(b)?);
        if a == b {
            return Ok(Distance::Hop1);
        }
        let (na, nb) = (self.ni.row(ia), self.ni.row(ib));
        // NI is symmetric, so probe the shorter list.
        let hop1 = if na.len() <= nb.len() {
            na.binary_search(&b).is_ok()
        } else {
            nb.binary_search(&a).is_ok()
        };
        Ok(if hop1 {
            Distance::Hop1
        } else if sorted_intersects(na, nb) {
            Distance::Hop2
        } else {
            Distance::Far
        })
    }
}

fn build_nf(n: usize, facts: &[Fact]) -> Csr<FactId> {
    let mut counts = vec![0usize; n];
    let mut scratch = Vec::new();
    for f in facts {
        distinct_items(f, &mut scratch);
        for x in &scratch {
            counts[x.index()] += 1;
        }
    }
    let mut offsets = Vec::with_capacity(n + 1);
    offsets.push(0);
    for c in &counts {
        offsets.push(offsets.last().unwrap() + c);
    }
    let mut cursor = offsets[..n].to_vec();
    let mut values = vec![FactId(0); offsets[n]];
    for f in facts {
        distinct_items(f, &mut scratch);
        for x in &scratch {
            values[cursor[x.index()]] = f.id;
            cursor[x.index()] += 1;
        }
    }
    Csr { offsets, values }
}

fn build_ni(n: usize, facts: &[Fact], nf: &Csr<FactId>) -> Csr<ItemId> {
    let rows: Vec<Vec<ItemId>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let x = ItemId(i as u32);
            let mut row: Vec<ItemId> = nf
                .row(i)
                .iter()
                .flat_map(|f| facts[f.index()].items())
                .filter(|&y| y != x)
                .collect();
            row.sort_unstable();
            row.dedup();
            row
        })
        .collect();
    Csr::from_rows(rows)
}

fn distinct_items(f: &Fact, out: &mut Vec<ItemId>) {
    out.clear();
    out.extend(f.items());
    out.sort_unstable();
    out.dedup();
}

/// Overlap test on two ascending lists: linear merge for similar sizes,
/// binary probes from the shorter list when sizes are lopsided.
pub fn sorted_intersects<T: Ord>(a: &[T], b: &[T]) -> bool {
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    if short.is_empty() {
        return false;
    }
    if long.len() / short.len() >= 16 {
        let mut rest = long;
        for x in short {
            match rest.binary_search(x) {
                Ok(_) => return true,
                Err(pos) => rest = &rest[pos..],
            }
            if rest.is_empty() {
                return false;
            }
        }
        return false;
    }
    let (mut i, mut j) = (0, 0);
    while i < short.len() && j < long.len() {
        match short[i].cmp(&long[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn item(code: u32, kind: ItemKind) -> KbItem {
        KbItem {
            code: ItemId(code),
            external_id: format!("X{code}"),
            label: format!("item {code}"),
            aliases: vec![],
            description: String::new(),
            kind,
        }
    }

    fn fact(id: u32, s: u32, p: u32, o: u32, q: &[(u32, u32)]) -> Fact {
        Fact {
            id: FactId(id),
            subject: ItemId(s),
            predicate: ItemId(p),
            object: ItemId(o),
            qualifiers: q.iter().map(|&(a, b)| (ItemId(a), ItemId(b))).collect(),
        }
    }

    // items: 0 x, 1 p, 2 y, 3 z, 4 lit, 5 isolated, 6 w
    fn small() -> KnowledgeBase {
        let items = vec![
            item(0, ItemKind::Entity),
            item(1, ItemKind::Predicate),
            item(2, ItemKind::Entity),
            item(3, ItemKind::Entity),
            item(4, ItemKind::Literal),
            item(5, ItemKind::Entity),
            item(6, ItemKind::Entity),
        ];
        let facts = vec![
            fact(0, 0, 1, 2, &[(1, 4)]),
            fact(1, 0, 1, 3, &[]),
            fact(2, 3, 1, 0, &[(1, 4)]),
            fact(3, 6, 1, 2, &[(1, 4)]),
            fact(4, 2, 1, 6, &[(1, 4)]),
        ];
        KnowledgeBase::new(items, facts).unwrap()
    }

    #[test]
    fn neighborhood_and_neighbors() {
        let kb = small();
        assert_eq!(kb.neighborhood(ItemId(0)).unwrap(), &[FactId(0), FactId(1), FactId(2)]);
        assert!(kb.neighborhood(ItemId(5)).unwrap().is_empty());
        assert_eq!(
            kb.neighbors(ItemId(3)).unwrap(),
            &[ItemId(0), ItemId(1), ItemId(4)]
        );
        assert!(kb.neighborhood(ItemId(99)).is_err());
        assert!(matches!(kb.neighbors(ItemId(7)), Err(Error::NotFound(_))));
    }

    #[test]
    fn single_fact_neighbors() {
        let items = vec![item(0, ItemKind::Entity), item(1, ItemKind::Predicate), item(2, ItemKind::Entity)];
        let kb = KnowledgeBase::new(items, vec![fact(0, 0, 1, 2, &[])]).unwrap();
        assert_eq!(kb.neighbors(ItemId(0)).unwrap(), &[ItemId(1), ItemId(2)]);
    }

    #[test]
    fn frequency_profiles() {
        let kb = small();
        assert_eq!(
            kb.frequency(ItemId(0)).unwrap(),
            FrequencyProfile {
                subject_count: 2,
                object_count: 1,
                qualifier_object_count: 0,
                total: 3
            }
        );
        assert_eq!(
            kb.frequency(ItemId(4)).unwrap(),
            FrequencyProfile {
                subject_count: 0,
                object_count: 0,
                qualifier_object_count: 4,
                total: 4
            }
        );
        let p = kb.frequency(ItemId(1)).unwrap();
        assert_eq!((p.subject_count, p.object_count, p.total), (0, 0, 5));
    }

    #[test]
    fn subject_facts_filter_by_role() {
        let kb = small();
        let ids: Vec<_> = kb.subject_facts(ItemId(0)).unwrap().map(|f| f.id).collect();
        assert_eq!(ids, vec![FactId(0), FactId(1)]);
        assert_eq!(kb.subject_facts(ItemId(4)).unwrap().count(), 0);
    }

    #[test]
    fn distances() {
        let kb = small();
        assert_eq!(kb.distance(ItemId(0), ItemId(2)).unwrap(), Distance::Hop1);
        assert_eq!(kb.distance(ItemId(0), ItemId(6)).unwrap(), Distance::Hop2);
        assert_eq!(kb.distance(ItemId(6), ItemId(0)).unwrap(), Distance::Hop2);
        assert_eq!(kb.distance(ItemId(0), ItemId(5)).unwrap(), Distance::Far);
        assert_eq!(kb.distance(ItemId(5), ItemId(5)).unwrap(), Distance::Hop1);
        assert!(kb.distance(ItemId(0), ItemId(70)).is_err());
    }

    #[test]
    fn intersects_both_strategies() {
        let long: Vec<u32> = (0..1000).map(|i| i * 2).collect();
        assert!(sorted_intersects(&[3, 5, 998], &long));
        assert!(!sorted_intersects(&[3, 5, 999], &long));
        assert!(!sorted_intersects(&[3001], &long));
        assert!(sorted_intersects(&[1, 4, 7], &[2, 4, 8]));
        assert!(!sorted_intersects(&[1, 3], &[2, 4]));
        assert!(!sorted_intersects::<u32>(&[], &[1]));
    }

    #[test]
    fn rejects_out_of_range_codes() {
        let items = vec![item(0, ItemKind::Entity)];
        assert!(KnowledgeBase::new(items, vec![fact(0, 0, 0, 3, &[])]).is_err());
    }
}
