//! Reading raw KB dumps: item metadata, reified triples and flat fact lines.
//!
//! Two fact formats are accepted:
//!
//! * `triples.tsv`: one `subject<TAB>predicate<TAB>object` per line. Nodes whose
//!   identifier starts with the fact-id prefix (default `stmt:`) are reification
//!   dummies. A reified fact is the group `<s, p, F>`, `<F, p, o>`, `<F, qp, qo>…`
//!   and is aggregated into `<s, p, o; qp, qo; …>`.
//! * `facts.jsonl`: one `{"s": …, "p": …, "o": …, "qualifiers": [[qp, qo], …]}`
//!   object per line.
//!
//! A term written in double quotes (`"15 July 2018"`, optionally followed by an
//! N-Triples datatype or language tag) is a literal. In JSON a literal may also
//! be written as `{"literal": "15 July 2018"}`.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kb::{Fact, FactId, ItemId, ItemKind, KbItem};

pub const DEFAULT_FACT_ID_PREFIX: &str = "stmt:";

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RawTriple {
    pub subject: String,
    pub predicate: String,
    pub object: String,
}

impl RawTriple {
    pub fn new(s: impl Into<String>, p: impl Into<String>, o: impl Into<String>) -> Self {
        Self {
            subject: s.into(),
            predicate: p.into(),
            object: o.into(),
        }
    }

    fn is_valid(&self) -> bool {
        !(self.subject.is_empty() || self.predicate.is_empty() || self.object.is_empty())
    }
}

/// A fact whose constituents are still external identifiers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RawFact {
    pub subject: String,
    pub predicate: String,
    pub object: String,
    pub qualifiers: Vec<(String, String)>,
}

impl RawFact {
    fn terms(&self) -> impl Iterator<Item = &str> {
        [&self.subject, &self.predicate, &self.object]
            .into_iter()
            .chain(self.qualifiers.iter().flat_map(|(p, o)| [p, o]))
            .map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItemRecord {
    #[serde(rename = "id")]
    pub external_id: String,
    pub label: String,
    #[serde(default)]
    pub aliases: Vec<String>,
    #[serde(default)]
    pub description: String,
    #[serde(default = "default_kind")]
    pub kind: ItemKind,
}

fn default_kind() -> ItemKind {
    ItemKind::Entity
}

/// Lexical form of a quoted literal term, `None` for identifiers.
pub fn literal_form(term: &str) -> Option<&str> {
    let rest = term.strip_prefix('"')?;
    let end = rest.rfind('"')?;
    Some(&rest[..end])
}

/// Canonical identifier for a literal with the given lexical form.
pub fn literal_id(form: &str) -> String {
    format!("\"{form}\"")
}

fn canonical_term(term: &str) -> String {
    match literal_form(term) {
        Some(form) => literal_id(form),
        None => term.to_string(),
    }
}

/// Outcome of reading a line-oriented file: parsed records plus the number of
/// skipped malformed lines.
#[derive(Debug, Clone)]
pub struct Parsed<T> {
    pub records: Vec<T>,
    pub malformed: usize,
}

impl<T> Default for Parsed<T> {
    fn default() -> Self {
        Self {
            records: Vec::new(),
            malformed: 0,
        }
    }
}

pub fn read_items(path: &Path) -> Result<Vec<ItemRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut items = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let item: ItemRecord =
            serde_json::from_str(&line).map_err(|e| Error::parse(path, n + 1, e.to_string()))?;
        items.push(item);
    }
    Ok(items)
}

/// Parses one TSV triple line. Blank lines and `#` comments yield `Ok(None)`.
pub fn parse_triple_line(line: &str) -> std::result::Result<Option<RawTriple>, String> {
    let line = line.trim_end_matches(['\r', '\n']);
    if line.trim().is_empty() || line.starts_with('#') {
        return Ok(None);
    }
    let mut parts = line.split('\t');
    let (Some(s), Some(p), Some(o), None) = (parts.next(), parts.next(), parts.next(), parts.next())
    else {
        return Err(format!("expected 3 tab-separated fields: {line:?}"));
    };
    let triple = RawTriple::new(s.trim(), p.trim(), o.trim());
    if !triple.is_valid() {
        return Err(format!("empty field: {line:?}"));
    }
    Ok(Some(triple))
}

pub fn read_triples(path: &Path) -> Result<Parsed<RawTriple>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Parsed::default();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        match parse_triple_line(&line) {
            Ok(Some(t)) => out.records.push(t),
            Ok(None) => {}
            Err(msg) => {
                warn!("{}:{}: skipping malformed triple: {msg}", path.display(), n + 1);
                out.malformed += 1;
            }
        }
    }
    Ok(out)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum JsonTerm {
    Id(String),
    Literal { literal: String },
}

impl JsonTerm {
    fn into_term(self) -> String {
        match self {
            JsonTerm::Id(s) => s,
            JsonTerm::Literal { literal } => literal_id(&literal),
        }
    }
}

#[derive(Deserialize)]
struct JsonFact {
    s: JsonTerm,
    p: JsonTerm,
    o: JsonTerm,
    #[serde(default)]
    qualifiers: Vec<(JsonTerm, JsonTerm)>,
}

pub fn read_fact_lines(path: &Path) -> Result<Parsed<RawFact>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Parsed::default();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<JsonFact>(&line) {
            Ok(f) => {
                let fact = RawFact {
                    subject: canonical_term(&f.s.into_term()),
                    predicate: canonical_term(&f.p.into_term()),
                    object: canonical_term(&f.o.into_term()),
                    qualifiers: f
                        .qualifiers
                        .into_iter()
                        .map(|(p, o)| (canonical_term(&p.into_term()), canonical_term(&o.into_term())))
                        .collect(),
                };
                if fact.terms().any(str::is_empty) {
                    warn!("{}:{}: skipping fact with empty term", path.display(), n + 1);
                    out.malformed += 1;
                } else {
                    out.records.push(fact);
                }
            }
            Err(e) => {
                warn!("{}:{}: skipping malformed fact: {e}", path.display(), n + 1);
                out.malformed += 1;
            }
        }
    }
    Ok(out)
}

#[derive(Default)]
struct ReifiedGroup {
    first_seen: usize,
    heads: Vec<(String, String)>,
    fragments: Vec<(String, String)>,
}

/// Joins reified triples into qualifier-bearing facts.
///
/// Plain triples become qualifier-free facts. Output order follows the first
/// input position of each fact; qualifiers keep their input order. Triples
/// linking two fact-id nodes, or containing an empty field, are skipped and
/// counted in `malformed`.
pub fn aggregate_reified<I>(triples: I, fact_id_prefix: &str) -> Result<Parsed<RawFact>>
where
    I: IntoIterator<Item = RawTriple>,
{
    let is_fact_id = |t: &str| !fact_id_prefix.is_empty() && t.starts_with(fact_id_prefix);

    let mut plain: Vec<(usize, RawFact)> = Vec::new();
    let mut groups: HashMap<String, ReifiedGroup> = HashMap::new();
    let mut malformed = 0;

    for (pos, t) in triples.into_iter().enumerate() {
        if !t.is_valid() || is_fact_id(&t.predicate) {
            malformed += 1;
            continue;
        }
        match (is_fact_id(&t.subject), is_fact_id(&t.object)) {
            (false, false) => plain.push((
                pos,
                RawFact {
                    subject: canonical_term(&t.subject),
                    predicate: t.predicate,
                    object: canonical_term(&t.object),
                    qualifiers: Vec::new(),
                },
            )),
            (false, true) => {
                let g = groups.entry(t.object).or_insert_with(|| ReifiedGroup {
                    first_seen: pos,
                    ..Default::default()
                });
                g.heads.push((canonical_term(&t.subject), t.predicate));
            }
            (true, false) => {
                let g = groups.entry(t.subject).or_insert_with(|| ReifiedGroup {
                    first_seen: pos,
                    ..Default::default()
                });
                g.fragments.push((t.predicate, canonical_term(&t.object)));
            }
            (true, true) => malformed += 1,
        }
    }

    let mut orphans = Vec::new();
    let mut facts = plain;
    for (fact_id, group) in groups {
        let [(subject, predicate)] = group.heads.as_slice() else {
            orphans.push(fact_id);
            continue;
        };
        let Some(main) = group.fragments.iter().position(|(p, _)| p == predicate) else {
            orphans.push(fact_id);
            continue;
        };
        let mut fragments = group.fragments;
        let (_, object) = fragments.remove(main);
        facts.push((
            group.first_seen,
            RawFact {
                subject: subject.clone(),
                predicate: predicate.clone(),
                object,
                qualifiers: fragments,
            },
        ));
    }
    if !orphans.is_empty() {
        orphans.sort();
        return Err(Error::OrphanFacts(orphans));
    }
    if malformed > 0 {
        warn!("skipped {malformed} malformed triples during aggregation");
    }
    facts.sort_by_key(|(pos, _)| *pos);
    Ok(Parsed {
        records: facts.into_iter().map(|(_, f)| f).collect(),
        malformed,
    })
}

/// Bijection between external identifiers and dense item codes.
#[derive(Debug, Clone, Default)]
pub struct IntegerCoding {
    items: Vec<KbItem>,
    codes: HashMap<String, ItemId>,
}

impl IntegerCoding {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn encode(&self, external_id: &str) -> Option<ItemId> {
        self.codes.get(external_id).copied()
    }

    pub fn decode(&self, code: ItemId) -> Option<&str> {
        self.items.get(code.index()).map(|i| i.external_id.as_str())
    }

    pub fn items(&self) -> &[KbItem] {
        &self.items
    }

    pub fn into_items(self) -> Vec<KbItem> {
        self.items
    }

    fn push(&mut self, item: KbItem) {
        self.codes.insert(item.external_id.clone(), item.code);
        self.items.push(item);
    }

    pub fn encode_fact(&self, id: FactId, fact: &RawFact) -> Result<Fact> {
        let code = |t: &str| self.encode(t).ok_or_else(|| Error::UnknownIdentifier(t.to_string()));
        Ok(Fact {
            id,
            subject: code(&fact.subject)?,
            predicate: code(&fact.predicate)?,
            object: code(&fact.object)?,
            qualifiers: fact
                .qualifiers
                .iter()
                .map(|(p, o)| Ok((code(p)?, code(o)?)))
                .collect::<Result<_>>()?,
        })
    }

    pub fn encode_facts(&self, facts: &[RawFact]) -> Result<Vec<Fact>> {
        facts
            .iter()
            .enumerate()
            .map(|(i, f)| self.encode_fact(FactId(i as u32), f))
            .collect()
    }
}

/// Assigns codes in first-occurrence order: item records first, then literals
/// as they appear in `facts`.
pub fn encode_items(items: &[ItemRecord], facts: &[RawFact]) -> Result<IntegerCoding> {
    let mut coding = IntegerCoding::default();
    for rec in items {
        let external_id = canonical_term(&rec.external_id);
        if coding.codes.contains_key(&external_id) {
            return Err(Error::DuplicateItem(external_id));
        }
        let literal = literal_form(&external_id).map(str::to_string);
        let kind = if literal.is_some() { ItemKind::Literal } else { rec.kind };
        let label = match (&literal, kind) {
            (Some(form), _) => form.clone(),
            (None, ItemKind::Literal) if rec.label.is_empty() => external_id.clone(),
            _ => rec.label.clone(),
        };
        if label.trim().is_empty() {
            return Err(Error::InvalidItem {
                id: external_id,
                reason: "empty label".into(),
            });
        }
        let code = ItemId(coding.len() as u32);
        coding.push(KbItem {
            code,
            external_id,
            label,
            aliases: rec.aliases.clone(),
            description: rec.description.clone(),
            kind,
        });
    }
    for fact in facts {
        for term in fact.terms() {
            if coding.codes.contains_key(term) {
                continue;
            }
            let Some(form) = literal_form(term) else {
                return Err(Error::UnknownIdentifier(term.to_string()));
            };
            let code = ItemId(coding.len() as u32);
            coding.push(KbItem {
                code,
                external_id: term.to_string(),
                label: form.to_string(),
                aliases: Vec::new(),
                description: String::new(),
                kind: ItemKind::Literal,
            });
        }
    }
    Ok(coding)
}
