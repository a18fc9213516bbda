//! Core knowledge-base domain types shared by ingestion, storage and retrieval.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Dense integer code of a KB item.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ItemId(pub u32);

impl ItemId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ItemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Position of a fact in the fact table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FactId(pub u32);

impl FactId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ItemKind {
    Entity,
    Predicate,
    Type,
    Literal,
}

impl ItemKind {
    pub fn as_u8(self) -> u8 {
        match self {
            ItemKind::Entity => 0,
            ItemKind::Predicate => 1,
            ItemKind::Type => 2,
            ItemKind::Literal => 3,
        }
    }

    pub fn from_u8(v: u8) -> Option<Self> {
        Some(match v {
            0 => ItemKind::Entity,
            1 => ItemKind::Predicate,
            2 => ItemKind::Type,
            3 => ItemKind::Literal,
            _ => return None,
        })
    }

    /// Whether items of this kind count towards the search-space size.
    pub fn is_answer_candidate(self) -> bool {
        !matches!(self, ItemKind::Predicate)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KbItem {
    pub code: ItemId,
    pub external_id: String,
    pub label: String,
    #[serde(default)]
    pub aliases: Vec<String>,
    #[serde(default)]
    pub description: String,
    pub kind: ItemKind,
}

/// A subject-predicate-object triple with its ordered qualifier pairs.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Fact {
    pub id: FactId,
    pub subject: ItemId,
    pub predicate: ItemId,
    pub object: ItemId,
    pub qualifiers: Vec<(ItemId, ItemId)>,
}

impl Fact {
    /// Every item occurrence in the fact, in positional order. May repeat items.
    pub fn items(&self) -> impl Iterator<Item = ItemId> + '_ {
        [self.subject, self.predicate, self.object]
            .into_iter()
            .chain(self.qualifiers.iter().flat_map(|&(p, o)| [p, o]))
    }

    pub fn contains(&self, x: ItemId) -> bool {
        self.items().any(|y| y == x)
    }
}
