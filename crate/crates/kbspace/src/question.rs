//! Question segmentation into keyword and phrase terms.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lexical::LexicalIndex;
use crate::text::{tokenize, Stopwords};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Question {
    pub raw: String,
    pub terms: Vec<String>,
}

impl Question {
    /// Uses caller-supplied term spans instead of automatic segmentation.
    pub fn from_terms(raw: impl Into<String>, terms: impl IntoIterator<Item = impl Into<String>>) -> Result<Self> {
        let terms: Vec<String> = terms
            .into_iter()
            .map(Into::into)
            .filter(|t: &String| !t.trim().is_empty())
            .collect();
        if terms.is_empty() {
            return Err(Error::EmptyQuestion);
        }
        Ok(Self { raw: raw.into(), terms })
    }

    /// Splits on word boundaries, merges runs of tokens that spell out a
    /// multi-word item label or alias (longest match first) and drops
    /// stopwords that are not part of such a phrase.
    pub fn segment(raw: &str, lexicon: &LexicalIndex, stopwords: &Stopwords) -> Result<Self> {
        let tokens = tokenize(raw);
        let mut terms = Vec::new();
        let mut i = 0;
        while i < tokens.len() {
            let longest = lexicon.max_phrase_len().min(tokens.len() - i);
            let phrase_len = (2..=longest).rev().find(|&len| {
                let span = &tokens[i..i + len];
                lexicon.is_phrase(span) && span.iter().any(|t| !stopwords.contains(t))
            });
            match phrase_len {
                Some(len) => {
                    terms.push(tokens[i..i + len].join(" "));
                    i += len;
                }
                None => {
                    if !stopwords.contains(&tokens[i]) {
                        terms.push(tokens[i].clone());
                    }
                    i += 1;
                }
            }
        }
        Self::from_terms(raw, terms)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}
