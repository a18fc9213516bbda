//! Per-term choice of `k` from candidate ambiguity, and of the pruning
//! threshold `p` as a function of `k`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lexical::CandidateList;
use crate::store::KnowledgeBase;

pub const DEFAULT_K_MAX: usize = 5;

// Guards `floor` against an entropy like 2.9999999999999996 for a uniform
// distribution over 8 outcomes.
const FLOOR_SLACK: f64 = 1e-9;

/// Shannon entropy in bits of the normalized frequency distribution. An
/// all-zero profile is treated as uniform.
pub fn entropy(frequencies: &[u64]) -> f64 {
    let n = frequencies.len();
    if n == 0 {
        return 0.0;
    }
    let total: u64 = frequencies.iter().sum();
    if total == 0 {
        return (n as f64).log2();
    }
    let total = total as f64;
    frequencies
        .iter()
        .filter(|&&f| f > 0)
        .map(|&f| {
            let p = f as f64 / total;
            -p * p.log2()
        })
        .sum()
}

/// `floor(entropy) + 1`, clamped to `[1, min(depth, k_max)]`.
pub fn k_from_frequencies(frequencies: &[u64], depth: usize, k_max: usize) -> usize {
    let ent = entropy(frequencies);
    let k = (ent + FLOOR_SLACK).floor() as usize + 1;
    k.clamp(1, depth.min(k_max).max(1))
}

/// Automatic `k` for one term, from the fact counts of its candidates.
pub fn auto_k(kb: &KnowledgeBase, list: &CandidateList, depth: usize, k_max: usize) -> Result<usize> {
    if list.is_empty() {
        return Err(Error::InvalidArgument(format!("no candidates for term `{}`", list.term)));
    }
    let freqs = list
        .entries
        .iter()
        .map(|c| kb.frequency(c.item).map(|f| f.total))
        .collect::<Result<Vec<_>>>()?;
    Ok(k_from_frequencies(&freqs, depth, k_max))
}

/// `p = f(k)` policies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PrunePolicy {
    /// `10^(5 - k)`
    #[serde(rename = "10^(5-k)")]
    Steep,
    /// `10^(5 - 0.5k)`
    #[serde(rename = "10^(5-0.5k)")]
    Smooth,
    /// `10^(4 - 0.5k)`
    #[serde(rename = "10^(4-0.5k)")]
    SmoothLow,
}

impl PrunePolicy {
    pub fn exponent(self, k: usize) -> f64 {
        let k = k as f64;
        match self {
            PrunePolicy::Steep => 5.0 - k,
            PrunePolicy::Smooth => 5.0 - 0.5 * k,
            PrunePolicy::SmoothLow => 4.0 - 0.5 * k,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PrunePolicy::Steep => "10^(5-k)",
            PrunePolicy::Smooth => "10^(5-0.5k)",
            PrunePolicy::SmoothLow => "10^(4-0.5k)",
        }
    }
}

/// Rounded-down `10^exponent` of the policy, saturating at 0 from below.
pub fn auto_p(k: usize, policy: PrunePolicy) -> u64 {
    let v = 10f64.powf(policy.exponent(k));
    (v * (1.0 + FLOOR_SLACK)).floor().max(0.0) as u64
}

/// How the pruning threshold is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PruneSetting {
    Fixed(u64),
    Unbounded,
    Auto(PrunePolicy),
}

impl Default for PruneSetting {
    fn default() -> Self {
        PruneSetting::Fixed(1000)
    }
}

impl PruneSetting {
    /// Threshold for a term disambiguated with `k` items; `None` means no pruning.
    pub fn resolve(self, k: usize) -> Option<u64> {
        match self {
            PruneSetting::Fixed(p) => Some(p),
            PruneSetting::Unbounded => None,
            PruneSetting::Auto(policy) => Some(auto_p(k, policy)),
        }
    }
}

impl fmt::Display for PruneSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PruneSetting::Fixed(p) => write!(f, "{p}"),
            PruneSetting::Unbounded => f.write_str("inf"),
            PruneSetting::Auto(policy) => f.write_str(policy.name()),
        }
    }
}

impl FromStr for PruneSetting {
    type Err = Error;

    /// Accepts an integer, `inf`, or a policy name (`10^(5-k)`, `10^(5-0.5k)`,
    /// `10^(4-0.5k)`, also spelled `steep`, `smooth`, `smooth-low`).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        Ok(match s.to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "unbounded" => PruneSetting::Unbounded,
            "10^(5-k)" | "steep" | "auto" => PruneSetting::Auto(PrunePolicy::Steep),
            "10^(5-0.5k)" | "smooth" => PruneSetting::Auto(PrunePolicy::Smooth),
            "10^(4-0.5k)" | "smooth-low" => PruneSetting::Auto(PrunePolicy::SmoothLow),
            other => PruneSetting::Fixed(
                other
                    .replace('_', "")
                    .replace('k', "000")
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("invalid pruning threshold `{s}`")))?,
            ),
        })
    }
}

impl Serialize for PruneSetting {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            PruneSetting::Fixed(p) => s.serialize_u64(*p),
            other => s.serialize_str(&other.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for PruneSetting {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(u64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(p) => Ok(PruneSetting::Fixed(p)),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Number of disambiguations kept per term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KSetting {
    Fixed(usize),
    #[default]
    Auto,
}

impl fmt::Display for KSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KSetting::Fixed(k) => write!(f, "{k}"),
            KSetting::Auto => f.write_str("auto"),
        }
    }
}

impl FromStr for KSetting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("auto") {
            return Ok(KSetting::Auto);
        }
        match s.parse::<usize>() {
            Ok(k) if k >= 1 => Ok(KSetting::Fixed(k)),
            _ => Err(Error::InvalidArgument(format!("k must be a positive integer or `auto`, got `{s}`"))),
        }
    }
}

impl Serialize for KSetting {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            KSetting::Fixed(k) => s.serialize_u64(*k as u64),
            KSetting::Auto => s.serialize_str("auto"),
        }
    }
}

impl<'de> Deserialize<'de> for KSetting {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(u64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(k) => k.to_string().parse().map_err(serde::de::Error::custom),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}
