//! Engine configuration: a TOML file, overridden by `KBSPACE_*` environment
//! variables, overridden in turn by command-line flags.
//!
//! ```toml
//! bundle = "index/"
//! embeddings = "vectors.txt"
//! stopwords = "stopwords.txt"   # optional
//! bind = "127.0.0.1:8080"
//!
//! [query]
//! weights = { coh = 0.1, conn = 0.3, rel = 0.2, match = 0.4 }
//! depth = 20
//! k = "auto"
//! k_max = 5
//! p = 1000            # or "inf", or a policy such as "10^(5-0.5k)"
//! bm25_top_n = 100    # optional
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::auto::{KSetting, PruneSetting};
use crate::engine::{Engine, QueryConfig};
use crate::error::{Error, Result};
use crate::scoring::SignalWeights;

pub const ENV_PREFIX: &str = "KBSPACE_";
pub const DEFAULT_BIND: &str = "127.0.0.1:8080";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineConfig {
    pub bundle: PathBuf,
    pub embeddings: PathBuf,
    #[serde(default)]
    pub stopwords: Option<PathBuf>,
    #[serde(default = "default_bind")]
    pub bind: String,
    #[serde(default)]
    pub query: QueryConfig,
}

fn default_bind() -> String {
    DEFAULT_BIND.to_string()
}

impl EngineConfig {
    pub fn new(bundle: impl Into<PathBuf>, embeddings: impl Into<PathBuf>) -> Self {
        Self {
            bundle: bundle.into(),
            embeddings: embeddings.into(),
            stopwords: None,
            bind: default_bind(),
            query: QueryConfig::default(),
        }
    }

    /// Relative paths in the file are resolved against the file's directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: EngineConfig =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        if let Some(base) = path.parent() {
            let resolve = |p: &mut PathBuf| {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            };
            resolve(&mut cfg.bundle);
            resolve(&mut cfg.embeddings);
            if let Some(s) = cfg.stopwords.as_mut() {
                resolve(s);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.query.validate()?;
        for (what, p) in [("bundle", Some(&self.bundle)), ("embeddings", Some(&self.embeddings)), ("stopwords", self.stopwords.as_ref())] {
            if let Some(p) = p {
                if !p.exists() {
                    return Err(Error::Config(format!("{what} path {} does not exist", p.display())));
                }
            }
        }
        Ok(())
    }

    pub fn open_engine(&self) -> Result<Engine> {
        self.validate()?;
        Engine::open(&self.bundle, &self.embeddings, self.stopwords.as_deref())
    }
}

/// Optional replacements for individual settings.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigOverrides {
    pub bundle: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    pub bind: Option<String>,
    pub weights: Option<SignalWeights>,
    pub depth: Option<usize>,
    pub k: Option<KSetting>,
    pub k_max: Option<usize>,
    pub p: Option<PruneSetting>,
    pub bm25_top_n: Option<usize>,
}

/// Parses `coh,conn,rel,match`.
pub fn parse_weights(s: &str) -> Result<SignalWeights> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::InvalidArgument(format!("weights must be four comma-separated numbers: `{s}`")))?;
    let arr: [f64; 4] = parts
        .try_into()
        .map_err(|_| Error::InvalidArgument(format!("expected four weights: `{s}`")))?;
    SignalWeights::from_array(arr)
}

impl ConfigOverrides {
    pub fn from_env() -> Result<Self> {
        Self::from_lookup(|key| std::env::var(format!("{ENV_PREFIX}{key}")).ok())
    }

    pub fn from_lookup(get: impl Fn(&str) -> Option<String>) -> Result<Self> {
        let parse_usize = |key: &str| -> Result<Option<usize>> {
            get(key)
                .map(|v| {
                    v.trim()
                        .parse()
                        .map_err(|_| Error::Config(format!("{ENV_PREFIX}{key}: not an integer: `{v}`")))
                })
                .transpose()
        };
        Ok(Self {
            bundle: get("BUNDLE").map(PathBuf::from),
            embeddings: get("EMBEDDINGS").map(PathBuf::from),
            stopwords: get("STOPWORDS").map(PathBuf::from),
            bind: get("BIND"),
            weights: get("WEIGHTS").map(|w| parse_weights(&w)).transpose()?,
            depth: parse_usize("D")?,
            k: get("K").map(|k| k.parse()).transpose()?,
            k_max: parse_usize("K_MAX")?,
            p: get("P").map(|p| p.parse()).transpose()?,
            bm25_top_n: parse_usize("BM25_TOP_N")?,
        })
    }

    pub fn apply_query(&self, q: &mut QueryConfig) {
        if let Some(w) = self.weights {
            q.weights = w;
        }
        if let Some(d) = self.depth {
            q.depth = d;
        }
        if let Some(k) = self.k {
            q.k = k;
        }
        if let Some(k) = self.k_max {
            q.k_max = k;
        }
        if let Some(p) = self.p {
            q.p = p;
        }
        if let Some(n) = self.bm25_top_n {
            q.bm25_top_n = Some(n);
        }
    }

    pub fn apply(&self, cfg: &mut EngineConfig) {
        if let Some(b) = &self.bundle {
            cfg.bundle = b.clone();
        }
        if let Some(e) = &self.embeddings {
            cfg.embeddings = e.clone();
        }
        if let Some(s) = &self.stopwords {
            cfg.stopwords = Some(s.clone());
        }
        if let Some(b) = &self.bind {
            cfg.bind = b.clone();
        }
        self.apply_query(&mut cfg.query);
    }
}

/// Resolves file, then environment, then flags. Without a file, the bundle
/// and embeddings paths must come from the environment or the flags.
pub fn resolve(file: Option<&Path>, env: &ConfigOverrides, flags: &ConfigOverrides) -> Result<EngineConfig> {
    let mut cfg = match file {
        Some(path) => EngineConfig::from_file(path)?,
        None => {
            let bundle = flags.bundle.clone().or_else(|| env.bundle.clone());
            let embeddings = flags.embeddings.clone().or_else(|| env.embeddings.clone());
            match (bundle, embeddings) {
                (Some(b), Some(e)) => EngineConfig::new(b, e),
                (None, _) => return Err(Error::Config("no bundle path given".into())),
                (_, None) => return Err(Error::Config("no embeddings path given".into())),
            }
        }
    };
    env.apply(&mut cfg);
    flags.apply(&mut cfg);
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;

    use super::*;
    use crate::auto::PrunePolicy;

    #[test]
    fn file_env_flag_precedence() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("kbspace.toml");
        std::fs::write(
            &path,
            r#"
bundle = "index"
embeddings = "/abs/vectors.txt"

[query]
depth = 10
k = 2
p = "inf"
weights = { coh = 0.25, conn = 0.25, rel = 0.25, match = 0.25 }
"#,
        )
        .unwrap();
        let env_vars: HashMap<&str, &str> = [("D", "15"), ("K", "3"), ("P", "10^(5-0.5k)")].into();
        let env = ConfigOverrides::from_lookup(|k| env_vars.get(k).map(|v| v.to_string())).unwrap();
        let flags = ConfigOverrides {
            k: Some(KSetting::Auto),
            ..Default::default()
        };
        let cfg = resolve(Some(&path), &env, &flags).unwrap();
        assert_eq!(cfg.bundle, dir.path().join("index"));
        assert_eq!(cfg.embeddings, PathBuf::from("/abs/vectors.txt"));
        assert_eq!(cfg.query.depth, 15);
        assert_eq!(cfg.query.k, KSetting::Auto);
        assert_eq!(cfg.query.p, PruneSetting::Auto(PrunePolicy::Smooth));
        assert_eq!(cfg.query.weights.coh, 0.25);
        assert_eq!(cfg.bind, DEFAULT_BIND);
    }

    #[test]
    fn defaults_without_file() {
        let flags = ConfigOverrides {
            bundle: Some("b".into()),
            embeddings: Some("e".into()),
            ..Default::default()
        };
        let cfg = resolve(None, &ConfigOverrides::default(), &flags).unwrap();
        assert_eq!(cfg.query, QueryConfig::default());
        assert!(resolve(None, &ConfigOverrides::default(), &ConfigOverrides::default()).is_err());
    }

    #[test]
    fn weights_parsing() {
        let w = parse_weights("0.1, 0.3, 0.2, 0.4").unwrap();
        assert_eq!(w, SignalWeights::default());
        assert!(parse_weights("0.1,0.3,0.2").is_err());
        assert!(parse_weights("0.5,0.5,0.5,0.5").is_err());
    }

    #[test]
    fn missing_paths_fail_validation() {
        let cfg = EngineConfig::new("/nonexistent/bundle", "/nonexistent/vectors.txt");
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.toml");
        std::fs::write(&path, "bundle = \"b\"\nembeddings = \"e\"\nbogus = 1\n").unwrap();
        assert!(EngineConfig::from_file(&path).is_err());
    }
}
