//! Pre-trained vectors in word2vec text format, keyed by item external id or
//! by word, with cosine similarities rescaled from [-1, 1] to [0, 1].

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use log::warn;

use crate::error::{Error, Result};
use crate::text::tokenize;

/// Similarity assigned when a vector is missing or has zero norm.
pub const NEUTRAL_SIMILARITY: f64 = 0.5;

#[derive(Debug, Clone)]
pub struct EmbeddingStore {
    dim: usize,
    index: HashMap<String, usize>,
    values: Vec<f32>,
    norms: Vec<f64>,
}

impl EmbeddingStore {
    pub fn empty(dim: usize) -> Self {
        Self {
            dim,
            index: HashMap::new(),
            values: Vec::new(),
            norms: Vec::new(),
        }
    }

    pub fn from_vectors<S: Into<String>>(dim: usize, vectors: impl IntoIterator<Item = (S, Vec<f32>)>) -> Result<Self> {
        let mut store = Self::empty(dim);
        for (token, v) in vectors {
            if v.len() != dim {
                return Err(Error::InvalidArgument(format!("vector of dimension {} in a {dim}-d store", v.len())));
            }
            store.insert(token.into(), &v);
        }
        Ok(store)
    }

    /// Reads a word2vec text file: a `count dim` header, then one token and
    /// `dim` floats per line. A count that disagrees with the body only warns;
    /// a duplicate token replaces the earlier vector.
    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut lines = BufReader::new(file).lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::parse(path, 1, "missing header"))?
            .map_err(|e| Error::io(path, e))?;
        let mut fields = header.split_whitespace();
        let (Some(count), Some(dim), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(Error::parse(path, 1, "header must be `count dim`"));
        };
        let count: usize = count.parse().map_err(|_| Error::parse(path, 1, "bad vector count"))?;
        let dim: usize = dim.parse().map_err(|_| Error::parse(path, 1, "bad dimension"))?;
        if dim == 0 {
            return Err(Error::parse(path, 1, "dimension must be positive"));
        }

        let mut store = Self::empty(dim);
        let mut rows = 0;
        let mut v = Vec::with_capacity(dim);
        for (n, line) in lines.enumerate() {
            let line_no = n + 2;
            let line = line.map_err(|e| Error::io(path, e))?;
            let line = line.trim_end();
            if line.is_empty() {
                continue;
            }
            // Tokens may contain spaces; the last `dim` fields are the vector.
            let fields: Vec<&str> = line.split(' ').filter(|f| !f.is_empty()).collect();
            if fields.len() <= dim {
                return Err(Error::parse(
                    path,
                    line_no,
                    format!("expected a token and {dim} values, found {} fields", fields.len()),
                ));
            }
            let split = fields.len() - dim;
            let token = fields[..split].join(" ");
            v.clear();
            for f in &fields[split..] {
                let x: f32 = f
                    .parse()
                    .map_err(|_| Error::parse(path, line_no, format!("bad float `{f}`")))?;
                if !x.is_finite() {
                    return Err(Error::parse(path, line_no, format!("non-finite value `{f}`")));
                }
                v.push(x);
            }
            if store.index.contains_key(&token) {
                warn!("{}:{line_no}: duplicate token `{token}`, keeping the last vector", path.display());
            }
            store.insert(token, &v);
            rows += 1;
        }
        if rows != count {
            warn!("{}: header announces {count} vectors, file has {rows}", path.display());
        }
        Ok(store)
    }

    fn insert(&mut self, token: String, v: &[f32]) {
        let norm = v.iter().map(|&x| f64::from(x) * f64::from(x)).sum::<f64>().sqrt();
        match self.index.get(&token) {
            Some(&slot) => {
                self.values[slot * self.dim..(slot + 1) * self.dim].copy_from_slice(v);
                self.norms[slot] = norm;
            }
            None => {
                self.index.insert(token, self.norms.len());
                self.values.extend_from_slice(v);
                self.norms.push(norm);
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.norms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.norms.is_empty()
    }

    pub fn vector(&self, token: &str) -> Option<&[f32]> {
        let slot = *self.index.get(token)?;
        Some(&self.values[slot * self.dim..(slot + 1) * self.dim])
    }

    /// Vector for a question phrase: the mean of its in-vocabulary word vectors.
    pub fn phrase_vector(&self, phrase: &str) -> Option<Vec<f32>> {
        let mut sum = vec![0f64; self.dim];
        let mut n = 0usize;
        for word in tokenize(phrase) {
            if let Some(v) = self.vector(&word) {
                for (s, &x) in sum.iter_mut().zip(v) {
                    *s += f64::from(x);
                }
                n += 1;
            }
        }
        (n > 0).then(|| sum.into_iter().map(|s| (s / n as f64) as f32).collect())
    }

    /// Rescaled cosine of two stored tokens; `None` if either is missing.
    pub fn try_sim(&self, a: &str, b: &str) -> Option<f64> {
        Some(sim_vectors(self.vector(a)?, self.vector(b)?))
    }

    /// Rescaled cosine; neutral 0.5 when either vector is missing.
    pub fn sim(&self, a: &str, b: &str) -> f64 {
        self.try_sim(a, b).unwrap_or(NEUTRAL_SIMILARITY)
    }
}

pub fn cosine(a: &[f32], b: &[f32]) -> Option<f64> {
    let (mut dot, mut na, mut nb) = (0f64, 0f64, 0f64);
    for (&x, &y) in a.iter().zip(b) {
        let (x, y) = (f64::from(x), f64::from(y));
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return None;
    }
    Some((dot / (na.sqrt() * nb.sqrt())).clamp(-1.0, 1.0))
}

/// `(cosine + 1) / 2`, or the neutral value for a zero vector.
pub fn sim_vectors(a: &[f32], b: &[f32]) -> f64 {
    cosine(a, b).map_or(NEUTRAL_SIMILARITY, |c| (c + 1.0) / 2.0)
}

#[cfg(test)]
mod tests {
    use std::io::Write;

    use proptest::prelude::*;

    use super::*;

    fn write(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_text_format() {
        let f = write("2 3\nQ1 0.25 -1.5 3\nfrance 1e-3 0 2.5\n");
        let store = EmbeddingStore::load(f.path()).unwrap();
        assert_eq!(store.len(), 2);
        assert_eq!(store.dim(), 3);
        assert_eq!(store.vector("Q1").unwrap(), &[0.25, -1.5, 3.0]);
        assert_eq!(store.vector("france").unwrap(), &[0.001, 0.0, 2.5]);
        assert!(store.vector("croatia").is_none());
    }

    #[test]
    fn tolerates_wrong_header_count_and_duplicates() {
        let f = write("5 2\na 1 0\nb 0 1\na 0 2\n");
        let store = EmbeddingStore::load(f.path()).unwrap();
        assert_eq!(store.len(), 2);
        assert_eq!(store.vector("a").unwrap(), &[0.0, 2.0]);
        assert_eq!(store.sim("a", "b"), 1.0);
    }

    #[test]
    fn dimension_mismatch_names_the_line() {
        let f = write("2 3\na 1 2 3\nb 1 2\n");
        let err = EmbeddingStore::load(f.path()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn multi_word_tokens() {
        let f = write("1 2\nParis Saint-Germain 1 0\n");
        let store = EmbeddingStore::load(f.path()).unwrap();
        assert!(store.vector("Paris Saint-Germain").is_some());
    }

    #[test]
    fn anchor_similarities() {
        let store = EmbeddingStore::from_vectors(
            2,
            [
                ("x", vec![1.0, 0.0]),
                ("x2", vec![1.0, 0.0]),
                ("y", vec![0.0, 1.0]),
                ("neg", vec![-1.0, 0.0]),
                ("zero", vec![0.0, 0.0]),
            ],
        )
        .unwrap();
        assert_eq!(store.sim("x", "x2"), 1.0);
        assert_eq!(store.sim("x", "y"), 0.5);
        assert_eq!(store.sim("x", "neg"), 0.0);
        assert_eq!(store.sim("x", "zero"), NEUTRAL_SIMILARITY);
        assert_eq!(store.sim("x", "missing"), NEUTRAL_SIMILARITY);
        assert_eq!(store.try_sim("x", "missing"), None);
    }

    #[test]
    fn phrase_vector_averages_known_words() {
        let store =
            EmbeddingStore::from_vectors(2, [("2018", vec![1.0, 0.0]), ("final", vec![0.0, 3.0])]).unwrap();
        assert_eq!(store.phrase_vector("2018 Final").unwrap(), vec![0.5, 1.5]);
        assert_eq!(store.phrase_vector("final whistle").unwrap(), vec![0.0, 3.0]);
        assert!(store.phrase_vector("unknown words").is_none());
    }

    fn vec3() -> impl Strategy<Value = Vec<f32>> {
        proptest::collection::vec(-10f32..10f32, 3)
    }

    proptest! {
        #[test]
        fn sim_is_bounded_symmetric_and_scale_invariant(a in vec3(), b in vec3(), c in 0.01f32..100f32) {
            let s = sim_vectors(&a, &b);
            prop_assert!((0.0..=1.0).contains(&s));
            prop_assert_eq!(s, sim_vectors(&b, &a));
            let scaled: Vec<f32> = b.iter().map(|x| x * c).collect();
            prop_assert!((sim_vectors(&a, &scaled) - s).abs() < 1e-6);
        }
    }
}
