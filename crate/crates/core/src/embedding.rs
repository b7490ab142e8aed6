//! Reference word embedding: textual vector files, a deterministic synthetic
//! model for tests, hashed character-trigram vectors for unknown words, and
//! the cosine ground distance.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use sha2::{Digest, Sha256};

use crate::error::EmbeddingError;

pub const DEFAULT_DIM: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    dim: usize,
    table: HashMap<String, Vec<f64>>,
    oov_seed: u64,
}

/// Deterministic unit vector keyed by `(seed, domain, key)`.
fn hashed_unit_vector(seed: u64, domain: &str, key: &str, dim: usize) -> Vec<f64> {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(domain.as_bytes());
    hasher.update([0u8]);
    hasher.update(key.as_bytes());
    let digest: [u8; 32] = hasher.finalize().into();
    let mut rng = ChaCha20Rng::from_seed(digest);
    loop {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        let norm = l2_norm(&v);
        if norm > 0.0 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

pub fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `1 - x.y / (|x| |y|)`, clamped to `[0, 2]`.
pub fn cosine_distance(x: &[f64], y: &[f64]) -> Result<f64, EmbeddingError> {
    if x.len() != y.len() {
        return Err(EmbeddingError::DimensionMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let (nx, ny) = (l2_norm(x), l2_norm(y));
    if nx == 0.0 || ny == 0.0 {
        return Err(EmbeddingError::ZeroNorm);
    }
    Ok((1.0 - dot(x, y) / (nx * ny)).clamp(0.0, 2.0))
}

impl EmbeddingModel {
    /// Builds a model from explicit entries. Every vector must have length
    /// `dim`, be finite and be nonzero.
    pub fn from_entries<I>(dim: usize, entries: I, oov_seed: u64) -> Result<Self, EmbeddingError>
    where
        I: IntoIterator<Item = (String, Vec<f64>)>,
    {
        if dim == 0 {
            return Err(EmbeddingError::Format {
                line: 0,
                reason: "dimension must be at least 1".into(),
            });
        }
        let mut table = HashMap::new();
        for (word, v) in entries {
            if v.len() != dim {
                return Err(EmbeddingError::DimensionMismatch {
                    left: dim,
                    right: v.len(),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(EmbeddingError::Format {
                    line: 0,
                    reason: format!("non-finite component for `{word}`"),
                });
            }
            if v.iter().all(|&x| x == 0.0) {
                return Err(EmbeddingError::ZeroVector(word));
            }
            table.insert(word, v);
        }
        Ok(Self {
            dim,
            table,
            oov_seed,
        })
    }

    /// Every word gets a pseudo-random unit vector derived from `(seed, word)`.
    pub fn synthetic<I, S>(dim: usize, vocabulary: I, seed: u64) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        assert!(dim >= 1, "embedding dimension must be at least 1");
        let table = vocabulary
            .into_iter()
            .map(|w| {
                let w = w.as_ref();
                (w.to_string(), hashed_unit_vector(seed, "word", w, dim))
            })
            .collect();
        Self {
            dim,
            table,
            oov_seed: seed,
        }
    }

    pub fn parse(text: &str, oov_seed: u64) -> Result<Self, EmbeddingError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| EmbeddingError::Format {
            line: 1,
            reason: "empty file".into(),
        })?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let bad_header = || EmbeddingError::Format {
            line: 1,
            reason: format!("expected `<count> <dim>`, got `{header}`"),
        };
        if fields.len() != 2 {
            return Err(bad_header());
        }
        let count: usize = fields[0].parse().map_err(|_| bad_header())?;
        let dim: usize = fields[1].parse().map_err(|_| bad_header())?;
        if dim == 0 {
            return Err(bad_header());
        }

        let mut table = HashMap::with_capacity(count);
        let mut seen = 0usize;
        for (idx, line) in lines {
            let lineno = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let word = parts.next().unwrap_or_default().to_string();
            let mut v = Vec::with_capacity(dim);
            for tok in parts {
                let x: f64 = tok.parse().map_err(|_| EmbeddingError::Format {
                    line: lineno,
                    reason: format!("non-numeric component `{tok}`"),
                })?;
                if !x.is_finite() {
                    return Err(EmbeddingError::Format {
                        line: lineno,
                        reason: format!("non-finite component `{tok}`"),
                    });
                }
                v.push(x);
            }
            if v.len() != dim {
                return Err(EmbeddingError::Format {
                    line: lineno,
                    reason: format!("expected {dim} components, found {}", v.len()),
                });
            }
            if v.iter().all(|&x| x == 0.0) {
                return Err(EmbeddingError::ZeroVector(word));
            }
            seen += 1;
            table.insert(word, v);
        }
        if seen != count {
            return Err(EmbeddingError::Format {
                line: 1,
                reason: format!("header announces {count} entries, file has {seen}"),
            });
        }
        Ok(Self {
            dim,
            table,
            oov_seed,
        })
    }

    pub fn load(path: &Path, oov_seed: u64) -> Result<Self, EmbeddingError> {
        let text = fs::read_to_string(path).map_err(|source| EmbeddingError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text, oov_seed)
    }

    /// Textual vector format, words sorted so output is deterministic.
    pub fn to_text(&self) -> String {
        let mut words: Vec<&String> = self.table.keys().collect();
        words.sort();
        let mut out = format!("{} {}\n", words.len(), self.dim);
        for w in words {
            out.push_str(w);
            for x in &self.table[w] {
                let _ = write!(out, " {x}");
            }
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: &Path) -> io::Result<()> {
        let mut f = io::BufWriter::new(fs::File::create(path)?);
        f.write_all(self.to_text().as_bytes())?;
        f.flush()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn oov_seed(&self) -> u64 {
        self.oov_seed
    }

    pub fn contains(&self, word: &str) -> bool {
        self.table.contains_key(word)
    }

    pub fn words(&self) -> impl Iterator<Item = &String> {
        self.table.keys()
    }

    /// Stored vector, or the hashed trigram fallback for unknown words.
    pub fn vector(&self, word: &str) -> Vec<f64> {
        match self.table.get(word) {
            Some(v) => v.clone(),
            None => self.oov_vector(word),
        }
    }

    /// Mean of the hashed unit vectors of the word's character trigrams
    /// (with `<`/`>` boundary marks), renormalised to unit length.
    pub fn oov_vector(&self, word: &str) -> Vec<f64> {
        let marked: Vec<char> = format!("<{word}>").chars().collect();
        let grams: Vec<String> = if marked.len() < 3 {
            vec![marked.iter().collect()]
        } else {
            marked.windows(3).map(|w| w.iter().collect()).collect()
        };
        let mut acc = vec![0.0; self.dim];
        for g in &grams {
            for (a, x) in
                acc.iter_mut()
                    .zip(hashed_unit_vector(self.oov_seed, "trigram", g, self.dim))
            {
                *a += x;
            }
        }
        let norm = l2_norm(&acc);
        if norm < 1e-12 {
            return hashed_unit_vector(self.oov_seed, "word", word, self.dim);
        }
        acc.into_iter().map(|x| x / norm).collect()
    }
}
