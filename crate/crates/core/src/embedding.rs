//! Word vectors and the she − he gender direction.

use std::collections::HashMap;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const FEMALE_ANCHOR: &str = "she";
pub const MALE_ANCHOR: &str = "he";

#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    dim: usize,
    entries: HashMap<String, Vec<f64>>,
    gender_dir: Vec<f64>,
    gender_norm: f64,
}

/// Cosine between a word vector and the gender direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenderProjection {
    pub b: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

impl EmbeddingTable {
    /// Builds a table from already-parsed vectors. The first occurrence of a
    /// word wins.
    pub fn from_entries<I>(dim: usize, entries: I) -> Result<EmbeddingTable>
    where
        I: IntoIterator<Item = (String, Vec<f64>)>,
    {
        if dim == 0 {
            return Err(Error::Domain("embedding dimension must be positive".into()));
        }
        let mut map = HashMap::new();
        for (i, (word, vector)) in entries.into_iter().enumerate() {
            if vector.len() != dim {
                return Err(Error::DimensionMismatch {
                    line: i + 1,
                    expected: dim,
                    found: vector.len(),
                });
            }
            map.entry(word).or_insert(vector);
        }
        Self::finish(dim, map)
    }

    fn finish(dim: usize, entries: HashMap<String, Vec<f64>>) -> Result<EmbeddingTable> {
        let missing: Vec<&str> = [FEMALE_ANCHOR, MALE_ANCHOR]
            .into_iter()
            .filter(|w| !entries.contains_key(*w))
            .collect();
        if !missing.is_empty() {
            return Err(Error::MissingAnchorWords(missing.join(", ")));
        }
        let gender_dir: Vec<f64> = entries[FEMALE_ANCHOR]
            .iter()
            .zip(&entries[MALE_ANCHOR])
            .map(|(s, h)| s - h)
            .collect();
        let gender_norm = norm(&gender_dir);
        if gender_norm == 0.0 {
            return Err(Error::Domain(
                "\"she\" and \"he\" have identical vectors; gender direction is zero".into(),
            ));
        }
        Ok(EmbeddingTable {
            dim,
            entries,
            gender_dir,
            gender_norm,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn gender_dir(&self) -> &[f64] {
        &self.gender_dir
    }

    /// Exact match first, then the lowercased word.
    pub fn vector(&self, word: &str) -> Option<&[f64]> {
        self.entries
            .get(word)
            .or_else(|| self.entries.get(&word.to_lowercase()))
            .map(Vec::as_slice)
    }

    /// `None` for out-of-vocabulary words and zero vectors.
    pub fn gender_projection(&self, word: &str) -> Option<GenderProjection> {
        let w = self.vector(word)?;
        let w_norm = norm(w);
        if w_norm == 0.0 {
            return None;
        }
        Some(GenderProjection {
            b: dot(w, &self.gender_dir) / (w_norm * self.gender_norm),
        })
    }
}

/// Reads the word2vec text layout: a `count dim` header line followed by one
/// `word v1 … vdim` line per entry.
pub fn load_embeddings<R: BufRead>(reader: R) -> Result<EmbeddingTable> {
    let mut lines = reader.lines().enumerate();
    let (dim, declared) = loop {
        let Some((i, line)) = lines.next() else {
            return Err(Error::Parse {
                line: 1,
                message: "missing \"count dim\" header".into(),
            });
        };
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let parsed = match fields.as_slice() {
            [count, dim] => count.parse::<usize>().ok().zip(dim.parse::<usize>().ok()),
            _ => None,
        };
        match parsed {
            Some((count, dim)) if dim > 0 => break (dim, count),
            _ => {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("invalid header {line:?}, expected \"count dim\""),
                })
            }
        }
    };

    let mut entries = HashMap::with_capacity(declared);
    for (i, line) in lines {
        let line = line?;
        let lineno = i + 1;
        let mut fields = line.split_whitespace();
        let Some(word) = fields.next() else { continue };
        let vector = fields
            .map(|f| match f.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Error::Parse {
                    line: lineno,
                    message: format!("invalid vector component {f:?}"),
                }),
            })
            .collect::<Result<Vec<f64>>>()?;
        if vector.len() != dim {
            return Err(Error::DimensionMismatch {
                line: lineno,
                expected: dim,
                found: vector.len(),
            });
        }
        entries.entry(word.to_string()).or_insert(vector);
    }
    if entries.len() != declared {
        log::warn!(
            "embedding header declares {declared} entries, read {}",
            entries.len()
        );
    }
    EmbeddingTable::finish(dim, entries)
}
