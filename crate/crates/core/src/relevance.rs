//! Bag-of-words and document-frequency vectors, max-normalised tf-idf, and
//! top-k word selection.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::RelevanceError;
use crate::textprep::ReferenceDocument;

pub const DEFAULT_K: usize = 50;
pub const DEFAULT_P_MIN: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelevanceConfig {
    /// Signature size.
    pub k: usize,
    /// Words used by fewer than this fraction of users are not scored.
    pub p_min: f64,
}

impl Default for RelevanceConfig {
    fn default() -> Self {
        Self {
            k: DEFAULT_K,
            p_min: DEFAULT_P_MIN,
        }
    }
}

impl RelevanceConfig {
    pub fn validate(&self) -> Result<(), RelevanceError> {
        if self.k == 0 {
            return Err(RelevanceError::InvalidConfig("k must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.p_min) {
            return Err(RelevanceError::InvalidConfig(format!(
                "p_min must lie in [0, 1], got {}",
                self.p_min
            )));
        }
        Ok(())
    }
}

/// Word occurrence counts of one reference document, optionally with tf-idf
/// scores attached.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BowVector {
    pub counts: BTreeMap<String, u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tfidf: Option<BTreeMap<String, f64>>,
}

impl BowVector {
    pub fn from_counts<I, S>(counts: I) -> Self
    where
        I: IntoIterator<Item = (S, u64)>,
        S: Into<String>,
    {
        Self {
            counts: counts
                .into_iter()
                .filter(|(_, c)| *c > 0)
                .map(|(w, c)| (w.into(), c))
                .collect(),
            tfidf: None,
        }
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn max_count(&self) -> u64 {
        self.counts.values().copied().max().unwrap_or(0)
    }
}

/// Word to user-count map. A user DF vector holds only ones and leaves
/// `num_users` at 0; the global and truncated forms carry the user count.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DfVector {
    pub df: BTreeMap<String, u64>,
    pub num_users: u64,
}

impl DfVector {
    pub fn words(&self) -> impl Iterator<Item = &String> {
        self.df.keys()
    }
}

pub fn bow_from_document(doc: &ReferenceDocument) -> Result<BowVector, RelevanceError> {
    if doc.tokens.is_empty() {
        return Err(RelevanceError::EmptyDocument);
    }
    let mut counts = BTreeMap::new();
    for t in &doc.tokens {
        *counts.entry(t.clone()).or_insert(0u64) += 1;
    }
    Ok(BowVector {
        counts,
        tfidf: None,
    })
}

/// Presence-only view of a BoW vector: every word maps to 1.
pub fn user_df(bow: &BowVector) -> Result<DfVector, RelevanceError> {
    if bow.is_empty() {
        return Err(RelevanceError::EmptyDocument);
    }
    Ok(DfVector {
        df: bow.counts.keys().map(|w| (w.clone(), 1)).collect(),
        num_users: 0,
    })
}

/// Scores every word as `(f_t / max_x f_x) * ln(num_users / df_t)`.
///
/// Words whose user fraction `df_t / num_users` falls below `p_min` are left
/// out of the score map but stay in the counts.
pub fn tfidf(bow: &BowVector, trunc: &DfVector, p_min: f64) -> Result<BowVector, RelevanceError> {
    if bow.is_empty() {
        return Err(RelevanceError::EmptyDocument);
    }
    if trunc.num_users == 0 {
        return Err(RelevanceError::NoUsers);
    }
    let users = trunc.num_users as f64;
    let max_f = bow.max_count() as f64;
    let mut scores = BTreeMap::new();
    for (word, &count) in &bow.counts {
        let df = *trunc
            .df
            .get(word)
            .ok_or_else(|| RelevanceError::MissingDf(word.clone()))?;
        if df == 0 || df > trunc.num_users {
            return Err(RelevanceError::InvalidDf {
                word: word.clone(),
                df,
                num_users: trunc.num_users,
            });
        }
        let df = df as f64;
        if df / users < p_min {
            continue;
        }
        let tf = count as f64 / max_f;
        let idf = if df == users { 0.0 } else { (users / df).ln() };
        scores.insert(word.clone(), tf * idf);
    }
    Ok(BowVector {
        counts: bow.counts.clone(),
        tfidf: Some(scores),
    })
}

/// The `k` best-scoring words with their counts, by descending score and
/// then ascending word.
pub fn top_k_words(bow: &BowVector, k: usize) -> Result<Vec<(String, u64)>, RelevanceError> {
    let scores = bow.tfidf.as_ref().ok_or(RelevanceError::NotScored)?;
    if scores.is_empty() {
        return Err(RelevanceError::NoScoredWords);
    }
    let mut ranked: Vec<(&String, f64)> = scores.iter().map(|(w, s)| (w, *s)).collect();
    ranked.sort_by(|a, b| match b.1.partial_cmp(&a.1) {
        Some(Ordering::Equal) | None => a.0.cmp(b.0),
        Some(o) => o,
    });
    Ok(ranked
        .into_iter()
        .take(k)
        .map(|(w, _)| (w.clone(), bow.counts[w]))
        .collect())
}
