//! Client-side signing flow against any [`DfService`]: reference document,
//! bag of words, DF submission, tf-idf, top-k selection, vector lookup.

use std::collections::BTreeSet;

use crate::backend::wire::{DfRequest, VectorsRequest};
use crate::backend::DfService;
use crate::error::PipelineError;
use crate::relevance::{bow_from_document, tfidf, top_k_words, user_df, DfVector, RelevanceConfig};
use crate::signature::{jitter_vectors, Signature};
use crate::textprep::{build_reference, english_wordlist, PrepConfig, RawHistory};

#[derive(Debug, Clone)]
pub struct SignOptions {
    pub prep: PrepConfig,
    pub relevance: RelevanceConfig,
    /// Extra words sent along with the real ones to blur what is selected.
    pub decoys: usize,
    /// Where decoys come from; the bundled English word list when `None`.
    pub decoy_pool: Option<Vec<String>>,
    pub jitter_sigma: f64,
    pub seed: u64,
}

impl Default for SignOptions {
    fn default() -> Self {
        Self {
            prep: PrepConfig::default(),
            relevance: RelevanceConfig::default(),
            decoys: 0,
            decoy_pool: None,
            jitter_sigma: 0.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SignOutcome {
    pub signature: Signature,
    /// Selected words with their counts, in signature row order.
    pub selected: Vec<(String, u64)>,
    pub decoys: Vec<String>,
    /// The DF response the backend returned.
    pub df: DfVector,
}

/// Runs the whole client flow for one user. Signature rows are ordered by
/// word so the row order reveals nothing about tf-idf rank.
pub fn sign_history(
    user_id: &str,
    history: &RawHistory,
    options: &SignOptions,
    service: &dyn DfService,
) -> Result<SignOutcome, PipelineError> {
    options.relevance.validate()?;
    let doc = build_reference(user_id, history, &options.prep);
    let bow = bow_from_document(&doc)?;
    let own = user_df(&bow)?;

    let decoys = if options.decoys > 0 {
        let owned;
        let pool: &[String] = match &options.decoy_pool {
            Some(p) => p,
            None => {
                owned = english_wordlist().to_sorted_vec();
                &owned
            }
        };
        let vocab: Vec<(String, u64)> = bow.counts.iter().map(|(w, c)| (w.clone(), *c)).collect();
        crate::signature::pad_selection(&vocab, options.decoys, pool, options.seed)?
            .split_off(vocab.len())
            .into_iter()
            .map(|(w, _)| w)
            .collect()
    } else {
        Vec::new()
    };

    let submitted: BTreeSet<String> = own.df.keys().chain(&decoys).cloned().collect();
    let response = service.submit_df(&DfRequest {
        user_id: user_id.to_string(),
        words: submitted.into_iter().collect(),
    })?;
    let df = DfVector {
        df: response.df,
        num_users: response.num_users,
    };

    let scored = tfidf(&bow, &df, options.relevance.p_min)?;
    let mut selected = top_k_words(&scored, options.relevance.k)?;
    selected.sort_by(|a, b| a.0.cmp(&b.0));

    let mut lookup: Vec<String> = selected
        .iter()
        .map(|(w, _)| w.clone())
        .chain(decoys.iter().cloned())
        .collect();
    lookup.sort();
    let vectors = service.fetch_vectors(&VectorsRequest {
        words: lookup.clone(),
    })?;
    if vectors.vectors.len() != lookup.len() {
        return Err(PipelineError::VectorCount {
            expected: lookup.len(),
            got: vectors.vectors.len(),
        });
    }
    let rows: Vec<Vec<f64>> = selected
        .iter()
        .map(|(w, _)| {
            let i = lookup
                .binary_search(w)
                .expect("selected words were looked up");
            vectors.vectors[i].clone()
        })
        .collect();
    let counts: Vec<u64> = selected.iter().map(|(_, c)| *c).collect();
    let mut signature = Signature::from_counts(user_id, rows, &counts)?;
    if options.jitter_sigma > 0.0 {
        signature = jitter_vectors(&signature, options.jitter_sigma, options.seed)?;
    }
    Ok(SignOutcome {
        signature,
        selected,
        decoys,
        df,
    })
}
