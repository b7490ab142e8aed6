//! Seeded two-class corpus for end-to-end evaluation without real data.
//!
//! Each class owns a disjoint slice of the bundled English word list as its
//! topic vocabulary; a third slice is shared filler. Every user writes short
//! messages mixing topic and filler words. The accompanying embedding places
//! each class's topic words around its own random centroid.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::backend::wire::DfRequest;
use crate::backend::{Backend, DfService};
use crate::embedding::EmbeddingModel;
use crate::error::PipelineError;
use crate::netgraph::labels_to_csv;
use crate::pipeline::{sign_history, SignOptions};
use crate::relevance::{bow_from_document, user_df};
use crate::signature::Signature;
use crate::textprep::{build_reference, english_stopwords, english_wordlist, RawHistory};

pub const CLASS_LABELS: [&str; 2] = ["A", "B"];

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub users_per_class: usize,
    pub seeds_per_class: usize,
    pub topic_words: usize,
    pub filler_words: usize,
    pub messages_per_user: usize,
    pub words_per_message: usize,
    /// Probability that a token is a topic word rather than filler.
    pub topic_share: f64,
    pub dim: usize,
    /// Weight of the shared class centroid in a topic word's vector.
    pub cluster_strength: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            users_per_class: 30,
            seeds_per_class: 10,
            topic_words: 80,
            filler_words: 40,
            messages_per_user: 40,
            words_per_message: 8,
            topic_share: 0.6,
            dim: 100,
            cluster_strength: 1.0,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthUser {
    pub id: String,
    pub label: String,
    pub history: RawHistory,
}

#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub users: Vec<SynthUser>,
    pub seeds: Vec<SynthUser>,
    pub model: EmbeddingModel,
}

fn gaussian_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
    let n = crate::embedding::l2_norm(&v);
    v.into_iter().map(|x| x / n).collect()
}

fn history(
    rng: &mut ChaCha8Rng,
    topic: &[String],
    filler: &[String],
    config: &SynthConfig,
) -> RawHistory {
    let mut h = RawHistory::new();
    for _ in 0..config.messages_per_user {
        let words: Vec<&str> = (0..config.words_per_message)
            .map(|_| {
                let pool = if rng.random_bool(config.topic_share) {
                    topic
                } else {
                    filler
                };
                pool[rng.random_range(0..pool.len())].as_str()
            })
            .collect();
        h.push(true, words.join(" "));
    }
    h
}

/// Generates the corpus. Panics if the bundled word list is too small for
/// the requested vocabulary sizes.
pub fn generate(config: &SynthConfig) -> SynthCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let stop = english_stopwords();
    let mut words: Vec<String> = english_wordlist()
        .to_sorted_vec()
        .into_iter()
        .filter(|w| !stop.contains(w) && w.chars().all(|c| c.is_ascii_lowercase()))
        .collect();
    words.shuffle(&mut rng);
    let needed = 2 * config.topic_words + config.filler_words;
    assert!(
        words.len() >= needed,
        "word list has {} usable words, need {needed}",
        words.len()
    );
    let topics = [
        words[..config.topic_words].to_vec(),
        words[config.topic_words..2 * config.topic_words].to_vec(),
    ];
    let filler = words[2 * config.topic_words..needed].to_vec();

    let mut entries = Vec::with_capacity(needed);
    for topic in &topics {
        let centroid = gaussian_unit(&mut rng, config.dim);
        for w in topic {
            let noise = gaussian_unit(&mut rng, config.dim);
            let v = centroid
                .iter()
                .zip(&noise)
                .map(|(c, n)| config.cluster_strength * c + n)
                .collect();
            entries.push((w.clone(), v));
        }
    }
    for w in &filler {
        entries.push((w.clone(), gaussian_unit(&mut rng, config.dim)));
    }
    let model = EmbeddingModel::from_entries(config.dim, entries, config.seed)
        .expect("generated vectors are valid");

    let make = |prefix: &str, per_class: usize, rng: &mut ChaCha8Rng| {
        let mut out = Vec::with_capacity(2 * per_class);
        for i in 0..2 * per_class {
            let class = i % 2;
            out.push(SynthUser {
                id: format!("{prefix}{i:03}"),
                label: CLASS_LABELS[class].to_string(),
                history: history(rng, &topics[class], &filler, config),
            });
        }
        out
    };
    let seeds = make("seed", config.seeds_per_class, &mut rng);
    let users = make("user", config.users_per_class, &mut rng);
    SynthCorpus {
        users,
        seeds,
        model,
    }
}

fn to_plain_text(h: &RawHistory) -> String {
    let mut s = String::new();
    for m in h.messages.iter().filter(|m| m.author_is_self) {
        s.push_str(&m.text);
        s.push('\n');
    }
    s
}

impl SynthCorpus {
    pub fn labels(&self) -> BTreeMap<String, String> {
        self.users
            .iter()
            .map(|u| (u.id.clone(), u.label.clone()))
            .collect()
    }

    /// Writes `users/<id>.txt`, `seeds/<id>.txt`, `labels.csv` and
    /// `model.vec` under `dir`.
    pub fn write_to(&self, dir: &Path) -> io::Result<()> {
        for (sub, list) in [("users", &self.users), ("seeds", &self.seeds)] {
            let d = dir.join(sub);
            fs::create_dir_all(&d)?;
            for u in list {
                fs::write(d.join(format!("{}.txt", u.id)), to_plain_text(&u.history))?;
            }
        }
        fs::write(dir.join("labels.csv"), labels_to_csv(&self.labels()))?;
        self.model.save(&dir.join("model.vec"))
    }
}

/// Registers each seed user's word set; users whose documents end up empty
/// are skipped. Returns how many were registered.
pub fn register_seeds(
    seeds: &[SynthUser],
    options: &SignOptions,
    service: &dyn DfService,
) -> Result<usize, PipelineError> {
    let mut added = 0;
    for s in seeds {
        let doc = build_reference(s.id.clone(), &s.history, &options.prep);
        let Ok(df) = bow_from_document(&doc).and_then(|b| user_df(&b)) else {
            continue;
        };
        service.submit_df(&DfRequest {
            user_id: s.id.clone(),
            words: df.df.into_keys().collect(),
        })?;
        added += 1;
    }
    Ok(added)
}

/// Runs the full client flow for every user against a fresh in-process
/// backend holding the corpus model and its seed users. Users sign in order.
pub fn sign_corpus(
    corpus: &SynthCorpus,
    options: &SignOptions,
) -> Result<Vec<Signature>, PipelineError> {
    let backend = Backend::new(Some(corpus.model.clone()));
    register_seeds(&corpus.seeds, options, &backend)?;
    corpus
        .users
        .iter()
        .map(|u| sign_history(&u.id, &u.history, options, &backend).map(|o| o.signature))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textprep::{build_reference, PrepConfig};

    #[test]
    fn shape_and_balance() {
        let c = generate(&SynthConfig::default());
        assert_eq!(c.users.len(), 60);
        assert_eq!(c.seeds.len(), 20);
        let a = c.users.iter().filter(|u| u.label == "A").count();
        assert_eq!(a, 30);
        assert_eq!(c.model.len(), 200);
        assert_eq!(c.model.dim(), 100);
    }

    #[test]
    fn histories_survive_preprocessing() {
        let c = generate(&SynthConfig::default());
        let prep = PrepConfig::default();
        for u in c.users.iter().chain(&c.seeds) {
            let doc = build_reference(u.id.clone(), &u.history, &prep);
            assert_eq!(doc.tokens.len(), 320, "{}", u.id);
        }
    }

    #[test]
    fn seeded_and_deterministic() {
        let a = generate(&SynthConfig::default());
        let b = generate(&SynthConfig::default());
        assert_eq!(a.users[5].history, b.users[5].history);
        assert_eq!(a.model.to_text(), b.model.to_text());
        let c = generate(&SynthConfig {
            seed: 8,
            ..SynthConfig::default()
        });
        assert_ne!(a.users[5].history, c.users[5].history);
    }

    #[test]
    fn written_layout() {
        let dir = tempfile::tempdir().unwrap();
        let c = generate(&SynthConfig {
            users_per_class: 2,
            seeds_per_class: 1,
            ..SynthConfig::default()
        });
        c.write_to(dir.path()).unwrap();
        assert_eq!(fs::read_dir(dir.path().join("users")).unwrap().count(), 4);
        assert_eq!(fs::read_dir(dir.path().join("seeds")).unwrap().count(), 2);
        let labels = fs::read_to_string(dir.path().join("labels.csv")).unwrap();
        assert!(labels.starts_with("id,label\nuser000,A\n"));
        let model = EmbeddingModel::load(&dir.path().join("model.vec"), 0).unwrap();
        assert_eq!(model.len(), 200);
    }

    #[test]
    fn clusters_are_recoverable() {
        use crate::netgraph::{knn_accuracy, pairwise_matrix, LabeledNetwork};
        let c = generate(&SynthConfig::default());
        let sigs = sign_corpus(&c, &SignOptions::default()).unwrap();
        assert!(sigs.iter().all(|s| s.k() == 50));
        let net = LabeledNetwork::new(pairwise_matrix(&sigs, None).unwrap(), c.labels()).unwrap();
        for n in [1, 3, 5] {
            assert_eq!(knn_accuracy(&net, n).unwrap(), 1.0);
        }
    }
}
