//! Private-text similarity toolkit.
//!
//! A user's self-written messages are reduced to a *signature*: the top-k
//! tf-idf words of their history, mapped through a reference word embedding
//! to a `k x D` vector matrix, paired with the normalised counts of those
//! words. Two signatures are compared with the exact Word Mover's Distance
//! under cosine ground distance. A backend keeps only global document
//! frequencies and the reference embedding.

pub mod backend;
pub mod embedding;
pub mod error;
pub mod netgraph;
pub mod perf;
pub mod pipeline;
pub mod relevance;
pub mod signature;
pub mod synth;
pub mod textprep;
pub mod transport;

pub use backend::{Backend, DfService, Registry};
pub use embedding::{cosine_distance, EmbeddingModel};
pub use error::*;
pub use netgraph::{LabeledNetwork, SimilarityMatrix};
pub use pipeline::{sign_history, SignOptions};
pub use relevance::{BowVector, DfVector, RelevanceConfig};
pub use signature::Signature;
pub use textprep::{PrepConfig, RawHistory, ReferenceDocument};
pub use transport::{similarity, wmd, TransportPlan};
