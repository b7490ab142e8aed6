use thiserror::Error;

#[derive(Debug, Error)]
pub enum PrepError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed TSV at line {line}: expected `author<TAB>text`")]
    MalformedTsv { line: usize },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RelevanceError {
    #[error("reference document has no tokens")]
    EmptyDocument,
    #[error("no document frequency for word `{0}`")]
    MissingDf(String),
    #[error("document frequency for `{word}` is {df}, outside 1..={num_users}")]
    InvalidDf {
        word: String,
        df: u64,
        num_users: u64,
    },
    #[error("user count must be at least 1")]
    NoUsers,
    #[error("every word was removed by the p_min threshold")]
    NoScoredWords,
    #[error("tf-idf scores have not been computed")]
    NotScored,
    #[error("invalid relevance config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("format error at line {line}: {reason}")]
    Format { line: usize, reason: String },
    #[error("zero vector for word `{0}`")]
    ZeroVector(String),
    #[error("zero-length vector")]
    ZeroNorm,
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
}

#[derive(Debug, Error, PartialEq)]
pub enum SignatureError {
    #[error("signature needs at least one word")]
    EmptySelection,
    #[error("word count must be at least 1 (got 0 for entry {0})")]
    ZeroCount(usize),
    #[error("invalid signature: {0}")]
    Invalid(String),
    #[error("corrupt signature: {0}")]
    Corrupt(String),
    #[error("value {0} is not representable as a 16-bit float")]
    NotRepresentable(f64),
    #[error("decoy pool has {available} eligible words, {requested} requested")]
    PoolTooSmall { available: usize, requested: usize },
    #[error("jitter sigma must be finite and non-negative")]
    InvalidSigma,
}

#[derive(Debug, Error, PartialEq)]
pub enum TransportError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("invalid transport problem: {0}")]
    InvalidProblem(String),
    #[error("instance too large for the exhaustive oracle ({rows}x{cols}, max 4x4)")]
    TooLarge { rows: usize, cols: usize },
    #[error("network simplex did not converge within {0} pivots")]
    NotConverged(usize),
}

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("submission contains no words")]
    EmptySubmission,
    #[error("no embedding model loaded")]
    ModelUnavailable,
    #[error("corrupt snapshot: {0}")]
    CorruptSnapshot(String),
    #[error("snapshot I/O on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("backend unreachable: {0}")]
    Connectivity(String),
    #[error("backend rejected request: {0}")]
    Rejected(String),
}

#[derive(Debug, Error, PartialEq)]
pub enum NetgraphError {
    #[error("need at least {needed} items, got {got}")]
    TooFew { needed: usize, got: usize },
    #[error("unknown id `{0}`")]
    UnknownId(String),
    #[error("neighbour count {n} must be in 1..{nodes}")]
    InvalidNeighbours { n: usize, nodes: usize },
    #[error("top eigenvalue is not positive; nothing to lay out")]
    DegenerateSpectrum,
    #[error("missing label for `{0}`")]
    MissingLabel(String),
    #[error("matrix format: {0}")]
    Format(String),
    #[error(transparent)]
    Transport(#[from] TransportError),
}

/// Errors from the end-to-end signing flow.
#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Prep(#[from] PrepError),
    #[error(transparent)]
    Relevance(#[from] RelevanceError),
    #[error(transparent)]
    Signature(#[from] SignatureError),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error("backend returned {got} vectors for {expected} words")]
    VectorCount { expected: usize, got: usize },
}
