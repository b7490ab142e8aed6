//! The backend: a registry of per-user word sets that maintains the global
//! document-frequency vector, answers truncated DF queries, and resolves
//! words to vectors of the (secret) reference embedding.
//!
//! Nothing here ever sees occurrence counts, tf-idf scores or similarities.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::RwLock;

use serde::{Deserialize, Serialize};

use crate::embedding::EmbeddingModel;
use crate::error::BackendError;
use crate::relevance::{bow_from_document, user_df, DfVector};
use crate::textprep::{build_reference, PrepConfig, RawHistory};

pub const SNAPSHOT_VERSION: u32 = 1;

/// Request and response bodies exchanged with the backend.
pub mod wire {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Serialize};

    /// `POST /v1/df`
    #[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct DfRequest {
        pub user_id: String,
        pub words: Vec<String>,
    }

    #[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct DfResponse {
        pub df: BTreeMap<String, u64>,
        pub num_users: u64,
    }

    /// `POST /v1/vectors`
    #[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct VectorsRequest {
        pub words: Vec<String>,
    }

    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct VectorsResponse {
        pub dim: usize,
        pub vectors: Vec<Vec<f64>>,
    }

    /// `GET /v1/health`
    #[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
    pub struct HealthResponse {
        pub num_users: u64,
        pub vocab_size: u64,
    }

    #[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
    pub struct ErrorResponse {
        pub error: String,
    }
}

use wire::{DfRequest, DfResponse, HealthResponse, VectorsRequest, VectorsResponse};

/// What a signing client needs from a backend.
pub trait DfService: Send + Sync {
    fn submit_df(&self, request: &DfRequest) -> Result<DfResponse, BackendError>;
    fn fetch_vectors(&self, request: &VectorsRequest) -> Result<VectorsResponse, BackendError>;
}

impl<T: DfService + ?Sized> DfService for &T {
    fn submit_df(&self, request: &DfRequest) -> Result<DfResponse, BackendError> {
        (**self).submit_df(request)
    }

    fn fetch_vectors(&self, request: &VectorsRequest) -> Result<VectorsResponse, BackendError> {
        (**self).fetch_vectors(request)
    }
}

impl<T: DfService + ?Sized> DfService for std::sync::Arc<T> {
    fn submit_df(&self, request: &DfRequest) -> Result<DfResponse, BackendError> {
        (**self).submit_df(request)
    }

    fn fetch_vectors(&self, request: &VectorsRequest) -> Result<VectorsResponse, BackendError> {
        (**self).fetch_vectors(request)
    }
}

/// Per-user word sets plus their aggregate document frequencies.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Registry {
    users: BTreeMap<String, BTreeSet<String>>,
    global_df: BTreeMap<String, u64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Snapshot {
    version: u32,
    users: BTreeMap<String, BTreeSet<String>>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_users(&self) -> u64 {
        self.users.len() as u64
    }

    pub fn vocab_size(&self) -> u64 {
        self.global_df.len() as u64
    }

    pub fn global_df(&self) -> DfVector {
        DfVector {
            df: self.global_df.clone(),
            num_users: self.num_users(),
        }
    }

    pub fn user_words(&self, user_id: &str) -> Option<&BTreeSet<String>> {
        self.users.get(user_id)
    }

    /// Registers or replaces a user's word set and returns the global DF
    /// restricted to those words, with the user count after registration.
    pub fn submit(
        &mut self,
        user_id: &str,
        words: BTreeSet<String>,
    ) -> Result<DfVector, BackendError> {
        if words.is_empty() {
            return Err(BackendError::EmptySubmission);
        }
        if let Some(previous) = self.users.remove(user_id) {
            for w in previous {
                if let Some(count) = self.global_df.get_mut(&w) {
                    *count -= 1;
                    if *count == 0 {
                        self.global_df.remove(&w);
                    }
                }
            }
        }
        for w in &words {
            *self.global_df.entry(w.clone()).or_insert(0) += 1;
        }
        let df = words
            .iter()
            .map(|w| (w.clone(), self.global_df[w]))
            .collect();
        self.users.insert(user_id.to_string(), words);
        Ok(DfVector {
            df,
            num_users: self.num_users(),
        })
    }

    /// Recomputes the aggregate from the per-user sets and compares.
    pub fn is_consistent(&self) -> bool {
        let mut expected: BTreeMap<String, u64> = BTreeMap::new();
        for words in self.users.values() {
            for w in words {
                *expected.entry(w.clone()).or_insert(0) += 1;
            }
        }
        expected == self.global_df
            && self
                .global_df
                .values()
                .all(|&c| c >= 1 && c <= self.num_users())
    }

    pub fn to_snapshot_json(&self) -> String {
        let snap = Snapshot {
            version: SNAPSHOT_VERSION,
            users: self.users.clone(),
        };
        serde_json::to_string_pretty(&snap).expect("registry serialises")
    }

    pub fn from_snapshot_json(text: &str) -> Result<Self, BackendError> {
        let snap: Snapshot =
            serde_json::from_str(text).map_err(|e| BackendError::CorruptSnapshot(e.to_string()))?;
        if snap.version != SNAPSHOT_VERSION {
            return Err(BackendError::CorruptSnapshot(format!(
                "unsupported snapshot version {}",
                snap.version
            )));
        }
        let mut registry = Registry::new();
        for (user, words) in snap.users {
            registry.submit(&user, words).map_err(|_| {
                BackendError::CorruptSnapshot(format!("user `{user}` has no words"))
            })?;
        }
        Ok(registry)
    }

    /// Writes the snapshot next to `path` and renames it into place.
    pub fn save(&self, path: &Path) -> Result<(), BackendError> {
        let io_err = |source| BackendError::Io {
            path: path.display().to_string(),
            source,
        };
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, self.to_snapshot_json()).map_err(io_err)?;
        fs::rename(&tmp, path).map_err(io_err)
    }

    pub fn load(path: &Path) -> Result<Self, BackendError> {
        let text = fs::read_to_string(path).map_err(|source| BackendError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_snapshot_json(&text)
    }
}

/// In-process backend: a registry behind a single-writer lock plus an
/// optional embedding model.
#[derive(Debug, Default)]
pub struct Backend {
    registry: RwLock<Registry>,
    model: Option<EmbeddingModel>,
    dirty: AtomicBool,
}

impl Backend {
    pub fn new(model: Option<EmbeddingModel>) -> Self {
        Self::with_registry(Registry::new(), model)
    }

    pub fn with_registry(registry: Registry, model: Option<EmbeddingModel>) -> Self {
        Self {
            registry: RwLock::new(registry),
            model,
            dirty: AtomicBool::new(false),
        }
    }

    pub fn model(&self) -> Option<&EmbeddingModel> {
        self.model.as_ref()
    }

    pub fn registry(&self) -> Registry {
        self.registry
            .read()
            .expect("registry lock poisoned")
            .clone()
    }

    pub fn health(&self) -> HealthResponse {
        let reg = self.registry.read().expect("registry lock poisoned");
        HealthResponse {
            num_users: reg.num_users(),
            vocab_size: reg.vocab_size(),
        }
    }

    /// Clears and returns the "modified since last call" flag.
    pub fn take_dirty(&self) -> bool {
        self.dirty.swap(false, Ordering::AcqRel)
    }

    pub fn save_snapshot(&self, path: &Path) -> Result<(), BackendError> {
        let reg = self.registry.read().expect("registry lock poisoned");
        reg.save(path)
    }
}

impl DfService for Backend {
    fn submit_df(&self, request: &DfRequest) -> Result<DfResponse, BackendError> {
        let words: BTreeSet<String> = request.words.iter().cloned().collect();
        let trunc = {
            let mut reg = self.registry.write().expect("registry lock poisoned");
            reg.submit(&request.user_id, words)?
        };
        self.dirty.store(true, Ordering::Release);
        Ok(DfResponse {
            df: trunc.df,
            num_users: trunc.num_users,
        })
    }

    fn fetch_vectors(&self, request: &VectorsRequest) -> Result<VectorsResponse, BackendError> {
        let model = self.model.as_ref().ok_or(BackendError::ModelUnavailable)?;
        Ok(VectorsResponse {
            dim: model.dim(),
            vectors: request.words.iter().map(|w| model.vector(w)).collect(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SeedFailure {
    pub path: PathBuf,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SeedReport {
    pub added: usize,
    pub skipped: Vec<SeedFailure>,
}

/// Submits the word set of every seed document in `dir` (one file per
/// pseudo-user, registered as `seed:<file stem>`). Unreadable or empty
/// documents are skipped and reported.
pub fn seed_registry(
    dir: &Path,
    prep: &PrepConfig,
    service: &dyn DfService,
) -> Result<SeedReport, BackendError> {
    let entries = fs::read_dir(dir).map_err(|source| BackendError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.is_file())
        .collect();
    paths.sort();

    let mut report = SeedReport::default();
    for path in paths {
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let user_id = format!("seed:{stem}");
        let history = match RawHistory::from_path(&path) {
            Ok(h) => h,
            Err(e) => {
                report.skipped.push(SeedFailure {
                    path,
                    reason: e.to_string(),
                });
                continue;
            }
        };
        let doc = build_reference(user_id.clone(), &history, prep);
        let Ok(df) = bow_from_document(&doc).and_then(|bow| user_df(&bow)) else {
            report.skipped.push(SeedFailure {
                path,
                reason: "document is empty after filtering".into(),
            });
            continue;
        };
        let request = DfRequest {
            user_id,
            words: df.df.into_keys().collect(),
        };
        match service.submit_df(&request) {
            Ok(_) => report.added += 1,
            Err(e @ BackendError::Connectivity(_)) => return Err(e),
            Err(e) => report.skipped.push(SeedFailure {
                path,
                reason: e.to_string(),
            }),
        }
    }
    Ok(report)
}
