//! `wordsig` command line: backend server, signing client and evaluation
//! tools.

pub mod client;
pub mod server;

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use wordsig_core::backend::{seed_registry, Backend, Registry};
use wordsig_core::error::*;
use wordsig_core::netgraph::{
    knn_accuracy, labels_from_csv, layout_to_csv, mds_layout, pairwise_matrix, LabeledNetwork,
    SimilarityMatrix,
};
use wordsig_core::perf::{bench_compare, bench_to_csv};
use wordsig_core::pipeline::{sign_history, SignOptions};
use wordsig_core::relevance::{bow_from_document, user_df, RelevanceConfig};
use wordsig_core::signature::Signature;
use wordsig_core::synth::{generate, sign_corpus, SynthConfig, SynthCorpus, SynthUser};
use wordsig_core::textprep::{build_reference, PrepConfig, RawHistory, WordList};
use wordsig_core::transport::{plan_to_csv, similarity_from_distance, wmd};
use wordsig_core::EmbeddingModel;

use client::HttpBackend;
use server::SnapshotPolicy;

#[derive(Debug, Parser)]
#[command(
    name = "wordsig",
    version,
    about = "Private text similarity via word-vector signatures"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the DF / vector backend over HTTP.
    Serve(ServeArgs),
    /// Register a directory of seed documents with a running backend.
    Seed(SeedArgs),
    /// Build a signature file from a message history.
    Sign(SignArgs),
    /// Word Mover's Distance and similarity of two signature files.
    Compare(CompareArgs),
    /// Pairwise similarity matrix (CSV) over signature files.
    Matrix(MatrixArgs),
    /// n-nearest-neighbour accuracy from a matrix or a labelled corpus.
    Classify(ClassifyArgs),
    /// Classical MDS layout (CSV) of a similarity matrix.
    Mds(MdsArgs),
    /// Time signature comparison for several k.
    Bench(BenchArgs),
    /// Print a signature file as JSON.
    Inspect(InspectArgs),
    /// Print the bag of words and presence vector of a history as JSON.
    Bow(BowArgs),
    /// Write a synthetic two-class corpus.
    SynthCorpus(SynthArgs),
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "WORDSIG_LISTEN", default_value = "127.0.0.1:8750")]
    pub listen: String,
    /// Embedding model in word2vec text format.
    #[arg(long, env = "WORDSIG_MODEL")]
    pub model: Option<PathBuf>,
    #[arg(long, env = "WORDSIG_OOV_SEED", default_value_t = 0)]
    pub oov_seed: u64,
    /// Registry snapshot; restored at start-up when it exists.
    #[arg(long, env = "WORDSIG_SNAPSHOT")]
    pub snapshot: Option<PathBuf>,
    /// Seconds between snapshot writes.
    #[arg(long, env = "WORDSIG_SNAPSHOT_INTERVAL", default_value_t = 30)]
    pub snapshot_interval: u64,
}

#[derive(Debug, Clone, Args)]
pub struct BackendArgs {
    #[arg(long, env = "WORDSIG_BACKEND", default_value = "http://127.0.0.1:8750")]
    pub backend: String,
    /// Request timeout in seconds.
    #[arg(long, env = "WORDSIG_TIMEOUT", default_value_t = 30)]
    pub timeout: u64,
}

impl BackendArgs {
    fn client(&self) -> HttpBackend {
        HttpBackend::new(&self.backend, Duration::from_secs(self.timeout))
    }
}

#[derive(Debug, Clone, Args)]
pub struct PrepArgs {
    /// Replace the bundled English stop list (one word per line).
    #[arg(long, env = "WORDSIG_STOPWORDS")]
    pub stopwords: Option<PathBuf>,
    #[arg(long)]
    pub no_language_filter: bool,
    /// Strip leading `#` / `@` from hashtags and mentions.
    #[arg(long)]
    pub strip_tags: bool,
}

impl PrepArgs {
    fn config(&self) -> Result<PrepConfig, Failure> {
        let mut config = PrepConfig::default();
        if let Some(path) = &self.stopwords {
            config.stopwords = WordList::load(path)?;
        }
        config.language_filter = !self.no_language_filter;
        config.keep_tags = !self.strip_tags;
        Ok(config)
    }
}

#[derive(Debug, Args)]
pub struct SeedArgs {
    pub dir: PathBuf,
    #[command(flatten)]
    pub backend: BackendArgs,
    #[command(flatten)]
    pub prep: PrepArgs,
}

#[derive(Debug, Clone, Args)]
pub struct RelevanceArgs {
    #[arg(long, env = "WORDSIG_K", default_value_t = 50)]
    pub k: usize,
    #[arg(long, env = "WORDSIG_P_MIN", default_value_t = 0.05)]
    pub p_min: f64,
}

#[derive(Debug, Args)]
pub struct SignArgs {
    /// Plain text (one message per line) or `.tsv` (`author<TAB>text`).
    pub history: PathBuf,
    /// Defaults to the history file stem.
    #[arg(long)]
    pub user_id: Option<String>,
    /// Defaults to `<user id>.afsg` in the current directory.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub relevance: RelevanceArgs,
    #[arg(long, env = "WORDSIG_DECOYS", default_value_t = 0)]
    pub decoys: usize,
    /// Word list to draw decoys from; the bundled English list by default.
    #[arg(long)]
    pub decoy_pool: Option<PathBuf>,
    #[arg(long, env = "WORDSIG_JITTER", default_value_t = 0.0)]
    pub jitter: f64,
    #[arg(long, env = "WORDSIG_SEED", default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub backend: BackendArgs,
    #[command(flatten)]
    pub prep: PrepArgs,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    pub a: PathBuf,
    pub b: PathBuf,
    /// Write the optimal flow matrix here as CSV.
    #[arg(long)]
    pub plan: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MatrixArgs {
    #[arg(required = true, num_args = 2..)]
    pub signatures: Vec<PathBuf>,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    #[arg(long, env = "WORDSIG_WORKERS", default_value_t = 1)]
    pub workers: usize,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// Similarity matrix CSV (needs --labels).
    #[arg(long, conflicts_with = "corpus", required_unless_present = "corpus")]
    pub matrix: Option<PathBuf>,
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Corpus directory with users/, seeds/, labels.csv and model.vec.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "1,3,5,7,9")]
    pub n: Vec<usize>,
    /// Signature sizes to evaluate in corpus mode.
    #[arg(long, value_delimiter = ',', default_value = "50")]
    pub k: Vec<usize>,
    #[arg(long, env = "WORDSIG_P_MIN", default_value_t = 0.05)]
    pub p_min: f64,
    #[arg(long, env = "WORDSIG_OOV_SEED", default_value_t = 0)]
    pub oov_seed: u64,
    /// Permute the labels with this seed before scoring (control run).
    #[arg(long)]
    pub shuffle_labels: Option<u64>,
    #[arg(long, env = "WORDSIG_WORKERS", default_value_t = 1)]
    pub workers: usize,
    #[command(flatten)]
    pub prep: PrepArgs,
}

#[derive(Debug, Args)]
pub struct MdsArgs {
    pub matrix: PathBuf,
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "10,50,100,200,400")]
    pub k: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    pub repeats: usize,
    #[arg(long, default_value_t = 100)]
    pub dim: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    pub signature: PathBuf,
    /// Include vectors and weights.
    #[arg(long)]
    pub full: bool,
}

#[derive(Debug, Args)]
pub struct BowArgs {
    pub history: PathBuf,
    #[command(flatten)]
    pub prep: PrepArgs,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    pub out: PathBuf,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value_t = 30)]
    pub users_per_class: usize,
    #[arg(long, default_value_t = 10)]
    pub seeds_per_class: usize,
    #[arg(long, default_value_t = 100)]
    pub dim: usize,
}

/// Failure classes, each with its own process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    Io,
    Format,
    Connectivity,
    Rejected,
    Invalid,
}

impl FailureKind {
    pub fn exit_code(self) -> i32 {
        match self {
            FailureKind::Io => 3,
            FailureKind::Format => 4,
            FailureKind::Connectivity => 5,
            FailureKind::Rejected => 6,
            FailureKind::Invalid => 7,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Failure {
    pub kind: FailureKind,
    pub error: String,
}

impl Failure {
    pub fn new(kind: FailureKind, error: impl fmt::Display) -> Self {
        Self {
            kind,
            error: error.to_string(),
        }
    }

    fn io(path: &Path, e: std::io::Error) -> Self {
        Self::new(FailureKind::Io, format!("{}: {e}", path.display()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("failure serialises")
    }
}

impl From<PrepError> for Failure {
    fn from(e: PrepError) -> Self {
        let kind = match e {
            PrepError::Io { .. } => FailureKind::Io,
            PrepError::MalformedTsv { .. } => FailureKind::Format,
        };
        Self::new(kind, e)
    }
}

impl From<RelevanceError> for Failure {
    fn from(e: RelevanceError) -> Self {
        Self::new(FailureKind::Invalid, e)
    }
}

impl From<EmbeddingError> for Failure {
    fn from(e: EmbeddingError) -> Self {
        let kind = match e {
            EmbeddingError::Io { .. } => FailureKind::Io,
            _ => FailureKind::Format,
        };
        Self::new(kind, e)
    }
}

impl From<SignatureError> for Failure {
    fn from(e: SignatureError) -> Self {
        let kind = match e {
            SignatureError::Corrupt(_) => FailureKind::Format,
            _ => FailureKind::Invalid,
        };
        Self::new(kind, e)
    }
}

impl From<TransportError> for Failure {
    fn from(e: TransportError) -> Self {
        Self::new(FailureKind::Invalid, e)
    }
}

impl From<BackendError> for Failure {
    fn from(e: BackendError) -> Self {
        let kind = match e {
            BackendError::Connectivity(_) => FailureKind::Connectivity,
            BackendError::Io { .. } => FailureKind::Io,
            BackendError::CorruptSnapshot(_) => FailureKind::Format,
            BackendError::EmptySubmission
            | BackendError::ModelUnavailable
            | BackendError::Rejected(_) => FailureKind::Rejected,
        };
        Self::new(kind, e)
    }
}

impl From<NetgraphError> for Failure {
    fn from(e: NetgraphError) -> Self {
        let kind = match e {
            NetgraphError::Format(_) => FailureKind::Format,
            _ => FailureKind::Invalid,
        };
        Self::new(kind, e)
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Prep(e) => e.into(),
            PipelineError::Relevance(e) => e.into(),
            PipelineError::Signature(e) => e.into(),
            PipelineError::Backend(e) => e.into(),
            other @ PipelineError::VectorCount { .. } => Self::new(FailureKind::Rejected, other),
        }
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::io(path, e))
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::io(path, e))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => write_file(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn print_json<T: Serialize>(value: &T) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("output serialises")
    );
}

fn read_signature(path: &Path) -> Result<Signature, Failure> {
    let bytes = fs::read(path).map_err(|e| Failure::io(path, e))?;
    Signature::from_bytes(&bytes)
        .map_err(|e| Failure::new(FailureKind::Format, format!("{}: {e}", path.display())))
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "user".into())
}

pub fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Serve(a) => cmd_serve(a),
        Command::Seed(a) => cmd_seed(a),
        Command::Sign(a) => cmd_sign(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Matrix(a) => cmd_matrix(a),
        Command::Classify(a) => cmd_classify(a),
        Command::Mds(a) => cmd_mds(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Inspect(a) => cmd_inspect(a),
        Command::Bow(a) => cmd_bow(a),
        Command::SynthCorpus(a) => cmd_synth(a),
    }
}

fn cmd_serve(args: ServeArgs) -> Result<(), Failure> {
    let model = match &args.model {
        Some(path) => Some(EmbeddingModel::load(path, args.oov_seed)?),
        None => None,
    };
    let registry = match &args.snapshot {
        Some(path) if path.exists() => Registry::load(path)?,
        _ => Registry::new(),
    };
    let backend = Arc::new(Backend::with_registry(registry, model));
    let policy = args.snapshot.clone().map(|path| SnapshotPolicy {
        path,
        interval: Duration::from_secs(args.snapshot_interval.max(1)),
    });
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| Failure::new(FailureKind::Io, e))?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(&args.listen)
            .await
            .map_err(|e| {
                Failure::new(
                    FailureKind::Connectivity,
                    format!("bind {}: {e}", args.listen),
                )
            })?;
        let addr = listener
            .local_addr()
            .map_err(|e| Failure::new(FailureKind::Io, e))?;
        let health = backend.health();
        // One line, so a supervisor can read the address and close the pipe.
        let banner = serde_json::json!({
            "listening": addr.to_string(),
            "num_users": health.num_users,
            "model_loaded": backend.model().is_some(),
        });
        let _ = writeln!(std::io::stdout().lock(), "{banner}");
        let shutdown = async {
            let _ = tokio::signal::ctrl_c().await;
        };
        server::serve(listener, backend, policy, shutdown)
            .await
            .map_err(|e| Failure::new(FailureKind::Io, e))
    })
}

fn cmd_seed(args: SeedArgs) -> Result<(), Failure> {
    let prep = args.prep.config()?;
    let client = args.backend.client();
    let report = seed_registry(&args.dir, &prep, &client)?;
    let health = client.health()?;
    print_json(&serde_json::json!({
        "added": report.added,
        "skipped": report.skipped,
        "num_users": health.num_users,
    }));
    Ok(())
}

fn cmd_sign(args: SignArgs) -> Result<(), Failure> {
    let history = RawHistory::from_path(&args.history)?;
    let user_id = args
        .user_id
        .clone()
        .unwrap_or_else(|| file_stem(&args.history));
    let decoy_pool = match &args.decoy_pool {
        Some(path) => Some(WordList::load(path)?.to_sorted_vec()),
        None => None,
    };
    let options = SignOptions {
        prep: args.prep.config()?,
        relevance: RelevanceConfig {
            k: args.relevance.k,
            p_min: args.relevance.p_min,
        },
        decoys: args.decoys,
        decoy_pool,
        jitter_sigma: args.jitter,
        seed: args.seed,
    };
    let outcome = sign_history(&user_id, &history, &options, &args.backend.client())?;
    let bytes = outcome.signature.to_bytes()?;
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{user_id}.afsg")));
    write_file(&out, &bytes)?;
    print_json(&serde_json::json!({
        "path": out.display().to_string(),
        "bytes": bytes.len(),
        "num_users": outcome.df.num_users,
        "decoys": outcome.decoys.len(),
        "summary": outcome.signature.summary(),
    }));
    Ok(())
}

#[derive(Serialize)]
struct CompareOutput {
    wmd: f64,
    similarity: f64,
    seconds: f64,
}

fn cmd_compare(args: CompareArgs) -> Result<(), Failure> {
    let a = read_signature(&args.a)?;
    let b = read_signature(&args.b)?;
    let start = Instant::now();
    let (distance, plan) = wmd(&a, &b)?;
    let seconds = start.elapsed().as_secs_f64();
    if let Some(path) = &args.plan {
        write_file(path, plan_to_csv(&plan))?;
    }
    print_json(&CompareOutput {
        wmd: distance,
        similarity: similarity_from_distance(distance),
        seconds,
    });
    Ok(())
}

fn cmd_matrix(args: MatrixArgs) -> Result<(), Failure> {
    let sigs = args
        .signatures
        .iter()
        .map(|p| read_signature(p))
        .collect::<Result<Vec<_>, _>>()?;
    let matrix = pairwise_matrix(&sigs, Some(args.workers))?;
    emit(args.out.as_deref(), &matrix.to_csv())
}

fn load_labels(path: &Path) -> Result<BTreeMap<String, String>, Failure> {
    Ok(labels_from_csv(&read_text(path)?)?)
}

fn shuffle_labels(labels: &BTreeMap<String, String>, seed: u64) -> BTreeMap<String, String> {
    let mut values: Vec<String> = labels.values().cloned().collect();
    values.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    labels.keys().cloned().zip(values).collect()
}

fn accuracy_column(net: &LabeledNetwork, ns: &[usize]) -> Result<Vec<f64>, Failure> {
    ns.iter().map(|&n| Ok(knn_accuracy(net, n)?)).collect()
}

fn read_users(dir: &Path, labels: &BTreeMap<String, String>) -> Result<Vec<SynthUser>, Failure> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Failure::io(dir, e))?
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.is_file())
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let id = file_stem(&p);
            Ok(SynthUser {
                label: labels.get(&id).cloned().unwrap_or_default(),
                history: RawHistory::from_path(&p)?,
                id,
            })
        })
        .collect()
}

fn load_corpus(
    dir: &Path,
    oov_seed: u64,
) -> Result<(SynthCorpus, BTreeMap<String, String>), Failure> {
    let labels = load_labels(&dir.join("labels.csv"))?;
    let users: Vec<SynthUser> = read_users(&dir.join("users"), &labels)?
        .into_iter()
        .filter(|u| labels.contains_key(&u.id))
        .collect();
    let seeds_dir = dir.join("seeds");
    let seeds = if seeds_dir.is_dir() {
        read_users(&seeds_dir, &BTreeMap::new())?
    } else {
        Vec::new()
    };
    let model = EmbeddingModel::load(&dir.join("model.vec"), oov_seed)?;
    Ok((
        SynthCorpus {
            users,
            seeds,
            model,
        },
        labels,
    ))
}

fn cmd_classify(args: ClassifyArgs) -> Result<(), Failure> {
    let relabel = |labels: BTreeMap<String, String>| match args.shuffle_labels {
        Some(seed) => shuffle_labels(&labels, seed),
        None => labels,
    };
    let mut out = String::from("n");
    let columns: Vec<Vec<f64>> = if let Some(path) = &args.matrix {
        let labels_path = args
            .labels
            .as_ref()
            .ok_or_else(|| Failure::new(FailureKind::Invalid, "--matrix needs --labels"))?;
        let matrix = SimilarityMatrix::from_csv(&read_text(path)?)?;
        let net = LabeledNetwork::new(matrix, relabel(load_labels(labels_path)?))?;
        out.push_str(",accuracy");
        vec![accuracy_column(&net, &args.n)?]
    } else {
        let dir = args
            .corpus
            .as_ref()
            .expect("clap enforces --matrix or --corpus");
        let (corpus, labels) = load_corpus(dir, args.oov_seed)?;
        let prep = args.prep.config()?;
        let mut cols = Vec::new();
        for &k in &args.k {
            let options = SignOptions {
                prep: prep.clone(),
                relevance: RelevanceConfig {
                    k,
                    p_min: args.p_min,
                },
                ..SignOptions::default()
            };
            let sigs = sign_corpus(&corpus, &options)?;
            let matrix = pairwise_matrix(&sigs, Some(args.workers))?;
            let net = LabeledNetwork::new(matrix, relabel(labels.clone()))?;
            out.push_str(&format!(",k{k}"));
            cols.push(accuracy_column(&net, &args.n)?);
        }
        cols
    };
    out.push('\n');
    for (row, n) in args.n.iter().enumerate() {
        out.push_str(&n.to_string());
        for col in &columns {
            out.push_str(&format!(",{}", col[row]));
        }
        out.push('\n');
    }
    print!("{out}");
    Ok(())
}

fn cmd_mds(args: MdsArgs) -> Result<(), Failure> {
    let matrix = SimilarityMatrix::from_csv(&read_text(&args.matrix)?)?;
    let labels = match &args.labels {
        Some(p) => Some(load_labels(p)?),
        None => None,
    };
    let coords = mds_layout(&matrix)?;
    emit(
        args.out.as_deref(),
        &layout_to_csv(matrix.ids(), &coords, labels.as_ref()),
    )
}

fn cmd_bench(args: BenchArgs) -> Result<(), Failure> {
    if args.k.contains(&0) || args.dim == 0 {
        return Err(Failure::new(
            FailureKind::Invalid,
            "k and dim must be at least 1",
        ));
    }
    let mut ks = args.k.clone();
    ks.sort_unstable();
    let rows = bench_compare(&ks, args.dim, args.repeats, args.seed)?;
    print!("{}", bench_to_csv(&rows));
    Ok(())
}

fn cmd_inspect(args: InspectArgs) -> Result<(), Failure> {
    let sig = read_signature(&args.signature)?;
    if args.full {
        print_json(&sig.full_summary());
    } else {
        print_json(&sig.summary());
    }
    Ok(())
}

fn cmd_bow(args: BowArgs) -> Result<(), Failure> {
    let history = RawHistory::from_path(&args.history)?;
    let doc = build_reference(file_stem(&args.history), &history, &args.prep.config()?);
    let bow = bow_from_document(&doc)?;
    let df = user_df(&bow)?;
    print_json(&serde_json::json!({ "bow": bow.counts, "df": df.df }));
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> Result<(), Failure> {
    let config = SynthConfig {
        users_per_class: args.users_per_class,
        seeds_per_class: args.seeds_per_class,
        dim: args.dim,
        seed: args.seed,
        ..SynthConfig::default()
    };
    let corpus = generate(&config);
    corpus
        .write_to(&args.out)
        .map_err(|e| Failure::io(&args.out, e))?;
    print_json(&serde_json::json!({
        "path": args.out.display().to_string(),
        "users": corpus.users.len(),
        "seeds": corpus.seeds.len(),
        "vocabulary": corpus.model.len(),
    }));
    Ok(())
}
