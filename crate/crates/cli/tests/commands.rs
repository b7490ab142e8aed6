use std::fs;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Output, Stdio};
use std::time::Duration;

use wordsig_cli::client::HttpBackend;
use wordsig_core::backend::wire::DfRequest;
use wordsig_core::backend::DfService;

const BIN: &str = env!("CARGO_BIN_EXE_wordsig");

fn wordsig(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("WORDSIG_BACKEND")
        .env_remove("WORDSIG_K")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_str(&stdout(out)).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

struct Server {
    child: Child,
    url: String,
}

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

fn serve(model: &Path) -> Server {
    let mut child = Command::new(BIN)
        .args(["serve", "--listen", "127.0.0.1:0", "--model", p(model)])
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let reader = BufReader::new(child.stdout.take().unwrap());
    let mut url = None;
    if let Some(line) = reader.lines().next() {
        let banner: serde_json::Value = serde_json::from_str(&line.unwrap()).unwrap();
        url = banner["listening"].as_str().map(|a| format!("http://{a}"));
    }
    Server {
        child,
        url: url.expect("server announced its address"),
    }
}

fn toy_setup(dir: &Path) -> (Server, PathBuf) {
    let model = dir.join("toy.vec");
    fs::write(
        &model,
        "2 3\ncountry -0.25 0.5 0.75\nnation -0.23 0.51 0.6\n",
    )
    .unwrap();
    let server = serve(&model);
    let client = HttpBackend::new(&server.url, Duration::from_secs(5));
    for (user, words) in [
        ("B", ["country", "vote"]),
        ("C", ["nation", "vote"]),
        ("D", ["vote", "tax"]),
    ] {
        client
            .submit_df(&DfRequest {
                user_id: user.into(),
                words: words.iter().map(|w| w.to_string()).collect(),
            })
            .unwrap();
    }
    let history = dir.join("alice.txt");
    let mut text = "country\n".repeat(5);
    text.push_str(&"nation\n".repeat(6));
    fs::write(&history, text).unwrap();
    (server, history)
}

#[test]
fn sign_reproduces_worked_example() {
    let dir = tempfile::tempdir().unwrap();
    let (server, history) = toy_setup(dir.path());
    let sig = dir.path().join("alice.afsg");
    let out = wordsig(&[
        "sign",
        p(&history),
        "--k",
        "2",
        "--out",
        p(&sig),
        "--backend",
        &server.url,
    ]);
    let summary = json(&out);
    assert_eq!(summary["num_users"], 4);
    assert_eq!(summary["summary"]["k"], 2);
    assert_eq!(summary["bytes"], 4 + 1 + 6 + 5 + 2 * 3 * 2 + 2 * 2);

    let full = json(&wordsig(&["inspect", p(&sig), "--full"]));
    let weights: Vec<f64> = serde_json::from_value(full["weights"].clone()).unwrap();
    assert!((weights[0] - 5.0 / 11.0).abs() < 1e-3);
    assert!((weights[1] - 6.0 / 11.0).abs() < 1e-3);
    let vectors: Vec<Vec<f64>> = serde_json::from_value(full["vectors"].clone()).unwrap();
    assert!((vectors[0][0] + 0.25).abs() < 1e-3 && (vectors[1][1] - 0.51).abs() < 1e-3);

    let brief = json(&wordsig(&["inspect", p(&sig)]));
    assert!(brief.get("vectors").is_none());

    let plan = dir.path().join("plan.csv");
    let cmp = json(&wordsig(&["compare", p(&sig), p(&sig), "--plan", p(&plan)]));
    assert!((cmp["similarity"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!(cmp["wmd"].as_f64().unwrap().abs() < 1e-9);
    assert!(cmp["seconds"].as_f64().is_some());
    assert_eq!(fs::read_to_string(&plan).unwrap().lines().count(), 2);
}

#[test]
fn signing_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (server, history) = toy_setup(dir.path());
    let a = dir.path().join("a.afsg");
    let b = dir.path().join("b.afsg");
    for out in [&a, &b] {
        stdout(&wordsig(&[
            "sign",
            p(&history),
            "--k",
            "2",
            "--jitter",
            "0.01",
            "--seed",
            "3",
            "--decoys",
            "2",
            "--user-id",
            "alice",
            "--out",
            p(out),
            "--backend",
            &server.url,
        ]));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn env_overrides_flags_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let (server, history) = toy_setup(dir.path());
    let sig = dir.path().join("s.afsg");
    let out = Command::new(BIN)
        .args(["sign", p(&history), "--out", p(&sig)])
        .env("WORDSIG_BACKEND", &server.url)
        .env("WORDSIG_K", "1")
        .output()
        .unwrap();
    assert_eq!(json(&out)["summary"]["k"], 1);
}

#[test]
fn exit_codes_by_failure_kind() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.afsg");
    let out = wordsig(&["inspect", p(&missing)]);
    assert_eq!(out.status.code(), Some(3));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["kind"], "io");

    let junk = dir.path().join("junk.afsg");
    fs::write(&junk, b"AFSGnot really").unwrap();
    assert_eq!(wordsig(&["inspect", p(&junk)]).status.code(), Some(4));

    let history = dir.path().join("h.txt");
    fs::write(&history, "the house is big\n").unwrap();
    let port = std::net::TcpListener::bind("127.0.0.1:0")
        .unwrap()
        .local_addr()
        .unwrap();
    let out = wordsig(&[
        "sign",
        p(&history),
        "--backend",
        &format!("http://{port}"),
        "--timeout",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(5));

    assert_eq!(wordsig(&["bogus"]).status.code(), Some(2));
}

#[test]
fn bow_output() {
    let dir = tempfile::tempdir().unwrap();
    let history = dir.path().join("h.tsv");
    fs::write(
        &history,
        "self\tThe house is big, the house is red\nbob\tignored words here\n",
    )
    .unwrap();
    let v = json(&wordsig(&["bow", p(&history)]));
    assert_eq!(v["bow"]["house"], 2);
    assert_eq!(v["df"]["house"], 1);
    assert!(v["bow"].get("ignored").is_none());
}

#[test]
fn corpus_evaluation_commands() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    let made = json(&wordsig(&[
        "synth-corpus",
        p(&corpus),
        "--users-per-class",
        "8",
        "--seeds-per-class",
        "10",
    ]));
    assert_eq!(made["users"], 16);

    let grid = stdout(&wordsig(&[
        "classify",
        "--corpus",
        p(&corpus),
        "--n",
        "1,3,5,7,9",
        "--k",
        "50",
    ]));
    let mut lines = grid.lines();
    assert_eq!(lines.next(), Some("n,k50"));
    for (line, n) in lines.zip([1, 3, 5, 7, 9]) {
        assert_eq!(line, format!("{n},1"));
    }

    // Seed a live backend from the corpus, sign every user, then evaluate the
    // resulting files.
    let server = serve(&corpus.join("model.vec"));
    let seeded = json(&wordsig(&[
        "seed",
        p(&corpus.join("seeds")),
        "--backend",
        &server.url,
    ]));
    assert_eq!(seeded["added"], 20);
    assert_eq!(seeded["num_users"], 20);

    let mut sigs = Vec::new();
    let mut users: Vec<PathBuf> = fs::read_dir(corpus.join("users"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    users.sort();
    for user in &users {
        let out = dir.path().join(format!(
            "{}.afsg",
            user.file_stem().unwrap().to_str().unwrap()
        ));
        stdout(&wordsig(&[
            "sign",
            p(user),
            "--out",
            p(&out),
            "--backend",
            &server.url,
        ]));
        sigs.push(out);
    }
    let matrix = dir.path().join("matrix.csv");
    let mut args = vec!["matrix", "--workers", "2", "--out", p(&matrix)];
    args.extend(sigs.iter().map(|s| p(s)));
    stdout(&wordsig(&args));
    let header = fs::read_to_string(&matrix).unwrap();
    assert!(header.starts_with("id,user000,user001"));

    let labels = corpus.join("labels.csv");
    let acc = stdout(&wordsig(&[
        "classify",
        "--matrix",
        p(&matrix),
        "--labels",
        p(&labels),
        "--n",
        "1,3",
    ]));
    assert_eq!(acc, "n,accuracy\n1,1\n3,1\n");
    let control = stdout(&wordsig(&[
        "classify",
        "--matrix",
        p(&matrix),
        "--labels",
        p(&labels),
        "--n",
        "3",
        "--shuffle-labels",
        "1",
    ]));
    assert_ne!(control, "n,accuracy\n3,1\n");

    let layout = stdout(&wordsig(&["mds", p(&matrix), "--labels", p(&labels)]));
    assert!(layout.starts_with("id,x,y,label\nuser000,"));
    assert_eq!(layout.lines().count(), 17);
}

#[test]
fn bench_table() {
    let out = stdout(&wordsig(&[
        "bench",
        "--k",
        "5,20",
        "--repeats",
        "2",
        "--dim",
        "10",
    ]));
    let rows: Vec<&str> = out.lines().collect();
    assert_eq!(rows[0], "k,mean_seconds,repeats");
    assert!(rows[1].starts_with("5,") && rows[2].starts_with("20,"));
}
