//! Test helpers: a keyword-rule classifier stub speaking the wire protocol,
//! and process helpers for the `boldline` binary.
#![allow(dead_code)]

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::thread;

use boldline::tokenize;

pub const TOXICITY_KEYWORDS: [(&str, &[&str]); 6] = [
    ("toxic", &["stupid", "idiot", "hate", "hated", "disgusting", "terrorist"]),
    ("severe_toxic", &["kill"]),
    ("threat", &["kill", "destroy"]),
    ("obscene", &["damn"]),
    ("insult", &["stupid", "idiot"]),
    ("identity_threat", &["terrorist"]),
];

pub const REGARD_NEGATIVE: [&str; 9] = [
    "convicted", "arrested", "murder", "criminal", "terrorist", "violent", "cruel", "corruption", "hate",
];
pub const REGARD_POSITIVE: [&str; 9] = [
    "won", "award", "brilliant", "respected", "kind", "excellent", "talented", "praised", "beloved",
];

fn words(text: &str) -> Vec<String> {
    tokenize(text)
        .into_iter()
        .filter(|t| t.is_word)
        .map(|t| t.lower)
        .collect()
}

/// Response body for a toxicity request: 0.9 for a label when any of its
/// keywords occurs, else 0.0.
pub fn stub_toxicity(text: &str) -> String {
    let w = words(text);
    let probs: Vec<String> = TOXICITY_KEYWORDS
        .iter()
        .map(|(label, keys)| {
            let p = if keys.iter().any(|k| w.iter().any(|x| x == k)) { "0.9" } else { "0.0" };
            format!("\"{label}\":{p}")
        })
        .collect();
    format!(
        "{{\"task\":\"toxicity\",\"toxicity\":{{{}}},\"threshold\":0.5}}",
        probs.join(",")
    )
}

/// Response body for a regard request: more negative than positive keywords
/// gives "negative", the reverse "positive", none "neutral", a non-zero tie
/// "other". The label scores 0.7, the rest 0.1.
pub fn stub_regard(text: &str) -> String {
    let w = words(text);
    let neg = w.iter().filter(|x| REGARD_NEGATIVE.contains(&x.as_str())).count();
    let pos = w.iter().filter(|x| REGARD_POSITIVE.contains(&x.as_str())).count();
    let label = if neg > pos {
        "negative"
    } else if pos > neg {
        "positive"
    } else if pos == 0 {
        "neutral"
    } else {
        "other"
    };
    let scores: Vec<String> = ["positive", "negative", "neutral", "other"]
        .iter()
        .map(|l| format!("\"{l}\":{}", if *l == label { "0.7" } else { "0.1" }))
        .collect();
    format!(
        "{{\"task\":\"regard\",\"regard\":{{\"label\":\"{label}\",\"scores\":{{{}}}}}}}",
        scores.join(",")
    )
}

/// (status, body) for a raw request body.
pub fn stub_reply(body: &[u8]) -> (u16, String) {
    let Ok(v) = serde_json::from_slice::<serde_json::Value>(body) else {
        return (400, r#"{"error":"malformed JSON"}"#.into());
    };
    let (Some(task), Some(text)) = (v["task"].as_str(), v["text"].as_str()) else {
        return (400, r#"{"error":"task and text are required"}"#.into());
    };
    if text.trim().is_empty() {
        return (422, r#"{"error":"empty text"}"#.into());
    }
    match task {
        "toxicity" => (200, stub_toxicity(text)),
        "regard" => (200, stub_regard(text)),
        _ => (400, r#"{"error":"unknown task"}"#.into()),
    }
}

fn serve_one(mut stream: TcpStream) -> Option<()> {
    let mut reader = BufReader::new(stream.try_clone().ok()?);
    let mut line = String::new();
    reader.read_line(&mut line).ok()?;
    let path_ok = line.split_whitespace().nth(1) == Some("/v1/classify");
    let mut length = 0;
    loop {
        line.clear();
        reader.read_line(&mut line).ok()?;
        let l = line.trim_end();
        if l.is_empty() {
            break;
        }
        if let Some((name, value)) = l.split_once(':') {
            if name.eq_ignore_ascii_case("content-length") {
                length = value.trim().parse().ok()?;
            }
        }
    }
    let mut body = vec![0; length];
    reader.read_exact(&mut body).ok()?;
    let (status, reply) = if path_ok {
        stub_reply(&body)
    } else {
        (404, r#"{"error":"not found"}"#.into())
    };
    write!(
        stream,
        "HTTP/1.1 {status} X\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{reply}",
        reply.len()
    )
    .ok()
}

/// Starts the stub on an ephemeral port and returns its base URL.
pub fn start_stub() -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}", listener.local_addr().unwrap());
    thread::spawn(move || {
        for stream in listener.incoming().flatten() {
            thread::spawn(move || serve_one(stream));
        }
    });
    url
}

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/e2e")
}

pub fn boldline(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_boldline"))
        .args(args)
        .env_remove("BOLDLINE_CONFIG")
        .output()
        .expect("boldline runs")
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

/// Sorted (relative path, contents) pairs of every file under `dir`.
pub fn dir_contents(dir: &Path) -> Vec<(String, Vec<u8>)> {
    fn walk(root: &Path, dir: &Path, out: &mut Vec<(String, Vec<u8>)>) {
        for e in std::fs::read_dir(dir).unwrap() {
            let path = e.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.push((rel, std::fs::read(&path).unwrap()));
            }
        }
    }
    let mut out = Vec::new();
    walk(dir, dir, &mut out);
    out.sort();
    out
}

/// `build-corpus` → `evaluate` → `report` on the fixture set in replay mode,
/// all outputs under `work`.
pub fn run_pipeline(work: &Path) {
    let fx = fixtures_dir();
    let s = |p: PathBuf| p.to_str().expect("utf-8 path").to_string();
    let cfg = s(fx.join("config.json"));
    let corpus = s(work.join("corpus"));
    let eval = s(work.join("eval"));
    let steps = [
        vec!["build-corpus".into(), "--config".into(), cfg.clone(), "--out".into(), corpus.clone()],
        vec![
            "evaluate".into(),
            "--config".into(),
            cfg.clone(),
            "--corpus".into(),
            corpus,
            "--continuations".into(),
            s(fx.join("continuations.jsonl")),
            "--out".into(),
            eval.clone(),
        ],
        vec![
            "report".into(),
            "--config".into(),
            cfg,
            "--evaluations".into(),
            s(work.join("eval/evaluations.jsonl")),
            "--out".into(),
            s(work.join("reports")),
        ],
    ];
    for args in steps {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let out = boldline(&args);
        assert!(
            out.status.success(),
            "{args:?} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}
