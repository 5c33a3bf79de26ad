//! Client for the external toxicity/regard classifier service.
//!
//! Wire protocol: `POST {endpoint}/v1/classify` with
//! `{"task":"toxicity"|"regard","text":"...","request_id":"..."}`. A 200
//! response carries either a `toxicity` object with the six label
//! probabilities or a `regard` object with a label and class scores; error
//! responses are `{"error":"..."}`.
//!
//! Responses can be recorded into (and replayed from) a fixture directory
//! holding one file per request key, so evaluation runs without the live
//! service.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, GatewayError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Toxicity,
    Regard,
}

impl Task {
    pub fn as_str(self) -> &'static str {
        match self {
            Task::Toxicity => "toxicity",
            Task::Regard => "regard",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ToxicityLabel {
    Toxic,
    SevereToxic,
    Threat,
    Obscene,
    Insult,
    IdentityThreat,
}

impl ToxicityLabel {
    pub const ALL: [ToxicityLabel; 6] = [
        ToxicityLabel::Toxic,
        ToxicityLabel::SevereToxic,
        ToxicityLabel::Threat,
        ToxicityLabel::Obscene,
        ToxicityLabel::Insult,
        ToxicityLabel::IdentityThreat,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ToxicityLabel::Toxic => "toxic",
            ToxicityLabel::SevereToxic => "severe_toxic",
            ToxicityLabel::Threat => "threat",
            ToxicityLabel::Obscene => "obscene",
            ToxicityLabel::Insult => "insult",
            ToxicityLabel::IdentityThreat => "identity_threat",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegardLabel {
    Positive,
    Negative,
    Neutral,
    Other,
}

impl RegardLabel {
    pub const ALL: [RegardLabel; 4] = [
        RegardLabel::Positive,
        RegardLabel::Negative,
        RegardLabel::Neutral,
        RegardLabel::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RegardLabel::Positive => "positive",
            RegardLabel::Negative => "negative",
            RegardLabel::Neutral => "neutral",
            RegardLabel::Other => "other",
        }
    }
}

/// Per-label decisions plus the any-label verdict.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToxicityResult {
    pub flags: BTreeMap<ToxicityLabel, bool>,
    pub is_toxic: bool,
}

impl ToxicityResult {
    pub fn from_flags(flags: BTreeMap<ToxicityLabel, bool>) -> ToxicityResult {
        let is_toxic = flags.values().any(|f| *f);
        ToxicityResult { flags, is_toxic }
    }
}

/// A label fires when its probability reaches `threshold`; the text is
/// toxic if any label fires.
pub fn flags_from_probabilities(probs: [f64; 6], threshold: f64) -> Result<ToxicityResult> {
    for (label, p) in ToxicityLabel::ALL.iter().zip(probs) {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Range {
                line: None,
                field: label.as_str(),
                value: p,
                min: 0.0,
                max: 1.0,
            });
        }
    }
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::Range {
            line: None,
            field: "threshold",
            value: threshold,
            min: 0.0,
            max: 1.0,
        });
    }
    let flags = ToxicityLabel::ALL
        .iter()
        .zip(probs)
        .map(|(l, p)| (*l, p >= threshold))
        .collect();
    Ok(ToxicityResult::from_flags(flags))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassifierRequest {
    pub task: Task,
    pub text: String,
    pub request_id: String,
}

impl ClassifierRequest {
    pub fn new(task: Task, text: impl Into<String>, request_id: impl Into<String>) -> Result<Self> {
        let text = text.into();
        if text.trim().is_empty() {
            return Err(Error::Domain("classifier request text is empty".into()));
        }
        Ok(ClassifierRequest {
            task,
            text,
            request_id: request_id.into(),
        })
    }

    pub fn to_wire(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("request serializes")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ClassifierResponse {
    Toxicity {
        probabilities: [f64; 6],
        /// Decision threshold sent by the service, if any.
        threshold: Option<f64>,
    },
    Regard {
        label: RegardLabel,
        scores: BTreeMap<RegardLabel, f64>,
    },
}

impl ClassifierResponse {
    pub fn task(&self) -> Task {
        match self {
            ClassifierResponse::Toxicity { .. } => Task::Toxicity,
            ClassifierResponse::Regard { .. } => Task::Regard,
        }
    }

    /// Applies the response's own threshold when present, else `default`.
    pub fn toxicity(&self, default: f64) -> Option<Result<ToxicityResult>> {
        match self {
            ClassifierResponse::Toxicity {
                probabilities,
                threshold,
            } => Some(flags_from_probabilities(
                *probabilities,
                threshold.unwrap_or(default),
            )),
            ClassifierResponse::Regard { .. } => None,
        }
    }

    pub fn regard_label(&self) -> Option<RegardLabel> {
        match self {
            ClassifierResponse::Regard { label, .. } => Some(*label),
            ClassifierResponse::Toxicity { .. } => None,
        }
    }
}

#[derive(Deserialize)]
struct WireResponse {
    task: Option<Task>,
    toxicity: Option<BTreeMap<String, f64>>,
    threshold: Option<f64>,
    regard: Option<WireRegard>,
}

#[derive(Deserialize)]
struct WireRegard {
    label: RegardLabel,
    scores: BTreeMap<RegardLabel, f64>,
}

fn malformed(msg: impl Into<String>) -> GatewayError {
    GatewayError::Malformed(msg.into())
}

/// Parses and validates a 200 response body for `task`.
pub fn parse_response(task: Task, body: &[u8]) -> Result<ClassifierResponse, GatewayError> {
    let wire: WireResponse =
        serde_json::from_slice(body).map_err(|e| malformed(format!("invalid JSON: {e}")))?;
    if let Some(t) = wire.task {
        if t != task {
            return Err(malformed(format!("expected task {task}, response is for {t}")));
        }
    }
    let in_unit = |v: f64| (0.0..=1.0).contains(&v);
    match task {
        Task::Toxicity => {
            let probs = wire
                .toxicity
                .ok_or_else(|| malformed("missing \"toxicity\" object"))?;
            let mut out = [0.0; 6];
            for (slot, label) in out.iter_mut().zip(ToxicityLabel::ALL) {
                let p = *probs
                    .get(label.as_str())
                    .ok_or_else(|| malformed(format!("missing probability {:?}", label.as_str())))?;
                if !in_unit(p) {
                    return Err(malformed(format!(
                        "probability {} = {p} outside [0, 1]",
                        label.as_str()
                    )));
                }
                *slot = p;
            }
            if let Some(extra) = probs
                .keys()
                .find(|k| !ToxicityLabel::ALL.iter().any(|l| l.as_str() == k.as_str()))
            {
                return Err(malformed(format!("unknown toxicity label {extra:?}")));
            }
            if let Some(t) = wire.threshold {
                if !in_unit(t) {
                    return Err(malformed(format!("threshold {t} outside [0, 1]")));
                }
            }
            Ok(ClassifierResponse::Toxicity {
                probabilities: out,
                threshold: wire.threshold,
            })
        }
        Task::Regard => {
            let regard = wire
                .regard
                .ok_or_else(|| malformed("missing \"regard\" object"))?;
            if let Some((label, s)) = regard.scores.iter().find(|(_, s)| !in_unit(**s)) {
                return Err(malformed(format!(
                    "regard score {} = {s} outside [0, 1]",
                    label.as_str()
                )));
            }
            let total: f64 = regard.scores.values().sum();
            if (total - 1.0).abs() > 1e-6 {
                return Err(malformed(format!("regard scores sum to {total}, not 1")));
            }
            Ok(ClassifierResponse::Regard {
                label: regard.label,
                scores: regard.scores,
            })
        }
    }
}

/// Anything that can answer classifier requests.
pub trait Classifier: Send + Sync {
    fn classify(&self, request: &ClassifierRequest) -> Result<ClassifierResponse, GatewayError>;
}

/// NFC plus whitespace collapsing, so cosmetic differences share a key.
pub fn normalize_text(text: &str) -> String {
    let nfc: String = text.nfc().collect();
    nfc.split_whitespace().collect::<Vec<_>>().join(" ")
}

pub fn fixture_key(task: Task, text: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(task.as_str().as_bytes());
    hasher.update(normalize_text(text).as_bytes());
    hex::encode(hasher.finalize())
}

/// Directory of recorded response bodies, one `<key>.json` per request.
#[derive(Debug)]
pub struct FixtureStore {
    dir: PathBuf,
    write_lock: Mutex<()>,
}

impl FixtureStore {
    pub fn new(dir: impl Into<PathBuf>) -> FixtureStore {
        FixtureStore {
            dir: dir.into(),
            write_lock: Mutex::new(()),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    pub fn read(&self, key: &str) -> io::Result<Option<Vec<u8>>> {
        match fs::read(self.path(key)) {
            Ok(bytes) => Ok(Some(bytes)),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e),
        }
    }

    /// Writes through a temporary file so readers never see partial bodies.
    pub fn write(&self, key: &str, body: &[u8]) -> io::Result<()> {
        let _guard = self.write_lock.lock().unwrap_or_else(|e| e.into_inner());
        fs::create_dir_all(&self.dir)?;
        let tmp = self.dir.join(format!(".{key}.tmp"));
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(body)?;
            f.sync_all()?;
        }
        fs::rename(tmp, self.path(key))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GatewayMode {
    Live,
    Replay,
    Record,
    Off,
}

impl std::str::FromStr for GatewayMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "live" => Ok(GatewayMode::Live),
            "replay" => Ok(GatewayMode::Replay),
            "record" => Ok(GatewayMode::Record),
            "off" => Ok(GatewayMode::Off),
            other => Err(format!(
                "unknown gateway mode {other:?} (expected live|replay|record|off)"
            )),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GatewayOptions {
    pub mode: GatewayMode,
    pub endpoint: Option<String>,
    pub fixtures: Option<PathBuf>,
    pub bearer_token: Option<String>,
    pub timeout: Duration,
    pub retries: u32,
    pub backoff: Duration,
}

impl Default for GatewayOptions {
    fn default() -> Self {
        GatewayOptions {
            mode: GatewayMode::Off,
            endpoint: None,
            fixtures: None,
            bearer_token: None,
            timeout: Duration::from_secs(30),
            retries: 3,
            backoff: Duration::from_millis(250),
        }
    }
}

pub struct Gateway {
    options: GatewayOptions,
    store: Option<FixtureStore>,
    http: Option<reqwest::blocking::Client>,
}

impl fmt::Debug for Gateway {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Gateway")
            .field("mode", &self.options.mode)
            .field("endpoint", &self.options.endpoint)
            .field("fixtures", &self.options.fixtures)
            .finish()
    }
}

impl Gateway {
    pub fn new(options: GatewayOptions) -> Result<Gateway> {
        let needs_http = matches!(options.mode, GatewayMode::Live | GatewayMode::Record);
        let needs_store = matches!(options.mode, GatewayMode::Replay | GatewayMode::Record);
        if needs_http && options.endpoint.is_none() {
            return Err(Error::Domain(format!(
                "gateway mode {:?} needs an endpoint URL",
                options.mode
            )));
        }
        if needs_store && options.fixtures.is_none() {
            return Err(Error::Domain(format!(
                "gateway mode {:?} needs a fixtures directory",
                options.mode
            )));
        }
        let http = if needs_http {
            Some(
                reqwest::blocking::Client::builder()
                    .timeout(options.timeout)
                    .build()
                    .map_err(|e| GatewayError::Transport(e.to_string()))?,
            )
        } else {
            None
        };
        let store = needs_store
            .then(|| options.fixtures.clone().map(FixtureStore::new))
            .flatten();
        Ok(Gateway {
            options,
            store,
            http,
        })
    }

    pub fn mode(&self) -> GatewayMode {
        self.options.mode
    }

    fn url(&self) -> String {
        let base = self.options.endpoint.as_deref().unwrap_or_default();
        format!("{}/v1/classify", base.trim_end_matches('/'))
    }

    /// One POST with timeout retries. Returns the raw 200 body.
    fn post(&self, request: &ClassifierRequest) -> Result<Vec<u8>, GatewayError> {
        let http = self.http.as_ref().ok_or(GatewayError::Disabled)?;
        let body = request.to_wire();
        let mut attempt = 0;
        loop {
            attempt += 1;
            let mut builder = http
                .post(self.url())
                .header("content-type", "application/json")
                .body(body.clone());
            if let Some(token) = &self.options.bearer_token {
                builder = builder.header("authorization", format!("Bearer {token}"));
            }
            match builder.send() {
                Ok(resp) => {
                    let status = resp.status();
                    let bytes = resp
                        .bytes()
                        .map_err(|e| GatewayError::Transport(e.to_string()))?
                        .to_vec();
                    if status.is_success() {
                        return Ok(bytes);
                    }
                    let message = serde_json::from_slice::<serde_json::Value>(&bytes)
                        .ok()
                        .and_then(|v| v.get("error").and_then(|e| e.as_str()).map(String::from))
                        .unwrap_or_else(|| String::from_utf8_lossy(&bytes).into_owned());
                    return Err(GatewayError::Status {
                        status: status.as_u16(),
                        message,
                    });
                }
                Err(e) if e.is_timeout() => {
                    if attempt > self.options.retries {
                        return Err(GatewayError::Timeout { attempts: attempt });
                    }
                    let wait = self.options.backoff * 2u32.saturating_pow(attempt - 1);
                    log::warn!(
                        "classifier request {} timed out (attempt {attempt}); retrying in {wait:?}",
                        request.request_id
                    );
                    thread::sleep(wait);
                }
                Err(e) => return Err(GatewayError::Transport(e.to_string())),
            }
        }
    }
}

impl Classifier for Gateway {
    fn classify(&self, request: &ClassifierRequest) -> Result<ClassifierResponse, GatewayError> {
        let key = || fixture_key(request.task, &request.text);
        match self.options.mode {
            GatewayMode::Off => Err(GatewayError::Disabled),
            GatewayMode::Live => parse_response(request.task, &self.post(request)?),
            GatewayMode::Replay => {
                let key = key();
                let store = self.store.as_ref().ok_or(GatewayError::Disabled)?;
                match store.read(&key)? {
                    Some(body) => parse_response(request.task, &body),
                    None => Err(GatewayError::FixtureMiss {
                        task: request.task.to_string(),
                        key,
                    }),
                }
            }
            GatewayMode::Record => {
                let body = self.post(request)?;
                let parsed = parse_response(request.task, &body)?;
                let store = self.store.as_ref().ok_or(GatewayError::Disabled)?;
                store.write(&key(), &body)?;
                Ok(parsed)
            }
        }
    }
}
