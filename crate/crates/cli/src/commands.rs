use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use boldline::corpus::{build_corpus as run_builder, read_sentences, Domain, Prompt, Registry, SourceSentence};
use boldline::gateway::{Classifier, Gateway, GatewayMode, GatewayOptions};
use boldline::metrics::{Evaluator, TextContext, TextEvaluation};
use boldline::report::{make_reports, write_reports, ReportSpec};
use boldline::sentiment::VaderScorer;
use boldline::text::Stoplist;
use boldline::{load_embeddings, load_norm_lexicon, Error};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{require, require_existing, RunConfig};
use crate::{CliError, Common, Resources};

fn io_err(context: impl std::fmt::Display, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{context}: {e}"))
}

fn load_config(common: &Common) -> Result<RunConfig, CliError> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    macro_rules! flag {
        ($field:ident) => {
            if let Some(v) = &common.$field {
                cfg.$field = Some(v.clone());
            }
        };
    }
    flag!(corpus);
    flag!(continuations);
    flag!(out);
    flag!(fixtures);
    flag!(threads);
    if let Some(url) = &common.gateway_url {
        cfg.gateway.endpoint = Some(url.clone());
    }
    if let Some(mode) = common.gateway_mode {
        cfg.gateway.mode = Some(mode);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn out_dir(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    let dir = require(&cfg.out, "output directory")?.to_path_buf();
    fs::create_dir_all(&dir).map_err(|e| io_err(dir.display(), e))?;
    Ok(dir)
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| io_err(path.display(), e))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| io_err(path.display(), e))
}

fn write_jsonl<T: Serialize>(path: &Path, items: impl IntoIterator<Item = T>) -> Result<(), CliError> {
    let mut w = create(path)?;
    for item in items {
        serde_json::to_writer(&mut w, &item).map_err(|e| io_err(path.display(), e))?;
        w.write_all(b"\n").map_err(|e| io_err(path.display(), e))?;
    }
    w.flush().map_err(|e| io_err(path.display(), e))
}

/// Parses a JSON-Lines file, naming the offending line on failure.
fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, CliError> {
    let mut out = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(|e| io_err(path.display(), e))?;
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(&line)
            .map_err(|e| CliError::Io(format!("{} line {}: {e}", path.display(), i + 1)))?;
        out.push(item);
    }
    Ok(out)
}

fn sentence_files(path: &Path) -> Result<Vec<PathBuf>, CliError> {
    if path.is_file() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files: Vec<PathBuf> = fs::read_dir(path)
        .map_err(|e| io_err(path.display(), e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "jsonl"))
        .collect();
    files.sort();
    Ok(files)
}

pub fn build_corpus(
    common: &Common,
    sentences: Option<PathBuf>,
    registry: Option<PathBuf>,
) -> Result<(), CliError> {
    let mut cfg = load_config(common)?;
    if sentences.is_some() {
        cfg.sentences = sentences;
    }
    if registry.is_some() {
        cfg.registry = registry;
    }
    let registry_path = require_existing(&cfg.registry, "registry")?;
    let sentences_path = require_existing(&cfg.sentences, "sentences")?;
    let registry_bytes = fs::read(registry_path).map_err(|e| io_err(registry_path.display(), e))?;
    let registry = Registry::from_json(&registry_bytes)
        .map_err(|e| CliError::Config(format!("invalid registry {}: {e}", registry_path.display())))?;
    let out = out_dir(&cfg)?;

    let mut all: Vec<SourceSentence> = Vec::new();
    for file in sentence_files(sentences_path)? {
        let parsed = read_sentences(open(&file)?).map_err(|e| io_err(file.display(), e))?;
        all.extend(parsed);
    }
    if all.is_empty() {
        log::warn!("no source sentences found under {}", sentences_path.display());
    }

    let corpus = run_builder(&all, &registry, None);
    for domain in Domain::ALL {
        let path = out.join(format!("{domain}.json"));
        let mut w = create(&path)?;
        serde_json::to_writer_pretty(&mut w, &corpus.domain_json(domain)).map_err(|e| io_err(path.display(), e))?;
        w.write_all(b"\n").map_err(|e| io_err(path.display(), e))?;
        w.flush().map_err(|e| io_err(path.display(), e))?;
    }
    write_jsonl(&out.join("prompts.jsonl"), corpus.iter())?;
    write_jsonl(&out.join("audit.jsonl"), &corpus.audit)?;

    println!("{:<20} {:>7} {:>8}", "domain", "groups", "prompts");
    let (mut groups, mut prompts) = (0, 0);
    for (domain, g, p) in corpus.summary() {
        println!("{:<20} {g:>7} {p:>8}", domain.as_str());
        groups += g;
        prompts += p;
    }
    println!("{:<20} {groups:>7} {prompts:>8}", "total");
    println!("rejected: {}", corpus.audit.len());
    Ok(())
}

#[derive(Debug, Deserialize)]
struct Continuation {
    text_id: String,
    prompt: String,
    continuation: String,
    #[serde(default)]
    source: Option<String>,
    #[serde(default)]
    domain: Option<Domain>,
}

fn corpus_file(path: &Path) -> PathBuf {
    if path.is_dir() {
        path.join("prompts.jsonl")
    } else {
        path.to_path_buf()
    }
}

struct Loaded {
    cfg: RunConfig,
    embeddings: boldline::EmbeddingTable,
    norms: boldline::NormLexicon,
    stoplist: Stoplist,
    /// (continuation, matching prompt) pairs in input order.
    jobs: Vec<(Continuation, Prompt)>,
}

fn load_inputs(common: &Common, res: &Resources) -> Result<Loaded, CliError> {
    let mut cfg = load_config(common)?;
    if res.embeddings.is_some() {
        cfg.embeddings = res.embeddings.clone();
    }
    if res.norms.is_some() {
        cfg.norms = res.norms.clone();
    }
    if res.stoplist.is_some() {
        cfg.stoplist = res.stoplist.clone();
    }
    let corpus = corpus_file(require_existing(&cfg.corpus, "corpus")?);
    if !corpus.exists() {
        return Err(CliError::Config(format!("corpus {} does not exist", corpus.display())));
    }
    let continuations = require_existing(&cfg.continuations, "continuations")?.to_path_buf();
    let emb_path = require_existing(&cfg.embeddings, "embeddings")?;
    let norms_path = require_existing(&cfg.norms, "norm lexicon")?;

    let embeddings = load_embeddings(open(emb_path)?).map_err(|e| io_err(emb_path.display(), e))?;
    let norms = load_norm_lexicon(open(norms_path)?).map_err(|e| io_err(norms_path.display(), e))?;
    let stoplist = match &cfg.stoplist {
        Some(p) => Stoplist::from_reader(open(p)?).map_err(|e| io_err(p.display(), e))?,
        None => Stoplist::bundled(),
    };

    let prompts: Vec<Prompt> = read_jsonl(&corpus)?;
    let mut by_text: HashMap<(&str, Option<Domain>), &Prompt> = HashMap::new();
    for p in &prompts {
        by_text.entry((p.text.as_str(), None)).or_insert(p);
        by_text.insert((p.text.as_str(), Some(p.domain)), p);
    }
    let mut jobs = Vec::new();
    for c in read_jsonl::<Continuation>(&continuations)? {
        match by_text.get(&(c.prompt.as_str(), c.domain)) {
            Some(p) => {
                let p = (*p).clone();
                jobs.push((c, p));
            }
            None => log::warn!("{}: unknown prompt {:?}, skipped", c.text_id, c.prompt),
        }
    }
    Ok(Loaded {
        cfg,
        embeddings,
        norms,
        stoplist,
        jobs,
    })
}

fn gateway(cfg: &RunConfig, default_mode: GatewayMode) -> Result<Option<Gateway>, CliError> {
    let mode = cfg.gateway.mode.unwrap_or(default_mode);
    if mode == GatewayMode::Off {
        return Ok(None);
    }
    let bearer_token = match &cfg.gateway.token_env {
        Some(var) => Some(std::env::var(var).map_err(|_| {
            CliError::Config(format!("environment variable {var} (bearer token) is not set"))
        })?),
        None => None,
    };
    let mut options = GatewayOptions {
        mode,
        endpoint: cfg.gateway.endpoint.clone(),
        fixtures: cfg.fixtures.clone(),
        bearer_token,
        ..GatewayOptions::default()
    };
    if let Some(ms) = cfg.gateway.timeout_ms {
        options.timeout = Duration::from_millis(ms);
    }
    Gateway::new(options)
        .map(Some)
        .map_err(|e| CliError::Config(e.to_string()))
}

fn run_evaluations(loaded: &Loaded, classifier: Option<&dyn Classifier>, optional: bool) -> Result<Vec<TextEvaluation>, CliError> {
    let mut metrics = loaded.cfg.metrics();
    metrics.classifiers_optional = optional && metrics.classifiers_optional;
    let scorer = VaderScorer;
    let evaluator = Evaluator {
        embeddings: &loaded.embeddings,
        norms: &loaded.norms,
        stoplist: &loaded.stoplist,
        scorer: &scorer,
        classifier,
        config: &metrics,
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = loaded.cfg.threads {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let results: Vec<Result<TextEvaluation, (String, Error)>> = pool.install(|| {
        loaded
            .jobs
            .par_iter()
            .map(|(c, p)| {
                let text = if c.continuation.trim().is_empty() {
                    p.anonymized_text.clone()
                } else {
                    format!("{} {}", p.anonymized_text, c.continuation.trim())
                };
                let ctx = TextContext {
                    text_id: c.text_id.clone(),
                    domain: p.domain.as_str().to_string(),
                    group: p.group.clone(),
                    source: c.source.clone().unwrap_or_default(),
                };
                evaluator.evaluate_text(&text, &ctx).map_err(|e| (c.text_id.clone(), e))
            })
            .collect()
    });
    results
        .into_iter()
        .map(|r| r.map_err(|(id, e)| CliError::Io(format!("{id}: {e}"))))
        .collect()
}

pub fn evaluate(common: &Common, res: &Resources) -> Result<(), CliError> {
    let loaded = load_inputs(common, res)?;
    let out = out_dir(&loaded.cfg)?;
    let gw = gateway(&loaded.cfg, GatewayMode::Off)?;
    if gw.is_none() {
        log::info!("classifier gateway off: toxicity and regard are not scored");
    }
    let evaluations = run_evaluations(&loaded, gw.as_ref().map(|g| g as &dyn Classifier), true)?;
    write_jsonl(&out.join("evaluations.jsonl"), &evaluations)?;
    println!("evaluated {} texts", evaluations.len());
    Ok(())
}

pub fn record_fixtures(common: &Common, res: &Resources) -> Result<(), CliError> {
    let loaded = load_inputs(common, res)?;
    require(&loaded.cfg.fixtures, "fixtures")?;
    if loaded.cfg.gateway.endpoint.is_none() {
        return Err(CliError::Config("fixtures record needs --gateway-url".into()));
    }
    let mut cfg = loaded.cfg.clone();
    cfg.gateway.mode = Some(GatewayMode::Record);
    let gw = gateway(&cfg, GatewayMode::Record)?.expect("record mode is never off");
    let evaluations = run_evaluations(&loaded, Some(&gw), false)?;
    println!("recorded classifier responses for {} texts", evaluations.len());
    Ok(())
}

pub fn report(common: &Common, evaluations: Option<PathBuf>) -> Result<(), CliError> {
    let mut cfg = load_config(common)?;
    if evaluations.is_some() {
        cfg.evaluations = evaluations;
    }
    let path = require_existing(&cfg.evaluations, "evaluations")?.to_path_buf();
    let out = out_dir(&cfg)?;
    let evaluations: Vec<TextEvaluation> = read_jsonl(&path)?;
    if evaluations.is_empty() {
        log::warn!("{} holds no evaluations; writing empty reports", path.display());
    }
    let spec = ReportSpec::default();
    let reports = make_reports(&evaluations, &spec);
    write_reports(&reports, &spec, &out).map_err(|e| io_err(out.display(), e))?;
    println!("wrote reports for {} evaluations to {}", evaluations.len(), out.display());
    Ok(())
}
