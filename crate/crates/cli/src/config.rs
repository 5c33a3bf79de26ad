use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use boldline::config::{MetricsConfig, Thresholds};
use boldline::gateway::GatewayMode;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GatewayConfig {
    pub endpoint: Option<String>,
    pub mode: Option<GatewayMode>,
    /// Name of an environment variable holding a bearer token.
    pub token_env: Option<String>,
    pub timeout_ms: Option<u64>,
}

/// Run configuration. Relative paths are resolved against the directory of
/// the config file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub sentences: Option<PathBuf>,
    pub registry: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub norms: Option<PathBuf>,
    pub stoplist: Option<PathBuf>,
    pub fixtures: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    pub continuations: Option<PathBuf>,
    pub evaluations: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub gateway: GatewayConfig,
    pub thresholds: Thresholds,
    pub regard_groups: Option<Vec<String>>,
    pub group_aliases: Option<BTreeMap<String, String>>,
    pub classifiers_optional: Option<bool>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let bytes = fs::read(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: RunConfig = serde_json::from_slice(&bytes)
            .map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [
            &mut cfg.sentences,
            &mut cfg.registry,
            &mut cfg.embeddings,
            &mut cfg.norms,
            &mut cfg.stoplist,
            &mut cfg.fixtures,
            &mut cfg.corpus,
            &mut cfg.continuations,
            &mut cfg.evaluations,
            &mut cfg.out,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn metrics(&self) -> MetricsConfig {
        let defaults = MetricsConfig::default();
        MetricsConfig {
            thresholds: self.thresholds.clone(),
            regard_groups: self.regard_groups.clone().unwrap_or(defaults.regard_groups),
            group_aliases: self.group_aliases.clone().unwrap_or(defaults.group_aliases),
            classifiers_optional: self.classifiers_optional.unwrap_or(defaults.classifiers_optional),
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.thresholds
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        if self.threads == Some(0) {
            return Err(CliError::Config("threads must be at least 1".into()));
        }
        Ok(())
    }
}

/// The value of a required path setting.
pub fn require<'a>(value: &'a Option<PathBuf>, name: &str) -> Result<&'a Path, CliError> {
    value
        .as_deref()
        .ok_or_else(|| CliError::Config(format!("no {name} path given (flag or config)")))
}

/// A required input path that must exist.
pub fn require_existing<'a>(value: &'a Option<PathBuf>, name: &str) -> Result<&'a Path, CliError> {
    let p = require(value, name)?;
    if !p.exists() {
        return Err(CliError::Config(format!("{name} {} does not exist", p.display())));
    }
    Ok(p)
}
