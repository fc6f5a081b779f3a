//! Run configuration: flat TOML key/value file plus `key=value` overrides.
//!
//! Precedence is overrides > file > built-in defaults.

use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::eval::{FeatureParams, Transform};
use crate::filters::{BilateralParams, WlsParams};
use crate::fusion::{FusionMethod, FusionTag, MaxRule};

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub dataset_root: Option<PathBuf>,
    /// CSV of `id,rgb,nir` rows used instead of suffix discovery.
    pub manifest: Option<PathBuf>,
    pub methods: Vec<FusionTag>,
    pub transforms: Vec<Transform>,
    pub output_dir: PathBuf,
    pub emit_images: bool,
    pub threads: usize,
    pub bf: BilateralParams,
    pub wls: WlsParams,
    pub max_rule: MaxRule,
    pub features: FeatureParams,
    /// Extra summary columns left blank for externally produced numbers.
    pub external_methods: Vec<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dataset_root: None,
            manifest: None,
            methods: FusionTag::ALL.to_vec(),
            transforms: Transform::ALL.to_vec(),
            output_dir: PathBuf::from("nirfuse-out"),
            emit_images: false,
            threads: std::thread::available_parallelism().map_or(1, |n| n.get()),
            bf: BilateralParams::default(),
            wls: WlsParams::default(),
            max_rule: MaxRule::default(),
            features: FeatureParams::default(),
            external_methods: Vec::new(),
        }
    }
}

impl RunConfig {
    pub fn fusion_methods(&self) -> Vec<FusionMethod> {
        self.methods
            .iter()
            .map(|&tag| FusionMethod {
                tag,
                bf: self.bf,
                wls: self.wls,
                max_rule: self.max_rule,
                ..FusionMethod::new(tag)
            })
            .collect()
    }

    /// Hash of every setting that can change a result row. Paths, thread
    /// count and the method list are excluded; cache keys carry the method.
    pub fn config_hash(&self) -> String {
        let canonical = format!(
            "bf={:?};wls={:?};max_rule={:?};features={:?};transforms={:?}",
            self.bf, self.wls, self.max_rule, self.features, self.transforms
        );
        let digest = Sha256::digest(canonical.as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.threads == 0 {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        if self.transforms.is_empty() {
            return Err(Error::Config("transforms must not be empty".into()));
        }
        if self.features.bin_size == 0 || self.features.step == 0 {
            return Err(Error::Config("bin_size and step must be positive".into()));
        }
        if !(self.features.threshold > 0.0) {
            return Err(Error::Config("threshold must be positive".into()));
        }
        self.bf.validate().map_err(|e| Error::Config(e.to_string()))?;
        self.wls.validate().map_err(|e| Error::Config(e.to_string()))
    }
}

pub const KEYS: &[&str] = &[
    "dataset_root",
    "manifest",
    "methods",
    "transforms",
    "output_dir",
    "emit_images",
    "threads",
    "sigma_spatial",
    "sigma_range",
    "edge_min",
    "edge_max",
    "lambda",
    "alpha",
    "epsilon",
    "solver_tol",
    "max_iter",
    "max_rule",
    "threshold",
    "bin_size",
    "step",
    "external_methods",
];

/// Reads `path` (if any) and applies `overrides` (`key=value` strings).
pub fn parse_config(path: Option<&Path>, overrides: &[String]) -> Result<RunConfig> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?,
        None => String::new(),
    };
    parse_config_str(&text, overrides)
}

pub fn parse_config_str(text: &str, overrides: &[String]) -> Result<RunConfig> {
    let table: Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::Config(format!("malformed config: {}", e.message())))?;
    let mut cfg = RunConfig::default();
    for (key, value) in &table {
        apply(&mut cfg, key, value)?;
    }
    for o in overrides {
        let (key, value) = parse_override(o)?;
        apply(&mut cfg, &key, &value)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Splits `key=value`; the value is read as a TOML literal, falling back to a
/// bare string so `output_dir=out` works without quotes.
pub fn parse_override(s: &str) -> Result<(String, Value)> {
    let (key, raw) = s
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override {s:?} is not key=value")))?;
    let key = key.trim().to_string();
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()));
    Ok((key, value))
}

fn suggest(key: &str) -> Option<&'static str> {
    KEYS.iter()
        .map(|k| (strsim::jaro_winkler(key, k), *k))
        .filter(|(s, _)| *s >= 0.8)
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, k)| k)
}

fn mismatch(key: &str, expected: &str, got: &Value) -> Error {
    Error::Config(format!(
        "key {key:?}: expected {expected}, found {}",
        got.type_str()
    ))
}

fn as_f64(key: &str, v: &Value) -> Result<f64> {
    match v {
        Value::Float(f) => Ok(*f),
        Value::Integer(i) => Ok(*i as f64),
        _ => Err(mismatch(key, "number", v)),
    }
}

fn as_usize(key: &str, v: &Value) -> Result<usize> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as usize),
        Value::Integer(_) => Err(Error::Config(format!("key {key:?}: must be non-negative"))),
        _ => Err(mismatch(key, "integer", v)),
    }
}

fn as_str<'a>(key: &str, v: &'a Value) -> Result<&'a str> {
    v.as_str().ok_or_else(|| mismatch(key, "string", v))
}

/// Accepts a TOML array of strings or a single comma-separated string.
fn as_str_list(key: &str, v: &Value) -> Result<Vec<String>> {
    match v {
        Value::Array(items) => items
            .iter()
            .map(|i| as_str(key, i).map(str::to_string))
            .collect::<Result<Vec<_>>>()
            .map_err(|_| mismatch(key, "list of strings", v)),
        Value::String(s) => Ok(s
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .collect()),
        _ => Err(mismatch(key, "list of strings", v)),
    }
}

fn apply(cfg: &mut RunConfig, key: &str, v: &Value) -> Result<()> {
    let cfg_err = |e: Error| Error::Config(format!("key {key:?}: {e}"));
    match key {
        "dataset_root" => cfg.dataset_root = Some(PathBuf::from(as_str(key, v)?)),
        "manifest" => cfg.manifest = Some(PathBuf::from(as_str(key, v)?)),
        "methods" => {
            let mut tags: Vec<FusionTag> = Vec::new();
            for s in as_str_list(key, v)? {
                let tag = s.parse().map_err(cfg_err)?;
                if !tags.contains(&tag) {
                    tags.push(tag);
                }
            }
            cfg.methods = tags;
        }
        "transforms" => {
            cfg.transforms = as_str_list(key, v)?
                .iter()
                .map(|s| s.parse())
                .collect::<Result<_>>()
                .map_err(cfg_err)?
        }
        "output_dir" => cfg.output_dir = PathBuf::from(as_str(key, v)?),
        "emit_images" => cfg.emit_images = v.as_bool().ok_or_else(|| mismatch(key, "boolean", v))?,
        "threads" => cfg.threads = as_usize(key, v)?,
        "sigma_spatial" => cfg.bf.sigma_spatial = as_f64(key, v)?,
        "sigma_range" => cfg.bf.sigma_range = as_f64(key, v)?,
        "edge_min" => cfg.bf.edge_min = as_f64(key, v)?,
        "edge_max" => cfg.bf.edge_max = as_f64(key, v)?,
        "lambda" => cfg.wls.lambda = as_f64(key, v)?,
        "alpha" => cfg.wls.alpha = as_f64(key, v)?,
        "epsilon" => cfg.wls.epsilon = as_f64(key, v)?,
        "solver_tol" => cfg.wls.solver_tol = as_f64(key, v)?,
        "max_iter" => cfg.wls.max_iter = as_usize(key, v)?,
        "max_rule" => cfg.max_rule = as_str(key, v)?.parse().map_err(cfg_err)?,
        "threshold" => cfg.features.threshold = as_f64(key, v)?,
        "bin_size" => cfg.features.bin_size = as_usize(key, v)?,
        "step" => cfg.features.step = as_usize(key, v)?,
        "external_methods" => cfg.external_methods = as_str_list(key, v)?,
        _ => {
            let hint = suggest(key)
                .map(|k| format!(" (did you mean {k:?}?)"))
                .unwrap_or_default();
            return Err(Error::Config(format!("unknown key {key:?}{hint}")));
        }
    }
    Ok(())
}
