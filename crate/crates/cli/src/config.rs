//! Flat `key = value` configuration files with command-line overrides.
//!
//! Precedence, lowest to highest: built-in defaults, the config file
//! (`--config` flag, falling back to the `CHAOSVEIL_CONFIG` environment
//! variable), then individual flags. Sender and receiver must run the same
//! effective configuration or keys and budgets will not line up.

use std::fs;
use std::path::Path;

use chaosveil_core::pipeline::SchemeConfig;
use thiserror::Error;

/// Name of the config-path fallback environment variable.
pub const CONFIG_ENV_VAR: &str = "CHAOSVEIL_CONFIG";

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("cannot read config {path}: {reason}")]
    Unreadable { path: String, reason: String },
    #[error("config line {line}: expected `key = value`, got {text:?}")]
    Malformed { line: usize, text: String },
    #[error("config line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("config line {line}: bad value for {key}: {value:?}")]
    BadValue {
        line: usize,
        key: String,
        value: String,
    },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

/// Flag-level overrides; `None` means "not given".
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub dt: Option<f64>,
    pub n_steps: Option<u32>,
}

/// Assembles the effective configuration.
pub fn effective_config(
    config_path: Option<&Path>,
    overrides: Overrides,
) -> Result<SchemeConfig, ConfigError> {
    let mut cfg = SchemeConfig::default();
    let env_path = std::env::var_os(CONFIG_ENV_VAR).map(std::path::PathBuf::from);
    let path = config_path.or(env_path.as_deref());
    if let Some(path) = path {
        let text = fs::read_to_string(path).map_err(|e| ConfigError::Unreadable {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        apply_file(&mut cfg, &text)?;
    }
    if let Some(dt) = overrides.dt {
        cfg.dt = dt;
    }
    if let Some(n) = overrides.n_steps {
        cfg.stego_steps = n;
    }
    validate(&cfg)?;
    Ok(cfg)
}

/// Applies one config file; blank lines and `#` comments are ignored.
pub fn apply_file(cfg: &mut SchemeConfig, text: &str) -> Result<(), ConfigError> {
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let stripped = raw.split('#').next().unwrap_or("").trim();
        if stripped.is_empty() {
            continue;
        }
        let Some((key, value)) = stripped.split_once('=') else {
            return Err(ConfigError::Malformed {
                line,
                text: raw.to_string(),
            });
        };
        let key = key.trim();
        let value = value.trim();
        let bad = |key: &str| ConfigError::BadValue {
            line,
            key: key.to_string(),
            value: value.to_string(),
        };
        let parse_f64 = |key: &str| value.parse::<f64>().map_err(|_| bad(key));
        let parse_u32 = |key: &str| value.parse::<u32>().map_err(|_| bad(key));
        match key {
            "b11" => cfg.template.b11 = parse_f64(key)?,
            "b12" => cfg.template.b12 = parse_f64(key)?,
            "b32" => cfg.template.b32 = parse_f64(key)?,
            "b33" => cfg.template.b33 = parse_f64(key)?,
            "a1" => cfg.template.a1 = parse_f64(key)?,
            "dt" => cfg.dt = parse_f64(key)?,
            "n_steps" => cfg.stego_steps = parse_u32(key)?,
            "octaves" => cfg.sift.num_octaves = parse_u32(key)?,
            "levels" => cfg.sift.levels_per_octave = parse_u32(key)?,
            "base_sigma" => cfg.sift.base_sigma = parse_f64(key)?,
            "contrast" => cfg.sift.contrast_threshold = parse_f64(key)?,
            "edge_ratio" => cfg.sift.edge_ratio = parse_f64(key)?,
            other => {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: other.to_string(),
                })
            }
        }
    }
    Ok(())
}

fn validate(cfg: &SchemeConfig) -> Result<(), ConfigError> {
    // NaN fails each finite-range check below.
    let positive = |v: f64| v.is_finite() && v > 0.0;
    if !positive(cfg.dt) {
        return Err(ConfigError::Invalid(format!(
            "dt must be > 0, got {}",
            cfg.dt
        )));
    }
    if !positive(cfg.sift.contrast_threshold) {
        return Err(ConfigError::Invalid(format!(
            "contrast must be > 0, got {}",
            cfg.sift.contrast_threshold
        )));
    }
    if !(cfg.sift.edge_ratio.is_finite() && cfg.sift.edge_ratio > 1.0) {
        return Err(ConfigError::Invalid(format!(
            "edge_ratio must be > 1, got {}",
            cfg.sift.edge_ratio
        )));
    }
    if cfg.sift.num_octaves < 1 {
        return Err(ConfigError::Invalid("octaves must be >= 1".into()));
    }
    if cfg.sift.levels_per_octave < 3 {
        return Err(ConfigError::Invalid("levels must be >= 3".into()));
    }
    if !positive(cfg.sift.base_sigma) {
        return Err(ConfigError::Invalid("base_sigma must be > 0".into()));
    }
    if cfg.stego_steps < 1 {
        return Err(ConfigError::Invalid("n_steps must be >= 1".into()));
    }
    Ok(())
}
