//! Configuration file loading.
//!
//! The format is flat `key = value` text with dotted section prefixes,
//! `#` comments, and blank lines. Vector values are comma-separated. Every
//! key is optional; missing keys take the documented defaults. Unknown and
//! duplicate keys are rejected.
//!
//! ```text
//! # example
//! dim = 2
//! n_nodes = 50
//! target = 120, 120
//! mode = proposed
//! step.alpha = 1.2
//! motion.xi1 = 0.8
//! ```

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::sim::{Mode, SelectiveScope, SimConfig};
use crate::vector::RealVector;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("config line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// Loads and validates a configuration file.
pub fn load_config(path: &Path) -> Result<SimConfig, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text)
}

/// Parses configuration text and validates the result.
pub fn parse_config(text: &str) -> Result<SimConfig, ConfigError> {
    let mut config = SimConfig::default();
    let mut seen = BTreeSet::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }

        let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Parse {
            line: line_no,
            message: format!("expected `key = value`, got `{line}`"),
        })?;
        let key = key.trim();
        let value = value.trim();
        if key.is_empty() {
            return Err(ConfigError::Parse {
                line: line_no,
                message: "missing key before `=`".into(),
            });
        }
        if !seen.insert(key.to_string()) {
            return Err(ConfigError::Parse {
                line: line_no,
                message: format!("duplicate key `{key}`"),
            });
        }
        apply_key(&mut config, key, value).map_err(|message| ConfigError::Parse {
            line: line_no,
            message,
        })?;
    }

    config.validate()?;
    Ok(config)
}

fn apply_key(config: &mut SimConfig, key: &str, value: &str) -> Result<(), String> {
    match key {
        "dim" => config.dim = parse_num::<usize>(key, value)?,
        "n_nodes" => config.n_nodes = parse_num::<usize>(key, value)?,
        "target" => config.target = parse_vector(key, value)?,
        "kappa" => config.kappa = parse_num::<f64>(key, value)?,
        "radius" => config.radius = parse_num::<f64>(key, value)?,
        "mode" => {
            config.mode = match value {
                "proposed" => Mode::Proposed,
                "baseline_atc" => Mode::BaselineAtc,
                other => {
                    return Err(format!(
                        "mode must be `proposed` or `baseline_atc`, got `{other}`"
                    ))
                }
            }
        }
        "baseline_mu" => config.baseline_mu = parse_num::<f64>(key, value)?,
        "baseline_k" => config.baseline_k = parse_num::<usize>(key, value)?,
        "eta" => config.eta = parse_num::<f64>(key, value)?,
        "init_cube_side" => config.init_cube_side = parse_num::<f64>(key, value)?,
        "w_init" => config.w_init = parse_vector(key, value)?,
        "n_iterations" => config.n_iterations = parse_num::<usize>(key, value)?,
        "n_runs" => config.n_runs = parse_num::<usize>(key, value)?,
        "base_seed" => config.base_seed = parse_num::<u64>(key, value)?,
        "selective_scope" => {
            config.selective_scope = match value {
                "diffusions_only" => SelectiveScope::DiffusionsOnly,
                "all_neighbor_uses" => SelectiveScope::AllNeighborUses,
                other => {
                    return Err(format!(
                        "selective_scope must be `diffusions_only` or `all_neighbor_uses`, got `{other}`"
                    ))
                }
            }
        }
        "snapshot_every" => config.snapshot_every = parse_num::<usize>(key, value)?,
        "step.alpha" => config.step_policy.alpha = parse_num::<f64>(key, value)?,
        "step.beta" => config.step_policy.beta = parse_num::<f64>(key, value)?,
        "step.gamma" => config.step_policy.gamma = parse_num::<f64>(key, value)?,
        "step.mu_min" => config.step_policy.mu_min = parse_num::<f64>(key, value)?,
        "step.mu_max" => config.step_policy.mu_max = parse_num::<f64>(key, value)?,
        "step.far_field_threshold" => {
            config.step_policy.far_field_threshold = parse_num::<f64>(key, value)?
        }
        "motion.xi1" => config.motion_policy.xi1 = parse_num::<f64>(key, value)?,
        "motion.xi2" => config.motion_policy.xi2 = parse_num::<f64>(key, value)?,
        "motion.xi3" => config.motion_policy.xi3 = parse_num::<f64>(key, value)?,
        "motion.r" => config.motion_policy.r = parse_num::<f64>(key, value)?,
        "motion.delta" => config.motion_policy.delta = parse_num::<f64>(key, value)?,
        "motion.dt" => config.motion_policy.dt = parse_num::<f64>(key, value)?,
        other => return Err(format!("unknown key `{other}`")),
    }
    Ok(())
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String> {
    value
        .parse::<T>()
        .map_err(|_| format!("key `{key}`: cannot parse `{value}`"))
}

fn parse_vector(key: &str, value: &str) -> Result<RealVector, String> {
    let comps: Result<Vec<f64>, String> = value
        .split(',')
        .map(|part| parse_num::<f64>(key, part.trim()))
        .collect();
    let comps = comps?;
    if comps.len() != 2 && comps.len() != 3 {
        return Err(format!(
            "key `{key}`: expected 2 or 3 comma-separated components, got {}",
            comps.len()
        ));
    }
    Ok(RealVector::new(&comps))
}
