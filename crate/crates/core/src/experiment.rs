//! Experiment execution and data file emission.
//!
//! An experiment runs one cooperation mode (or both, sharing the seed
//! sequence) and writes per-iteration metrics as CSV, plus optional node
//! snapshot files for selected iterations taken from the first run.
//!
//! File schemas are fixed:
//!
//! - `metrics_<mode>.csv`:
//!   `iteration,msd,mean_mu,mean_neighbor_count,mean_distance_to_target`,
//!   one row per iteration.
//! - `snapshots_<mode>_<iteration>.csv`:
//!   `node_id,x0,x1[,x2],v0,v1[,v2],w0,w1[,w2]`, one row per node.
//!
//! Values carry nine significant digits; identical experiments produce
//! byte-identical files.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::config::ConfigError;
use crate::sim::{monte_carlo_with_snapshots, MetricsFrame, Mode, NodeSnapshot, SimConfig};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// A fully resolved experiment request.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub config: SimConfig,
    pub output_dir: PathBuf,
    /// Run both modes on identical seed sequences.
    pub compare: bool,
    /// Iterations to capture node snapshots at (from the first run).
    pub snapshot_iterations: BTreeSet<usize>,
    /// Upper bound on run-level parallelism.
    pub jobs: usize,
}

impl ExperimentSpec {
    pub fn new(config: SimConfig, output_dir: impl Into<PathBuf>) -> Self {
        Self {
            config,
            output_dir: output_dir.into(),
            compare: false,
            snapshot_iterations: BTreeSet::new(),
            jobs: 1,
        }
    }
}

/// Files written by an experiment, in emission order.
#[derive(Debug, Clone, Default)]
pub struct ExperimentOutput {
    pub files: Vec<PathBuf>,
}

/// Runs the experiment and writes its data files.
///
/// In compare mode both variants execute with the same seed sequence, so
/// run `i` of each mode sees identical initial states and noise streams.
/// Files are written only after all runs complete.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutput, ExperimentError> {
    spec.config.validate()?;

    let modes: Vec<Mode> = if spec.compare {
        vec![Mode::Proposed, Mode::BaselineAtc]
    } else {
        vec![spec.config.mode]
    };

    struct ModeData {
        mode: Mode,
        averaged: Vec<MetricsFrame>,
        snapshot_frames: Vec<(usize, Vec<NodeSnapshot>)>,
    }

    let mut computed = Vec::new();
    for mode in modes {
        let config = SimConfig {
            mode,
            ..spec.config.clone()
        };
        config.validate()?;
        let result = monte_carlo_with_snapshots(&config, spec.jobs, &spec.snapshot_iterations)?;
        let snapshot_frames = result.runs[0]
            .frames
            .iter()
            .filter_map(|f| {
                f.snapshots
                    .as_ref()
                    .map(|snaps| (f.iteration, snaps.clone()))
            })
            .collect();
        computed.push(ModeData {
            mode,
            averaged: result.averaged,
            snapshot_frames,
        });
    }

    fs::create_dir_all(&spec.output_dir).map_err(|source| ExperimentError::Io {
        path: spec.output_dir.display().to_string(),
        source,
    })?;

    let mut output = ExperimentOutput::default();
    for data in &computed {
        let metrics_path = spec
            .output_dir
            .join(format!("metrics_{}.csv", data.mode.as_str()));
        write_metrics(&metrics_path, &data.averaged)?;
        output.files.push(metrics_path);

        for (iteration, snaps) in &data.snapshot_frames {
            let path = spec
                .output_dir
                .join(format!("snapshots_{}_{}.csv", data.mode.as_str(), iteration));
            write_snapshots(&path, snaps, spec.config.dim)?;
            output.files.push(path);
        }
    }
    Ok(output)
}

fn write_metrics(path: &Path, frames: &[MetricsFrame]) -> Result<(), ExperimentError> {
    let mut buf = String::new();
    buf.push_str("iteration,msd,mean_mu,mean_neighbor_count,mean_distance_to_target\n");
    for f in frames {
        buf.push_str(&format!(
            "{},{},{},{},{}\n",
            f.iteration,
            fmt_sig9(f.msd),
            fmt_sig9(f.mean_mu),
            fmt_sig9(f.mean_neighbor_count),
            fmt_sig9(f.mean_distance_to_target),
        ));
    }
    write_file(path, buf.as_bytes())
}

fn write_snapshots(
    path: &Path,
    snaps: &[NodeSnapshot],
    dim: usize,
) -> Result<(), ExperimentError> {
    let mut buf = String::from("node_id");
    for field in ["x", "v", "w"] {
        for axis in 0..dim {
            buf.push_str(&format!(",{field}{axis}"));
        }
    }
    buf.push('\n');
    for s in snaps {
        buf.push_str(&s.node_id.to_string());
        for vec in [&s.x, &s.v, &s.w] {
            for c in vec.components() {
                buf.push(',');
                buf.push_str(&fmt_sig9(*c));
            }
        }
        buf.push('\n');
    }
    write_file(path, buf.as_bytes())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), ExperimentError> {
    let mut file = fs::File::create(path).map_err(|source| ExperimentError::Io {
        path: path.display().to_string(),
        source,
    })?;
    file.write_all(bytes).map_err(|source| ExperimentError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Formats a value with nine significant digits in plain decimal notation.
pub fn fmt_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0.00000000".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let precision = (8 - magnitude).max(0) as usize;
    format!("{x:.precision$}")
}
