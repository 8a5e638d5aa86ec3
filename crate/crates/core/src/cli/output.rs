//! Result files: metrics JSON, per-trial CSV logs and atomic writes.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde::Serialize;

use super::config::RunConfig;
use crate::dynamics::ModelParams;
use crate::error::{Error, Result};
use crate::sim::{trial_seed, ControllerReport, EpisodeResult};

/// Layout of `metrics.json`.
#[derive(Debug, Serialize)]
pub struct MetricsDocument<'a> {
    pub mission: &'a str,
    pub config_hash: String,
    pub seeds: Vec<u64>,
    pub controllers: &'a [ControllerReport],
    /// The resolved configuration; `--mission metrics.json` re-runs it.
    pub config: &'a RunConfig,
}

impl<'a> MetricsDocument<'a> {
    pub fn new(config: &'a RunConfig, reports: &'a [ControllerReport]) -> Self {
        MetricsDocument {
            mission: &config.mission.name,
            config_hash: config.hash(),
            seeds: (0..config.trials).map(|i| trial_seed(config.seed, i)).collect(),
            controllers: reports,
            config,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("metrics serialize");
        s.push('\n');
        s
    }
}

pub fn state_labels(model: &ModelParams) -> &'static [&'static str] {
    match model {
        ModelParams::Quadrotor(_) => &["x", "z", "theta", "vx", "vz"],
        ModelParams::Vehicle(_) => &["x", "y", "theta", "v"],
    }
}

pub fn control_labels(model: &ModelParams) -> &'static [&'static str] {
    match model {
        ModelParams::Quadrotor(_) => &["pitch_rate", "thrust"],
        ModelParams::Vehicle(_) => &["steering", "acceleration"],
    }
}

/// One row per control step.
pub fn trajectory_csv(episode: &EpisodeResult, model: &ModelParams) -> String {
    let mut out = String::from("step,t");
    for l in state_labels(model).iter().chain(control_labels(model)) {
        out.push(',');
        out.push_str(l);
    }
    out.push_str(",s_e,min_cost,collision\n");
    for r in &episode.log {
        write!(out, "{},{}", r.step, r.t).unwrap();
        for v in r.state.as_slice().iter().chain(&r.control.0) {
            write!(out, ",{v}").unwrap();
        }
        writeln!(out, ",{},{},{}", r.exploration_rate, r.min_cost, u8::from(r.collision)).unwrap();
    }
    out
}

pub fn trial_file_stem(episode: &EpisodeResult, variant: &str) -> String {
    format!("{variant}_seed{}", episode.seed)
}

/// Writes through a temporary file in the same directory and renames it into
/// place, so `path` is either absent or complete.
pub fn atomic_write(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(contents).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}
