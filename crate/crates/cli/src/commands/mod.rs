//! One module per subcommand. Each returns the paths it wrote and whether
//! its checks passed.

mod clusters;
mod dimension;
mod distortion;
mod experiment;
mod simulate;
mod verify;

use macrodim::analysis::stats::Moments;
use macrodim::generators::Window;
use macrodim::grammar::Grammar;
use macrodim::simulator::SimConfig;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::CliError;

pub use clusters::{cmd_clusters, ClustersReport};
pub use dimension::{cmd_dimension, DimensionReport};
pub use distortion::{cmd_distortion, DistortionSummary};
pub use experiment::{cmd_experiment, ExperimentReport};
pub use simulate::{cmd_simulate, SimulateReport};
pub use verify::{cmd_reversibility, cmd_verify, VerifyReport};

/// What a command produced.
#[derive(Debug)]
pub struct Outcome {
    pub written: Vec<std::path::PathBuf>,
    /// `false` when a check failed; the artifacts are still written.
    pub passed: bool,
    pub message: String,
}

pub(crate) fn sim_config(cfg: &ExperimentConfig, grammar: &Grammar, epsilon: f64) -> SimConfig {
    let mut sim = SimConfig::new(grammar.clone(), epsilon).with_seed(cfg.seed);
    if let Some(m) = cfg.margin {
        sim.margin = m;
    }
    sim.event_cap = cfg.event_cap;
    sim.strict_connectivity = cfg.strict_connectivity;
    sim
}

pub(crate) fn window(cfg: &ExperimentConfig, grammar: &Grammar, radius: Option<usize>) -> Result<Window, CliError> {
    let mut spec = cfg.generator_spec()?;
    if let Some(r) = radius {
        spec = spec.with_radius(r);
    }
    let mut alphabet = grammar.alphabet.clone();
    let w = spec.generate(&mut alphabet)?;
    if alphabet.len() != grammar.alphabet.len() {
        return Err(CliError::Validation(format!(
            "generator spin is not in the grammar alphabet {:?}",
            grammar.alphabet.names().collect::<Vec<_>>()
        )));
    }
    Ok(w)
}

#[derive(Clone, Debug, Serialize)]
pub struct MomentSummary {
    pub n: u64,
    pub mean: f64,
    pub variance: f64,
    pub std_error: f64,
}

impl From<&Moments> for MomentSummary {
    fn from(m: &Moments) -> Self {
        MomentSummary {
            n: m.n,
            mean: m.mean(),
            variance: m.variance(),
            std_error: m.std_error(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct WindowSummary {
    pub spec: String,
    pub radius: usize,
    pub vertices: usize,
    pub edges: usize,
}

impl From<&Window> for WindowSummary {
    fn from(w: &Window) -> Self {
        WindowSummary {
            spec: w.spec.clone(),
            radius: w.radius,
            vertices: w.graph.vertex_count(),
            edges: w.graph.edge_count(),
        }
    }
}

/// A side result that may legitimately be unavailable.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Side<T> {
    Ok(T),
    Skipped { reason: String },
}

impl<T> Side<T> {
    pub fn from_result<E: std::fmt::Display>(r: Result<T, E>) -> Self {
        match r {
            Ok(v) => Side::Ok(v),
            Err(e) => Side::Skipped { reason: e.to_string() },
        }
    }

    pub fn ok(&self) -> Option<&T> {
        match self {
            Side::Ok(v) => Some(v),
            Side::Skipped { .. } => None,
        }
    }
}
