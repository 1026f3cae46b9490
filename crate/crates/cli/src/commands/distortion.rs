use macrodim::analysis::distortion::Extreme;
use macrodim::analysis::{distance_distortion, AnalysisError, DistortionReport, PairSource};
use macrodim::grammar::Grammar;
use macrodim::simulator::Prepared;
use serde::Serialize;

use super::{sim_config, window, Outcome, WindowSummary};
use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::Sink;

#[derive(Clone, Debug, Serialize)]
pub struct ReplicaDistortion {
    pub replica: u64,
    pub seed: u64,
    pub events: usize,
    pub recomputed: usize,
    pub pair_source: Option<PairSource>,
    pub max_increase: Option<Extreme>,
    pub max_decrease: Option<Extreme>,
    pub max_drift: Option<Extreme>,
    /// Set when a sampled pair became disconnected or no pair was available.
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DistortionSummary {
    pub window: WindowSummary,
    pub threshold: u64,
    pub total_events: usize,
    pub per_event_max: u64,
    pub max_drift: i64,
    pub disconnections: usize,
    pub within_threshold: bool,
    pub replicas: Vec<ReplicaDistortion>,
}

#[derive(Serialize)]
struct CsvRow {
    replica: u64,
    seed: u64,
    events: usize,
    max_increase: i64,
    max_decrease: i64,
    max_drift: i64,
    error: String,
}

pub(crate) fn distortion_runs(
    cfg: &ExperimentConfig,
    grammar: &Grammar,
    radius: Option<usize>,
    replicas: u64,
) -> Result<DistortionSummary, CliError> {
    let win = window(cfg, grammar, radius)?;
    let sim = sim_config(cfg, grammar, cfg.epsilon);
    let prepared = Prepared::new(&win, &sim)?;
    let threshold = cfg.thresholds.distortion;
    let rows = prepared.run_replicas(&sim, replicas, |i, t| {
        let r: Result<DistortionReport, AnalysisError> = distance_distortion(&t, grammar, cfg.pairs, t.seed, Some(threshold));
        match r {
            Ok(r) => ReplicaDistortion {
                replica: i,
                seed: t.seed,
                events: r.events,
                recomputed: r.recomputed,
                pair_source: Some(r.pair_source),
                max_increase: Some(r.max_increase),
                max_decrease: Some(r.max_decrease),
                max_drift: Some(r.max_drift),
                error: None,
            },
            Err(e) => ReplicaDistortion {
                replica: i,
                seed: t.seed,
                events: t.events.len(),
                recomputed: 0,
                pair_source: None,
                max_increase: None,
                max_decrease: None,
                max_drift: None,
                error: Some(e.to_string()),
            },
        }
    })?;
    let per_event_max = rows
        .iter()
        .flat_map(|r| [r.max_increase, r.max_decrease])
        .flatten()
        .map(|e| e.delta.unsigned_abs())
        .max()
        .unwrap_or(0);
    let max_drift = rows.iter().filter_map(|r| r.max_drift).map(|e| e.delta.abs()).max().unwrap_or(0);
    let disconnections = rows.iter().filter(|r| r.error.is_some()).count();
    Ok(DistortionSummary {
        window: (&win).into(),
        threshold,
        total_events: rows.iter().map(|r| r.events).sum(),
        per_event_max,
        max_drift,
        disconnections,
        within_threshold: per_event_max <= threshold && disconnections == 0,
        replicas: rows,
    })
}

pub fn cmd_distortion(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let grammar = cfg.load_grammar()?;
    let report = distortion_runs(cfg, &grammar, None, cfg.replicas)?;
    let table: Vec<CsvRow> = report
        .replicas
        .iter()
        .map(|r| CsvRow {
            replica: r.replica,
            seed: r.seed,
            events: r.events,
            max_increase: r.max_increase.map_or(0, |e| e.delta),
            max_decrease: r.max_decrease.map_or(0, |e| e.delta),
            max_drift: r.max_drift.map_or(0, |e| e.delta),
            error: r.error.clone().unwrap_or_default(),
        })
        .collect();
    let mut sink = Sink::new(cfg, "distortion")?;
    sink.emit(&report, &table)?;
    Ok(Outcome {
        written: sink.written,
        passed: report.within_threshold,
        message: format!(
            "{} events, per-event max |dd| = {} (threshold {}), {} disconnections",
            report.total_events, report.per_event_max, report.threshold, report.disconnections
        ),
    })
}
