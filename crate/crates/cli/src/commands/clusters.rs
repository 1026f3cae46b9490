use macrodim::analysis::clusters::{anchor_cluster_size, ClusterCensus, ClusterTailFit};
use macrodim::grammar::Grammar;
use macrodim::simulator::Prepared;
use serde::Serialize;

use super::{sim_config, window, Outcome, Side, WindowSummary};
use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::Sink;

#[derive(Clone, Debug, Serialize)]
pub struct TailAtHorizon {
    pub epsilon: f64,
    pub census: ClusterCensus,
    pub fit: Side<ClusterTailFit>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClustersReport {
    pub window: WindowSummary,
    pub horizons: Vec<TailAtHorizon>,
    /// Whether every fit succeeded and δ grows strictly with ε.
    pub delta_increasing: bool,
}

#[derive(Serialize)]
struct CsvRow {
    epsilon: f64,
    m: usize,
    count: u64,
    p: f64,
    lo: f64,
    hi: f64,
}

/// Anchor-cluster census and tail fit at each horizon.
pub(crate) fn tail_sequence(
    cfg: &ExperimentConfig,
    grammar: &Grammar,
    radius: Option<usize>,
    epsilons: &[f64],
    replicas: u64,
) -> Result<(WindowSummary, Vec<TailAtHorizon>), CliError> {
    let win = window(cfg, grammar, radius)?;
    let mut horizons = Vec::new();
    for &epsilon in epsilons {
        let mut sim = sim_config(cfg, grammar, epsilon);
        sim.record_events = false;
        sim.keep_final = false;
        let prepared = Prepared::new(&win, &sim)?;
        let sizes = prepared.run_replicas(&sim, replicas, |_, t| anchor_cluster_size(&t, win.origin))?;
        let mut census = ClusterCensus::default();
        sizes.into_iter().for_each(|s| census.record(s));
        let fit = Side::from_result(census.fit(cfg.thresholds.min_bucket, cfg.thresholds.min_tail_events));
        horizons.push(TailAtHorizon { epsilon, census, fit });
    }
    Ok(((&win).into(), horizons))
}

pub(crate) fn delta_increasing(horizons: &[TailAtHorizon]) -> bool {
    let deltas: Option<Vec<f64>> = horizons.iter().map(|h| h.fit.ok().map(|f| f.delta)).collect();
    deltas.is_some_and(|d| d.windows(2).all(|w| w[0] < w[1]))
}

pub fn cmd_clusters(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let grammar = cfg.load_grammar()?;
    let mut epsilons = cfg.side_epsilons();
    epsilons.sort_by(f64::total_cmp);
    let (window, horizons) = tail_sequence(cfg, &grammar, None, &epsilons, cfg.replicas)?;
    let report = ClustersReport {
        window,
        delta_increasing: delta_increasing(&horizons),
        horizons,
    };
    let table: Vec<CsvRow> = report
        .horizons
        .iter()
        .flat_map(|h| {
            let z = macrodim::analysis::stats::Z95;
            (1..h.census.counts.len()).map(move |m| {
                let count = h.census.counts[m];
                let (lo, hi) = macrodim::analysis::stats::wilson_interval(count, h.census.replicas, z);
                CsvRow {
                    epsilon: h.epsilon,
                    m,
                    count,
                    p: h.census.probability(m),
                    lo,
                    hi,
                }
            })
        })
        .collect();
    let mut sink = Sink::new(cfg, "clusters")?;
    sink.emit(&report, &table)?;
    let message = report
        .horizons
        .iter()
        .map(|h| match h.fit.ok() {
            Some(f) => format!("eps {}: delta {:.4} (R2 {:.3})", h.epsilon, f.delta, f.r_squared),
            None => format!("eps {}: no fit", h.epsilon),
        })
        .collect::<Vec<_>>()
        .join("; ");
    Ok(Outcome {
        written: sink.written,
        passed: true,
        message,
    })
}
