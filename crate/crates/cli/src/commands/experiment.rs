use macrodim::analysis::clusters::GrowthTailReport;
use macrodim::analysis::invariance::InvarianceOptions;
use macrodim::analysis::{
    growth_tail_check, invariance_experiment, CorrelationAccumulator, CorrelationTable, FactorizationCensus,
    FactorizationReport, InvarianceReport,
};
use macrodim::grammar::Grammar;
use macrodim::graph::{ball, VertexId};
use macrodim::simulator::{conditional_cluster_process, growth_count, ConditionalConfig, Prepared};
use rayon::prelude::*;
use serde::Serialize;

use super::clusters::{delta_increasing, tail_sequence, TailAtHorizon};
use super::distortion::{distortion_runs, DistortionSummary};
use super::{sim_config, window, Outcome, Side, WindowSummary};
use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::Sink;

#[derive(Clone, Debug, Serialize)]
pub struct InvarianceVerdict {
    pub median_below_threshold: bool,
    pub sandwich_below_threshold: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClusterTails {
    pub window: WindowSummary,
    pub horizons: Vec<TailAtHorizon>,
    pub delta_increasing: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthAtHorizon {
    pub epsilon: f64,
    pub cluster: Vec<VertexId>,
    pub attempts: u64,
    pub tail: Side<GrowthTailReport>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CorrelationSummary {
    pub table: CorrelationTable,
    /// Largest `|diff| / combined_se` over sets and radii.
    pub worst_ratio: f64,
    pub converged: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct FactorizationSummary {
    pub report: FactorizationReport,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub invariance: InvarianceReport,
    pub verdict: InvarianceVerdict,
    pub cluster_tail: Side<ClusterTails>,
    pub growth_tail: Vec<GrowthAtHorizon>,
    pub distortion: Side<DistortionSummary>,
    pub correlation: Side<CorrelationSummary>,
    pub factorization: Side<FactorizationSummary>,
}

#[derive(Serialize)]
struct CsvRow {
    replica: usize,
    seed: u64,
    events: u64,
    v: u32,
    r: usize,
    slope_initial: f64,
    slope_final: f64,
    slope_diff: f64,
    c: Option<f64>,
}

fn growth_tails(cfg: &ExperimentConfig, grammar: &Grammar, epsilons: &[f64]) -> Result<Vec<GrowthAtHorizon>, CliError> {
    let radius = cfg.side_radius();
    let win = window(cfg, grammar, Some(radius))?;
    let b: Vec<VertexId> = ball(&win.graph, win.origin, cfg.side.cluster_radius)?.vertices().collect();
    let samples = if cfg.side.growth_samples == 0 {
        cfg.side_replicas()
    } else {
        cfg.side.growth_samples
    };
    let cond = ConditionalConfig {
        max_attempts: cfg.side.max_attempts,
        min_acceptance: 0.0,
    };
    let mut out = Vec::new();
    for &epsilon in epsilons {
        let runs: Vec<Result<(usize, u64), String>> = (0..samples)
            .into_par_iter()
            .map(|s| {
                let sim = sim_config(cfg, grammar, epsilon).with_seed(cfg.seed.wrapping_add(s * cond.max_attempts));
                conditional_cluster_process(&win.graph, &b, &sim, cond)
                    .map(|c| (growth_count(&c.trajectory, &b), c.attempts))
                    .map_err(|e| e.to_string())
            })
            .collect();
        let mut growths = Vec::new();
        let mut attempts = 0;
        let mut failure = None;
        for r in runs {
            match r {
                Ok((g, a)) => {
                    growths.push(g);
                    attempts += a;
                }
                Err(e) => {
                    failure.get_or_insert(e);
                }
            }
        }
        let tail = match failure {
            Some(reason) => Side::Skipped { reason },
            None => Side::from_result(growth_tail_check(b.len(), &growths, &cfg.side.k_grid)),
        };
        out.push(GrowthAtHorizon {
            epsilon,
            cluster: b.clone(),
            attempts,
            tail,
        });
    }
    Ok(out)
}

fn correlations(cfg: &ExperimentConfig, grammar: &Grammar) -> Result<CorrelationSummary, CliError> {
    let mut per_radius = Vec::new();
    for &n in &cfg.radius {
        let win = window(cfg, grammar, Some(n))?;
        let o = win.origin;
        let mut sets = vec![vec![o]];
        if let Some(&y) = win.graph.neighbors(o).first() {
            sets.push(vec![o, y]);
        }
        let mut sim = sim_config(cfg, grammar, cfg.epsilon);
        sim.record_events = false;
        sim.keep_final = false;
        let prepared = Prepared::new(&win, &sim)?;
        let parts = prepared.run_replicas(&sim, cfg.side_replicas(), |_, t| {
            let mut acc = CorrelationAccumulator::new(sets.clone());
            acc.add(&t);
            acc
        })?;
        let mut acc = CorrelationAccumulator::new(sets.clone());
        parts.iter().for_each(|p| acc.merge(p));
        per_radius.push((n, acc));
    }
    let table = CorrelationTable::from_accumulators(&per_radius)?;
    let worst_ratio = table
        .diffs
        .iter()
        .map(|d| if d.combined_se > 0.0 { d.diff.abs() / d.combined_se } else if d.diff == 0.0 { 0.0 } else { f64::INFINITY })
        .fold(0.0, f64::max);
    Ok(CorrelationSummary {
        converged: worst_ratio < cfg.thresholds.correlation_se,
        worst_ratio,
        table,
    })
}

fn factorization(cfg: &ExperimentConfig, grammar: &Grammar) -> Result<FactorizationSummary, CliError> {
    let radius = cfg.side_radius();
    let win = window(cfg, grammar, Some(radius))?;
    let sim = sim_config(cfg, grammar, cfg.epsilon);
    let region: Vec<VertexId> = ball(&win.graph, win.origin, radius.saturating_sub(sim.margin))?.vertices().collect();
    let prepared = Prepared::new(&win, &sim)?;
    let parts = prepared.run_replicas(&sim, cfg.side_replicas(), |_, t| {
        let mut c = FactorizationCensus::new(region.clone());
        c.add(&t);
        c
    })?;
    let mut census = FactorizationCensus::new(region);
    parts.into_iter().for_each(|p| census.merge(p));
    let report = census.report(cfg.thresholds.min_pair_samples, cfg.thresholds.factorization_z)?;
    Ok(FactorizationSummary {
        passed: report.covered_fraction >= cfg.thresholds.factorization_coverage,
        report,
    })
}

pub fn cmd_experiment(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let grammar = cfg.load_grammar()?;
    let spec = cfg.generator_spec()?;
    let mut options = InvarianceOptions {
        strict_connectivity: cfg.strict_connectivity,
        reversibility: Some((cfg.state_cap, cfg.n0)),
        c_max: cfg.thresholds.sandwich.max(4.0),
        ..InvarianceOptions::default()
    };
    if let Some(m) = cfg.margin {
        options.margin = m;
    } else {
        options.margin = grammar.max_radius().unwrap_or(1).max(1);
    }
    let invariance = invariance_experiment(&spec, &grammar, cfg.epsilon, &cfg.radius, cfg.replicas, cfg.seed, &options)?;
    let verdict = InvarianceVerdict {
        median_below_threshold: invariance.median_slope_diff < cfg.thresholds.slope,
        sandwich_below_threshold: invariance.max_c.is_some_and(|c| c < cfg.thresholds.sandwich),
    };
    let mut epsilons = cfg.side_epsilons();
    epsilons.sort_by(f64::total_cmp);
    let cluster_tail = Side::from_result(
        tail_sequence(cfg, &grammar, Some(cfg.side_radius()), &epsilons, cfg.side_replicas()).map(|(window, horizons)| {
            ClusterTails {
                window,
                delta_increasing: delta_increasing(&horizons),
                horizons,
            }
        }),
    );
    let growth_tail = growth_tails(cfg, &grammar, &epsilons)?;
    let distortion = Side::from_result(distortion_runs(cfg, &grammar, Some(cfg.side_radius()), cfg.side_replicas()));
    let correlation = Side::from_result(correlations(cfg, &grammar));
    let factorization = Side::from_result(factorization(cfg, &grammar));
    let report = ExperimentReport {
        invariance,
        verdict,
        cluster_tail,
        growth_tail,
        distortion,
        correlation,
        factorization,
    };
    let table: Vec<CsvRow> = report
        .invariance
        .replicas
        .iter()
        .enumerate()
        .map(|(i, r)| CsvRow {
            replica: i,
            seed: r.seed,
            events: r.events,
            v: r.v.0,
            r: r.r,
            slope_initial: r.slope_initial,
            slope_final: r.slope_final,
            slope_diff: r.slope_diff,
            c: r.c,
        })
        .collect();
    let mut sink = Sink::new(cfg, "experiment")?;
    sink.emit(&report, &table)?;
    let passed = report.verdict.median_below_threshold && report.verdict.sandwich_below_threshold;
    Ok(Outcome {
        written: sink.written,
        passed,
        message: format!(
            "median |slope diff| {:.4}, max C {}",
            report.invariance.median_slope_diff,
            report.invariance.max_c.map_or("none".to_string(), |c| format!("{c:.2}"))
        ),
    })
}
