use macrodim::analysis::{basepoint_invariance_check, default_fit_window, dim_profile, BasepointReport, MacrodimensionEstimate};
use macrodim::generators::GeneratorSpec;
use macrodim::graph::Alphabet;
use serde::Serialize;

use super::{Outcome, WindowSummary};
use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::Sink;

#[derive(Clone, Debug, Serialize)]
pub struct DimensionRow {
    pub window: WindowSummary,
    pub estimate: MacrodimensionEstimate,
    /// Exact ball sizes of the infinite graph, when known in closed form.
    pub exact_sizes_match: Option<bool>,
    /// Sandwich check between the origin and its smallest neighbour.
    pub basepoint: Option<BasepointReport>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DimensionReport {
    pub rows: Vec<DimensionRow>,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    spec: &'a str,
    n: usize,
    size: u64,
    d_n: Option<f64>,
}

pub fn cmd_dimension(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let mut specs = vec![cfg.generator.clone()];
    specs.extend(cfg.generators.iter().cloned());
    let mut rows = Vec::new();
    for text in &specs {
        let spec: GeneratorSpec = text.parse().map_err(|e| CliError::Validation(format!("{e}")))?;
        let mut alphabet = Alphabet::default();
        let w = spec.generate(&mut alphabet)?;
        let n_max = spec.radius.unwrap_or_else(|| cfg.n_max());
        let estimate = dim_profile(&w.graph, w.origin, n_max)?;
        debug_assert_eq!(estimate.fit_window, default_fit_window(n_max));
        let exact_sizes_match = spec.exact_ball_sizes(n_max).map(|s| s == estimate.profile.sizes);
        let basepoint = match w.graph.neighbors(w.origin).first() {
            Some(&y) if n_max >= 2 => Some(basepoint_invariance_check(&w.graph, w.origin, y, n_max)?),
            _ => None,
        };
        rows.push(DimensionRow {
            window: (&w).into(),
            estimate,
            exact_sizes_match,
            basepoint,
        });
    }
    let report = DimensionReport { rows };
    let table: Vec<CsvRow> = report
        .rows
        .iter()
        .flat_map(|r| {
            let est: &MacrodimensionEstimate = &r.estimate;
            est.profile.sizes.iter().enumerate().map(move |(n, &size)| CsvRow {
                spec: &r.window.spec,
                n,
                size,
                d_n: est.d_at(n),
            })
        })
        .collect();
    let mut sink = Sink::new(cfg, "dimension")?;
    sink.emit(&report, &table)?;
    let passed = report
        .rows
        .iter()
        .all(|r| r.basepoint.as_ref().is_none_or(|b| b.passed()) && r.exact_sizes_match != Some(false));
    let message = report
        .rows
        .iter()
        .map(|r| format!("{}: slope {:.4}", r.window.spec, r.estimate.slope))
        .collect::<Vec<_>>()
        .join("; ");
    Ok(Outcome {
        written: sink.written,
        passed,
        message,
    })
}
