//! End-to-end check that the dynamics leaves the scaling dimension alone.
//!
//! Each replica runs the windowed process up to ε, picks the untouched
//! vertex `v(ω)` nearest the origin, and compares the ball growth around the
//! origin in `G(0)` with the ball growth around `v(ω)` in `G(ε)`.

use serde::Serialize;

use super::dimension::{default_fit_window, MacrodimensionEstimate};
use super::reversibility::{reversibility_check, Verdict};
use super::stats::median;
use super::AnalysisError;
use crate::generators::{GeneratorSpec, Window};
use crate::grammar::{validate_local, validate_locally_bounded, Boundedness, Grammar};
use crate::graph::{ball, BallProfile, SpinGraph, VertexId};
use crate::simulator::{Prepared, SimConfig};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvarianceOptions {
    pub margin: usize,
    /// Extra window layers beyond `max(N) + margin`, so balls around a
    /// `v(ω)` close to the origin are not cut off by the window edge.
    pub slack: usize,
    /// Largest sandwich constant searched.
    pub c_max: f64,
    pub c_step: f64,
    pub strict_connectivity: bool,
    /// `(state size cap, n₀)` for the reversibility precondition; `None` skips it.
    pub reversibility: Option<(usize, usize)>,
}

impl Default for InvarianceOptions {
    fn default() -> Self {
        InvarianceOptions {
            margin: 1,
            slack: 8,
            c_max: 4.0,
            c_step: 0.05,
            strict_connectivity: false,
            reversibility: Some((6, 4)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReplicaInvariance {
    pub seed: u64,
    pub events: u64,
    pub touched: usize,
    pub v: VertexId,
    /// `d(origin, v(ω))` in `G(0)`.
    pub r: usize,
    pub slope_initial: f64,
    pub slope_final: f64,
    pub slope_diff: f64,
    /// Smallest C on the search grid for which the sandwich holds, if any.
    pub c: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvarianceReport {
    pub generator: String,
    pub epsilon: f64,
    pub n_grid: Vec<usize>,
    pub window_radius: usize,
    pub replicas: Vec<ReplicaInvariance>,
    pub median_slope_diff: f64,
    /// Largest per-replica C; `None` if some replica had no C up to `c_max`.
    pub max_c: Option<f64>,
}

/// Checks the preconditions: local, not provably unbounded, and reversible on
/// the states reachable from the unit ball around the origin.
pub fn preflight(grammar: &Grammar, window: &Window, options: &InvarianceOptions) -> Result<(), AnalysisError> {
    let local = validate_local(grammar);
    if !local.is_local() {
        return Err(AnalysisError::Precondition(format!(
            "rules with disconnected left-hand side: {}",
            local.offending.join(", ")
        )));
    }
    if validate_locally_bounded(grammar).verdict == Boundedness::Fail {
        return Err(AnalysisError::Precondition("grammar breaks the degree cap".into()));
    }
    if let Some((cap, n0)) = options.reversibility {
        let seed = ball(&window.graph, window.origin, 1)?;
        let (_, report) = reversibility_check(grammar, &[seed], cap, n0)?;
        if report.verdict != Verdict::Reversible {
            return Err(AnalysisError::Precondition(format!(
                "grammar is not locally reversible with n0 = {n0} ({:?})",
                report.verdict
            )));
        }
    }
    Ok(())
}

/// Smallest `C = 1 + k·step <= c_max` with
/// `|O_{⌊N/C⌋}(ε)| <= |O_N(0)| <= |O_{⌈NC⌉}(ε)|` for every N in `upper`.
pub fn sandwich_constant(initial: &BallProfile, evolved: &BallProfile, upper: &[usize], c_max: f64, step: f64) -> Option<f64> {
    let mut k = 0;
    loop {
        let c = 1.0 + k as f64 * step;
        if c > c_max + 1e-12 {
            return None;
        }
        let holds = upper.iter().all(|&n| {
            let lo = (n as f64 / c + 1e-9).floor() as usize;
            let hi = (n as f64 * c - 1e-9).ceil() as usize;
            evolved.size(lo) <= initial.size(n) && initial.size(n) <= evolved.size(hi)
        });
        if holds {
            return Some(c);
        }
        k += 1;
    }
}

/// Nearest untouched vertex to `origin` in `G(0)`, ties to the smallest id.
pub fn nearest_untouched(initial: &SpinGraph, origin: VertexId, touched: &[VertexId]) -> Option<(VertexId, usize)> {
    let map = initial.distances_from(origin, None).ok()?;
    let mut best: Option<(usize, VertexId)> = None;
    for &v in map.reached() {
        if touched.binary_search(&v).is_ok() {
            continue;
        }
        let d = map.get(v).expect("reached");
        match best {
            Some((bd, _)) if bd < d => break,
            Some((bd, bv)) if bd == d && bv < v => {}
            _ => best = Some((d, v)),
        }
    }
    best.map(|(d, v)| (v, d))
}

/// Runs the experiment on a window of radius `max(n_grid) + margin + slack`.
pub fn invariance_experiment(
    spec: &GeneratorSpec,
    grammar: &Grammar,
    epsilon: f64,
    n_grid: &[usize],
    replicas: u64,
    seed: u64,
    options: &InvarianceOptions,
) -> Result<InvarianceReport, AnalysisError> {
    if n_grid.is_empty() || n_grid.windows(2).any(|w| w[0] >= w[1]) || n_grid[0] < 2 {
        return Err(AnalysisError::Precondition("N grid must be strictly increasing from at least 2".into()));
    }
    let n_max = *n_grid.last().unwrap();
    let window_radius = n_max + options.margin + options.slack;
    let mut alphabet = grammar.alphabet.clone();
    let window = spec.with_radius(window_radius).generate(&mut alphabet)?;
    preflight(grammar, &window, options)?;
    let mut cfg = SimConfig::new(grammar.clone(), epsilon).with_margin(options.margin).with_seed(seed);
    cfg.strict_connectivity = options.strict_connectivity;
    cfg.record_events = false;
    cfg.keep_final = true;
    let prepared = Prepared::new(&window, &cfg)?;
    let initial_profile = BallProfile::from_graph(&window.graph, window.origin, n_max)?;
    let fit_window = default_fit_window(n_max);
    let slope_initial = MacrodimensionEstimate::from_profile(initial_profile.clone(), fit_window)?.slope;
    let upper: Vec<usize> = n_grid.iter().copied().filter(|&n| 2 * n >= n_max).collect();
    let c_reach = (n_max as f64 * options.c_max).ceil() as usize;
    let rows = prepared.run_replicas(&cfg, replicas, |_, traj| -> Result<ReplicaInvariance, AnalysisError> {
        let (v, r) = nearest_untouched(&traj.initial, window.origin, &traj.touched).ok_or(AnalysisError::NoUntouchedVertex)?;
        let last = traj.final_graph.as_ref().expect("final graph kept");
        let evolved = BallProfile::from_graph(last, v, c_reach)?;
        let slope_final = MacrodimensionEstimate::from_profile(
            BallProfile {
                center: v,
                sizes: evolved.sizes[..=n_max].to_vec(),
            },
            fit_window,
        )?
        .slope;
        Ok(ReplicaInvariance {
            seed: traj.seed,
            events: traj.event_count,
            touched: traj.touched.len(),
            v,
            r,
            slope_initial,
            slope_final,
            slope_diff: (slope_final - slope_initial).abs(),
            c: sandwich_constant(&initial_profile, &evolved, &upper, options.c_max, options.c_step),
        })
    })?;
    let rows: Vec<ReplicaInvariance> = rows.into_iter().collect::<Result<_, _>>()?;
    let mut diffs: Vec<f64> = rows.iter().map(|r| r.slope_diff).collect();
    let max_c = rows
        .iter()
        .map(|r| r.c)
        .try_fold(1.0f64, |acc, c| c.map(|c| acc.max(c)));
    Ok(InvarianceReport {
        generator: spec.to_string(),
        epsilon,
        n_grid: n_grid.to_vec(),
        window_radius,
        median_slope_diff: median(&mut diffs).unwrap_or(0.0),
        max_c,
        replicas: rows,
    })
}
