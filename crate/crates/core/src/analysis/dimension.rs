//! Scaling dimension `D_n(x) = ln|O_n(x)| / ln n` and the base-point sandwich.

use serde::Serialize;

use super::stats::line_fit;
use super::AnalysisError;
use crate::graph::{distance, BallProfile, SpinGraph, VertexId};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MacrodimensionEstimate {
    pub profile: BallProfile,
    /// `(n, D_n)` for `n = 2..=n_max`.
    pub d: Vec<(usize, f64)>,
    pub fit_window: (usize, usize),
    /// Least-squares slope of `ln|O_n|` against `ln n` over the fit window.
    pub slope: f64,
    pub intercept: f64,
    /// Largest `D_n` over the fit window.
    pub limsup_proxy: f64,
    /// Smallest `D_n` over the fit window.
    pub liminf_proxy: f64,
    /// Bound on `|D_n − slope|` over the fit window: `D_n` differs from the
    /// slope by `(intercept + residual) / ln n`.
    pub tolerance: f64,
}

impl MacrodimensionEstimate {
    /// Fits a ball profile over `[n_min, n_max]`.
    pub fn from_profile(profile: BallProfile, fit_window: (usize, usize)) -> Result<Self, AnalysisError> {
        let (lo, hi) = fit_window;
        if lo < 2 || hi <= lo || hi > profile.n_max() {
            return Err(AnalysisError::WindowTooSmall(format!(
                "fit window [{lo}, {hi}] needs 2 <= n_min < n_max <= {}",
                profile.n_max()
            )));
        }
        let d = (2..=profile.n_max())
            .map(|n| (n, (profile.size(n) as f64).ln() / (n as f64).ln()))
            .collect::<Vec<_>>();
        let xs: Vec<f64> = (lo..=hi).map(|n| (n as f64).ln()).collect();
        let ys: Vec<f64> = (lo..=hi).map(|n| (profile.size(n) as f64).ln()).collect();
        let fit = line_fit(&xs, &ys).expect("at least two radii");
        let in_window = &d[lo - 2..=hi - 2];
        let max_residual = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (y - fit.intercept - fit.slope * x).abs())
            .fold(0.0, f64::max);
        Ok(MacrodimensionEstimate {
            limsup_proxy: in_window.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max),
            liminf_proxy: in_window.iter().map(|p| p.1).fold(f64::INFINITY, f64::min),
            tolerance: (fit.intercept.abs() + max_residual) / (lo as f64).ln(),
            slope: fit.slope,
            intercept: fit.intercept,
            fit_window,
            d,
            profile,
        })
    }

    /// `D_n`, for `2 <= n <= n_max`.
    pub fn d_at(&self, n: usize) -> Option<f64> {
        n.checked_sub(2).and_then(|i| self.d.get(i)).map(|p| p.1)
    }

    /// `liminf − tol <= slope <= limsup + tol`.
    pub fn is_consistent(&self) -> bool {
        let eps = 1e-9;
        self.liminf_proxy - self.tolerance - eps <= self.slope
            && self.slope <= self.limsup_proxy + self.tolerance + eps
    }
}

/// Default fit window `[max(2, N/4), N]`.
pub fn default_fit_window(n_max: usize) -> (usize, usize) {
    ((n_max / 4).max(2), n_max)
}

/// Dimension profile of `g` around `x` up to radius `n_max`, fitted over `[N/4, N]`.
///
/// The caller keeps `O_{n_max}(x)` inside whatever window `g` stands for.
pub fn dim_profile(g: &SpinGraph, x: VertexId, n_max: usize) -> Result<MacrodimensionEstimate, AnalysisError> {
    dim_profile_with(g, x, n_max, default_fit_window(n_max))
}

pub fn dim_profile_with(
    g: &SpinGraph,
    x: VertexId,
    n_max: usize,
    fit_window: (usize, usize),
) -> Result<MacrodimensionEstimate, AnalysisError> {
    let profile = BallProfile::from_graph(g, x, n_max)?;
    MacrodimensionEstimate::from_profile(profile, fit_window)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SandwichViolation {
    pub n: usize,
    pub lower: u64,
    pub middle: u64,
    pub upper: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BasepointReport {
    pub x: VertexId,
    pub y: VertexId,
    /// `a = d(x, y)`.
    pub a: usize,
    pub checked: usize,
    pub violation: Option<SandwichViolation>,
}

impl BasepointReport {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

/// Checks `|O_{n−a}(y)| <= |O_n(x)| <= |O_{n+a}(y)|` for `a < n <= n_max − a`.
pub fn basepoint_invariance_check(
    g: &SpinGraph,
    x: VertexId,
    y: VertexId,
    n_max: usize,
) -> Result<BasepointReport, AnalysisError> {
    let a = distance(g, x, y)?.ok_or_else(|| {
        AnalysisError::Precondition(format!("{x} and {y} lie in different components"))
    })?;
    let px = BallProfile::from_graph(g, x, n_max)?;
    let py = BallProfile::from_graph(g, y, n_max)?;
    let mut report = BasepointReport {
        x,
        y,
        a,
        checked: 0,
        violation: None,
    };
    let first = if a == 0 { 0 } else { a + 1 };
    for n in first..=n_max.saturating_sub(a) {
        let (lower, middle, upper) = (py.size(n - a), px.size(n), py.size(n + a));
        report.checked += 1;
        if !(lower <= middle && middle <= upper) {
            report.violation = Some(SandwichViolation {
                n,
                lower,
                middle,
                upper,
            });
            break;
        }
    }
    Ok(report)
}
