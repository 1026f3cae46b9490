//! Cluster-size tails `p(m) < C δ^m` and growth tails of the conditional process.

use std::collections::VecDeque;

use serde::Serialize;

use super::stats::{weighted_line_fit, wilson_interval, Z95};
use super::AnalysisError;
use crate::graph::VertexId;
use crate::simulator::Trajectory;

/// Size of the touched cluster containing `anchor` (0 when untouched).
pub fn anchor_cluster_size(traj: &Trajectory, anchor: VertexId) -> usize {
    if !traj.is_touched(anchor) {
        return 0;
    }
    let g = &traj.initial;
    let mut seen = vec![anchor];
    let mut queue = VecDeque::from([anchor]);
    while let Some(u) = queue.pop_front() {
        for &w in g.neighbors(u) {
            if traj.is_touched(w) && !seen.contains(&w) {
                seen.push(w);
                queue.push_back(w);
            }
        }
    }
    seen.len()
}

/// Histogram of anchor-cluster sizes over replicas.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ClusterCensus {
    /// `counts[m]` = replicas whose anchor cluster has size m.
    pub counts: Vec<u64>,
    pub replicas: u64,
}

impl ClusterCensus {
    pub fn record(&mut self, size: usize) {
        if self.counts.len() <= size {
            self.counts.resize(size + 1, 0);
        }
        self.counts[size] += 1;
        self.replicas += 1;
    }

    pub fn add(&mut self, traj: &Trajectory, anchor: VertexId) {
        self.record(anchor_cluster_size(traj, anchor));
    }

    pub fn merge(&mut self, other: &ClusterCensus) {
        if self.counts.len() < other.counts.len() {
            self.counts.resize(other.counts.len(), 0);
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.replicas += other.replicas;
    }

    /// Empirical `p(m)` for `m >= 1`.
    pub fn probability(&self, m: usize) -> f64 {
        if self.replicas == 0 {
            return 0.0;
        }
        self.counts.get(m).copied().unwrap_or(0) as f64 / self.replicas as f64
    }

    /// Fits `ln p(m) = ln C + m ln δ` by weighted least squares over sizes
    /// `m >= 2` seen at least `min_bucket` times, with weights equal to the
    /// bucket counts. Needs at least `min_tail_events` replicas with `m >= 2`
    /// and two usable buckets.
    pub fn fit(&self, min_bucket: u64, min_tail_events: u64) -> Result<ClusterTailFit, AnalysisError> {
        let buckets: Vec<TailBucket> = (1..self.counts.len())
            .map(|m| {
                let count = self.counts[m];
                let (lo, hi) = wilson_interval(count, self.replicas, Z95);
                TailBucket {
                    m,
                    count,
                    p: self.probability(m),
                    lo,
                    hi,
                }
            })
            .collect();
        let tail_events: u64 = self.counts.iter().skip(2).sum();
        let used: Vec<&TailBucket> = buckets.iter().filter(|b| b.m >= 2 && b.count >= min_bucket).collect();
        if tail_events < min_tail_events || used.len() < 2 {
            return Err(AnalysisError::InsufficientData(format!(
                "{tail_events} tail events in {} usable buckets",
                used.len()
            )));
        }
        let xs: Vec<f64> = used.iter().map(|b| b.m as f64).collect();
        let ys: Vec<f64> = used.iter().map(|b| b.p.ln()).collect();
        let ws: Vec<f64> = used.iter().map(|b| b.count as f64).collect();
        let fit = weighted_line_fit(&xs, &ys, &ws).expect("two distinct sizes");
        let fitted_sizes = used.iter().map(|b| b.m).collect();
        Ok(ClusterTailFit {
            replicas: self.replicas,
            buckets,
            fitted_sizes,
            c: fit.intercept.exp(),
            delta: fit.slope.exp(),
            r_squared: fit.r_squared,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailBucket {
    pub m: usize,
    pub count: u64,
    pub p: f64,
    /// 95% Wilson interval.
    pub lo: f64,
    pub hi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClusterTailFit {
    pub replicas: u64,
    pub buckets: Vec<TailBucket>,
    pub fitted_sizes: Vec<usize>,
    pub c: f64,
    pub delta: f64,
    pub r_squared: f64,
}

/// Cluster census of `anchor` over `replicas` with the default fit settings
/// (buckets of at least 5 events, at least 20 tail events).
pub fn cluster_tail_fit(replicas: &[Trajectory], anchor: VertexId) -> Result<ClusterTailFit, AnalysisError> {
    let mut census = ClusterCensus::default();
    for t in replicas {
        census.add(t, anchor);
    }
    census.fit(5, 20)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthTailRow {
    pub k: f64,
    pub km: f64,
    pub exceed: u64,
    pub p: f64,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthTailReport {
    /// Cluster size m.
    pub m: usize,
    pub samples: u64,
    pub rows: Vec<GrowthTailRow>,
    /// `δ₁` from `ln P(growth > km) ≈ ln c + km ln δ₁` over rows with at least 5 exceedances.
    pub delta1: Option<f64>,
    pub r_squared: Option<f64>,
}

/// Tail of the growth counts of accepted conditional runs of a size-`m` cluster.
pub fn growth_tail_check(m: usize, growths: &[usize], k_grid: &[f64]) -> Result<GrowthTailReport, AnalysisError> {
    if growths.is_empty() {
        return Err(AnalysisError::InsufficientData("no conditional runs".into()));
    }
    let n = growths.len() as u64;
    let rows: Vec<GrowthTailRow> = k_grid
        .iter()
        .map(|&k| {
            let km = k * m as f64;
            let exceed = growths.iter().filter(|&&g| g as f64 > km).count() as u64;
            let (lo, hi) = wilson_interval(exceed, n, Z95);
            GrowthTailRow {
                k,
                km,
                exceed,
                p: exceed as f64 / n as f64,
                lo,
                hi,
            }
        })
        .collect();
    let used: Vec<&GrowthTailRow> = rows.iter().filter(|r| r.exceed >= 5).collect();
    let fit = weighted_line_fit(
        &used.iter().map(|r| r.km).collect::<Vec<_>>(),
        &used.iter().map(|r| r.p.ln()).collect::<Vec<_>>(),
        &used.iter().map(|r| r.exceed as f64).collect::<Vec<_>>(),
    );
    Ok(GrowthTailReport {
        m,
        samples: n,
        rows,
        delta1: fit.map(|f| f.slope.exp()),
        r_squared: fit.map(|f| f.r_squared),
    })
}
