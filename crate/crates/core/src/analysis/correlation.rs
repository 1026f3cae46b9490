//! Correlation functions `⟨η_T^N⟩ = P(T ⊆ Q)` of the touched field.

use serde::Serialize;

use super::stats::Moments;
use super::AnalysisError;
use crate::graph::VertexId;
use crate::simulator::Trajectory;

/// Running estimates of `⟨η_T⟩` for a fixed list of test sets.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorrelationAccumulator {
    pub sets: Vec<Vec<VertexId>>,
    pub moments: Vec<Moments>,
}

impl CorrelationAccumulator {
    pub fn new(sets: Vec<Vec<VertexId>>) -> Self {
        let moments = vec![Moments::default(); sets.len()];
        CorrelationAccumulator { sets, moments }
    }

    pub fn add(&mut self, traj: &Trajectory) {
        for (set, m) in self.sets.iter().zip(&mut self.moments) {
            let all = set.iter().all(|&v| traj.is_touched(v));
            m.push(if all { 1.0 } else { 0.0 });
        }
    }

    pub fn merge(&mut self, other: &CorrelationAccumulator) {
        for (a, b) in self.moments.iter_mut().zip(&other.moments) {
            a.merge(b);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorrelationRow {
    pub radius: usize,
    pub set: usize,
    pub vertices: Vec<VertexId>,
    pub estimate: f64,
    pub std_error: f64,
    pub replicas: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorrelationDiff {
    pub set: usize,
    pub radius: usize,
    pub next_radius: usize,
    pub diff: f64,
    /// `sqrt(se₁² + se₂²)`.
    pub combined_se: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorrelationTable {
    pub rows: Vec<CorrelationRow>,
    /// Differences between successive radii of the grid, per set.
    pub diffs: Vec<CorrelationDiff>,
}

impl CorrelationTable {
    /// Builds the table from one accumulator per radius, in increasing radius order.
    pub fn from_accumulators(per_radius: &[(usize, CorrelationAccumulator)]) -> Result<Self, AnalysisError> {
        let mut rows = Vec::new();
        for (radius, acc) in per_radius {
            for (i, (set, m)) in acc.sets.iter().zip(&acc.moments).enumerate() {
                if m.n < 2 {
                    return Err(AnalysisError::InsufficientData(format!(
                        "{} replicas at radius {radius}",
                        m.n
                    )));
                }
                rows.push(CorrelationRow {
                    radius: *radius,
                    set: i,
                    vertices: set.clone(),
                    estimate: m.mean(),
                    std_error: m.std_error(),
                    replicas: m.n,
                });
            }
        }
        let mut diffs = Vec::new();
        for pair in per_radius.windows(2) {
            let ((r1, a), (r2, b)) = (&pair[0], &pair[1]);
            for (i, (m1, m2)) in a.moments.iter().zip(&b.moments).enumerate() {
                diffs.push(CorrelationDiff {
                    set: i,
                    radius: *r1,
                    next_radius: *r2,
                    diff: m1.mean() - m2.mean(),
                    combined_se: (m1.std_error().powi(2) + m2.std_error().powi(2)).sqrt(),
                });
            }
        }
        Ok(CorrelationTable { rows, diffs })
    }

    pub fn estimate(&self, radius: usize, set: usize) -> Option<&CorrelationRow> {
        self.rows.iter().find(|r| r.radius == radius && r.set == set)
    }
}

/// Correlation functions from finished runs, grouped by window radius.
/// Vertex ids of the test sets must mean the same vertex in every window.
pub fn correlation_functions(
    runs: &[(usize, Vec<Trajectory>)],
    sets: &[Vec<VertexId>],
) -> Result<CorrelationTable, AnalysisError> {
    let per_radius: Vec<(usize, CorrelationAccumulator)> = runs
        .iter()
        .map(|(radius, trajs)| {
            let mut acc = CorrelationAccumulator::new(sets.to_vec());
            trajs.iter().for_each(|t| acc.add(t));
            (*radius, acc)
        })
        .collect();
    CorrelationTable::from_accumulators(&per_radius)
}
