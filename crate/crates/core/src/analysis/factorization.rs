//! Cross-cluster independence of per-cluster statistics.
//!
//! Given that `B` and `B′` are both touched clusters, the runs inside them
//! should be independent. For every pair of clusters (identified by their
//! exact vertex sets) seen together often enough, the covariance of their
//! event counts across replicas gets a normal confidence interval.

use std::collections::BTreeMap;

use serde::Serialize;

use super::AnalysisError;
use crate::graph::VertexId;
use crate::simulator::{touched_clusters, Trajectory};

/// Per-cluster event counts of one run, for clusters inside `region`.
///
/// An event is charged to the cluster of its first image vertex that
/// belongs to `G(0)`; events with no such vertex are dropped.
pub fn cluster_event_counts(traj: &Trajectory, region: &[VertexId]) -> Vec<(Vec<VertexId>, u64)> {
    let clusters = touched_clusters(traj);
    let mut owner = vec![usize::MAX; traj.initial.id_bound()];
    for (i, c) in clusters.iter().enumerate() {
        for v in c {
            owner[v.index()] = i;
        }
    }
    let mut counts = vec![0u64; clusters.len()];
    for e in &traj.events {
        if let Some(v) = e.image.iter().find(|v| v.index() < owner.len() && owner[v.index()] != usize::MAX) {
            counts[owner[v.index()]] += 1;
        }
    }
    clusters
        .into_iter()
        .zip(counts)
        .filter(|(c, _)| c.iter().all(|v| region.binary_search(v).is_ok()))
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct FactorizationCensus {
    region: Vec<VertexId>,
    samples: BTreeMap<(Vec<VertexId>, Vec<VertexId>), Vec<(u64, u64)>>,
    /// Counts of one cluster, for the variance sanity arm.
    singles: BTreeMap<Vec<VertexId>, Vec<u64>>,
    pub replicas: u64,
}

impl FactorizationCensus {
    pub fn new(mut region: Vec<VertexId>) -> Self {
        region.sort_unstable();
        FactorizationCensus {
            region,
            ..Default::default()
        }
    }

    pub fn add(&mut self, traj: &Trajectory) {
        self.replicas += 1;
        let counts = cluster_event_counts(traj, &self.region);
        for (i, (a, x)) in counts.iter().enumerate() {
            self.singles.entry(a.clone()).or_default().push(*x);
            for (b, y) in &counts[i + 1..] {
                self.samples.entry((a.clone(), b.clone())).or_default().push((*x, *y));
            }
        }
    }

    pub fn merge(&mut self, other: FactorizationCensus) {
        self.replicas += other.replicas;
        for (k, v) in other.samples {
            self.samples.entry(k).or_default().extend(v);
        }
        for (k, v) in other.singles {
            self.singles.entry(k).or_default().extend(v);
        }
    }

    /// Tests every pair seen at least `min_samples` times with a two-sided
    /// normal interval of quantile `z`.
    pub fn report(&self, min_samples: usize, z: f64) -> Result<FactorizationReport, AnalysisError> {
        let pairs: Vec<PairCovariance> = self
            .samples
            .iter()
            .filter(|(_, s)| s.len() >= min_samples)
            .map(|((a, b), s)| {
                let (covariance, se) = covariance_with_se(s);
                PairCovariance {
                    a: a.clone(),
                    b: b.clone(),
                    samples: s.len(),
                    covariance,
                    std_error: se,
                    lo: covariance - z * se,
                    hi: covariance + z * se,
                    covers_zero: covariance - z * se <= 0.0 && 0.0 <= covariance + z * se,
                }
            })
            .collect();
        if pairs.is_empty() {
            return Err(AnalysisError::InsufficientData(format!(
                "no cluster pair seen {min_samples} times in {} replicas",
                self.replicas
            )));
        }
        let sanity = self
            .singles
            .iter()
            .max_by_key(|(c, s)| (s.len(), std::cmp::Reverse((*c).clone())))
            .map(|(c, s)| {
                let paired: Vec<(u64, u64)> = s.iter().map(|&x| (x, x)).collect();
                (c.clone(), covariance_with_se(&paired).0)
            });
        let covered = pairs.iter().filter(|p| p.covers_zero).count();
        Ok(FactorizationReport {
            replicas: self.replicas,
            z,
            covered_fraction: covered as f64 / pairs.len() as f64,
            pairs,
            self_variance: sanity,
        })
    }
}

fn covariance_with_se(samples: &[(u64, u64)]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mx = samples.iter().map(|s| s.0 as f64).sum::<f64>() / n;
    let my = samples.iter().map(|s| s.1 as f64).sum::<f64>() / n;
    let products: Vec<f64> = samples.iter().map(|&(x, y)| (x as f64 - mx) * (y as f64 - my)).collect();
    let mean = products.iter().sum::<f64>() / n;
    let cov = products.iter().sum::<f64>() / (n - 1.0).max(1.0);
    let var = products.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (cov, (var / n).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairCovariance {
    pub a: Vec<VertexId>,
    pub b: Vec<VertexId>,
    pub samples: usize,
    pub covariance: f64,
    pub std_error: f64,
    pub lo: f64,
    pub hi: f64,
    pub covers_zero: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FactorizationReport {
    pub replicas: u64,
    pub z: f64,
    pub pairs: Vec<PairCovariance>,
    pub covered_fraction: f64,
    /// The most frequent cluster and the variance of its own event count.
    pub self_variance: Option<(Vec<VertexId>, f64)>,
}

/// Factorization test over finished runs. Clusters must lie in `region`.
pub fn cluster_factorization_test(
    replicas: &[Trajectory],
    region: &[VertexId],
    min_samples: usize,
    z: f64,
) -> Result<FactorizationReport, AnalysisError> {
    let mut census = FactorizationCensus::new(region.to_vec());
    replicas.iter().for_each(|t| census.add(t));
    census.report(min_samples, z)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn covariance_of_known_samples() {
        let s = [(1, 2), (2, 4), (3, 6)];
        let (cov, _) = covariance_with_se(&s);
        assert!((cov - 2.0).abs() < 1e-12);
        let (cov, se) = covariance_with_se(&[(1, 5), (1, 7), (1, 9)]);
        assert_eq!((cov, se), (0.0, 0.0));
    }
}
