//! How much single events and whole trajectories move pairwise distances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::AnalysisError;
use crate::grammar::{substitute_in_place, ApplyOptions, Grammar, SubstitutionRule};
use crate::graph::{DistanceMap, SpinGraph, VertexId};
use crate::simulator::Trajectory;

/// Whether firing the rule can change adjacency at all.
pub fn moves_edges(rule: &SubstitutionRule) -> bool {
    if rule.glue.len() != rule.lhs_size() || rule.glue.len() != rule.rhs.vertex_count() {
        return true;
    }
    let norm = |a: VertexId, b: VertexId| if a < b { (a, b) } else { (b, a) };
    let mut mapped: Vec<_> = rule
        .lhs
        .edges()
        .map(|(a, b)| norm(rule.glue_of(a).unwrap(), rule.glue_of(b).unwrap()))
        .collect();
    mapped.sort_unstable();
    let rhs: Vec<_> = rule.rhs.edges().collect();
    mapped != rhs
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PairSource {
    /// Both ends in R.
    Untouched,
    /// R had fewer than two vertices; pairs come from initial vertices alive at the end.
    Surviving,
}

/// A distance change together with where it happened.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Extreme {
    pub delta: i64,
    pub x: VertexId,
    pub y: VertexId,
    /// Index of the event in the trajectory.
    pub event: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistortionReport {
    pub pair_source: PairSource,
    pub pairs: Vec<(VertexId, VertexId)>,
    pub initial_distances: Vec<usize>,
    pub events: usize,
    /// Events whose rule changes adjacency, for which distances were recomputed.
    pub recomputed: usize,
    /// Largest single-event increase of a sampled distance.
    pub max_increase: Extreme,
    /// Largest single-event decrease, reported as a negative delta.
    pub max_decrease: Extreme,
    /// Largest `|d_t − d_0|` over the run.
    pub max_drift: Extreme,
    pub threshold: Option<u64>,
}

impl DistortionReport {
    /// Largest `|Δd|` caused by one event.
    pub fn per_event_max(&self) -> u64 {
        self.max_increase.delta.unsigned_abs().max(self.max_decrease.delta.unsigned_abs())
    }

    pub fn within_threshold(&self) -> Option<bool> {
        self.threshold.map(|c| self.per_event_max() <= c)
    }
}

struct PairDistances {
    sources: Vec<(VertexId, Vec<VertexId>)>,
    map: DistanceMap,
}

impl PairDistances {
    fn new(pairs: &[(VertexId, VertexId)]) -> Self {
        let mut sources: Vec<(VertexId, Vec<VertexId>)> = Vec::new();
        for &(x, y) in pairs {
            match sources.iter_mut().find(|(s, _)| *s == x) {
                Some((_, ts)) => ts.push(y),
                None => sources.push((x, vec![y])),
            }
        }
        PairDistances {
            sources,
            map: DistanceMap::empty(),
        }
    }

    fn measure(
        &mut self,
        g: &SpinGraph,
        pairs: &[(VertexId, VertexId)],
        event: Option<usize>,
        out: &mut Vec<usize>,
    ) -> Result<(), AnalysisError> {
        out.clear();
        out.resize(pairs.len(), 0);
        for (x, targets) in &self.sources {
            self.map.recompute(g, *x, targets)?;
            for (i, &(a, b)) in pairs.iter().enumerate() {
                if a == *x {
                    out[i] = self
                        .map
                        .get(b)
                        .ok_or(AnalysisError::UnreachablePair { x: a, y: b, event })?;
                }
            }
        }
        Ok(())
    }
}

/// Replays the trajectory and tracks `pair_sample` random pairs of vertices.
///
/// The trajectory must carry its event list. `threshold` is the constant
/// `C` the per-event change is compared against.
pub fn distance_distortion(
    traj: &Trajectory,
    grammar: &Grammar,
    pair_sample: usize,
    seed: u64,
    threshold: Option<u64>,
) -> Result<DistortionReport, AnalysisError> {
    if traj.events.len() as u64 != traj.event_count {
        return Err(AnalysisError::Precondition("trajectory was run without recording events".into()));
    }
    let mut pool = traj.untouched();
    let mut pair_source = PairSource::Untouched;
    if pool.len() < 2 {
        let last = traj
            .final_graph
            .as_ref()
            .ok_or_else(|| AnalysisError::Precondition("no untouched pair and no final graph".into()))?;
        pool = traj.initial.vertices().filter(|&v| last.contains(v)).collect();
        pair_source = PairSource::Surviving;
    }
    if pool.len() < 2 {
        return Err(AnalysisError::InsufficientData("fewer than two persistent vertices".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(pair_sample);
    while pairs.len() < pair_sample {
        let x = pool[rng.random_range(0..pool.len())];
        let y = pool[rng.random_range(0..pool.len())];
        if x != y {
            pairs.push((x, y));
        }
    }
    let mut g = (*traj.initial).clone();
    let mut tracker = PairDistances::new(&pairs);
    let mut initial = Vec::new();
    tracker.measure(&g, &pairs, None, &mut initial)?;
    let moving: Vec<bool> = grammar.rules.iter().map(moves_edges).collect();
    let mut report = DistortionReport {
        pair_source,
        initial_distances: initial.clone(),
        events: traj.events.len(),
        recomputed: 0,
        max_increase: Extreme::default(),
        max_decrease: Extreme::default(),
        max_drift: Extreme::default(),
        threshold,
        pairs: pairs.clone(),
    };
    let mut before = initial.clone();
    let mut after = Vec::new();
    for (i, e) in traj.events.iter().enumerate() {
        let rule = &grammar.rules[e.rule];
        substitute_in_place(&mut g, rule, &e.image, ApplyOptions::default())?;
        if !moving[e.rule] {
            continue;
        }
        report.recomputed += 1;
        tracker.measure(&g, &pairs, Some(i), &mut after)?;
        for (p, &(x, y)) in pairs.iter().enumerate() {
            let delta = after[p] as i64 - before[p] as i64;
            let drift = after[p] as i64 - initial[p] as i64;
            let here = Extreme {
                delta,
                x,
                y,
                event: Some(i),
            };
            if delta > report.max_increase.delta {
                report.max_increase = here;
            }
            if delta < report.max_decrease.delta {
                report.max_decrease = here;
            }
            if drift.abs() > report.max_drift.delta.abs() {
                report.max_drift = Extreme { delta: drift, ..here };
            }
        }
        std::mem::swap(&mut before, &mut after);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::builtin;

    #[test]
    fn spin_rules_do_not_move_edges() {
        assert!(!moves_edges(&builtin::spin_flip(1.0).rules[0]));
        let suite = builtin::suite();
        let moving: Vec<bool> = suite.rules.iter().map(moves_edges).collect();
        assert_eq!(moving, vec![true, true, true, false, true, true]);
        assert!(builtin::chord(1.0, 1.0).rules.iter().all(moves_edges));
    }
}
