//! Clusters of the touched set and the conditional process `ζ(t, B)`.

use std::collections::VecDeque;

use serde::Serialize;

use super::{replica_seed, Prepared, SimConfig, SimError, Trajectory};
use crate::graph::{external_boundary, VertexId};

/// Connected components of the subgraph of `G(0)` induced by Q, ordered by
/// smallest vertex id.
pub fn touched_clusters(traj: &Trajectory) -> Vec<Vec<VertexId>> {
    let g = &traj.initial;
    let mut state = vec![0u8; g.id_bound()]; // 1 = in Q, 2 = visited
    for &v in &traj.touched {
        state[v.index()] = 1;
    }
    let mut out = Vec::new();
    let mut queue = VecDeque::new();
    for &v in &traj.touched {
        if state[v.index()] != 1 {
            continue;
        }
        state[v.index()] = 2;
        queue.push_back(v);
        let mut comp = vec![v];
        while let Some(u) = queue.pop_front() {
            for &w in g.neighbors(u) {
                if state[w.index()] == 1 {
                    state[w.index()] = 2;
                    comp.push(w);
                    queue.push_back(w);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConditionalConfig {
    pub max_attempts: u64,
    /// Give up when, after `max_attempts`, the acceptance rate is below this.
    pub min_acceptance: f64,
}

impl Default for ConditionalConfig {
    fn default() -> Self {
        ConditionalConfig {
            max_attempts: 100_000,
            min_acceptance: 0.0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ConditionalSample {
    pub trajectory: Trajectory,
    pub attempts: u64,
    /// Accepted fraction of all attempts made.
    pub acceptance: f64,
}

/// Rejection sampler for `ζ(t, B)`: run the process on `B ∪ ∂B` until every
/// vertex of B is touched and no vertex of ∂B is.
///
/// `initial` is `G(0)`. Nothing is frozen, so `cfg.margin` plays no role.
/// Attempt `i` uses seed `cfg.seed + i`. With a positive `min_acceptance` the
/// sampler keeps going after the first success until the acceptance estimate
/// clears the floor or the attempts run out.
pub fn conditional_cluster_process(
    initial: &crate::graph::SpinGraph,
    b: &[VertexId],
    cfg: &SimConfig,
    cond: ConditionalConfig,
) -> Result<ConditionalSample, SimError> {
    let mut b = b.to_vec();
    b.sort_unstable();
    b.dedup();
    let boundary = external_boundary(initial, &b)?;
    let domain: Vec<VertexId> = {
        let mut d = b.clone();
        d.extend_from_slice(&boundary);
        d.sort_unstable();
        d
    };
    let window = initial.induced_subgraph(&domain)?;
    let prepared = Prepared::from_graph(window, b.first().copied(), None, cfg)?;
    let accepts = |t: &Trajectory| {
        b.iter().all(|&v| t.is_touched(v)) && !boundary.iter().any(|&v| t.is_touched(v))
    };
    let mut accepted: Option<(Trajectory, u64)> = None;
    let mut hits = 0u64;
    let mut attempts = 0u64;
    while attempts < cond.max_attempts {
        let traj = prepared.run(cfg, replica_seed(cfg.seed, attempts))?;
        attempts += 1;
        if accepts(&traj) {
            hits += 1;
            if accepted.is_none() {
                accepted = Some((traj, attempts));
            }
            if cond.min_acceptance <= 0.0 {
                break;
            }
        }
        if cond.min_acceptance > 0.0 && accepted.is_some() && attempts >= 100 {
            let rate = hits as f64 / attempts as f64;
            if rate >= cond.min_acceptance {
                break;
            }
        }
    }
    let acceptance = hits as f64 / attempts.max(1) as f64;
    match accepted {
        Some((trajectory, first)) if acceptance >= cond.min_acceptance => Ok(ConditionalSample {
            trajectory,
            attempts: first,
            acceptance,
        }),
        _ => Err(SimError::AcceptanceTooLow {
            attempts,
            accepted: hits,
        }),
    }
}

/// Vertices of the final graph descending from B: the surviving vertices of B
/// plus every vertex created during the run.
pub fn growth_count(traj: &Trajectory, b: &[VertexId]) -> usize {
    let g = traj
        .final_graph
        .as_ref()
        .expect("growth_count needs the final graph");
    let bound = traj.initial.id_bound();
    let survivors = b.iter().filter(|&&v| g.contains(v)).count();
    let fresh = g.vertices().filter(|v| v.index() >= bound).count();
    survivors + fresh
}
