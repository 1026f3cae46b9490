//! Continuous-time dynamics on a finite window.
//!
//! Every eligible embedding of rule `i` carries an exponential clock of rate
//! `λᵢ`. The direct method draws the next event time from `Exp(Λ)` with `Λ` the
//! total rate and picks an embedding with probability proportional to its
//! rate. Embeddings that touch the frozen outer shell of the window are not
//! eligible, so the interior evolves as if the graph went on forever.

mod clusters;

use std::fmt::Write as _;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use serde::Serialize;
use smallvec::SmallVec;
use thiserror::Error;

use crate::generators::Window;
use crate::grammar::{ApplyOptions, Grammar, SubstitutionError};
use crate::graph::{is_connected, GraphError, SpinGraph, VertexId};
use crate::matcher::{Eligibility, Image, MatchError, MatchIndex};

pub use clusters::{
    conditional_cluster_process, growth_count, touched_clusters, ConditionalConfig,
    ConditionalSample,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid simulation setup: {0}")]
    Config(String),
    #[error("event cap of {cap} reached at t = {time}")]
    EventCapExceeded { cap: u64, time: f64 },
    #[error(transparent)]
    Substitution(#[from] SubstitutionError),
    #[error(transparent)]
    Match(#[from] MatchError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("acceptance {accepted}/{attempts} is below the floor")]
    AcceptanceTooLow { attempts: u64, accepted: u64 },
}

/// Parameters of one windowed run.
#[derive(Clone, Debug)]
pub struct SimConfig {
    pub grammar: Arc<Grammar>,
    /// Time horizon ε.
    pub horizon: f64,
    pub seed: u64,
    pub event_cap: u64,
    /// Width of the frozen outer shell, in hops from the window boundary.
    pub margin: usize,
    pub strict_connectivity: bool,
    /// Fire embeddings that break the degree cap and fail, instead of skipping them.
    pub strict_degree: bool,
    /// Keep the full event list in the trajectory.
    pub record_events: bool,
    /// Keep the final graph in the trajectory.
    pub keep_final: bool,
    /// Cross-check the match index against a full rebuild after every event.
    pub verify_index: bool,
}

impl SimConfig {
    pub fn new(grammar: Grammar, horizon: f64) -> Self {
        let margin = grammar.max_radius().unwrap_or(1).max(1);
        SimConfig {
            grammar: Arc::new(grammar),
            horizon,
            seed: 0,
            event_cap: 1_000_000,
            margin,
            strict_connectivity: false,
            strict_degree: false,
            record_events: true,
            keep_final: true,
            verify_index: false,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_margin(mut self, margin: usize) -> Self {
        self.margin = margin;
        self
    }

    pub fn with_horizon(mut self, horizon: f64) -> Self {
        self.horizon = horizon;
        self
    }

    fn validate(&self) -> Result<(), SimError> {
        if self.event_cap == 0 {
            return Err(SimError::Config("event cap must be positive".into()));
        }
        if !(self.horizon >= 0.0 && self.horizon.is_finite()) {
            return Err(SimError::Config(format!("horizon {} is not a finite time", self.horizon)));
        }
        Ok(())
    }
}

/// Seed of replica `i` under base seed `base`.
pub fn replica_seed(base: u64, i: u64) -> u64 {
    base.wrapping_add(i)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Event {
    pub time: f64,
    pub rule: usize,
    pub image: Image,
    pub fresh: SmallVec<[VertexId; 4]>,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub initial: Arc<SpinGraph>,
    pub origin: Option<VertexId>,
    pub seed: u64,
    pub horizon: f64,
    pub events: Vec<Event>,
    pub event_count: u64,
    pub final_graph: Option<SpinGraph>,
    /// Q: initial vertices that lay in some event image, sorted.
    pub touched: Vec<VertexId>,
}

impl Trajectory {
    pub fn is_touched(&self, v: VertexId) -> bool {
        self.touched.binary_search(&v).is_ok()
    }

    /// R: initial vertices never touched, sorted.
    pub fn untouched(&self) -> Vec<VertexId> {
        self.initial.vertices().filter(|&v| !self.is_touched(v)).collect()
    }

    /// One line per event: `t=<time> rule=<name> image=<ids> fresh=<ids>`.
    pub fn event_log(&self, grammar: &Grammar) -> String {
        let mut out = String::new();
        for e in &self.events {
            let ids = |vs: &[VertexId]| vs.iter().map(|v| v.0.to_string()).collect::<Vec<_>>().join(",");
            writeln!(
                out,
                "t={:.9} rule={} image={} fresh={}",
                e.time,
                grammar.rules[e.rule].name,
                ids(&e.image),
                ids(&e.fresh)
            )
            .expect("writing to a string");
        }
        out
    }
}

/// Initial state shared by the replicas of one experiment.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub graph: Arc<SpinGraph>,
    pub origin: Option<VertexId>,
    index: MatchIndex,
}

impl Prepared {
    /// Freezes every vertex farther than `radius − margin` from the origin.
    pub fn new(window: &Window, cfg: &SimConfig) -> Result<Self, SimError> {
        let grammar = &cfg.grammar;
        if let Some(r) = grammar.max_radius() {
            if cfg.margin < r {
                return Err(SimError::Config(format!(
                    "margin {} is below the largest rule radius {r}",
                    cfg.margin
                )));
            }
        }
        let limit = window.radius.saturating_sub(cfg.margin);
        let dist = window.graph.distances_from(window.origin, None)?;
        let frozen = (0..window.graph.id_bound())
            .map(|i| dist.get(VertexId(i as u32)).is_none_or(|d| d > limit))
            .collect();
        Self::from_graph(window.graph.clone(), Some(window.origin), Some(frozen), cfg)
    }

    /// A bare graph; `frozen[id]` marks vertices no event may touch.
    pub fn from_graph(
        mut graph: SpinGraph,
        origin: Option<VertexId>,
        frozen: Option<Vec<bool>>,
        cfg: &SimConfig,
    ) -> Result<Self, SimError> {
        cfg.validate()?;
        if !is_connected(&graph) {
            return Err(SimError::Config("initial graph is not connected".into()));
        }
        graph.set_degree_cap(cfg.grammar.degree_cap)?;
        let eligibility = Eligibility {
            frozen: frozen.map(Arc::new),
            degree_guard: !cfg.strict_degree,
        };
        let index = MatchIndex::build(&graph, &cfg.grammar, eligibility);
        Ok(Prepared {
            graph: Arc::new(graph),
            origin,
            index,
        })
    }

    /// Eligible embeddings at time zero.
    pub fn initial_embeddings(&self) -> usize {
        self.index.len()
    }

    pub fn run(&self, cfg: &SimConfig, seed: u64) -> Result<Trajectory, SimError> {
        let grammar = &cfg.grammar;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut graph = (*self.graph).clone();
        let mut index = self.index.clone();
        let initial_bound = self.graph.id_bound();
        let mut touched = vec![false; initial_bound];
        let options = ApplyOptions {
            strict_connectivity: cfg.strict_connectivity,
        };
        let mut events = Vec::new();
        let mut count = 0u64;
        let mut time = 0.0;
        loop {
            let rate = index.total_rate();
            if rate <= 0.0 {
                break;
            }
            time += Exp::new(rate).expect("positive rate").sample(&mut rng);
            if time > cfg.horizon {
                break;
            }
            if count == cfg.event_cap {
                return Err(SimError::EventCapExceeded {
                    cap: cfg.event_cap,
                    time,
                });
            }
            let embedding = index.select(rng.random::<f64>()).expect("positive total rate");
            let outcome = index.apply(&mut graph, grammar, &embedding, options)?;
            for v in &embedding.image {
                if v.index() < initial_bound {
                    touched[v.index()] = true;
                }
            }
            count += 1;
            if cfg.record_events {
                events.push(Event {
                    time,
                    rule: embedding.rule,
                    image: embedding.image,
                    fresh: outcome.fresh,
                });
            }
            if cfg.verify_index {
                index.verify(&graph, grammar)?;
            }
        }
        Ok(Trajectory {
            initial: self.graph.clone(),
            origin: self.origin,
            seed,
            horizon: cfg.horizon,
            events,
            event_count: count,
            final_graph: cfg.keep_final.then_some(graph),
            touched: (0..initial_bound)
                .filter(|&i| touched[i])
                .map(|i| VertexId(i as u32))
                .collect(),
        })
    }

    /// Runs replicas `0..n` in parallel with seeds `cfg.seed + i` and maps each
    /// trajectory through `f`. Results come back in replica order.
    pub fn run_replicas<T, F>(&self, cfg: &SimConfig, n: u64, f: F) -> Result<Vec<T>, SimError>
    where
        T: Send,
        F: Fn(u64, Trajectory) -> T + Sync + Send,
    {
        (0..n)
            .into_par_iter()
            .map(|i| self.run(cfg, replica_seed(cfg.seed, i)).map(|t| f(i, t)))
            .collect()
    }
}

/// One run of the windowed process `ξ^N` from the window's initial state.
pub fn run_window(window: &Window, cfg: &SimConfig) -> Result<Trajectory, SimError> {
    Prepared::new(window, cfg)?.run(cfg, cfg.seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::GeneratorSpec;
    use crate::grammar::builtin;
    use crate::graph::Alphabet;

    fn window(spec: &str, grammar: &Grammar) -> Window {
        let mut alphabet: Alphabet = grammar.alphabet.clone();
        spec.parse::<GeneratorSpec>().unwrap().generate(&mut alphabet).unwrap()
    }

    #[test]
    fn frozen_grammar_never_moves() {
        let grammar = builtin::by_name("frozen").unwrap();
        let w = window("lattice:z2:radius=4", &grammar);
        let traj = run_window(&w, &SimConfig::new(grammar, 10.0)).unwrap();
        assert_eq!(traj.event_count, 0);
        assert!(traj.touched.is_empty());
        assert_eq!(traj.untouched().len(), w.graph.vertex_count());
    }

    #[test]
    fn one_way_flips_fire_at_most_once_per_vertex() {
        let grammar = builtin::spin_flip(2.0);
        let w = window("lattice:z1:radius=20", &grammar);
        let cfg = SimConfig::new(grammar, 5.0).with_seed(3);
        let traj = run_window(&w, &cfg).unwrap();
        let interior = w.graph.vertex_count() - 2;
        assert!(traj.event_count as usize <= interior);
        let mut seen: Vec<VertexId> = traj.events.iter().map(|e| e.image[0]).collect();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len() as u64, traj.event_count);
        assert_eq!(seen, traj.touched);
    }

    #[test]
    fn same_seed_same_trajectory() {
        let grammar = builtin::chord(0.5, 0.5);
        let w = window("lattice:z2:radius=6", &grammar);
        let cfg = SimConfig::new(grammar, 1.0).with_seed(11);
        let a = run_window(&w, &cfg).unwrap();
        let b = run_window(&w, &cfg).unwrap();
        assert_eq!(a.events, b.events);
        assert_eq!(a.final_graph, b.final_graph);
        assert!(a.event_count > 0);
    }

    #[test]
    fn frozen_shell_is_never_touched() {
        let grammar = builtin::chord(1.0, 1.0);
        let w = window("lattice:z2:radius=5", &grammar);
        let cfg = SimConfig::new(grammar, 3.0).with_seed(2);
        let traj = run_window(&w, &cfg).unwrap();
        let d = w.graph.distances_from(w.origin, None).unwrap();
        assert!(traj.touched.iter().all(|&v| d.get(v).unwrap() <= 4));
    }

    #[test]
    fn event_cap_is_reported() {
        let grammar = builtin::two_way_flip(1.0);
        let w = window("lattice:z1:radius=10", &grammar);
        let mut cfg = SimConfig::new(grammar, 100.0);
        cfg.event_cap = 5;
        assert!(matches!(run_window(&w, &cfg), Err(SimError::EventCapExceeded { cap: 5, .. })));
    }

    #[test]
    fn event_log_format() {
        let grammar = builtin::spin_flip(1.0);
        let w = window("lattice:z1:radius=3", &grammar);
        let cfg = SimConfig::new(grammar.clone(), 10.0).with_seed(1);
        let traj = run_window(&w, &cfg).unwrap();
        let log = traj.event_log(&grammar);
        let first = log.lines().next().unwrap();
        assert!(first.starts_with("t=") && first.contains(" rule=flip image=") && first.ends_with("fresh="));
    }
}
