//! Estimators and checks built on top of simulated trajectories.

pub mod canon;
pub mod clusters;
pub mod correlation;
pub mod dimension;
pub mod distortion;
pub mod factorization;
pub mod growth;
pub mod invariance;
pub mod reversibility;
pub mod stats;

use thiserror::Error;

use crate::generators::GeneratorError;
use crate::grammar::SubstitutionError;
use crate::graph::{GraphError, VertexId};
use crate::simulator::SimError;

pub use canon::{canonical_form, CanonicalGraph};
pub use clusters::{anchor_cluster_size, cluster_tail_fit, growth_tail_check, ClusterCensus, ClusterTailFit, GrowthTailReport};
pub use correlation::{correlation_functions, CorrelationAccumulator, CorrelationTable};
pub use dimension::{basepoint_invariance_check, default_fit_window, dim_profile, BasepointReport, MacrodimensionEstimate};
pub use distortion::{distance_distortion, DistortionReport, PairSource};
pub use factorization::{cluster_factorization_test, FactorizationCensus, FactorizationReport};
pub use growth::{pure_growth_check, PureGrowthReport};
pub use invariance::{invariance_experiment, InvarianceOptions, InvarianceReport};
pub use reversibility::{reversibility_check, reversibility_check_chain, RateChain, ReversibilityReport, Verdict};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("window too small: {0}")]
    WindowTooSmall(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("{x} and {y} became unreachable{}", event.map(|e| format!(" after event {e}")).unwrap_or_default())]
    UnreachablePair {
        x: VertexId,
        y: VertexId,
        event: Option<usize>,
    },
    #[error("reachable states outgrow the bounds (size cap {cap}, {states} states so far)")]
    StateSpaceExplosion { cap: usize, states: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("no untouched vertex left in the window")]
    NoUntouchedVertex,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Substitution(#[from] SubstitutionError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Generator(#[from] GeneratorError),
}
