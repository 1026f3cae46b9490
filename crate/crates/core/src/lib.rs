//! Stochastic graph grammars on spin graphs.
//!
//! A [`graph::SpinGraph`] evolves under a [`grammar::Grammar`]: every
//! embedding of a rule's left-hand side fires at the rule's rate and is
//! replaced by the right-hand side. The [`simulator`] runs this dynamics on
//! finite windows of infinite graphs and the [`analysis`] module measures what
//! it does to the large-scale geometry, above all the scaling dimension
//! `lim ln|O_n(x)| / ln n`.
//!
//! ```
//! use macrodim::generators::GeneratorSpec;
//! use macrodim::grammar::builtin;
//! use macrodim::simulator::{run_window, SimConfig};
//!
//! let grammar = builtin::chord(0.5, 0.5);
//! let mut alphabet = grammar.alphabet.clone();
//! let window = GeneratorSpec::lattice(2, 8).generate(&mut alphabet).unwrap();
//! let traj = run_window(&window, &SimConfig::new(grammar, 0.2).with_seed(7)).unwrap();
//! assert!(traj.touched.len() <= window.graph.vertex_count());
//! ```

pub mod analysis;
pub mod generators;
pub mod grammar;
pub mod graph;
pub mod matcher;
pub mod simulator;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    struct Introduction;
    #[doc = include_str!("../../../book/src/graphs.md")]
    struct Graphs;
    #[doc = include_str!("../../../book/src/grammars.md")]
    struct Grammars;
    #[doc = include_str!("../../../book/src/simulation.md")]
    struct Simulation;
    #[doc = include_str!("../../../book/src/analysis.md")]
    struct Analysis;
    #[doc = include_str!("../../../book/src/cli.md")]
    struct Cli;
}
