//! Substitution rules `(Γ, Γ′, V₀, φ, λ)` and graph grammars.
//!
//! A rule's left-hand side Γ and right-hand side Γ′ are small spin graphs
//! whose vertices are numbered densely from zero. The glue map φ is stored as
//! a list of `(lhs vertex, rhs vertex)` pairs; its domain is the anchor set V₀.

mod apply;
pub mod builtin;
mod parse;
mod validate;

use std::fmt;

use thiserror::Error;

use crate::graph::{connected_components, Alphabet, GraphError, SpinGraph, VertexId};

pub use apply::{
    apply_substitution, check_embedding, degree_violation, substitute_in_place, Applied,
    ApplyOptions, Outcome, SubstitutionError,
};
pub use parse::parse_grammar;
pub use validate::{
    validate_local, validate_locally_bounded, BoundednessReport, Boundedness, LocalityReport,
    RuleBoundedness,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GrammarError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}, column {column}: spin `{spin}` is not declared in the alphabet")]
    UndeclaredSpin {
        line: usize,
        column: usize,
        spin: String,
    },
    #[error("rule `{rule}` (line {line}): glue map is not injective")]
    NonInjectiveGlue { rule: String, line: usize },
    #[error("rule `{rule}` (line {line}): rate must be positive")]
    NonpositiveRate { rule: String, line: usize },
    #[error("rule `{rule}`: {message}")]
    InvalidRule { rule: String, message: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// A production `(Γ, Γ′, V₀, φ)` with its rate λ.
#[derive(Clone, Debug, PartialEq)]
pub struct SubstitutionRule {
    pub name: String,
    pub lhs: SpinGraph,
    pub rhs: SpinGraph,
    /// φ as `(lhs, rhs)` pairs sorted by lhs vertex; the lhs vertices form V₀.
    pub glue: Vec<(VertexId, VertexId)>,
    pub rate: f64,
    glue_of: Vec<Option<VertexId>>,
    glued_from: Vec<Option<VertexId>>,
}

impl SubstitutionRule {
    /// Builds a rule. `lhs` and `rhs` must have dense ids `0..k`.
    pub fn new(
        name: impl Into<String>,
        lhs: SpinGraph,
        rhs: SpinGraph,
        mut glue: Vec<(VertexId, VertexId)>,
        rate: f64,
    ) -> Result<Self, GrammarError> {
        let name = name.into();
        let invalid = |message: String| GrammarError::InvalidRule {
            rule: name.clone(),
            message,
        };
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(GrammarError::NonpositiveRate { rule: name, line: 0 });
        }
        for (g, label) in [(&lhs, "lhs"), (&rhs, "rhs")] {
            if g.id_bound() != g.vertex_count() {
                return Err(invalid(format!("{label} vertex ids must be dense")));
            }
        }
        glue.sort_unstable();
        let mut glue_of = vec![None; lhs.vertex_count()];
        let mut glued_from = vec![None; rhs.vertex_count()];
        for &(l, r) in &glue {
            if !lhs.contains(l) || !rhs.contains(r) {
                return Err(invalid(format!("glue pair {l} -> {r} is out of range")));
            }
            if glue_of[l.index()].is_some() {
                return Err(invalid(format!("lhs vertex {l} glued twice")));
            }
            if glued_from[r.index()].is_some() {
                return Err(GrammarError::NonInjectiveGlue { rule: name, line: 0 });
            }
            glue_of[l.index()] = Some(r);
            glued_from[r.index()] = Some(l);
        }
        Ok(SubstitutionRule {
            name,
            lhs,
            rhs,
            glue,
            rate,
            glue_of,
            glued_from,
        })
    }

    /// φ(v) for `v` in V₀.
    #[inline]
    pub fn glue_of(&self, lhs: VertexId) -> Option<VertexId> {
        self.glue_of[lhs.index()]
    }

    /// φ⁻¹(r) for `r` in φ(V₀).
    #[inline]
    pub fn glued_from(&self, rhs: VertexId) -> Option<VertexId> {
        self.glued_from[rhs.index()]
    }

    /// The anchor set V₀.
    pub fn anchor(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.glue.iter().map(|&(l, _)| l)
    }

    pub fn lhs_size(&self) -> usize {
        self.lhs.vertex_count()
    }

    /// Graph radius of Γ (`Some(0)` for the empty graph, `None` if disconnected).
    pub fn radius(&self) -> Option<usize> {
        graph_radius(&self.lhs)
    }

    pub fn lhs_diameter(&self) -> Option<usize> {
        graph_diameter(&self.lhs)
    }

    pub fn rhs_diameter(&self) -> Option<usize> {
        graph_diameter(&self.rhs)
    }

    /// The syntactic inverse `(Γ′, Γ, φ(V₀), φ⁻¹)` with the same rate.
    pub fn inverse(&self) -> SubstitutionRule {
        let glue = self.glue.iter().map(|&(l, r)| (r, l)).collect();
        SubstitutionRule::new(
            format!("{}~inv", self.name),
            self.rhs.clone(),
            self.lhs.clone(),
            glue,
            self.rate,
        )
        .expect("inverse of a valid rule is valid")
    }
}

fn eccentricities(g: &SpinGraph) -> Option<Vec<usize>> {
    if connected_components(g).len() > 1 {
        return None;
    }
    Some(
        g.vertices()
            .map(|v| {
                let map = g.distances_from(v, None).expect("live vertex");
                map.reached().iter().filter_map(|&w| map.get(w)).max().unwrap_or(0)
            })
            .collect(),
    )
}

pub(crate) fn graph_radius(g: &SpinGraph) -> Option<usize> {
    eccentricities(g).map(|e| e.into_iter().min().unwrap_or(0))
}

pub(crate) fn graph_diameter(g: &SpinGraph) -> Option<usize> {
    eccentricities(g).map(|e| e.into_iter().max().unwrap_or(0))
}

/// A finite set of rated substitutions over a spin alphabet with a degree cap.
#[derive(Clone, Debug, PartialEq)]
pub struct Grammar {
    pub alphabet: Alphabet,
    pub degree_cap: usize,
    pub rules: Vec<SubstitutionRule>,
}

impl Grammar {
    pub fn new(
        alphabet: Alphabet,
        degree_cap: usize,
        rules: Vec<SubstitutionRule>,
    ) -> Result<Self, GrammarError> {
        for rule in &rules {
            for g in [&rule.lhs, &rule.rhs] {
                if let Some(v) = g.vertices().find(|&v| !alphabet.contains(g.spin(v))) {
                    return Err(GrammarError::InvalidRule {
                        rule: rule.name.clone(),
                        message: format!("vertex {v} uses a spin outside the alphabet"),
                    });
                }
            }
        }
        let mut names: Vec<&str> = rules.iter().map(|r| r.name.as_str()).collect();
        names.sort_unstable();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(GrammarError::InvalidRule {
                rule: w[0].to_string(),
                message: "duplicate rule name".into(),
            });
        }
        Ok(Grammar {
            alphabet,
            degree_cap,
            rules,
        })
    }

    /// Grammar with no rules: the dynamics never moves.
    pub fn frozen(alphabet: Alphabet, degree_cap: usize) -> Self {
        Grammar {
            alphabet,
            degree_cap,
            rules: Vec::new(),
        }
    }

    pub fn rule_index(&self, name: &str) -> Option<usize> {
        self.rules.iter().position(|r| r.name == name)
    }

    /// Radius of each left-hand side (`None` for disconnected ones).
    pub fn radii(&self) -> Vec<Option<usize>> {
        self.rules.iter().map(SubstitutionRule::radius).collect()
    }

    pub fn max_radius(&self) -> Option<usize> {
        self.radii().into_iter().try_fold(0, |acc, r| r.map(|r| acc.max(r)))
    }

    /// Whether every left-hand side has radius at most one.
    pub fn radii_within_one(&self) -> bool {
        self.radii().iter().all(|r| matches!(r, Some(0) | Some(1)))
    }

    pub fn is_frozen(&self) -> bool {
        self.rules.is_empty()
    }
}

impl fmt::Display for Grammar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "alphabet")?;
        for name in self.alphabet.names() {
            write!(f, " {name}")?;
        }
        writeln!(f)?;
        writeln!(f, "degreecap {}", self.degree_cap)?;
        for rule in &self.rules {
            writeln!(f, "\nrule {} rate {:?}", rule.name, rule.rate)?;
            for (label, g) in [("lhs", &rule.lhs), ("rhs", &rule.rhs)] {
                writeln!(f, "  {label}")?;
                for v in g.vertices() {
                    writeln!(f, "    v {} {}", v, self.alphabet.name(g.spin(v)))?;
                }
                for (u, v) in g.edges() {
                    writeln!(f, "    e {u} {v}")?;
                }
            }
            if !rule.glue.is_empty() {
                write!(f, "  anchor")?;
                for v in rule.anchor() {
                    write!(f, " {v}")?;
                }
                writeln!(f)?;
            }
            for (l, r) in &rule.glue {
                writeln!(f, "  glue {l} -> {r}")?;
            }
            writeln!(f, "end")?;
        }
        Ok(())
    }
}
