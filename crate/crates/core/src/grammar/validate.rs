//! Static checks on a grammar: locality and local boundedness.

use serde::Serialize;

use super::{Grammar, SubstitutionRule};
use crate::graph::is_connected;

/// Rules whose left-hand side is disconnected.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LocalityReport {
    pub offending: Vec<String>,
}

impl LocalityReport {
    pub fn is_local(&self) -> bool {
        self.offending.is_empty()
    }
}

/// A grammar is local when every Γ is connected. The empty graph counts as connected.
pub fn validate_local(grammar: &Grammar) -> LocalityReport {
    LocalityReport {
        offending: grammar
            .rules
            .iter()
            .filter(|r| !is_connected(&r.lhs))
            .map(|r| r.name.clone())
            .collect(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundedness {
    /// No application can push a degree above the cap.
    Pass,
    /// Some applications exceed the cap, others do not; the simulator guards at run time.
    Warning,
    /// Every application exceeds the cap.
    Fail,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RuleBoundedness {
    pub rule: String,
    pub verdict: Boundedness,
    /// Largest post-event degree over hosts respecting the cap.
    pub worst_degree: usize,
    /// Smallest post-event degree of the most loaded vertex, over the same hosts.
    pub best_degree: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundednessReport {
    pub degree_cap: usize,
    pub verdict: Boundedness,
    pub rules: Vec<RuleBoundedness>,
}

/// Worst case and best case of the largest post-event degree.
///
/// A glued vertex `v` with host degree `d ≤ n` loses at least `deg_Γ(v)` edges
/// and gains at most `deg_Γ′(φ(v))`; a host that hangs `n − deg_Γ(v)` pendant
/// vertices off `ψ(v)` attains the bound. Its post degree is never below
/// `deg_Γ′(φ(v))`, since the Γ′ neighbours are distinct vertices. Fresh
/// vertices have exactly their Γ′ degree.
fn degree_bounds(rule: &SubstitutionRule, cap: usize) -> (usize, usize) {
    let mut worst = 0;
    let mut best = 0;
    for &(l, r) in &rule.glue {
        let gained = rule.rhs.degree(r);
        worst = worst.max(cap - rule.lhs.degree(l).min(cap) + gained);
        best = best.max(gained);
    }
    for r in rule.rhs.vertices() {
        if rule.glued_from(r).is_none() {
            worst = worst.max(rule.rhs.degree(r));
            best = best.max(rule.rhs.degree(r));
        }
    }
    (worst, best)
}

/// Conservative check that the dynamics keeps every degree within the cap.
///
/// Rules whose Γ already exceeds the cap never fire and pass vacuously.
pub fn validate_locally_bounded(grammar: &Grammar) -> BoundednessReport {
    let cap = grammar.degree_cap;
    let rules: Vec<RuleBoundedness> = grammar
        .rules
        .iter()
        .map(|rule| {
            let (worst, best) = degree_bounds(rule, cap);
            let verdict = if rule.lhs.max_degree() > cap || worst <= cap {
                Boundedness::Pass
            } else if best > cap {
                Boundedness::Fail
            } else {
                Boundedness::Warning
            };
            RuleBoundedness {
                rule: rule.name.clone(),
                verdict,
                worst_degree: worst,
                best_degree: best,
            }
        })
        .collect();
    BoundednessReport {
        degree_cap: cap,
        verdict: rules
            .iter()
            .map(|r| r.verdict)
            .max()
            .unwrap_or(Boundedness::Pass),
        rules,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::{builtin, parse_grammar, substitute_in_place, ApplyOptions};
    use crate::graph::{SpinGraph, VertexId};

    #[test]
    fn locality() {
        let g = parse_grammar(
            "alphabet a
degreecap 4
rule edge rate 1
  lhs
    v x a
    v y a
    e x y
  rhs
    v x a
    v y a
  glue x -> x
  glue y -> y
rule pair rate 1
  lhs
    v x a
    v y a
  rhs
rule nothing rate 1
  lhs
  rhs
    v w a
",
        )
        .unwrap();
        assert_eq!(validate_local(&g).offending, vec!["pair".to_string()]);
        assert!(validate_local(&builtin::suite()).is_local());
    }

    #[test]
    fn spin_flip_passes_for_any_cap() {
        for cap in [1, 2, 5, 64] {
            let mut g = builtin::spin_flip(1.0);
            g.degree_cap = cap;
            assert_eq!(validate_locally_bounded(&g).verdict, Boundedness::Pass);
        }
    }

    // Tries append-leaf at a vertex of every legal host degree.
    #[test]
    fn append_leaf_with_small_cap_is_a_warning() {
        let grammar = builtin::append_leaf(1.0, 3);
        let report = validate_locally_bounded(&grammar);
        assert_eq!(report.verdict, Boundedness::Warning);
        let rule = &grammar.rules[0];
        let mut outcomes = Vec::new();
        for d in 0..=3u32 {
            let mut host = SpinGraph::new(3);
            let c = host.add_vertex(rule.lhs.spin(VertexId(0)));
            for _ in 0..d {
                let w = host.add_vertex(rule.lhs.spin(VertexId(0)));
                host.add_edge(c, w).unwrap();
            }
            outcomes.push(substitute_in_place(&mut host, rule, &[c], ApplyOptions::default()).is_ok());
        }
        assert_eq!(outcomes, vec![true, true, true, false]);
    }

    #[test]
    fn star_larger_than_cap_fails() {
        let mut text = String::from("alphabet a\ndegreecap 2\nrule star rate 1\n  lhs\n    v x a\n  rhs\n    v c a\n");
        for i in 0..3 {
            text.push_str(&format!("    v l{i} a\n    e c l{i}\n"));
        }
        text.push_str("  glue x -> c\n");
        let report = validate_locally_bounded(&parse_grammar(&text).unwrap());
        assert_eq!(report.verdict, Boundedness::Fail);
        assert_eq!(report.rules[0].best_degree, 3);
    }

    #[test]
    fn chord_moves_are_warnings_under_any_cap() {
        // join raises the end degrees by one, cut lowers them.
        let report = validate_locally_bounded(&builtin::chord(1.0, 1.0));
        assert_eq!(report.rules[0].verdict, Boundedness::Warning);
        assert_eq!(report.rules[1].verdict, Boundedness::Pass);
    }
}
