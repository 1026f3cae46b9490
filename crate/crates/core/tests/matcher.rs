mod support;

use std::sync::Arc;

use macrodim::grammar::{builtin, parse_grammar, ApplyOptions, Grammar};
use macrodim::graph::{SpinGraph, VertexId};
use macrodim::matcher::{enumerate_embeddings, Eligibility, Embedding, MatchIndex};
use proptest::prelude::*;
use support::{arb_connected_graph, brute_force_embeddings, config};

fn capped_suite(cap: usize) -> Grammar {
    let mut g = builtin::suite();
    g.degree_cap = cap;
    g
}

/// Patterns up to three vertices, including a triangle and a non-path tree.
fn pattern_grammar() -> Grammar {
    parse_grammar(
        "alphabet a b
degreecap 4
rule tri rate 1
  lhs
    v x a
    v y a
    v z b
    e x y
    e y z
    e z x
  rhs
    v x a
  glue x -> x
rule wedge rate 1
  lhs
    v x b
    v y a
    v z b
    e x y
    e y z
  rhs
rule pair rate 1
  lhs
    v x a
    v y b
    e x y
  rhs
",
    )
    .unwrap()
}

fn min_distance(g: &SpinGraph, from: &[VertexId], to: &[VertexId]) -> usize {
    from.iter()
        .filter(|v| g.contains(**v))
        .flat_map(|&v| {
            let map = g.distances_from(v, None).unwrap();
            to.iter().filter_map(move |&w| map.get(w)).collect::<Vec<_>>()
        })
        .min()
        .unwrap_or(usize::MAX)
}

proptest! {
    #![proptest_config(config(200))]

    #[test]
    fn enumeration_matches_brute_force(host in arb_connected_graph(8, 2, 4)) {
        for grammar in [capped_suite(4), pattern_grammar()] {
            for (r, rule) in grammar.rules.iter().enumerate() {
                let got: Vec<Vec<VertexId>> = enumerate_embeddings(&host, &grammar, r).into_iter().map(|e| e.image.to_vec()).collect();
                prop_assert_eq!(got, brute_force_embeddings(&rule.lhs, &host), "rule {}", rule.name);
            }
        }
    }

    #[test]
    fn incremental_index_matches_a_rebuild(
        host in arb_connected_graph(12, 2, 4),
        frozen_bits in prop::collection::vec(prop::bool::weighted(0.2), 12),
        draws in prop::collection::vec(0.0f64..1.0, 1..30),
    ) {
        let grammar = capped_suite(4);
        let mut g = host;
        let frozen: Vec<bool> = (0..g.id_bound()).map(|i| frozen_bits[i]).collect();
        let eligibility = Eligibility { frozen: Some(Arc::new(frozen)), degree_guard: true };
        let mut index = MatchIndex::build(&g, &grammar, eligibility);
        for u in draws {
            let Some(e) = index.select(u) else { break };
            index.apply(&mut g, &grammar, &e, ApplyOptions::default()).unwrap();
            prop_assert!(index.verify(&g, &grammar).is_ok());
            prop_assert!(g.max_degree() <= 4);
        }
    }

    #[test]
    fn events_only_change_nearby_embeddings(host in arb_connected_graph(12, 2, 4), pick in any::<prop::sample::Index>()) {
        let grammar = capped_suite(4);
        let index = MatchIndex::build(&host, &grammar, Eligibility { frozen: None, degree_guard: true });
        prop_assume!(!index.is_empty());
        let all = index.embeddings();
        let e = all[pick.index(all.len())].clone();
        let before: Vec<Embedding> = (0..grammar.rules.len()).flat_map(|r| enumerate_embeddings(&host, &grammar, r)).collect();
        let mut g = host.clone();
        let outcome = macrodim::grammar::substitute_in_place(&mut g, &grammar.rules[e.rule], &e.image, ApplyOptions::default()).unwrap();
        let after: Vec<Embedding> = (0..grammar.rules.len()).flat_map(|r| enumerate_embeddings(&g, &grammar, r)).collect();
        for lost in before.iter().filter(|x| !after.contains(x)) {
            let reach = grammar.rules[lost.rule].radius().unwrap_or(0) + 1;
            prop_assert!(min_distance(&host, &outcome.touched, &lost.image) <= reach);
        }
        for gained in after.iter().filter(|x| !before.contains(x)) {
            let reach = grammar.rules[gained.rule].radius().unwrap_or(0) + 1;
            prop_assert!(min_distance(&g, &outcome.region_after(), &gained.image) <= reach);
        }
    }
}
