mod support;

use macrodim::grammar::{apply_substitution, builtin, substitute_in_place, ApplyOptions, SubstitutionError};
use macrodim::graph::{SpinGraph, VertexId};
use macrodim::matcher::{enumerate_embeddings, Embedding};
use proptest::prelude::*;
use support::{arb_connected_graph, brute_force_embeddings, connected_spin_graphs, oracle_substitute, snapshot};

fn small_hosts(max_n: usize) -> Vec<SpinGraph> {
    (1..=max_n).flat_map(|n| connected_spin_graphs(n, 2, 8)).collect()
}

#[test]
fn every_embedding_on_small_hosts_matches_the_oracle() {
    let grammar = builtin::suite();
    let mut applications = 0;
    for host in small_hosts(4) {
        for (r, rule) in grammar.rules.iter().enumerate() {
            let found = enumerate_embeddings(&host, &grammar, r);
            let images: Vec<Vec<VertexId>> = found.iter().map(|e| e.image.to_vec()).collect();
            assert_eq!(images, brute_force_embeddings(&rule.lhs, &host));
            for e in &found {
                let applied = apply_substitution(&host, rule, e, ApplyOptions::default()).unwrap();
                assert_eq!(snapshot(&applied.graph), oracle_substitute(&host, rule, &e.image), "{} at {:?}", rule.name, e.image);
                applications += 1;
            }
        }
    }
    assert!(applications > 6000);
}

// All host edges at a deleted vertex are images of Γ edges, and no Γ′ edge
// lands on a host edge that survives the deletion step.
fn invertible(host: &SpinGraph, rule: &macrodim::grammar::SubstitutionRule, image: &[VertexId]) -> bool {
    let psi = |v: VertexId| image[v.index()];
    for l in rule.lhs.vertices() {
        if rule.glue_of(l).is_none() && host.degree(psi(l)) != rule.lhs.degree(l) {
            return false;
        }
    }
    for (a, b) in rule.rhs.edges() {
        if let (Some(la), Some(lb)) = (rule.glued_from(a), rule.glued_from(b)) {
            if host.has_edge(psi(la), psi(lb)) && !rule.lhs.has_edge(la, lb) {
                return false;
            }
        }
    }
    true
}

#[test]
fn inverse_rule_restores_the_host() {
    let grammar = builtin::suite();
    let mut restored = 0;
    for host in small_hosts(4) {
        for (r, rule) in grammar.rules.iter().enumerate() {
            let inverse = rule.inverse();
            for e in enumerate_embeddings(&host, &grammar, r) {
                if !invertible(&host, rule, &e.image) {
                    continue;
                }
                let mut g = host.clone();
                let first = substitute_in_place(&mut g, rule, &e.image, ApplyOptions::default()).unwrap();
                let back: Vec<VertexId> = rule
                    .rhs
                    .vertices()
                    .map(|rv| match rule.glued_from(rv) {
                        Some(l) => e.image[l.index()],
                        None => first.fresh[rule.rhs.vertices().take_while(|&x| x != rv).filter(|&x| rule.glued_from(x).is_none()).count()],
                    })
                    .collect();
                let second = substitute_in_place(&mut g, &inverse, &back, ApplyOptions::default()).unwrap();
                // Deleted vertices come back under fresh ids, in Γ order.
                assert_eq!(first.deleted.len(), second.fresh.len());
                let rename = |v: VertexId| first.deleted.iter().position(|&d| d == v).map_or(v, |i| second.fresh[i]);
                assert_eq!(g.vertex_count(), host.vertex_count());
                for v in host.vertices() {
                    let w = rename(v);
                    assert_eq!(g.spin(w), host.spin(v));
                    let mut expect: Vec<VertexId> = host.neighbors(v).iter().map(|&u| rename(u)).collect();
                    expect.sort_unstable();
                    assert_eq!(g.neighbors(w), expect.as_slice(), "{} at {:?}", rule.name, e.image);
                }
                restored += 1;
            }
        }
    }
    assert!(restored > 4000);
}

fn arb_case() -> impl Strategy<Value = (SpinGraph, usize, prop::sample::Index)> {
    (arb_connected_graph(8, 2, 4), 0..6usize, any::<prop::sample::Index>())
}

proptest! {
    #![proptest_config(support::config(256))]

    #[test]
    fn application_invariants((host, r, pick) in arb_case()) {
        let mut grammar = builtin::suite();
        grammar.degree_cap = 4;
        let rule = &grammar.rules[r];
        let found = enumerate_embeddings(&host, &grammar, r);
        prop_assume!(!found.is_empty());
        let e: &Embedding = &found[pick.index(found.len())];
        match apply_substitution(&host, rule, e, ApplyOptions::default()) {
            Ok(applied) => {
                let g = &applied.graph;
                let v0 = rule.glue.len();
                prop_assert_eq!(
                    g.vertex_count(),
                    host.vertex_count() - (rule.lhs.vertex_count() - v0) + (rule.rhs.vertex_count() - v0)
                );
                prop_assert!(g.max_degree() <= 4);
                let degree_sum: usize = g.vertices().map(|v| g.degree(v)).sum();
                prop_assert_eq!(degree_sum, 2 * g.edge_count());
                for v in g.vertices() {
                    prop_assert!(!g.neighbors(v).contains(&v));
                    prop_assert!(g.neighbors(v).windows(2).all(|w| w[0] < w[1]));
                }
                // Outside the image nothing changes except edges into deleted vertices.
                for v in host.vertices().filter(|v| !e.image.contains(v)) {
                    prop_assert_eq!(g.spin(v), host.spin(v));
                    let kept: Vec<VertexId> = host.neighbors(v).iter().copied().filter(|w| g.contains(*w)).collect();
                    let now: Vec<VertexId> = g.neighbors(v).to_vec();
                    prop_assert_eq!(now, kept);
                }
                prop_assert!(applied.outcome.fresh.iter().all(|f| f.index() >= host.id_bound()));
            }
            Err(SubstitutionError::DegreeCapViolation { .. }) => {}
            Err(other) => prop_assert!(false, "unexpected error {other}"),
        }
    }

    #[test]
    fn degree_cap_holds_under_mutation(host in arb_connected_graph(10, 1, 3), ops in prop::collection::vec((0..12u32, 0..12u32, any::<bool>()), 0..40)) {
        let mut g = host;
        for (a, b, add) in ops {
            let (a, b) = (VertexId(a), VertexId(b));
            if !g.contains(a) || !g.contains(b) {
                continue;
            }
            if add {
                let _ = g.add_edge(a, b);
            } else {
                g.remove_edge(a, b);
            }
            prop_assert!(g.max_degree() <= 3);
        }
    }
}
