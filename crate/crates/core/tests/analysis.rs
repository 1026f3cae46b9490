mod support;

use std::sync::Arc;

use macrodim::analysis::canon::canonical_form;
use macrodim::analysis::growth::{q11, q1m_bound, q1m_convolution, q1m_product};
use macrodim::analysis::invariance::InvarianceOptions;
use macrodim::analysis::{
    correlation_functions, dim_profile, distance_distortion, invariance_experiment, pure_growth_check, reversibility_check,
    reversibility_check_chain, RateChain, Verdict,
};
use macrodim::generators::GeneratorSpec;
use macrodim::grammar::{builtin, parse_grammar, Grammar};
use macrodim::graph::{distance, Spin, SpinGraph, VertexId};
use macrodim::simulator::{Event, Prepared, SimConfig, Trajectory};
use proptest::prelude::*;
use support::config;

fn arb_chain() -> impl Strategy<Value = RateChain> {
    (2usize..=12).prop_flat_map(|n| {
        (
            prop::collection::vec((0..n, 0..n, 0.1f64..10.0, 0.1f64..10.0), 1..3 * n),
            prop::collection::vec(0.1f64..10.0, n),
            any::<bool>(),
        )
            .prop_map(move |(links, pi, balanced)| {
                let mut chain = RateChain::new(n);
                for (i, j, w, r) in links {
                    if i == j {
                        continue;
                    }
                    if balanced {
                        // λ_ij = w / π_i gives π_i λ_ij = π_j λ_ji = w.
                        chain.add_rate(i, j, w / pi[i]);
                        chain.add_rate(j, i, w / pi[j]);
                    } else {
                        chain.add_rate(i, j, w);
                        chain.add_rate(j, i, r);
                    }
                }
                chain
            })
    })
}

proptest! {
    #![proptest_config(config(300))]

    #[test]
    fn reversibility_agrees_with_linear_algebra(chain in arb_chain()) {
        let report = reversibility_check_chain(&chain, chain.states);
        let oracle = support::detailed_balance_oracle(&chain);
        prop_assert_eq!(report.globally_reversible, oracle.is_some());
        prop_assert_eq!(report.verdict == Verdict::Reversible, oracle.is_some());
        prop_assert!(report.short_cycles_generate);
        if let Some(pi) = &report.stationary {
            for (i, j) in chain.links() {
                let lhs = pi[i] * chain.rate(i, j);
                let rhs = pi[j] * chain.rate(j, i);
                prop_assert!((lhs - rhs).abs() <= 1e-9 * (lhs + rhs));
            }
        }
    }

    #[test]
    fn canonical_form_ignores_labels(g in support::arb_connected_graph(7, 2, 4), perm_seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let n = g.vertex_count();
        let mut perm: Vec<u32> = (0..n as u32).collect();
        perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(perm_seed));
        let mut h = SpinGraph::new(4);
        let mut inv = vec![0u32; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old as usize] = new as u32;
        }
        for &old in &perm {
            h.add_vertex(g.spin(VertexId(old)));
        }
        for (a, b) in g.edges() {
            h.add_edge(VertexId(inv[a.index()]), VertexId(inv[b.index()])).unwrap();
        }
        prop_assert_eq!(canonical_form(&g), canonical_form(&h));
    }
}

#[test]
fn box_walk_has_only_balanced_squares() {
    // Biased nearest-neighbour walk on a 4 x 3 box: rates depend on direction only.
    let (w, h) = (4, 3);
    let id = |x: usize, y: usize| y * w + x;
    let mut chain = RateChain::new(w * h);
    for y in 0..h {
        for x in 0..w {
            if x + 1 < w {
                chain.add_rate(id(x, y), id(x + 1, y), 2.0);
                chain.add_rate(id(x + 1, y), id(x, y), 0.5);
            }
            if y + 1 < h {
                chain.add_rate(id(x, y), id(x, y + 1), 1.5);
                chain.add_rate(id(x, y + 1), id(x, y), 1.0);
            }
        }
    }
    let report = reversibility_check_chain(&chain, 4);
    assert_eq!(report.verdict, Verdict::Reversible);
    assert_eq!(report.cycles_checked, (w - 1) * (h - 1));
    assert!(report.short_cycles_generate);
    assert!(support::detailed_balance_oracle(&chain).is_some());
}

#[test]
fn grammar_chains_of_flip_dynamics() {
    let mut star = SpinGraph::new(64);
    let c = star.add_vertex(Spin(0));
    for _ in 0..3 {
        let l = star.add_vertex(Spin(0));
        star.add_edge(c, l).unwrap();
    }
    let (chain, report) = reversibility_check(&builtin::two_way_flip(1.0), &[star.clone()], 6, 4).unwrap();
    // Centre a/b times 0..=3 flipped leaves.
    assert_eq!(chain.states.len(), 8);
    assert_eq!(report.verdict, Verdict::Reversible);
    let (_, report) = reversibility_check(&builtin::spin_flip(1.0), &[star], 6, 4).unwrap();
    assert_eq!(report.verdict, Verdict::NotReversible);
    assert!(report.one_way.is_some());
}

#[test]
fn growth_closed_forms() {
    let t = std::f64::consts::LN_2;
    assert!((q11(1.0, t, 1) - 0.5).abs() < 1e-12);
    assert!((q11(1.0, t, 2) - 0.25).abs() < 1e-12);
    assert!((q11(1.0, 1e-9, 1) - 1.0).abs() < 1e-8);
    for m in 1..5 {
        for k in 1..8 {
            let conv = q1m_convolution(0.8, 0.9, m, k);
            assert!((conv - q1m_product(0.8, 0.9, m, k)).abs() < 1e-12);
            assert!(conv <= q1m_bound(0.8, 0.9, m, k) + 1e-15);
        }
    }
    let report = pure_growth_check(1.0, t, 1, 10, 20_000, 3);
    assert!(report.total_variation < 0.03, "{}", report.total_variation);
    assert!(report.bound_holds);
}

#[test]
fn correlations_of_independent_flips() {
    let (lambda, t) = (1.0, 0.4);
    let grammar = builtin::spin_flip(lambda);
    let mut runs = Vec::new();
    for radius in [4usize, 8] {
        let mut alphabet = grammar.alphabet.clone();
        let window = GeneratorSpec::lattice(2, radius).generate(&mut alphabet).unwrap();
        let cfg = SimConfig::new(grammar.clone(), t).with_seed(17);
        let trajs = Prepared::new(&window, &cfg).unwrap().run_replicas(&cfg, 4000, |_, tr| tr).unwrap();
        runs.push((radius, trajs));
    }
    let o = VertexId(0);
    let sets = vec![vec![], vec![o], vec![o, VertexId(1)]];
    let table = correlation_functions(&runs, &sets).unwrap();
    let p = 1.0 - (-lambda * t).exp();
    for radius in [4, 8] {
        assert_eq!(table.estimate(radius, 0).unwrap().estimate, 1.0);
        let single = table.estimate(radius, 1).unwrap();
        assert!((single.estimate - p).abs() < 4.0 * single.std_error.max(1e-3));
        let pair = table.estimate(radius, 2).unwrap();
        assert!(pair.estimate <= single.estimate + 2.0 * single.std_error);
    }
    for d in &table.diffs {
        assert!(d.diff.abs() < 4.0 * d.combined_se.max(1e-3));
    }
}

fn delete_link() -> Grammar {
    parse_grammar(
        "alphabet a
degreecap 4
rule cut rate 1
  lhs
    v x a
    v y a
    e x y
  rhs
    v x a
    v y a
  glue x -> x
  glue y -> y
",
    )
    .unwrap()
}

#[test]
fn deleting_a_square_side() {
    let mut sq = SpinGraph::new(4);
    for _ in 0..4 {
        sq.add_vertex(Spin(0));
    }
    for i in 0..4 {
        sq.add_edge(VertexId(i), VertexId((i + 1) % 4)).unwrap();
    }
    let mut after = sq.clone();
    after.remove_edge(VertexId(0), VertexId(1));
    let d = |g: &SpinGraph, a: u32, b: u32| distance(g, VertexId(a), VertexId(b)).unwrap().unwrap() as i64;
    assert_eq!(d(&after, 0, 2) - d(&sq, 0, 2), 0);
    assert_eq!(d(&after, 1, 3) - d(&sq, 1, 3), 0);
    assert_eq!(d(&after, 0, 1) - d(&sq, 0, 1), 2);

    let traj = Trajectory {
        initial: Arc::new(sq),
        origin: None,
        seed: 0,
        horizon: 1.0,
        events: vec![Event {
            time: 0.5,
            rule: 0,
            image: [VertexId(0), VertexId(1)].into_iter().collect(),
            fresh: Default::default(),
        }],
        event_count: 1,
        final_graph: Some(after),
        touched: vec![VertexId(0), VertexId(1)],
    };
    let report = distance_distortion(&traj, &delete_link(), 4, 1, Some(0)).unwrap();
    assert_eq!(report.per_event_max(), 0);
    assert_eq!(report.within_threshold(), Some(true));
}

#[test]
fn spin_dynamics_never_moves_distances() {
    let grammar = builtin::two_way_flip(1.0);
    let mut alphabet = grammar.alphabet.clone();
    let window = GeneratorSpec::lattice(2, 10).generate(&mut alphabet).unwrap();
    let cfg = SimConfig::new(grammar.clone(), 0.2).with_seed(2);
    let traj = Prepared::new(&window, &cfg).unwrap().run(&cfg, 2).unwrap();
    assert!(traj.event_count > 0);
    let report = distance_distortion(&traj, &grammar, 50, 9, Some(0)).unwrap();
    assert_eq!(report.per_event_max(), 0);
    assert_eq!(report.max_drift.delta, 0);
    assert_eq!(report.recomputed, 0);
}

#[test]
fn invariance_is_exact_without_edge_moves() {
    let spec = GeneratorSpec::lattice(2, 0);
    let options = InvarianceOptions::default();
    let frozen = builtin::by_name("frozen").unwrap();
    let r = invariance_experiment(&spec, &frozen, 0.5, &[8, 12, 16], 3, 1, &options).unwrap();
    assert!(r.replicas.iter().all(|x| x.slope_diff == 0.0 && x.r == 0));
    assert_eq!(r.max_c, Some(1.0));

    let r = invariance_experiment(&spec, &builtin::two_way_flip(1.0), 0.5, &[8, 12, 16], 3, 1, &options).unwrap();
    assert!(r.replicas.iter().any(|x| x.touched > 0));
    assert!(r.replicas.iter().all(|x| x.slope_diff < 1e-12));
    assert_eq!(r.max_c, Some(1.0));
}

#[test]
fn irreversible_grammars_fail_the_precondition() {
    let spec = GeneratorSpec::lattice(2, 0);
    let err = invariance_experiment(&spec, &builtin::spin_flip(1.0), 0.1, &[4, 8], 1, 1, &InvarianceOptions::default());
    assert!(matches!(err, Err(macrodim::analysis::AnalysisError::Precondition(_))));
}

#[test]
fn slope_on_lattices() {
    for (dim, n) in [(1usize, 128usize), (2, 64)] {
        let mut alphabet = macrodim::graph::Alphabet::new(["a"]).unwrap();
        let w = GeneratorSpec::lattice(dim, n).generate(&mut alphabet).unwrap();
        let est = dim_profile(&w.graph, w.origin, n).unwrap();
        assert!((est.slope - dim as f64).abs() < 0.1, "Z^{dim}: {}", est.slope);
        assert!(est.is_consistent());
    }
}
