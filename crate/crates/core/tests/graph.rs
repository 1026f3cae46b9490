mod support;

use macrodim::analysis::basepoint_invariance_check;
use macrodim::generators::{lattice_ball_count, lattice_window, GeneratorSpec};
use macrodim::graph::{ball, ball_size, distance, parse_graph, write_graph, Alphabet, BallProfile, Spin, SpinGraph, VertexId};
use proptest::prelude::*;
use support::{arb_connected_graph, config};

/// All-pairs distances by Floyd–Warshall.
fn floyd(g: &SpinGraph) -> Vec<Vec<Option<usize>>> {
    let n = g.id_bound();
    let mut d = vec![vec![None; n]; n];
    for v in g.vertices() {
        d[v.index()][v.index()] = Some(0);
        for w in g.neighbors(v) {
            d[v.index()][w.index()] = Some(1);
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if let (Some(a), Some(b)) = (d[i][k], d[k][j]) {
                    if d[i][j].is_none_or(|c| a + b < c) {
                        d[i][j] = Some(a + b);
                    }
                }
            }
        }
    }
    d
}

proptest! {
    #![proptest_config(config(128))]

    #[test]
    fn distances_agree_with_floyd_and_obey_the_triangle_inequality(g in arb_connected_graph(14, 2, 4)) {
        let d = floyd(&g);
        let vs: Vec<VertexId> = g.vertices().collect();
        for &x in &vs {
            for &y in &vs {
                prop_assert_eq!(distance(&g, x, y).unwrap(), d[x.index()][y.index()]);
                for &z in &vs {
                    let (xy, yz, xz) = (d[x.index()][y.index()].unwrap(), d[y.index()][z.index()].unwrap(), d[x.index()][z.index()].unwrap());
                    prop_assert!(xz <= xy + yz);
                }
            }
        }
    }

    #[test]
    fn ball_is_the_distance_level_set(g in arb_connected_graph(14, 2, 4), n in 0usize..6) {
        let d = floyd(&g);
        for v in g.vertices() {
            let b = ball(&g, v, n).unwrap();
            let got: Vec<VertexId> = b.vertices().collect();
            let want: Vec<VertexId> = g.vertices().filter(|u| d[v.index()][u.index()].unwrap() <= n).collect();
            prop_assert_eq!(&got, &want);
            prop_assert_eq!(ball_size(&g, v, n).unwrap(), want.len() as u64);
            // Regular subgraph: every inherited edge is present.
            for &a in &got {
                for &c in &got {
                    prop_assert_eq!(b.has_edge(a, c), g.has_edge(a, c));
                }
            }
        }
    }

    #[test]
    fn ball_sandwich_holds_for_every_pair(g in arb_connected_graph(16, 1, 3)) {
        let vs: Vec<VertexId> = g.vertices().collect();
        for &x in &vs {
            for &y in &vs {
                let report = basepoint_invariance_check(&g, x, y, 12).unwrap();
                prop_assert!(report.passed(), "{:?}", report.violation);
            }
        }
    }

    #[test]
    fn text_format_round_trips(g in arb_connected_graph(10, 2, 4)) {
        let alphabet = Alphabet::new(["a", "b"]).unwrap();
        let text = write_graph(&g, "g", &alphabet);
        let loaded = parse_graph(&text, &mut alphabet.clone(), false).unwrap();
        prop_assert_eq!(support::snapshot(&loaded.graph), support::snapshot(&g));
    }
}

#[test]
fn lattice_windows_have_the_closed_form_ball_sizes() {
    for (dim, radius) in [(1, 40), (2, 20), (3, 8)] {
        let w = lattice_window(dim, radius, Spin(0));
        let p = BallProfile::from_graph(&w.graph, w.origin, radius).unwrap();
        for n in 0..=radius {
            assert_eq!(p.size(n), lattice_ball_count(dim, n), "Z^{dim}, n = {n}");
        }
        assert_eq!(GeneratorSpec::lattice(dim, radius).exact_ball_sizes(radius).unwrap(), p.sizes);
    }
    // 2n² + 2n + 1 in the plane.
    assert_eq!(lattice_ball_count(2, 7), 113);
}

#[test]
fn binary_tree_ball_sizes() {
    let mut alphabet = Alphabet::new(["a"]).unwrap();
    let w = GeneratorSpec::tree(2, 10).generate(&mut alphabet).unwrap();
    let p = BallProfile::from_graph(&w.graph, w.origin, 10).unwrap();
    for n in 0..=10 {
        assert_eq!(p.size(n), (1u64 << (n + 1)) - 1);
    }
}
