//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use macrodim::analysis::RateChain;
use macrodim::grammar::SubstitutionRule;
use macrodim::graph::{Spin, SpinGraph, VertexId};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

/// Slot-by-slot picture of a graph: `None` for a dead id, else spin and sorted neighbours.
pub type Snapshot = Vec<Option<(u16, Vec<u32>)>>;

pub fn snapshot(g: &SpinGraph) -> Snapshot {
    (0..g.id_bound() as u32)
        .map(|i| {
            let v = VertexId(i);
            g.try_spin(v).map(|s| {
                let mut n: Vec<u32> = g.neighbors(v).iter().map(|w| w.0).collect();
                n.sort_unstable();
                (s.0, n)
            })
        })
        .collect()
}

/// The rewrite done by hand on adjacency sets: drop the images of Γ edges,
/// delete the images of unglued Γ vertices, give glued vertices the Γ′ spin,
/// add the unglued Γ′ vertices under fresh ids and the Γ′ edges.
pub fn oracle_substitute(host: &SpinGraph, rule: &SubstitutionRule, image: &[VertexId]) -> Snapshot {
    let mut spin: BTreeMap<u32, u16> = BTreeMap::new();
    let mut adj: BTreeMap<u32, BTreeSet<u32>> = BTreeMap::new();
    for v in host.vertices() {
        spin.insert(v.0, host.spin(v).0);
        adj.insert(v.0, host.neighbors(v).iter().map(|w| w.0).collect());
    }
    let psi = |l: VertexId| image[l.index()].0;
    for (a, b) in rule.lhs.edges() {
        adj.get_mut(&psi(a)).unwrap().remove(&psi(b));
        adj.get_mut(&psi(b)).unwrap().remove(&psi(a));
    }
    let glued: BTreeMap<u32, u32> = rule.glue.iter().map(|&(l, r)| (r.0, psi(l))).collect();
    for l in rule.lhs.vertices() {
        if rule.glue.iter().all(|&(gl, _)| gl != l) {
            let x = psi(l);
            for y in adj.remove(&x).unwrap() {
                adj.get_mut(&y).unwrap().remove(&x);
            }
            spin.remove(&x);
        }
    }
    let mut next = host.id_bound() as u32;
    let mut place: BTreeMap<u32, u32> = BTreeMap::new();
    for r in rule.rhs.vertices() {
        let id = match glued.get(&r.0) {
            Some(&h) => h,
            None => {
                next += 1;
                adj.insert(next - 1, BTreeSet::new());
                next - 1
            }
        };
        spin.insert(id, rule.rhs.spin(r).0);
        place.insert(r.0, id);
    }
    for (a, b) in rule.rhs.edges() {
        let (x, y) = (place[&a.0], place[&b.0]);
        adj.get_mut(&x).unwrap().insert(y);
        adj.get_mut(&y).unwrap().insert(x);
    }
    (0..next)
        .map(|i| spin.get(&i).map(|&s| (s, adj[&i].iter().copied().collect())))
        .collect()
}

/// Every injective, spin-preserving, edge-preserving map of `pattern` into `host`, sorted.
pub fn brute_force_embeddings(pattern: &SpinGraph, host: &SpinGraph) -> Vec<Vec<VertexId>> {
    let k = pattern.vertex_count();
    let hv: Vec<VertexId> = host.vertices().collect();
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(p: &SpinGraph, h: &SpinGraph, hv: &[VertexId], k: usize, cur: &mut Vec<VertexId>, out: &mut Vec<Vec<VertexId>>) {
        if cur.len() == k {
            let ok = p.edges().all(|(a, b)| h.has_edge(cur[a.index()], cur[b.index()]));
            if ok {
                out.push(cur.clone());
            }
            return;
        }
        let i = cur.len();
        for &v in hv {
            if cur.contains(&v) || h.spin(v) != p.spin(VertexId(i as u32)) {
                continue;
            }
            cur.push(v);
            rec(p, h, hv, k, cur, out);
            cur.pop();
        }
    }
    rec(pattern, host, &hv, k, &mut cur, &mut out);
    out.sort();
    out
}

/// Connected graphs on `n` labelled vertices with every spin assignment over `letters` spins.
pub fn connected_spin_graphs(n: usize, letters: u16, cap: usize) -> Vec<SpinGraph> {
    let pairs: Vec<(u32, u32)> = (0..n as u32).flat_map(|a| (a + 1..n as u32).map(move |b| (a, b))).collect();
    let mut out = Vec::new();
    for mask in 0u32..(1 << pairs.len()) {
        let edges: Vec<(u32, u32)> = pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &p)| p).collect();
        if !connected(n, &edges) {
            continue;
        }
        for spins in 0..(letters as u32).pow(n as u32) {
            let mut g = SpinGraph::new(cap);
            let mut s = spins;
            for _ in 0..n {
                g.add_vertex(Spin((s % letters as u32) as u16));
                s /= letters as u32;
            }
            for &(a, b) in &edges {
                g.add_edge(VertexId(a), VertexId(b)).unwrap();
            }
            out.push(g);
        }
    }
    out
}

/// Union-find connectivity of `0..n` under `edges`.
pub fn connected(n: usize, edges: &[(u32, u32)]) -> bool {
    n == 0 || components(n, edges).iter().collect::<BTreeSet<_>>().len() == 1
}

/// Union-find root label for each of `0..n`.
pub fn components(n: usize, edges: &[(u32, u32)]) -> Vec<usize> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for &(a, b) in edges {
        let (ra, rb) = (find(&mut parent, a as usize), find(&mut parent, b as usize));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    (0..n).map(|x| find(&mut parent, x)).collect()
}

/// Random connected spin graph: a random tree on `n` vertices plus extra
/// edges, all subject to `cap >= 2`.
pub fn arb_connected_graph(max_n: usize, letters: u16, cap: usize) -> impl Strategy<Value = SpinGraph> {
    (1..=max_n).prop_flat_map(move |n| {
        (
            prop::collection::vec(0..letters, n),
            prop::collection::vec(any::<prop::sample::Index>(), n.saturating_sub(1)),
            prop::collection::vec((0..n, 0..n), 0..=2 * n),
        )
            .prop_map(move |(spins, parents, extra)| {
                let mut g = SpinGraph::new(cap);
                for s in spins {
                    g.add_vertex(Spin(s));
                }
                for (i, p) in parents.iter().enumerate() {
                    // The newest vertex is a leaf, so with cap >= 2 someone has room.
                    let cands: Vec<u32> = (0..=i as u32).filter(|&c| g.degree(VertexId(c)) < cap).collect();
                    g.add_edge(VertexId(cands[p.index(cands.len())]), VertexId(i as u32 + 1)).unwrap();
                }
                for (a, b) in extra {
                    let (a, b) = (VertexId(a as u32), VertexId(b as u32));
                    if a != b && g.degree(a) < g.degree_cap() && g.degree(b) < g.degree_cap() {
                        g.add_edge(a, b).unwrap();
                    }
                }
                g
            })
    })
}

/// Proptest settings for integration tests: no regression files.
pub fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

/// Least-squares potentials for `φ_j − φ_i = ln(λ_ij / λ_ji)`; detailed
/// balance is solvable exactly when the residual vanishes.
pub fn detailed_balance_oracle(chain: &RateChain) -> Option<Vec<f64>> {
    let links = chain.links();
    let n = chain.states;
    let mut a = DMatrix::<f64>::zeros(links.len() + 1, n);
    let mut b = DVector::<f64>::zeros(links.len() + 1);
    for (row, &(i, j)) in links.iter().enumerate() {
        a[(row, i)] = -1.0;
        a[(row, j)] = 1.0;
        b[row] = (chain.rate(i, j) / chain.rate(j, i)).ln();
    }
    // Pin the overall level; other components stay free and SVD picks the minimum norm.
    a[(links.len(), 0)] = 1.0;
    let phi = a.clone().svd(true, true).solve(&b, 1e-12).unwrap();
    let residual = (&a * &phi - &b).norm();
    (residual < 1e-7).then(|| phi.iter().copied().collect())
}
