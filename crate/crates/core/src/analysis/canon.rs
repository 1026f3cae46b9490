//! Canonical forms of small spin graphs, for enumerating states up to isomorphism.
//!
//! Colour refinement splits the vertices into classes that every
//! isomorphism respects; the canonical form is the lexicographically smallest
//! adjacency encoding over all orderings consistent with those classes.

use crate::graph::{Spin, SpinGraph, VertexId};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalGraph {
    spins: Vec<u16>,
    /// Upper-triangle adjacency in canonical order, one byte per pair.
    adjacency: Vec<u8>,
}

impl CanonicalGraph {
    pub fn vertex_count(&self) -> usize {
        self.spins.len()
    }

    /// The canonical representative, with vertices `0..n` in canonical order.
    pub fn to_graph(&self, degree_cap: usize) -> SpinGraph {
        let n = self.spins.len();
        let mut g = SpinGraph::with_capacity(usize::MAX, n);
        for &s in &self.spins {
            g.add_vertex(Spin(s));
        }
        let mut k = 0;
        for i in 0..n {
            for j in i + 1..n {
                if self.adjacency[k] == 1 {
                    g.add_edge(VertexId(i as u32), VertexId(j as u32)).expect("simple graph");
                }
                k += 1;
            }
        }
        g.set_degree_cap(degree_cap.max(g.max_degree())).expect("cap covers degrees");
        g
    }
}

fn rank<T: Ord + Clone>(keys: &[T]) -> Vec<usize> {
    let mut distinct = keys.to_vec();
    distinct.sort();
    distinct.dedup();
    keys.iter().map(|k| distinct.binary_search(k).unwrap()).collect()
}

pub fn canonical_form(g: &SpinGraph) -> CanonicalGraph {
    let verts: Vec<VertexId> = g.vertices().collect();
    let n = verts.len();
    let mut local = vec![usize::MAX; g.id_bound()];
    for (i, v) in verts.iter().enumerate() {
        local[v.index()] = i;
    }
    let adj: Vec<Vec<usize>> = verts
        .iter()
        .map(|&v| g.neighbors(v).iter().map(|w| local[w.index()]).collect())
        .collect();
    let mut matrix = vec![false; n * n];
    for (i, nbrs) in adj.iter().enumerate() {
        for &j in nbrs {
            matrix[i * n + j] = true;
        }
    }

    let mut colour = rank(&verts.iter().map(|&v| (g.spin(v).0, g.degree(v))).collect::<Vec<_>>());
    loop {
        let sigs: Vec<(usize, Vec<usize>)> = (0..n)
            .map(|i| {
                let mut around: Vec<usize> = adj[i].iter().map(|&j| colour[j]).collect();
                around.sort_unstable();
                (colour[i], around)
            })
            .collect();
        let next = rank(&sigs);
        let before = colour.iter().max().map_or(0, |m| m + 1);
        let after = next.iter().max().map_or(0, |m| m + 1);
        colour = next;
        if after == before {
            break;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (colour[i], i));
    let spins: Vec<u16> = order.iter().map(|&i| g.spin(verts[i]).0).collect();
    let mut cells = Vec::new();
    let mut start = 0;
    for k in 1..=n {
        if k == n || colour[order[k]] != colour[order[start]] {
            cells.push((start, k));
            start = k;
        }
    }

    let encode = |order: &[usize]| -> Vec<u8> {
        let mut bits = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                bits.push(matrix[order[i] * n + order[j]] as u8);
            }
        }
        bits
    };
    let mut best = encode(&order);
    permute_cells(&mut order, &cells, 0, &mut |o| {
        let code = encode(o);
        if code < best {
            best = code;
        }
    });
    CanonicalGraph {
        spins,
        adjacency: best,
    }
}

/// Visits every ordering obtained by permuting within each cell.
fn permute_cells(order: &mut [usize], cells: &[(usize, usize)], cell: usize, visit: &mut dyn FnMut(&[usize])) {
    if cell == cells.len() {
        visit(order);
        return;
    }
    let (lo, hi) = cells[cell];
    heap_permute(order, lo, hi, hi - lo, &mut |o| permute_cells(o, cells, cell + 1, visit));
}

fn heap_permute(order: &mut [usize], lo: usize, hi: usize, k: usize, visit: &mut dyn FnMut(&mut [usize])) {
    if k <= 1 {
        visit(order);
        return;
    }
    for i in 0..k - 1 {
        heap_permute(order, lo, hi, k - 1, visit);
        if k % 2 == 0 {
            order.swap(lo + i, lo + k - 1);
        } else {
            order.swap(lo, lo + k - 1);
        }
    }
    heap_permute(order, lo, hi, k - 1, visit);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(spins: &[u16], edges: &[(u32, u32)]) -> SpinGraph {
        let mut g = SpinGraph::new(8);
        for &s in spins {
            g.add_vertex(Spin(s));
        }
        for &(u, v) in edges {
            g.add_edge(VertexId(u), VertexId(v)).unwrap();
        }
        g
    }

    #[test]
    fn relabelled_graphs_agree() {
        let a = graph(&[0, 0, 1, 0], &[(0, 1), (1, 2), (2, 3)]);
        let b = graph(&[0, 1, 0, 0], &[(3, 0), (0, 1), (1, 2)]);
        assert_eq!(canonical_form(&a), canonical_form(&b));
        let c = graph(&[0, 0, 1, 0], &[(0, 1), (1, 3), (3, 2)]);
        assert_ne!(canonical_form(&a), canonical_form(&c));
    }

    #[test]
    fn regular_graphs_need_the_search() {
        // Two 2-regular graphs on six vertices: a hexagon and two triangles.
        let hex = graph(&[0; 6], &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0)]);
        let tri = graph(&[0; 6], &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)]);
        let hex2 = graph(&[0; 6], &[(0, 2), (2, 4), (4, 1), (1, 3), (3, 5), (5, 0)]);
        assert_ne!(canonical_form(&hex), canonical_form(&tri));
        assert_eq!(canonical_form(&hex), canonical_form(&hex2));
    }

    #[test]
    fn representative_round_trips() {
        let a = graph(&[1, 0, 0], &[(0, 1), (0, 2)]);
        let c = canonical_form(&a);
        assert_eq!(canonical_form(&c.to_graph(8)), c);
        assert_eq!(c.to_graph(8).edge_count(), 2);
    }
}
