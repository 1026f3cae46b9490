//! Spin graphs: bounded-degree simple undirected graphs with one spin per vertex.
//!
//! Vertex identifiers are allocated sequentially and never reused, so a vertex
//! that survives a sequence of rewrites keeps the same [`VertexId`] for the
//! whole trajectory. Storage is a dense slot vector indexed by id, with
//! tombstones for deleted vertices.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use thiserror::Error;

/// Stable opaque vertex identifier.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub u32);

impl VertexId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A spin value: an index into an [`Alphabet`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Spin(pub u16);

/// Finite, ordered set of spin names.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabet {
    names: Vec<String>,
}

impl Alphabet {
    pub fn new<I, S>(names: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut alphabet = Alphabet::default();
        for name in names {
            let name = name.into();
            if alphabet.get(&name).is_some() {
                return Err(GraphError::DuplicateSpin(name));
            }
            alphabet.names.push(name);
        }
        Ok(alphabet)
    }

    pub fn get(&self, name: &str) -> Option<Spin> {
        self.names.iter().position(|n| n == name).map(|i| Spin(i as u16))
    }

    /// Returns the spin for `name`, appending it to the alphabet if needed.
    pub fn intern(&mut self, name: &str) -> Spin {
        match self.get(name) {
            Some(spin) => spin,
            None => {
                self.names.push(name.to_string());
                Spin((self.names.len() - 1) as u16)
            }
        }
    }

    pub fn name(&self, spin: Spin) -> &str {
        self.names.get(spin.0 as usize).map(String::as_str).unwrap_or("?")
    }

    pub fn contains(&self, spin: Spin) -> bool {
        (spin.0 as usize) < self.names.len()
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.names.iter().map(String::as_str)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("self-loop at vertex {0}")]
    SelfLoop(VertexId),
    #[error("vertex {vertex} would exceed degree cap {cap}")]
    DegreeCap { vertex: VertexId, cap: usize },
    #[error("spin `{0}` declared twice")]
    DuplicateSpin(String),
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}, column {column}: spin `{spin}` is not in the alphabet")]
    UndeclaredSpin {
        line: usize,
        column: usize,
        spin: String,
    },
}

pub type Neighbors = SmallVec<[VertexId; 8]>;

#[derive(Clone, Debug, PartialEq, Eq)]
struct Node {
    spin: Spin,
    // Kept sorted.
    nbrs: Neighbors,
}

/// Mutable bounded-degree simple graph with vertex spins.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpinGraph {
    nodes: Vec<Option<Node>>,
    live: usize,
    edges: usize,
    degree_cap: usize,
}

impl SpinGraph {
    pub fn new(degree_cap: usize) -> Self {
        SpinGraph {
            nodes: Vec::new(),
            live: 0,
            edges: 0,
            degree_cap,
        }
    }

    pub fn with_capacity(degree_cap: usize, vertices: usize) -> Self {
        SpinGraph {
            nodes: Vec::with_capacity(vertices),
            ..SpinGraph::new(degree_cap)
        }
    }

    pub fn degree_cap(&self) -> usize {
        self.degree_cap
    }

    /// Changes the cap. Fails if some vertex already exceeds the new cap.
    pub fn set_degree_cap(&mut self, cap: usize) -> Result<(), GraphError> {
        if let Some(v) = self.vertices().find(|&v| self.degree(v) > cap) {
            return Err(GraphError::DegreeCap { vertex: v, cap });
        }
        self.degree_cap = cap;
        Ok(())
    }

    /// The id the next call to [`add_vertex`](Self::add_vertex) will return.
    pub fn next_id(&self) -> VertexId {
        VertexId(self.nodes.len() as u32)
    }

    /// Upper bound (exclusive) on every id ever allocated in this graph.
    pub fn id_bound(&self) -> usize {
        self.nodes.len()
    }

    pub fn add_vertex(&mut self, spin: Spin) -> VertexId {
        let id = self.next_id();
        self.nodes.push(Some(Node {
            spin,
            nbrs: Neighbors::new(),
        }));
        self.live += 1;
        id
    }

    /// Removes `v` together with all incident edges.
    pub fn remove_vertex(&mut self, v: VertexId) -> Result<(), GraphError> {
        let node = self
            .nodes
            .get_mut(v.index())
            .and_then(Option::take)
            .ok_or(GraphError::UnknownVertex(v))?;
        for &w in &node.nbrs {
            if let Some(Some(other)) = self.nodes.get_mut(w.index()) {
                if let Ok(pos) = other.nbrs.binary_search(&v) {
                    other.nbrs.remove(pos);
                }
            }
        }
        self.edges -= node.nbrs.len();
        self.live -= 1;
        Ok(())
    }

    /// Inserts the edge `u`–`v`. Returns `Ok(false)` if it already existed.
    pub fn add_edge(&mut self, u: VertexId, v: VertexId) -> Result<bool, GraphError> {
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        self.node(u)?;
        self.node(v)?;
        if self.has_edge(u, v) {
            return Ok(false);
        }
        for x in [u, v] {
            if self.degree(x) >= self.degree_cap {
                return Err(GraphError::DegreeCap {
                    vertex: x,
                    cap: self.degree_cap,
                });
            }
        }
        self.link(u, v);
        self.link(v, u);
        self.edges += 1;
        Ok(true)
    }

    fn link(&mut self, from: VertexId, to: VertexId) {
        let nbrs = &mut self.nodes[from.index()].as_mut().expect("live vertex").nbrs;
        let pos = nbrs.binary_search(&to).unwrap_or_else(|p| p);
        nbrs.insert(pos, to);
    }

    /// Removes the edge `u`–`v`. Returns whether it existed.
    pub fn remove_edge(&mut self, u: VertexId, v: VertexId) -> bool {
        if !self.has_edge(u, v) {
            return false;
        }
        for (a, b) in [(u, v), (v, u)] {
            let nbrs = &mut self.nodes[a.index()].as_mut().expect("live vertex").nbrs;
            if let Ok(pos) = nbrs.binary_search(&b) {
                nbrs.remove(pos);
            }
        }
        self.edges -= 1;
        true
    }

    #[inline]
    fn node(&self, v: VertexId) -> Result<&Node, GraphError> {
        self.nodes
            .get(v.index())
            .and_then(Option::as_ref)
            .ok_or(GraphError::UnknownVertex(v))
    }

    #[inline]
    pub fn contains(&self, v: VertexId) -> bool {
        matches!(self.nodes.get(v.index()), Some(Some(_)))
    }

    pub fn check(&self, v: VertexId) -> Result<(), GraphError> {
        self.node(v).map(|_| ())
    }

    /// Spin of `v`. Panics if `v` is not a live vertex.
    #[inline]
    pub fn spin(&self, v: VertexId) -> Spin {
        self.nodes[v.index()].as_ref().expect("live vertex").spin
    }

    pub fn try_spin(&self, v: VertexId) -> Option<Spin> {
        self.node(v).ok().map(|n| n.spin)
    }

    pub fn set_spin(&mut self, v: VertexId, spin: Spin) -> Result<(), GraphError> {
        match self.nodes.get_mut(v.index()).and_then(Option::as_mut) {
            Some(node) => {
                node.spin = spin;
                Ok(())
            }
            None => Err(GraphError::UnknownVertex(v)),
        }
    }

    /// Sorted neighbours of `v`; empty if `v` is absent.
    #[inline]
    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        match self.nodes.get(v.index()) {
            Some(Some(node)) => &node.nbrs,
            _ => &[],
        }
    }

    #[inline]
    pub fn degree(&self, v: VertexId) -> usize {
        self.neighbors(v).len()
    }

    #[inline]
    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    pub fn vertex_count(&self) -> usize {
        self.live
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    pub fn is_empty(&self) -> bool {
        self.live == 0
    }

    /// Live vertices in increasing id order.
    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.is_some())
            .map(|(i, _)| VertexId(i as u32))
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.vertices().flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| u < v)
                .map(move |v| (u, v))
        })
    }

    pub fn max_degree(&self) -> usize {
        self.vertices().map(|v| self.degree(v)).max().unwrap_or(0)
    }

    pub fn spin_count(&self, spin: Spin) -> usize {
        self.vertices().filter(|&v| self.spin(v) == spin).count()
    }

    /// Regular (induced) subgraph on `vs`, keeping vertex ids and spins.
    pub fn induced_subgraph(&self, vs: &[VertexId]) -> Result<SpinGraph, GraphError> {
        let mut keep = vec![false; self.nodes.len()];
        for &v in vs {
            self.check(v)?;
            keep[v.index()] = true;
        }
        let mut nodes: Vec<Option<Node>> = vec![None; self.nodes.len()];
        let mut live = 0;
        let mut edges = 0;
        for (i, slot) in self.nodes.iter().enumerate() {
            if !keep[i] {
                continue;
            }
            let node = slot.as_ref().expect("checked above");
            let nbrs: Neighbors = node.nbrs.iter().copied().filter(|w| keep[w.index()]).collect();
            edges += nbrs.len();
            live += 1;
            nodes[i] = Some(Node {
                spin: node.spin,
                nbrs,
            });
        }
        Ok(SpinGraph {
            nodes,
            live,
            edges: edges / 2,
            degree_cap: self.degree_cap,
        })
    }

    /// Breadth-first distances from `source`, optionally truncated at `limit`.
    pub fn distances_from(
        &self,
        source: VertexId,
        limit: Option<usize>,
    ) -> Result<DistanceMap, GraphError> {
        self.check(source)?;
        let mut map = DistanceMap {
            dist: vec![UNREACHED; self.nodes.len()],
            order: Vec::new(),
        };
        map.run(self, source, limit, None);
        Ok(map)
    }

    /// Sizes of the spheres around `source`: `layers[k]` = #vertices at distance k.
    pub fn sphere_sizes(&self, source: VertexId, limit: usize) -> Result<Vec<u64>, GraphError> {
        let map = self.distances_from(source, Some(limit))?;
        let mut layers = vec![0u64; 1];
        for &v in &map.order {
            let d = map.dist[v.index()] as usize;
            if d >= layers.len() {
                layers.resize(d + 1, 0);
            }
            layers[d] += 1;
        }
        Ok(layers)
    }
}

const UNREACHED: u32 = u32::MAX;

/// Result of a breadth-first search.
#[derive(Clone, Debug)]
pub struct DistanceMap {
    dist: Vec<u32>,
    order: Vec<VertexId>,
}

impl DistanceMap {
    /// Reusable empty map, see [`DistanceMap::recompute`].
    pub fn empty() -> Self {
        DistanceMap {
            dist: Vec::new(),
            order: Vec::new(),
        }
    }

    pub fn get(&self, v: VertexId) -> Option<usize> {
        match self.dist.get(v.index()) {
            Some(&d) if d != UNREACHED => Some(d as usize),
            _ => None,
        }
    }

    /// Vertices reached, in BFS order.
    pub fn reached(&self) -> &[VertexId] {
        &self.order
    }

    /// Re-runs the search in place, reusing buffers. Stops early once every
    /// vertex in `targets` has been reached.
    pub fn recompute(
        &mut self,
        g: &SpinGraph,
        source: VertexId,
        targets: &[VertexId],
    ) -> Result<(), GraphError> {
        g.check(source)?;
        for &v in &self.order {
            if let Some(d) = self.dist.get_mut(v.index()) {
                *d = UNREACHED;
            }
        }
        self.order.clear();
        if self.dist.len() < g.id_bound() {
            self.dist.resize(g.id_bound(), UNREACHED);
        }
        self.run(g, source, None, Some(targets));
        Ok(())
    }

    fn run(
        &mut self,
        g: &SpinGraph,
        source: VertexId,
        limit: Option<usize>,
        targets: Option<&[VertexId]>,
    ) {
        let mut remaining = targets.map(|t| {
            t.iter()
                .filter(|&&v| v != source && g.contains(v))
                .count()
        });
        let is_target = |v: VertexId| targets.is_some_and(|t| t.contains(&v));
        let limit = limit.map(|l| l as u32).unwrap_or(u32::MAX - 1);
        let mut queue = VecDeque::new();
        self.dist[source.index()] = 0;
        self.order.push(source);
        queue.push_back(source);
        if remaining == Some(0) {
            return;
        }
        while let Some(u) = queue.pop_front() {
            let du = self.dist[u.index()];
            if du >= limit {
                continue;
            }
            for &w in g.neighbors(u) {
                if self.dist[w.index()] == UNREACHED {
                    self.dist[w.index()] = du + 1;
                    self.order.push(w);
                    queue.push_back(w);
                    if let Some(r) = remaining.as_mut() {
                        if is_target(w) {
                            *r -= 1;
                            if *r == 0 {
                                return;
                            }
                        }
                    }
                }
            }
        }
    }
}

/// Hop-count distance. `Ok(None)` means the vertices lie in different components.
pub fn distance(g: &SpinGraph, x: VertexId, y: VertexId) -> Result<Option<usize>, GraphError> {
    g.check(y)?;
    let mut map = DistanceMap::empty();
    map.recompute(g, x, &[y])?;
    Ok(map.get(y))
}

/// The `n`-neighbourhood of `v` as a regular subgraph.
pub fn ball(g: &SpinGraph, v: VertexId, n: usize) -> Result<SpinGraph, GraphError> {
    let map = g.distances_from(v, Some(n))?;
    g.induced_subgraph(map.reached())
}

/// Number of vertices within distance `n` of `v`.
pub fn ball_size(g: &SpinGraph, v: VertexId, n: usize) -> Result<u64, GraphError> {
    Ok(g.distances_from(v, Some(n))?.reached().len() as u64)
}

/// Ball sizes `|O_n(center)|` for `n = 0..=n_max`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallProfile {
    pub center: VertexId,
    /// `sizes[n]` is the number of vertices at distance at most `n`.
    pub sizes: Vec<u64>,
}

impl BallProfile {
    pub fn from_graph(g: &SpinGraph, center: VertexId, n_max: usize) -> Result<Self, GraphError> {
        let layers = g.sphere_sizes(center, n_max)?;
        let mut sizes = Vec::with_capacity(n_max + 1);
        let mut acc = 0;
        for n in 0..=n_max {
            acc += layers.get(n).copied().unwrap_or(0);
            sizes.push(acc);
        }
        Ok(BallProfile { center, sizes })
    }

    pub fn n_max(&self) -> usize {
        self.sizes.len().saturating_sub(1)
    }

    /// `|O_n|`, saturating at the last recorded radius.
    pub fn size(&self, n: usize) -> u64 {
        let last = self.sizes.len() - 1;
        self.sizes[n.min(last)]
    }

    /// Checks positivity, monotonicity and the bounded-degree growth bound.
    pub fn is_consistent(&self, degree_cap: usize) -> bool {
        self.sizes.first().is_some_and(|&s| s >= 1)
            && self.sizes.windows(2).all(|w| {
                w[0] <= w[1] && (w[1] as u128) <= (w[0] as u128) * (1 + degree_cap as u128)
            })
    }
}

/// Connected components, each sorted, ordered by smallest vertex id.
pub fn connected_components(g: &SpinGraph) -> Vec<Vec<VertexId>> {
    let mut seen = vec![false; g.id_bound()];
    let mut out = Vec::new();
    let mut queue = VecDeque::new();
    for v in g.vertices() {
        if seen[v.index()] {
            continue;
        }
        seen[v.index()] = true;
        queue.push_back(v);
        let mut comp = vec![v];
        while let Some(u) = queue.pop_front() {
            for &w in g.neighbors(u) {
                if !seen[w.index()] {
                    seen[w.index()] = true;
                    comp.push(w);
                    queue.push_back(w);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

pub fn is_connected(g: &SpinGraph) -> bool {
    match g.vertices().next() {
        None => true,
        Some(v) => g.distances_from(v, None).map(|m| m.reached().len()).unwrap_or(0) == g.vertex_count(),
    }
}

/// Vertices outside `vs` adjacent to some vertex of `vs`, sorted.
pub fn external_boundary(g: &SpinGraph, vs: &[VertexId]) -> Result<Vec<VertexId>, GraphError> {
    let mut inside = vec![false; g.id_bound()];
    for &v in vs {
        g.check(v)?;
        inside[v.index()] = true;
    }
    let mut out: Vec<VertexId> = vs
        .iter()
        .flat_map(|&v| g.neighbors(v).iter().copied())
        .filter(|w| !inside[w.index()])
        .collect();
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Graph as read from the line-oriented text format.
#[derive(Clone, Debug)]
pub struct LoadedGraph {
    pub name: String,
    pub graph: SpinGraph,
    /// File identifier of each vertex, indexed by the dense [`VertexId`].
    pub file_ids: Vec<String>,
}

/// Parses the text graph format:
///
/// ```text
/// graph <name> degreecap <n>
/// v <id> <spin>
/// e <id1> <id2>
/// ```
///
/// File ids are arbitrary tokens; vertices are renumbered densely in the order
/// of their `v` lines. With `extend_alphabet` unknown spins are interned,
/// otherwise they are an error.
pub fn parse_graph(
    text: &str,
    alphabet: &mut Alphabet,
    extend_alphabet: bool,
) -> Result<LoadedGraph, GraphError> {
    let mut name = None;
    let mut graph = SpinGraph::new(usize::MAX);
    let mut cap = None;
    let mut ids: Vec<String> = Vec::new();
    let mut lookup = rustc_hash::FxHashMap::default();
    let mut pending_edges = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("");
        let tokens = tokenize(content);
        let Some(&(col, head)) = tokens.first() else {
            continue;
        };
        let syntax = |column: usize, message: &str| GraphError::Syntax {
            line,
            column,
            message: message.to_string(),
        };
        match head {
            "graph" => {
                if tokens.len() != 4 || tokens[2].1 != "degreecap" {
                    return Err(syntax(col, "expected `graph <name> degreecap <n>`"));
                }
                name = Some(tokens[1].1.to_string());
                cap = Some(
                    tokens[3]
                        .1
                        .parse::<usize>()
                        .map_err(|_| syntax(tokens[3].0, "degree cap must be a nonnegative integer"))?,
                );
            }
            "v" => {
                if tokens.len() != 3 {
                    return Err(syntax(col, "expected `v <id> <spin>`"));
                }
                let (scol, sname) = tokens[2];
                let spin = if extend_alphabet {
                    alphabet.intern(sname)
                } else {
                    alphabet.get(sname).ok_or_else(|| GraphError::UndeclaredSpin {
                        line,
                        column: scol,
                        spin: sname.to_string(),
                    })?
                };
                let id = tokens[1].1.to_string();
                if lookup.contains_key(&id) {
                    return Err(syntax(tokens[1].0, "duplicate vertex id"));
                }
                let v = graph.add_vertex(spin);
                lookup.insert(id.clone(), v);
                ids.push(id);
            }
            "e" => {
                if tokens.len() != 3 {
                    return Err(syntax(col, "expected `e <id1> <id2>`"));
                }
                pending_edges.push((line, tokens[1], tokens[2]));
            }
            _ => return Err(syntax(col, "expected `graph`, `v` or `e`")),
        }
    }
    for (line, (c1, a), (c2, b)) in pending_edges {
        let resolve = |column: usize, id: &str| {
            lookup.get(id).copied().ok_or_else(|| GraphError::Syntax {
                line,
                column,
                message: format!("undeclared vertex `{id}`"),
            })
        };
        let (u, v) = (resolve(c1, a)?, resolve(c2, b)?);
        if u == v {
            return Err(GraphError::Syntax {
                line,
                column: c1,
                message: "self-loops are not allowed".into(),
            });
        }
        if !graph.add_edge(u, v)? {
            return Err(GraphError::Syntax {
                line,
                column: c1,
                message: "duplicate edge".into(),
            });
        }
    }
    let cap = cap.unwrap_or_else(|| graph.max_degree());
    graph.set_degree_cap(cap)?;
    Ok(LoadedGraph {
        name: name.unwrap_or_else(|| "graph".to_string()),
        graph,
        file_ids: ids,
    })
}

/// Writes `g` in the text format, using vertex ids as file ids.
pub fn write_graph(g: &SpinGraph, name: &str, alphabet: &Alphabet) -> String {
    let mut out = format!("graph {} degreecap {}\n", name, g.degree_cap());
    for v in g.vertices() {
        out.push_str(&format!("v {} {}\n", v, alphabet.name(g.spin(v))));
    }
    for (u, v) in g.edges() {
        out.push_str(&format!("e {u} {v}\n"));
    }
    out
}

/// Whitespace tokens with their 1-based column.
pub(crate) fn tokenize(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push((s + 1, &line[s..i]));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> (SpinGraph, Vec<VertexId>) {
        let mut g = SpinGraph::new(4);
        let vs: Vec<_> = (0..n).map(|_| g.add_vertex(Spin(0))).collect();
        for w in vs.windows(2) {
            g.add_edge(w[0], w[1]).unwrap();
        }
        (g, vs)
    }

    #[test]
    fn distance_to_self_is_zero() {
        let (g, vs) = path(3);
        assert_eq!(distance(&g, vs[1], vs[1]).unwrap(), Some(0));
    }

    #[test]
    fn distance_along_path() {
        let (g, vs) = path(3);
        assert_eq!(distance(&g, vs[0], vs[2]).unwrap(), Some(2));
    }

    #[test]
    fn four_cycle_after_deleting_an_edge() {
        let (mut g, vs) = path(4);
        g.add_edge(vs[3], vs[0]).unwrap();
        assert_eq!(distance(&g, vs[0], vs[1]).unwrap(), Some(1));
        g.remove_edge(vs[0], vs[1]);
        assert_eq!(distance(&g, vs[0], vs[1]).unwrap(), Some(3));
    }

    #[test]
    fn unreachable_and_unknown() {
        let mut g = SpinGraph::new(2);
        let a = g.add_vertex(Spin(0));
        let b = g.add_vertex(Spin(0));
        assert_eq!(distance(&g, a, b).unwrap(), None);
        assert_eq!(
            distance(&g, a, VertexId(9)),
            Err(GraphError::UnknownVertex(VertexId(9)))
        );
        assert!(ball(&g, VertexId(7), 1).is_err());
        assert!(external_boundary(&g, &[VertexId(7)]).is_err());
    }

    #[test]
    fn ball_of_radius_zero_is_a_single_vertex() {
        let (g, vs) = path(3);
        let b = ball(&g, vs[1], 0).unwrap();
        assert_eq!(b.vertex_count(), 1);
        assert_eq!(b.edge_count(), 0);
        assert!(b.contains(vs[1]));
    }

    #[test]
    fn ball_is_regular_subgraph() {
        // Triangle plus a tail: the ball around the tail end of radius 2 must
        // contain the triangle edge between the two far vertices.
        let (mut g, vs) = path(4);
        g.add_edge(vs[1], vs[3]).unwrap();
        let b = ball(&g, vs[0], 2).unwrap();
        assert_eq!(b.vertex_count(), 4);
        assert!(b.has_edge(vs[2], vs[3]));
    }

    #[test]
    fn components_and_boundary() {
        let mut g = SpinGraph::new(2);
        let vs: Vec<_> = (0..4).map(|_| g.add_vertex(Spin(0))).collect();
        g.add_edge(vs[0], vs[1]).unwrap();
        g.add_edge(vs[2], vs[3]).unwrap();
        let comps = connected_components(&g);
        assert_eq!(comps, vec![vec![vs[0], vs[1]], vec![vs[2], vs[3]]]);
        assert!(connected_components(&SpinGraph::new(1)).is_empty());
        let all: Vec<_> = g.vertices().collect();
        assert!(external_boundary(&g, &all).unwrap().is_empty());
        assert!(external_boundary(&g, &[]).unwrap().is_empty());
        assert_eq!(external_boundary(&g, &[vs[0]]).unwrap(), vec![vs[1]]);
    }

    #[test]
    fn degree_cap_and_simplicity() {
        let mut g = SpinGraph::new(1);
        let a = g.add_vertex(Spin(0));
        let b = g.add_vertex(Spin(0));
        let c = g.add_vertex(Spin(0));
        assert_eq!(g.add_edge(a, a), Err(GraphError::SelfLoop(a)));
        assert_eq!(g.add_edge(a, b), Ok(true));
        assert_eq!(g.add_edge(b, a), Ok(false));
        assert_eq!(g.edge_count(), 1);
        assert!(matches!(g.add_edge(a, c), Err(GraphError::DegreeCap { .. })));
    }

    #[test]
    fn remove_vertex_drops_incident_edges() {
        let (mut g, vs) = path(3);
        g.remove_vertex(vs[1]).unwrap();
        assert_eq!(g.edge_count(), 0);
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.degree(vs[0]), 0);
        // ids are never reused
        assert_eq!(g.add_vertex(Spin(0)), VertexId(3));
    }

    #[test]
    fn text_round_trip() {
        let text = "# a triangle\ngraph tri degreecap 3\nv x a\nv y b\nv z a\ne x y\ne y z\ne z x\n";
        let mut alphabet = Alphabet::new(["a", "b"]).unwrap();
        let loaded = parse_graph(text, &mut alphabet, false).unwrap();
        assert_eq!(loaded.name, "tri");
        assert_eq!(loaded.graph.edge_count(), 3);
        assert_eq!(loaded.graph.degree_cap(), 3);
        let written = write_graph(&loaded.graph, "tri", &alphabet);
        let again = parse_graph(&written, &mut alphabet, false).unwrap();
        assert_eq!(again.graph, loaded.graph);
    }

    #[test]
    fn text_errors_carry_positions() {
        let mut alphabet = Alphabet::new(["a"]).unwrap();
        let err = parse_graph("v 1 a\nv 2 q\n", &mut alphabet, false).unwrap_err();
        assert_eq!(
            err,
            GraphError::UndeclaredSpin {
                line: 2,
                column: 5,
                spin: "q".into()
            }
        );
        let err = parse_graph("v 1 a\ne 1 3\n", &mut alphabet, false).unwrap_err();
        assert!(matches!(err, GraphError::Syntax { line: 2, column: 5, .. }));
    }
}
