//! Finite windows `O_N(origin)` of infinite graphs, produced on demand.
//!
//! Spec strings select a generator: `lattice:z2:radius=100`,
//! `tree:binary:depth=12`, `tree:kary:k=3:depth=6`, `file:path/to/g.graph`.
//! Every generator accepts `spin=<name>` (default: first letter of the
//! alphabet) and `cap=<n>` (default: the largest degree of the window).
//!
//! Lattice vertices are numbered by (L1 norm, coordinates), tree vertices in
//! breadth-first order, so the window of radius `N` is an id-prefix of every
//! larger window and vertex sets can be compared across radii.

use std::fmt;
use std::str::FromStr;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{parse_graph, Alphabet, GraphError, SpinGraph, VertexId};

#[derive(Debug, Error)]
pub enum GeneratorError {
    #[error("bad generator spec `{spec}`: {reason}")]
    BadSpec { spec: String, reason: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    /// Hypercubic lattice `Z^dim`.
    Lattice { dim: usize },
    /// Rooted tree in which every vertex has `arity` children.
    Tree { arity: usize },
    /// User-supplied graph file; `origin` is a file id (default: first vertex).
    File { path: String, origin: Option<String> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub family: Family,
    /// Window radius (tree depth). `None` for files means "whole graph".
    pub radius: Option<usize>,
    pub spin: Option<String>,
    pub cap: Option<usize>,
}

impl GeneratorSpec {
    pub fn lattice(dim: usize, radius: usize) -> Self {
        GeneratorSpec {
            family: Family::Lattice { dim },
            radius: Some(radius),
            spin: None,
            cap: None,
        }
    }

    pub fn tree(arity: usize, depth: usize) -> Self {
        GeneratorSpec {
            family: Family::Tree { arity },
            radius: Some(depth),
            spin: None,
            cap: None,
        }
    }

    pub fn with_radius(&self, radius: usize) -> Self {
        GeneratorSpec {
            radius: Some(radius),
            ..self.clone()
        }
    }

    pub fn with_cap(&self, cap: usize) -> Self {
        GeneratorSpec {
            cap: Some(cap),
            ..self.clone()
        }
    }

    /// Builds the window, interning its spin into `alphabet`.
    pub fn generate(&self, alphabet: &mut Alphabet) -> Result<Window, GeneratorError> {
        let spin_name = match &self.spin {
            Some(s) => s.clone(),
            None => alphabet.names().next().unwrap_or("a").to_string(),
        };
        let mut window = match &self.family {
            Family::Lattice { dim } => {
                let spin = alphabet.intern(&spin_name);
                lattice_window(*dim, self.require_radius()?, spin)
            }
            Family::Tree { arity } => {
                let spin = alphabet.intern(&spin_name);
                tree_window(*arity, self.require_radius()?, spin)
            }
            Family::File { path, origin } => {
                let text = std::fs::read_to_string(path).map_err(|source| GeneratorError::Io {
                    path: path.clone(),
                    source,
                })?;
                file_window(&text, origin.as_deref(), self.radius, alphabet)?
            }
        };
        window.spec = self.to_string();
        if let Some(cap) = self.cap {
            window.graph.set_degree_cap(cap)?;
        }
        Ok(window)
    }

    fn require_radius(&self) -> Result<usize, GeneratorError> {
        self.radius.ok_or_else(|| GeneratorError::BadSpec {
            spec: self.to_string(),
            reason: "missing radius/depth".into(),
        })
    }

    /// Exact ball sizes `|O_n(origin)|` of the infinite graph for `n = 0..=n_max`,
    /// by direct counting rather than search. `None` for file graphs.
    pub fn exact_ball_sizes(&self, n_max: usize) -> Option<Vec<u64>> {
        match self.family {
            Family::Lattice { dim } => Some((0..=n_max).map(|n| lattice_ball_count(dim, n)).collect()),
            Family::Tree { arity } => Some(
                (0..=n_max)
                    .map(|n| {
                        (0..=n as u32).fold(0u64, |acc, i| {
                            acc.saturating_add((arity as u64).saturating_pow(i))
                        })
                    })
                    .collect(),
            ),
            Family::File { .. } => None,
        }
    }
}

impl fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            Family::Lattice { dim } => write!(f, "lattice:z{dim}")?,
            Family::Tree { arity: 2 } => write!(f, "tree:binary")?,
            Family::Tree { arity } => write!(f, "tree:kary:k={arity}")?,
            Family::File { path, .. } => write!(f, "file:{path}")?,
        }
        if let Family::File {
            origin: Some(o), ..
        } = &self.family
        {
            write!(f, ":origin={o}")?;
        }
        if let Some(r) = self.radius {
            match self.family {
                Family::Tree { .. } => write!(f, ":depth={r}")?,
                _ => write!(f, ":radius={r}")?,
            }
        }
        if let Some(s) = &self.spin {
            write!(f, ":spin={s}")?;
        }
        if let Some(c) = self.cap {
            write!(f, ":cap={c}")?;
        }
        Ok(())
    }
}

impl FromStr for GeneratorSpec {
    type Err = GeneratorError;

    fn from_str(spec: &str) -> Result<Self, Self::Err> {
        let bad = |reason: &str| GeneratorError::BadSpec {
            spec: spec.to_string(),
            reason: reason.to_string(),
        };
        let mut parts = spec.split(':');
        let kind = parts.next().unwrap_or("");
        let (family_hint, rest): (Option<&str>, Vec<&str>) = match kind {
            "file" => {
                // Path may itself contain ':'; options follow the last path piece.
                let rest: Vec<&str> = parts.collect();
                let split = rest.iter().position(|p| p.contains('=')).unwrap_or(rest.len());
                let path = rest[..split].join(":");
                if path.is_empty() {
                    return Err(bad("missing file path"));
                }
                let mut out = GeneratorSpec {
                    family: Family::File { path, origin: None },
                    radius: None,
                    spin: None,
                    cap: None,
                };
                for kv in &rest[split..] {
                    let (k, v) = kv.split_once('=').ok_or_else(|| bad("expected key=value"))?;
                    match k {
                        "origin" => {
                            if let Family::File { origin, .. } = &mut out.family {
                                *origin = Some(v.to_string());
                            }
                        }
                        _ => apply_common(&mut out, k, v).map_err(|r| bad(&r))?,
                    }
                }
                return Ok(out);
            }
            "lattice" | "tree" => (parts.next(), parts.collect()),
            _ => return Err(bad("unknown generator kind (expected lattice, tree or file)")),
        };
        let mut out = match (kind, family_hint) {
            ("lattice", Some(z)) if z.starts_with('z') => {
                let dim = z[1..].parse::<usize>().map_err(|_| bad("lattice dimension"))?;
                if dim == 0 {
                    return Err(bad("lattice dimension must be positive"));
                }
                GeneratorSpec::lattice(dim, 0)
            }
            ("tree", Some("binary")) => GeneratorSpec::tree(2, 0),
            ("tree", Some("kary")) => GeneratorSpec::tree(0, 0),
            _ => return Err(bad("unknown family")),
        };
        out.radius = None;
        for kv in rest {
            let (k, v) = kv.split_once('=').ok_or_else(|| bad("expected key=value"))?;
            match (k, &mut out.family) {
                ("k", Family::Tree { arity }) => {
                    *arity = v.parse().map_err(|_| bad("k must be an integer"))?
                }
                ("radius", Family::Lattice { .. }) | ("depth", Family::Tree { .. }) => {
                    out.radius = Some(v.parse().map_err(|_| bad("radius must be an integer"))?)
                }
                _ => apply_common(&mut out, k, v).map_err(|r| bad(&r))?,
            }
        }
        if let Family::Tree { arity: 0 } = out.family {
            return Err(bad("tree arity must be positive"));
        }
        if out.radius.is_none() {
            return Err(bad("missing radius/depth"));
        }
        Ok(out)
    }
}

fn apply_common(out: &mut GeneratorSpec, key: &str, value: &str) -> Result<(), String> {
    match key {
        "spin" => out.spin = Some(value.to_string()),
        "cap" => out.cap = Some(value.parse().map_err(|_| "cap must be an integer".to_string())?),
        "radius" | "depth" => {
            out.radius = Some(value.parse().map_err(|_| "radius must be an integer".to_string())?)
        }
        _ => return Err(format!("unknown option `{key}`")),
    }
    Ok(())
}

/// A finite window `O_N(origin)`.
#[derive(Clone, Debug)]
pub struct Window {
    pub spec: String,
    pub graph: SpinGraph,
    pub origin: VertexId,
    pub radius: usize,
    /// Lattice coordinates by vertex id, when the window comes from a lattice.
    pub coords: Option<Vec<Vec<i32>>>,
}

impl Window {
    /// Lattice vertex with the given coordinates, if inside the window.
    pub fn vertex_at(&self, coords: &[i32]) -> Option<VertexId> {
        let all = self.coords.as_ref()?;
        all.iter()
            .position(|c| c.as_slice() == coords)
            .map(|i| VertexId(i as u32))
    }
}

/// Number of points of `Z^dim` with L1 norm at most `n`:
/// `sum_k 2^k C(dim,k) C(n,k)`.
pub fn lattice_ball_count(dim: usize, n: usize) -> u64 {
    let mut total: u128 = 0;
    for k in 0..=dim.min(n) {
        total += (1u128 << k) * binomial(dim as u64, k as u64) * binomial(n as u64, k as u64);
    }
    total.min(u64::MAX as u128) as u64
}

fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// L1 ball of radius `radius` in `Z^dim`, origin first.
pub fn lattice_window(dim: usize, radius: usize, spin: crate::graph::Spin) -> Window {
    let r = radius as i32;
    let mut points: Vec<Vec<i32>> = Vec::new();
    let mut current = vec![-r; dim];
    loop {
        if current.iter().map(|c| c.abs()).sum::<i32>() <= r {
            points.push(current.clone());
        }
        // odometer over [-r, r]^dim
        let mut i = 0;
        loop {
            if i == dim {
                break;
            }
            current[i] += 1;
            if current[i] > r {
                current[i] = -r;
                i += 1;
            } else {
                break;
            }
        }
        if i == dim {
            break;
        }
    }
    points.sort_by(|a, b| {
        let na: i32 = a.iter().map(|c| c.abs()).sum();
        let nb: i32 = b.iter().map(|c| c.abs()).sum();
        na.cmp(&nb).then_with(|| a.cmp(b))
    });
    let index: FxHashMap<&[i32], VertexId> = points
        .iter()
        .enumerate()
        .map(|(i, p)| (p.as_slice(), VertexId(i as u32)))
        .collect();
    let mut graph = SpinGraph::with_capacity(2 * dim, points.len());
    for _ in &points {
        graph.add_vertex(spin);
    }
    let mut probe = vec![0; dim];
    for (i, p) in points.iter().enumerate() {
        for axis in 0..dim {
            probe.copy_from_slice(p);
            probe[axis] += 1;
            if let Some(&w) = index.get(probe.as_slice()) {
                graph
                    .add_edge(VertexId(i as u32), w)
                    .expect("lattice degree is at most 2*dim");
            }
        }
    }
    Window {
        spec: format!("lattice:z{dim}:radius={radius}"),
        graph,
        origin: VertexId(0),
        radius,
        coords: Some(points),
    }
}

/// Rooted tree of the given depth where every vertex has `arity` children.
pub fn tree_window(arity: usize, depth: usize, spin: crate::graph::Spin) -> Window {
    let mut graph = SpinGraph::new(arity + 1);
    let root = graph.add_vertex(spin);
    let mut frontier = vec![root];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(frontier.len() * arity);
        for &parent in &frontier {
            for _ in 0..arity {
                let child = graph.add_vertex(spin);
                graph.add_edge(parent, child).expect("tree degree within cap");
                next.push(child);
            }
        }
        frontier = next;
    }
    Window {
        spec: format!("tree:kary:k={arity}:depth={depth}"),
        graph,
        origin: root,
        radius: depth,
        coords: None,
    }
}

fn file_window(
    text: &str,
    origin: Option<&str>,
    radius: Option<usize>,
    alphabet: &mut Alphabet,
) -> Result<Window, GeneratorError> {
    let loaded = parse_graph(text, alphabet, true)?;
    let origin = match origin {
        Some(o) => loaded
            .file_ids
            .iter()
            .position(|id| id == o)
            .map(|i| VertexId(i as u32))
            .ok_or_else(|| GeneratorError::BadSpec {
                spec: format!("origin={o}"),
                reason: "origin is not a vertex of the file".into(),
            })?,
        None => loaded.graph.vertices().next().ok_or_else(|| GeneratorError::BadSpec {
            spec: "file".into(),
            reason: "graph file has no vertices".into(),
        })?,
    };
    let map = loaded.graph.distances_from(origin, radius)?;
    let eccentricity = map.reached().iter().filter_map(|&v| map.get(v)).max().unwrap_or(0);
    let graph = match radius {
        Some(_) => loaded.graph.induced_subgraph(map.reached())?,
        None => loaded.graph,
    };
    Ok(Window {
        spec: String::new(),
        graph,
        origin,
        radius: radius.unwrap_or(eccentricity),
        coords: None,
    })
}
