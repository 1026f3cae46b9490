//! The rewrite `T(Sub, ψ)`.
//!
//! Steps, in order: drop the ψ-images of Γ's edges; drop the vertices
//! ψ(V∖V₀) with everything incident to them; give each glued vertex ψ(v),
//! v ∈ V₀, the spin of φ(v); add one fresh vertex per unglued vertex of Γ′
//! (in Γ′ order); add the edges of Γ′, merging with edges already present.
//!
//! Glued vertices keep their id, so anything outside the image is untouched
//! bit for bit. The matched Γ₁ is any subgraph, not necessarily induced: an
//! edge between two matched vertices that is not the image of a Γ edge
//! survives unless an endpoint is deleted.

use smallvec::SmallVec;
use thiserror::Error;

use super::SubstitutionRule;
use crate::graph::{SpinGraph, VertexId};
use crate::matcher::Embedding;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SubstitutionError {
    #[error("invalid embedding for rule `{rule}`: {reason}")]
    InvalidEmbedding { rule: String, reason: String },
    #[error("rule `{rule}` would give vertex {vertex} degree {degree} above the cap {cap}")]
    DegreeCapViolation {
        rule: String,
        vertex: VertexId,
        degree: usize,
        cap: usize,
    },
    #[error("rule `{rule}` disconnected the graph")]
    DisconnectionEvent { rule: String },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ApplyOptions {
    /// Fail with [`SubstitutionError::DisconnectionEvent`] when the rewrite
    /// splits a connected neighbourhood.
    pub strict_connectivity: bool,
}

/// What a rewrite did to the host graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    /// ψ(V(Γ)), in Γ order: the touched host vertices.
    pub touched: SmallVec<[VertexId; 4]>,
    /// Fresh ids given to the unglued vertices of Γ′, in Γ′ order.
    pub fresh: SmallVec<[VertexId; 4]>,
    /// ψ(V∖V₀).
    pub deleted: SmallVec<[VertexId; 4]>,
    /// Surviving vertices outside the image that lost an edge to a deleted vertex.
    pub detached: SmallVec<[VertexId; 4]>,
}

impl Outcome {
    /// Host vertices whose neighbourhood or spin may differ after the rewrite:
    /// the image plus every vertex that lost a neighbour to a deletion.
    pub fn region_before(&self) -> Vec<VertexId> {
        let mut v: Vec<VertexId> = self.touched.iter().chain(&self.detached).copied().collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Post-rewrite counterpart of [`region_before`](Self::region_before).
    pub fn region_after(&self) -> Vec<VertexId> {
        let mut v: Vec<VertexId> = self
            .touched
            .iter()
            .chain(&self.detached)
            .filter(|v| !self.deleted.contains(v))
            .chain(&self.fresh)
            .copied()
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

/// Result of [`apply_substitution`].
#[derive(Clone, Debug)]
pub struct Applied {
    pub graph: SpinGraph,
    pub outcome: Outcome,
}

/// Checks that `image` is an embedding of `rule.lhs`: injective, spin
/// preserving, and mapping every Γ edge onto a host edge.
pub fn check_embedding(
    g: &SpinGraph,
    rule: &SubstitutionRule,
    image: &[VertexId],
) -> Result<(), SubstitutionError> {
    let bad = |reason: String| SubstitutionError::InvalidEmbedding {
        rule: rule.name.clone(),
        reason,
    };
    if image.len() != rule.lhs_size() {
        return Err(bad(format!(
            "image has {} vertices, lhs has {}",
            image.len(),
            rule.lhs_size()
        )));
    }
    for (i, &v) in image.iter().enumerate() {
        let Some(spin) = g.try_spin(v) else {
            return Err(bad(format!("vertex {v} is not in the graph")));
        };
        if image[..i].contains(&v) {
            return Err(bad(format!("vertex {v} used twice")));
        }
        if spin != rule.lhs.spin(VertexId(i as u32)) {
            return Err(bad(format!("spin mismatch at vertex {v}")));
        }
    }
    for (a, b) in rule.lhs.edges() {
        if !g.has_edge(image[a.index()], image[b.index()]) {
            return Err(bad(format!(
                "lhs edge {a}-{b} has no host edge {}-{}",
                image[a.index()],
                image[b.index()]
            )));
        }
    }
    Ok(())
}

#[derive(Clone, Copy)]
enum Target {
    Host(VertexId),
    Fresh,
}

fn rhs_targets(rule: &SubstitutionRule, image: &[VertexId]) -> SmallVec<[Target; 4]> {
    rule.rhs
        .vertices()
        .map(|r| match rule.glued_from(r) {
            Some(l) => Target::Host(image[l.index()]),
            None => Target::Fresh,
        })
        .collect()
}

#[inline]
fn is_lhs_edge_image(rule: &SubstitutionRule, image: &[VertexId], l: VertexId, w: VertexId) -> bool {
    rule.lhs
        .neighbors(l)
        .iter()
        .any(|&x| image[x.index()] == w)
}

/// First vertex whose degree after the rewrite would exceed the host's cap,
/// with that degree. Assumes `image` is a valid embedding.
pub fn degree_violation(
    g: &SpinGraph,
    rule: &SubstitutionRule,
    image: &[VertexId],
) -> Option<(VertexId, usize)> {
    let cap = g.degree_cap();
    let is_deleted = |w: VertexId| {
        image
            .iter()
            .enumerate()
            .any(|(i, &x)| x == w && rule.glue_of(VertexId(i as u32)).is_none())
    };
    let mut targets = None;
    for &(l, r) in &rule.glue {
        let u = image[l.index()];
        let nbrs = g.neighbors(u);
        // The Γ edges at u always go and at most deg_Γ′(r) edges arrive.
        if nbrs.len() + rule.rhs.degree(r) <= cap.saturating_add(rule.lhs.degree(l)) {
            continue;
        }
        let targets = targets.get_or_insert_with(|| rhs_targets(rule, image));
        let lost = nbrs
            .iter()
            .filter(|&&w| is_deleted(w) || is_lhs_edge_image(rule, image, l, w))
            .count();
        let gained = rule
            .rhs
            .neighbors(r)
            .iter()
            .filter(|x| match targets[x.index()] {
                Target::Fresh => true,
                // An existing host edge survives step (ii) unless it is a Γ-image.
                Target::Host(t) => !nbrs.contains(&t) || is_lhs_edge_image(rule, image, l, t),
            })
            .count();
        let degree = nbrs.len() - lost + gained;
        if degree > cap {
            return Some((u, degree));
        }
    }
    let mut fresh_index = 0;
    for r in rule.rhs.vertices() {
        if rule.glued_from(r).is_none() {
            let degree = rule.rhs.degree(r);
            if degree > cap {
                return Some((VertexId((g.id_bound() + fresh_index) as u32), degree));
            }
            fresh_index += 1;
        }
    }
    None
}

/// Applies the rewrite to `g` in place.
///
/// The embedding and the degree cap are checked before anything changes. A
/// disconnection in strict mode is detected afterwards, so on that error the
/// graph is left in its post-rewrite state.
pub fn substitute_in_place(
    g: &mut SpinGraph,
    rule: &SubstitutionRule,
    image: &[VertexId],
    options: ApplyOptions,
) -> Result<Outcome, SubstitutionError> {
    check_embedding(g, rule, image)?;
    if let Some((vertex, degree)) = degree_violation(g, rule, image) {
        return Err(SubstitutionError::DegreeCapViolation {
            rule: rule.name.clone(),
            vertex,
            degree,
            cap: g.degree_cap(),
        });
    }
    let mut deleted = SmallVec::new();
    for (i, &v) in image.iter().enumerate() {
        if rule.glue_of(VertexId(i as u32)).is_none() {
            deleted.push(v);
        }
    }
    let mut detached: SmallVec<[VertexId; 4]> = SmallVec::new();
    for &d in &deleted {
        for &w in g.neighbors(d) {
            if !image.contains(&w) && !detached.contains(&w) {
                detached.push(w);
            }
        }
    }
    detached.sort_unstable();

    // (ii) edges of Γ₁
    for (a, b) in rule.lhs.edges() {
        g.remove_edge(image[a.index()], image[b.index()]);
    }
    // (iii) deleted vertices with their remaining incident edges
    for &d in &deleted {
        g.remove_vertex(d).expect("image vertex is live");
    }
    // (iv)/(v) glue, spins, fresh vertices, Γ′ edges
    let mut targets: SmallVec<[VertexId; 4]> = SmallVec::new();
    let mut fresh = SmallVec::new();
    for r in rule.rhs.vertices() {
        let spin = rule.rhs.spin(r);
        match rule.glued_from(r) {
            Some(l) => {
                let u = image[l.index()];
                g.set_spin(u, spin).expect("glued vertex is live");
                targets.push(u);
            }
            None => {
                let v = g.add_vertex(spin);
                fresh.push(v);
                targets.push(v);
            }
        }
    }
    for (a, b) in rule.rhs.edges() {
        g.add_edge(targets[a.index()], targets[b.index()])
            .expect("degree cap checked before the rewrite");
    }

    let outcome = Outcome {
        touched: image.iter().copied().collect(),
        fresh,
        deleted,
        detached,
    };
    if options.strict_connectivity && !locally_connected(g, &outcome) {
        return Err(SubstitutionError::DisconnectionEvent {
            rule: rule.name.clone(),
        });
    }
    Ok(outcome)
}

/// Whether every surviving vertex whose adjacency changed can still reach every
/// other one. For a connected host this is equivalent to the rewritten graph
/// being connected, since any old path between survivors is broken only at
/// those vertices.
fn locally_connected(g: &SpinGraph, outcome: &Outcome) -> bool {
    let targets = outcome.region_after();
    let Some(&start) = targets.first() else {
        return true;
    };
    if targets.len() == 1 {
        return true;
    }
    let mut map = crate::graph::DistanceMap::empty();
    map.recompute(g, start, &targets).expect("live vertex");
    targets.iter().all(|&t| map.get(t).is_some())
}

/// Functional form of the rewrite: returns the new graph and leaves `alpha` as is.
pub fn apply_substitution(
    alpha: &SpinGraph,
    rule: &SubstitutionRule,
    psi: &Embedding,
    options: ApplyOptions,
) -> Result<Applied, SubstitutionError> {
    let mut graph = alpha.clone();
    let outcome = substitute_in_place(&mut graph, rule, &psi.image, options)?;
    Ok(Applied { graph, outcome })
}
