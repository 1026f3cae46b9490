//! Embeddings of left-hand sides into a host graph.
//!
//! [`Pattern`] compiles a left-hand side into one backtracking plan per root
//! vertex. Each plan visits Γ in breadth-first order so that every step after
//! the root (within a component) extends from an already mapped neighbour and
//! scans at most `degree_cap` candidates. [`MatchIndex`] keeps the set of
//! eligible embeddings of every rule and updates it locally after each event.

use std::hash::Hash;
use std::sync::Arc;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use thiserror::Error;

use crate::grammar::{
    check_embedding, degree_violation, substitute_in_place, ApplyOptions, Grammar, Outcome,
    SubstitutionError, SubstitutionRule,
};
use crate::graph::{Spin, SpinGraph, VertexId};

/// ψ as the list of images of Γ's vertices `0, 1, …`.
pub type Image = SmallVec<[VertexId; 4]>;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Embedding {
    pub rule: usize,
    pub image: Image,
}

impl Embedding {
    /// The image subgraph Γ₁: the image vertices with the images of Γ's edges.
    pub fn image_subgraph(&self, rule: &SubstitutionRule, host: &SpinGraph) -> SpinGraph {
        let mut g = SpinGraph::new(host.degree_cap());
        for &v in &self.image {
            g.add_vertex(host.spin(v));
        }
        for (a, b) in rule.lhs.edges() {
            g.add_edge(a, b).expect("Γ respects its own degree");
        }
        g
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatchError {
    #[error("match index out of sync for rule `{rule}`: {missing} missing, {stale} stale")]
    IndexDesync {
        rule: String,
        missing: usize,
        stale: usize,
    },
}

#[derive(Clone, Debug)]
struct Step {
    vertex: usize,
    /// Mapped neighbour to extend from; `None` starts a new component.
    parent: Option<usize>,
    /// Other already mapped neighbours that must be adjacent.
    back: SmallVec<[usize; 4]>,
}

/// A compiled left-hand side.
#[derive(Clone, Debug)]
pub struct Pattern {
    spins: Vec<Spin>,
    /// `plans[r]` starts at Γ vertex `r`.
    plans: Vec<Vec<Step>>,
}

impl Pattern {
    pub fn compile(lhs: &SpinGraph) -> Self {
        let k = lhs.vertex_count();
        let spins = (0..k).map(|i| lhs.spin(VertexId(i as u32))).collect();
        let plans = (0..k).map(|root| plan_from(lhs, root)).collect();
        Pattern { spins, plans }
    }

    pub fn len(&self) -> usize {
        self.spins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spins.is_empty()
    }

    /// All embeddings into `g`, sorted by image tuple.
    pub fn enumerate(&self, g: &SpinGraph) -> Vec<Image> {
        if self.is_empty() {
            return vec![Image::new()];
        }
        // Root at the Γ vertex whose spin is rarest in the host.
        let root = (0..self.len())
            .min_by_key(|&i| (g.spin_count(self.spins[i]), i))
            .expect("nonempty pattern");
        let mut out = Vec::new();
        let mut image = vec![VertexId(u32::MAX); self.len()];
        for v in g.vertices() {
            if g.spin(v) == self.spins[root] {
                image[root] = v;
                self.extend(g, &self.plans[root], 1, &mut image, &mut out);
            }
        }
        out.sort_unstable();
        out
    }

    /// Embeddings whose image meets `region`, sorted and without duplicates.
    pub fn enumerate_touching(&self, g: &SpinGraph, region: &[VertexId]) -> Vec<Image> {
        let mut out = Vec::new();
        self.touching_into(g, region, &mut out);
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Appends the embeddings meeting `region` to `out`, in search order and
    /// possibly repeated.
    fn touching_into(&self, g: &SpinGraph, region: &[VertexId], out: &mut Vec<Image>) {
        if self.is_empty() {
            return;
        }
        let mut image = vec![VertexId(u32::MAX); self.len()];
        for &v in region {
            let Some(spin) = g.try_spin(v) else { continue };
            for root in 0..self.len() {
                if self.spins[root] == spin {
                    image[root] = v;
                    self.extend(g, &self.plans[root], 1, &mut image, out);
                }
            }
        }
    }

    fn extend(
        &self,
        g: &SpinGraph,
        plan: &[Step],
        depth: usize,
        image: &mut [VertexId],
        out: &mut Vec<Image>,
    ) {
        if depth == plan.len() {
            out.push(Image::from_slice(image));
            return;
        }
        let step = &plan[depth];
        let spin = self.spins[step.vertex];
        let fits = |c: VertexId, image: &[VertexId]| {
            g.spin(c) == spin
                && !plan[..depth].iter().any(|s| image[s.vertex] == c)
                && step.back.iter().all(|&b| g.has_edge(c, image[b]))
        };
        match step.parent {
            Some(p) => {
                for &c in g.neighbors(image[p]) {
                    if fits(c, image) {
                        image[step.vertex] = c;
                        self.extend(g, plan, depth + 1, image, out);
                    }
                }
            }
            None => {
                for c in g.vertices() {
                    if fits(c, image) {
                        image[step.vertex] = c;
                        self.extend(g, plan, depth + 1, image, out);
                    }
                }
            }
        }
    }
}

fn plan_from(lhs: &SpinGraph, root: usize) -> Vec<Step> {
    let k = lhs.vertex_count();
    let mut placed = vec![false; k];
    let mut plan: Vec<Step> = Vec::with_capacity(k);
    let mut queue = std::collections::VecDeque::new();
    let starts = std::iter::once(root).chain(0..k);
    for start in starts {
        if placed[start] {
            continue;
        }
        placed[start] = true;
        plan.push(Step {
            vertex: start,
            parent: None,
            back: SmallVec::new(),
        });
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            for &w in lhs.neighbors(VertexId(u as u32)) {
                let w = w.index();
                if placed[w] {
                    continue;
                }
                placed[w] = true;
                let back = lhs
                    .neighbors(VertexId(w as u32))
                    .iter()
                    .map(|x| x.index())
                    .filter(|&x| x != u && plan.iter().any(|s| s.vertex == x))
                    .collect();
                plan.push(Step {
                    vertex: w,
                    parent: Some(u),
                    back,
                });
                queue.push_back(w);
            }
        }
    }
    plan
}

/// Every embedding of rule `rule` of `grammar` into `alpha`, sorted by image.
pub fn enumerate_embeddings(alpha: &SpinGraph, grammar: &Grammar, rule: usize) -> Vec<Embedding> {
    Pattern::compile(&grammar.rules[rule].lhs)
        .enumerate(alpha)
        .into_iter()
        .map(|image| Embedding { rule, image })
        .collect()
}

trait Key: Clone + Eq + Hash {
    fn pack(image: &[VertexId]) -> Self;
    fn unpack(&self, len: usize) -> Image;
}

impl Key for [u32; 4] {
    #[inline]
    fn pack(image: &[VertexId]) -> Self {
        let mut k = [u32::MAX; 4];
        for (slot, v) in k.iter_mut().zip(image) {
            *slot = v.0;
        }
        k
    }

    #[inline]
    fn unpack(&self, len: usize) -> Image {
        self[..len].iter().map(|&i| VertexId(i)).collect()
    }
}

impl Key for Box<[u32]> {
    fn pack(image: &[VertexId]) -> Self {
        image.iter().map(|v| v.0).collect()
    }

    fn unpack(&self, _len: usize) -> Image {
        self.iter().map(|&i| VertexId(i)).collect()
    }
}

#[derive(Clone, Debug)]
struct Slots<K> {
    keys: Vec<K>,
    pos: FxHashMap<K, u32>,
}

impl<K: Key> Slots<K> {
    fn new() -> Self {
        Slots {
            keys: Vec::new(),
            pos: FxHashMap::default(),
        }
    }

    fn insert(&mut self, image: &[VertexId]) -> bool {
        let key = K::pack(image);
        if self.pos.contains_key(&key) {
            return false;
        }
        self.pos.insert(key.clone(), self.keys.len() as u32);
        self.keys.push(key);
        true
    }

    fn remove(&mut self, image: &[VertexId]) -> bool {
        let Some(i) = self.pos.remove(&K::pack(image)) else {
            return false;
        };
        let i = i as usize;
        self.keys.swap_remove(i);
        if i < self.keys.len() {
            *self.pos.get_mut(&self.keys[i]).expect("moved key is indexed") = i as u32;
        }
        true
    }
}

#[derive(Clone, Debug)]
enum Store {
    Compact(Slots<[u32; 4]>),
    Wide(Slots<Box<[u32]>>),
}

impl Store {
    fn for_size(k: usize) -> Self {
        if k <= 4 {
            Store::Compact(Slots::new())
        } else {
            Store::Wide(Slots::new())
        }
    }

    fn len(&self) -> usize {
        match self {
            Store::Compact(s) => s.keys.len(),
            Store::Wide(s) => s.keys.len(),
        }
    }

    fn insert(&mut self, image: &[VertexId]) -> bool {
        match self {
            Store::Compact(s) => s.insert(image),
            Store::Wide(s) => s.insert(image),
        }
    }

    fn remove(&mut self, image: &[VertexId]) -> bool {
        match self {
            Store::Compact(s) => s.remove(image),
            Store::Wide(s) => s.remove(image),
        }
    }

    fn get(&self, i: usize, k: usize) -> Image {
        match self {
            Store::Compact(s) => s.keys[i].unpack(k),
            Store::Wide(s) => s.keys[i].unpack(k),
        }
    }
}

/// Which embeddings the dynamics may fire.
#[derive(Clone, Debug, Default)]
pub struct Eligibility {
    /// `frozen[id]` marks vertices no event may touch.
    pub frozen: Option<Arc<Vec<bool>>>,
    /// Skip embeddings whose rewrite would exceed the degree cap.
    pub degree_guard: bool,
}

impl Eligibility {
    fn is_frozen(&self, v: VertexId) -> bool {
        self.frozen
            .as_ref()
            .is_some_and(|f| f.get(v.index()).copied().unwrap_or(false))
    }
}

/// The eligible embeddings of every rule, maintained under rewrites.
#[derive(Clone, Debug)]
pub struct MatchIndex {
    patterns: Arc<[Pattern]>,
    rates: Arc<[f64]>,
    stores: Vec<Store>,
    eligibility: Eligibility,
}

impl MatchIndex {
    pub fn build(g: &SpinGraph, grammar: &Grammar, eligibility: Eligibility) -> Self {
        let patterns: Arc<[Pattern]> = grammar.rules.iter().map(|r| Pattern::compile(&r.lhs)).collect();
        let rates = grammar.rules.iter().map(|r| r.rate).collect();
        let mut index = MatchIndex {
            stores: patterns.iter().map(|p| Store::for_size(p.len())).collect(),
            patterns,
            rates,
            eligibility,
        };
        for (rule, pattern) in index.patterns.clone().iter().enumerate() {
            for image in pattern.enumerate(g) {
                if index.is_eligible(g, grammar, rule, &image) {
                    index.stores[rule].insert(&image);
                }
            }
        }
        index
    }

    pub fn eligibility(&self) -> &Eligibility {
        &self.eligibility
    }

    pub fn is_eligible(&self, g: &SpinGraph, grammar: &Grammar, rule: usize, image: &[VertexId]) -> bool {
        !image.iter().any(|&v| self.eligibility.is_frozen(v))
            && !(self.eligibility.degree_guard && degree_violation(g, &grammar.rules[rule], image).is_some())
    }

    pub fn rule_count(&self) -> usize {
        self.stores.len()
    }

    /// Number of eligible embeddings of `rule`.
    pub fn count(&self, rule: usize) -> usize {
        self.stores[rule].len()
    }

    pub fn len(&self) -> usize {
        self.stores.iter().map(Store::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Λ = Σ λᵢ · #eligible embeddings of rule i.
    pub fn total_rate(&self) -> f64 {
        self.stores
            .iter()
            .zip(self.rates.iter())
            .map(|(s, &r)| r * s.len() as f64)
            .sum()
    }

    /// The `i`-th stored embedding of `rule` (storage order is unspecified).
    pub fn get(&self, rule: usize, i: usize) -> Embedding {
        Embedding {
            rule,
            image: self.stores[rule].get(i, self.patterns[rule].len()),
        }
    }

    /// Picks the embedding that owns the point `u · Λ` of the cumulative rate.
    pub fn select(&self, u: f64) -> Option<Embedding> {
        let mut target = u * self.total_rate();
        let mut last = None;
        for (rule, (store, &rate)) in self.stores.iter().zip(self.rates.iter()).enumerate() {
            let n = store.len();
            if n == 0 {
                continue;
            }
            let mass = rate * n as f64;
            if target < mass {
                let i = ((target / rate) as usize).min(n - 1);
                return Some(self.get(rule, i));
            }
            target -= mass;
            last = Some((rule, n - 1));
        }
        // Rounding pushed the target past the end.
        last.map(|(rule, i)| self.get(rule, i))
    }

    /// All stored embeddings, sorted.
    pub fn embeddings(&self) -> Vec<Embedding> {
        let mut out: Vec<Embedding> = (0..self.stores.len())
            .flat_map(|rule| (0..self.stores[rule].len()).map(move |i| (rule, i)))
            .map(|(rule, i)| self.get(rule, i))
            .collect();
        out.sort_unstable();
        out
    }

    /// Drops every stored embedding that meets `region` in `g`.
    pub fn retract(&mut self, g: &SpinGraph, region: &[VertexId]) {
        let mut found = Vec::new();
        for (rule, pattern) in self.patterns.iter().enumerate() {
            found.clear();
            pattern.touching_into(g, region, &mut found);
            for image in &found {
                self.stores[rule].remove(image);
            }
        }
    }

    /// Adds every eligible embedding that meets `region` in `g`.
    pub fn extend(&mut self, g: &SpinGraph, grammar: &Grammar, region: &[VertexId]) {
        let patterns = self.patterns.clone();
        let mut found = Vec::new();
        for (rule, pattern) in patterns.iter().enumerate() {
            found.clear();
            pattern.touching_into(g, region, &mut found);
            for image in &found {
                if self.is_eligible(g, grammar, rule, image) {
                    self.stores[rule].insert(image);
                }
            }
        }
    }

    /// Rewrites `g` at `embedding` and brings the index up to date.
    ///
    /// Only embeddings meeting the touched vertices or the neighbours of
    /// deleted vertices are recomputed; nothing else can appear or vanish.
    pub fn apply(
        &mut self,
        g: &mut SpinGraph,
        grammar: &Grammar,
        embedding: &Embedding,
        options: ApplyOptions,
    ) -> Result<Outcome, SubstitutionError> {
        let rule = &grammar.rules[embedding.rule];
        check_embedding(g, rule, &embedding.image)?;
        let mut region: Vec<VertexId> = embedding.image.to_vec();
        for (i, &v) in embedding.image.iter().enumerate() {
            if rule.glue_of(VertexId(i as u32)).is_none() {
                region.extend_from_slice(g.neighbors(v));
            }
        }
        region.sort_unstable();
        region.dedup();
        self.retract(g, &region);
        let outcome = substitute_in_place(g, rule, &embedding.image, options)?;
        self.extend(g, grammar, &outcome.region_after());
        Ok(outcome)
    }

    /// Compares against a rebuild from scratch.
    pub fn verify(&self, g: &SpinGraph, grammar: &Grammar) -> Result<(), MatchError> {
        let fresh = MatchIndex::build(g, grammar, self.eligibility.clone());
        let (mine, theirs) = (self.embeddings(), fresh.embeddings());
        if mine == theirs {
            return Ok(());
        }
        let missing: Vec<&Embedding> = theirs.iter().filter(|e| mine.binary_search(e).is_err()).collect();
        let stale: Vec<&Embedding> = mine.iter().filter(|e| theirs.binary_search(e).is_err()).collect();
        let rule = missing.iter().chain(&stale).map(|e| e.rule).min().unwrap_or(0);
        Err(MatchError::IndexDesync {
            rule: grammar.rules[rule].name.clone(),
            missing: missing.len(),
            stale: stale.len(),
        })
    }
}
