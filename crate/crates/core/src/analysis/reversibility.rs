//! Local reversibility: the cycle condition `a(Γ) = a_{i₁i₂} ⋯ a_{iₙi₁} = 1`
//! with `a_ij = λ_ij / λ_ji`, checked on cycles of length at most `n₀`.

use std::collections::{BTreeMap, VecDeque};

use rustc_hash::FxHashMap;
use serde::Serialize;

use super::canon::{canonical_form, CanonicalGraph};
use super::AnalysisError;
use crate::grammar::{degree_violation, substitute_in_place, ApplyOptions, Grammar};
use crate::graph::SpinGraph;
use crate::matcher::Pattern;

/// A finite continuous-time chain given by its positive rates.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RateChain {
    pub states: usize,
    /// `λ_ij` keyed by `(i, j)`, `i != j`.
    pub rates: BTreeMap<(usize, usize), f64>,
}

impl RateChain {
    pub fn new(states: usize) -> Self {
        RateChain {
            states,
            rates: BTreeMap::new(),
        }
    }

    /// Adds `rate` to `λ_ij`.
    pub fn add_rate(&mut self, i: usize, j: usize, rate: f64) {
        assert!(i < self.states && j < self.states && i != j && rate > 0.0);
        *self.rates.entry((i, j)).or_insert(0.0) += rate;
    }

    pub fn rate(&self, i: usize, j: usize) -> f64 {
        self.rates.get(&(i, j)).copied().unwrap_or(0.0)
    }

    /// Reads `states <k>` followed by `rate <i> <j> <λ>` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, AnalysisError> {
        let mut chain: Option<RateChain> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let bad = |msg: &str| AnalysisError::Parse(format!("line {}: {msg}", lineno + 1));
            let tokens: Vec<&str> = raw.split('#').next().unwrap_or("").split_whitespace().collect();
            match tokens.as_slice() {
                [] => {}
                ["states", k] => {
                    let k = k.parse().map_err(|_| bad("state count must be an integer"))?;
                    chain = Some(RateChain::new(k));
                }
                ["rate", i, j, r] => {
                    let c = chain.as_mut().ok_or_else(|| bad("`rate` before `states`"))?;
                    let i: usize = i.parse().map_err(|_| bad("bad state index"))?;
                    let j: usize = j.parse().map_err(|_| bad("bad state index"))?;
                    let r: f64 = r.parse().map_err(|_| bad("bad rate"))?;
                    if i >= c.states || j >= c.states || i == j {
                        return Err(bad("state index out of range or self-transition"));
                    }
                    if !(r > 0.0 && r.is_finite()) {
                        return Err(bad("rate must be positive"));
                    }
                    c.add_rate(i, j, r);
                }
                _ => return Err(bad("expected `states <k>` or `rate <i> <j> <λ>`")),
            }
        }
        chain.ok_or_else(|| AnalysisError::Parse("missing `states` line".into()))
    }

    /// Unordered pairs `{i, j}` with a rate in either direction.
    pub fn links(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = self.rates.keys().map(|&(i, j)| (i.min(j), i.max(j))).collect();
        out.dedup();
        out.sort_unstable();
        out.dedup();
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// Every cycle of length at most n₀ has `a(Γ) = 1`.
    Reversible,
    /// Some short cycle has `a(Γ) != 1`.
    Violated,
    /// Some transition has no reverse.
    NotReversible,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CycleCheck {
    pub cycle: Vec<usize>,
    pub product: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReversibilityReport {
    pub states: usize,
    pub n0: usize,
    pub verdict: Verdict,
    /// `(i, j)` with `λ_ij > 0 = λ_ji`.
    pub one_way: Option<(usize, usize)>,
    /// `(i, j, a_ij)` for every linked pair with `i < j`.
    pub ratios: Vec<(usize, usize, f64)>,
    pub cycles_checked: usize,
    /// At most 32 violating cycles.
    pub violations: Vec<CycleCheck>,
    /// `E − V + C` of the transition graph.
    pub cycle_space_dimension: usize,
    /// Rank of the short cycles inside the cycle space.
    pub short_cycle_rank: usize,
    pub short_cycles_generate: bool,
    /// Whether every cycle, short or not, satisfies the condition.
    pub globally_reversible: bool,
    /// Stationary weights from detailed balance, normalised per component.
    pub stationary: Option<Vec<f64>>,
}

/// Simple cycles of length `3..=max_len` in an undirected graph, each once,
/// starting at its smallest vertex.
pub fn simple_cycles(adj: &[Vec<usize>], max_len: usize) -> Vec<Vec<usize>> {
    fn dfs(adj: &[Vec<usize>], start: usize, max_len: usize, path: &mut Vec<usize>, on: &mut [bool], out: &mut Vec<Vec<usize>>) {
        let u = *path.last().unwrap();
        for &w in &adj[u] {
            if w == start && path.len() >= 3 && path[1] < path[path.len() - 1] {
                out.push(path.clone());
            }
            if w > start && !on[w] && path.len() < max_len {
                on[w] = true;
                path.push(w);
                dfs(adj, start, max_len, path, on, out);
                path.pop();
                on[w] = false;
            }
        }
    }
    let mut out = Vec::new();
    let mut on = vec![false; adj.len()];
    for s in 0..adj.len() {
        let mut path = vec![s];
        on[s] = true;
        dfs(adj, s, max_len, &mut path, &mut on, &mut out);
        on[s] = false;
    }
    out
}

fn rank_of(rows: &mut [Vec<f64>]) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows.len()).max_by(|&a, &b| rows[a][c].abs().total_cmp(&rows[b][c].abs())) else {
            break;
        };
        if rows[p][c].abs() < 1e-9 {
            continue;
        }
        rows.swap(rank, p);
        let pivot = rows[rank].clone();
        for r in rows.iter_mut().skip(rank + 1) {
            let f = r[c] / pivot[c];
            if f != 0.0 {
                for (x, y) in r.iter_mut().zip(&pivot).skip(c) {
                    *x -= f * y;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Checks the cycle condition on a rate chain.
pub fn reversibility_check_chain(chain: &RateChain, n0: usize) -> ReversibilityReport {
    let n = chain.states;
    let links = chain.links();
    let one_way = chain
        .rates
        .keys()
        .find(|&&(i, j)| chain.rate(j, i) == 0.0)
        .copied();
    let mut adj = vec![Vec::new(); n];
    for &(i, j) in &links {
        adj[i].push(j);
        adj[j].push(i);
    }
    // Components for E − V + C.
    let mut comp = vec![usize::MAX; n];
    let mut components = 0;
    for s in 0..n {
        if comp[s] != usize::MAX {
            continue;
        }
        comp[s] = components;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &w in &adj[u] {
                if comp[w] == usize::MAX {
                    comp[w] = components;
                    queue.push_back(w);
                }
            }
        }
        components += 1;
    }
    let dimension = links.len() + components - n;
    let cycles = simple_cycles(&adj, n0);
    let edge_index: FxHashMap<(usize, usize), usize> = links.iter().enumerate().map(|(k, &e)| (e, k)).collect();
    let mut rows: Vec<Vec<f64>> = cycles
        .iter()
        .map(|c| {
            let mut row = vec![0.0; links.len()];
            for k in 0..c.len() {
                let (a, b) = (c[k], c[(k + 1) % c.len()]);
                row[edge_index[&(a.min(b), a.max(b))]] += if a < b { 1.0 } else { -1.0 };
            }
            row
        })
        .collect();
    let short_cycle_rank = rank_of(&mut rows);

    let mut report = ReversibilityReport {
        states: n,
        n0,
        verdict: Verdict::NotReversible,
        one_way,
        ratios: Vec::new(),
        cycles_checked: 0,
        violations: Vec::new(),
        cycle_space_dimension: dimension,
        short_cycle_rank,
        short_cycles_generate: short_cycle_rank == dimension,
        globally_reversible: false,
        stationary: None,
    };
    if one_way.is_some() {
        return report;
    }
    let w = |i: usize, j: usize| chain.rate(i, j).ln() - chain.rate(j, i).ln();
    report.ratios = links.iter().map(|&(i, j)| (i, j, chain.rate(i, j) / chain.rate(j, i))).collect();
    for c in &cycles {
        let terms: Vec<f64> = (0..c.len()).map(|k| w(c[k], c[(k + 1) % c.len()])).collect();
        let log_product: f64 = terms.iter().sum();
        let scale: f64 = 1.0 + terms.iter().map(|t| t.abs()).sum::<f64>();
        if log_product.abs() > 1e-9 * scale && report.violations.len() < 32 {
            report.violations.push(CycleCheck {
                cycle: c.clone(),
                product: log_product.exp(),
            });
        }
    }
    report.cycles_checked = cycles.len();
    report.verdict = if report.violations.is_empty() {
        Verdict::Reversible
    } else {
        Verdict::Violated
    };

    // Potentials along spanning trees.
    let mut phi = vec![f64::NAN; n];
    for s in 0..n {
        if !phi[s].is_nan() {
            continue;
        }
        phi[s] = 0.0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if phi[v].is_nan() {
                    phi[v] = phi[u] + w(u, v);
                    queue.push_back(v);
                }
            }
        }
    }
    report.globally_reversible = links.iter().all(|&(i, j)| {
        let t = w(i, j);
        (phi[j] - phi[i] - t).abs() <= 1e-9 * (1.0 + phi[i].abs() + phi[j].abs() + t.abs())
    });
    if report.globally_reversible {
        let mut pi = vec![0.0; n];
        for c in 0..components {
            let members: Vec<usize> = (0..n).filter(|&i| comp[i] == c).collect();
            let top = members.iter().map(|&i| phi[i]).fold(f64::NEG_INFINITY, f64::max);
            let total: f64 = members.iter().map(|&i| (phi[i] - top).exp()).sum();
            for &i in &members {
                pi[i] = (phi[i] - top).exp() / total;
            }
        }
        report.stationary = Some(pi);
    }
    report
}

/// The chain a grammar induces on spin graphs up to isomorphism.
#[derive(Clone, Debug)]
pub struct StateChain {
    pub states: Vec<SpinGraph>,
    pub chain: RateChain,
}

/// Explores every state reachable from `seeds` and lumps the transitions by
/// isomorphism class. Moves that break the degree cap are skipped, as the
/// simulator does; self-transitions are dropped.
pub fn grammar_chain(
    grammar: &Grammar,
    seeds: &[SpinGraph],
    state_size_cap: usize,
    max_states: usize,
) -> Result<StateChain, AnalysisError> {
    let patterns: Vec<Pattern> = grammar.rules.iter().map(|r| Pattern::compile(&r.lhs)).collect();
    let mut ids: FxHashMap<CanonicalGraph, usize> = FxHashMap::default();
    let mut states: Vec<SpinGraph> = Vec::new();
    let mut rates: Vec<((usize, usize), f64)> = Vec::new();
    let mut queue = VecDeque::new();
    let explosion = |states: usize| AnalysisError::StateSpaceExplosion {
        cap: state_size_cap,
        states,
    };
    let mut intern = |g: &SpinGraph, states: &mut Vec<SpinGraph>, queue: &mut VecDeque<usize>| {
        if g.vertex_count() > state_size_cap {
            return Err(explosion(states.len()));
        }
        let key = canonical_form(g);
        if let Some(&i) = ids.get(&key) {
            return Ok(i);
        }
        if states.len() == max_states {
            return Err(explosion(states.len()));
        }
        let i = states.len();
        states.push(key.to_graph(grammar.degree_cap));
        ids.insert(key, i);
        queue.push_back(i);
        Ok(i)
    };
    for seed in seeds {
        intern(seed, &mut states, &mut queue)?;
    }
    while let Some(i) = queue.pop_front() {
        let g = states[i].clone();
        for (r, (rule, pattern)) in grammar.rules.iter().zip(&patterns).enumerate() {
            for image in pattern.enumerate(&g) {
                if degree_violation(&g, rule, &image).is_some() {
                    continue;
                }
                let mut h = g.clone();
                h.set_degree_cap(usize::MAX).expect("raising the cap");
                substitute_in_place(&mut h, rule, &image, ApplyOptions::default())?;
                let j = intern(&h, &mut states, &mut queue)?;
                if j != i {
                    rates.push(((i, j), grammar.rules[r].rate));
                }
            }
        }
    }
    let mut chain = RateChain::new(states.len());
    for ((i, j), rate) in rates {
        chain.add_rate(i, j, rate);
    }
    Ok(StateChain { states, chain })
}

/// Builds the grammar's chain from `seeds` and checks it.
pub fn reversibility_check(
    grammar: &Grammar,
    seeds: &[SpinGraph],
    state_size_cap: usize,
    n0: usize,
) -> Result<(StateChain, ReversibilityReport), AnalysisError> {
    let chain = grammar_chain(grammar, seeds, state_size_cap, 100_000)?;
    let report = reversibility_check_chain(&chain.chain, n0);
    Ok((chain, report))
}
