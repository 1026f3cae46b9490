//! The pure-birth process on `Z₊`: from `i` particles jump to `i + 1` at rate `λi`.
//!
//! Started from one particle the count at time `t` is geometric,
//! `q(1,1,k,t) = e^{−λt}(1 − e^{−λt})^{k−1}`. From `m` particles it is the
//! sum of `m` independent copies, so `q(1,m,k,t)` is the m-fold convolution
//! of that law evaluated at `km`, which is also the negative binomial
//! `C(km−1, m−1) e^{−mλt}(1 − e^{−λt})^{km−m}`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// `q(1,1,k,t)`.
pub fn q11(lambda: f64, t: f64, k: usize) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let p = (-lambda * t).exp();
    p * (1.0 - p).powi(k as i32 - 1)
}

/// Law of the particle count at time t started from `m`: entry `j` is
/// `P(X = j)` for `j <= j_max`, computed as the m-fold convolution of the
/// single-particle law.
pub fn convolution_law(lambda: f64, t: f64, m: usize, j_max: usize) -> Vec<f64> {
    let single: Vec<f64> = (0..=j_max).map(|k| q11(lambda, t, k)).collect();
    let mut law = vec![0.0; j_max + 1];
    law[0] = 1.0;
    for _ in 0..m {
        let mut next = vec![0.0; j_max + 1];
        for (a, &pa) in law.iter().enumerate() {
            if pa == 0.0 {
                continue;
            }
            for (b, &pb) in single.iter().enumerate().take(j_max + 1 - a) {
                next[a + b] += pa * pb;
            }
        }
        law = next;
    }
    law
}

/// `q(1,m,k,t)` via the convolution over compositions `k₁ + … + k_m = km`.
pub fn q1m_convolution(lambda: f64, t: f64, m: usize, k: usize) -> f64 {
    convolution_law(lambda, t, m, k * m)[k * m]
}

/// `q(1,m,k,t)` in product form (negative binomial).
pub fn q1m_product(lambda: f64, t: f64, m: usize, k: usize) -> f64 {
    let j = k * m;
    if m == 0 || j < m {
        return 0.0;
    }
    let p = (-lambda * t).exp();
    let ln_binom = ln_choose(j - 1, m - 1);
    (ln_binom + m as f64 * p.ln() + (j - m) as f64 * (1.0 - p).ln()).exp()
}

/// The bound `2^{km}(1 − e^{−λt})^{m(k−1)}`.
pub fn q1m_bound(lambda: f64, t: f64, m: usize, k: usize) -> f64 {
    let p = (-lambda * t).exp();
    2f64.powi((k * m) as i32) * (1.0 - p).powi((m * (k - 1)) as i32)
}

fn ln_choose(n: usize, k: usize) -> f64 {
    (1..=k).map(|i| ((n - k + i) as f64).ln() - (i as f64).ln()).sum()
}

/// Final count of one run of the chain from `m` particles over `[0, t]`.
pub fn simulate_pure_birth<R: Rng>(rng: &mut R, lambda: f64, t: f64, m: usize) -> usize {
    let mut count = m;
    let mut time = 0.0;
    loop {
        let rate = lambda * count as f64;
        let u: f64 = rng.random();
        time += -(1.0 - u).ln() / rate;
        if time > t {
            return count;
        }
        count += 1;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthRow {
    pub k: usize,
    /// Runs ending with exactly `km` particles.
    pub count: u64,
    pub empirical: f64,
    pub convolution: f64,
    pub product: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PureGrowthReport {
    pub lambda: f64,
    pub t: f64,
    pub m: usize,
    pub replicas: u64,
    pub rows: Vec<GrowthRow>,
    /// Total variation between the simulated and exact laws of the final
    /// count, with all counts above `k_max · m` lumped into one bucket.
    pub total_variation: f64,
    /// Largest gap between the convolution and the product form.
    pub identity_gap: f64,
    /// Whether `q(1,m,k,t)` stays below the bound for every k.
    pub bound_holds: bool,
}

/// Monte Carlo law of the pure-birth chain against its exact law.
pub fn pure_growth_check(lambda: f64, t: f64, m: usize, k_max: usize, replicas: u64, seed: u64) -> PureGrowthReport {
    assert!(lambda > 0.0 && t > 0.0 && m >= 1 && k_max >= 1);
    let j_max = k_max * m;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hist = vec![0u64; j_max + 2];
    for _ in 0..replicas {
        let j = simulate_pure_birth(&mut rng, lambda, t, m);
        hist[j.min(j_max + 1)] += 1;
    }
    let n = replicas.max(1) as f64;
    let law = convolution_law(lambda, t, m, j_max);
    let exact_tail = 1.0 - law.iter().sum::<f64>();
    let mut tv = (hist[j_max + 1] as f64 / n - exact_tail).abs();
    for j in 0..=j_max {
        tv += (hist[j] as f64 / n - law[j]).abs();
    }
    let rows: Vec<GrowthRow> = (1..=k_max)
        .map(|k| {
            let j = k * m;
            GrowthRow {
                k,
                count: hist[j],
                empirical: hist[j] as f64 / n,
                convolution: law[j],
                product: q1m_product(lambda, t, m, k),
                bound: q1m_bound(lambda, t, m, k),
            }
        })
        .collect();
    PureGrowthReport {
        lambda,
        t,
        m,
        replicas,
        identity_gap: rows.iter().map(|r| (r.convolution - r.product).abs()).fold(0.0, f64::max),
        bound_holds: rows.iter().all(|r| r.convolution < r.bound),
        total_variation: tv / 2.0,
        rows,
    }
}
