//! The Mallows law on small S_n by exhaustive enumeration, together with the
//! closed forms it is used to check: q-factorials, moments of descents,
//! covariance bounds and assignment probability bounds.

mod independence;
mod typesum;

pub use independence::{independence_check, IndependenceCase, IndependenceMode, IndependenceReport};
pub use typesum::{adjacency_pair_sum, type_sum, type_sums, TypeSum, TYPE_SUM_CAP};

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::perm::Permutation;

/// Largest n for which the full table over S_n is built.
pub const ENUMERATION_CAP: usize = 8;

/// Probability comparisons against enumeration use this absolute tolerance.
pub const EXACT_TOL: f64 = 1e-12;

/// [k]_q = 1 + q + ... + q^(k-1).
pub fn q_integer(k: u32, q: f64) -> f64 {
    if q == 1.0 {
        k as f64
    } else {
        (1.0 - q.powi(k as i32)) / (1.0 - q)
    }
}

/// [k]_q! with [0]_q! = 1.
pub fn q_factorial(k: u32, q: f64) -> f64 {
    (1..=k).map(|i| q_integer(i, q)).product()
}

/// Euler's function ∏_{k≥1} (1 − q^k) for 0 ≤ q < 1, truncated once
/// q^k < 1e-16.
pub fn euler_product(q: f64) -> f64 {
    assert!((0.0..1.0).contains(&q), "euler_product needs 0 <= q < 1");
    let mut prod = 1.0;
    let mut qk = q;
    while qk >= 1e-16 {
        prod *= 1.0 - qk;
        qk *= q;
    }
    prod
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// q < 1, concentrated near the identity.
    Sub,
    Uniform,
    /// q > 1, concentrated near the reversal.
    Super,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MallowsParams {
    pub n: usize,
    pub q: f64,
}

impl MallowsParams {
    pub fn new(n: usize, q: f64) -> Result<Self> {
        if n == 0 {
            return Err(domain("n must be at least 1"));
        }
        if !(q.is_finite() && q > 0.0) {
            return Err(domain(format!("q must be finite and positive, got {q}")));
        }
        Ok(Self { n, q })
    }

    pub fn regime(&self) -> Regime {
        if self.q < 1.0 {
            Regime::Sub
        } else if self.q == 1.0 {
            Regime::Uniform
        } else {
            Regime::Super
        }
    }
}

/// All of S_n in lexicographic order.
pub fn all_permutations(n: usize) -> Vec<Permutation> {
    let mut current: Vec<u32> = (1..=n as u32).collect();
    let mut out = Vec::new();
    loop {
        out.push(Permutation::from_vec_unchecked(current.clone()));
        // next lexicographic permutation
        let Some(i) = (1..n).rev().find(|&i| current[i - 1] < current[i]) else {
            break;
        };
        let j = (i..n).rev().find(|&j| current[j] > current[i - 1]).unwrap();
        current.swap(i - 1, j);
        current[i..].reverse();
    }
    out
}

/// Lexicographic rank of w within S_n (Lehmer code).
fn lex_rank(w: &Permutation) -> usize {
    let v = w.values();
    let n = v.len();
    let mut rank = 0usize;
    for i in 0..n {
        let smaller_later = v[i + 1..].iter().filter(|&&x| x < v[i]).count();
        rank = rank * (n - i) + smaller_later;
    }
    rank
}

/// The exhaustive weight table of μ_q over S_n.
#[derive(Clone, Debug)]
pub struct ExactLaw {
    params: MallowsParams,
    perms: Vec<Permutation>,
    probs: Vec<f64>,
    z: f64,
}

impl ExactLaw {
    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn q(&self) -> f64 {
        self.params.q
    }

    pub fn params(&self) -> MallowsParams {
        self.params
    }

    /// Normalization Σ_w q^{l(w)} computed by direct summation.
    pub fn normalization(&self) -> f64 {
        self.z
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Permutation, f64)> {
        self.perms.iter().zip(self.probs.iter().copied())
    }

    pub fn permutations(&self) -> &[Permutation] {
        &self.perms
    }

    pub fn probability(&self, w: &Permutation) -> f64 {
        if w.n() != self.n() {
            return 0.0;
        }
        self.probs[lex_rank(w)]
    }

    pub fn expectation(&self, f: impl Fn(&Permutation) -> f64) -> f64 {
        self.iter().map(|(w, p)| p * f(w)).sum()
    }

    pub fn event_probability(&self, event: impl Fn(&Permutation) -> bool) -> f64 {
        self.iter().filter(|(w, _)| event(w)).map(|(_, p)| p).sum()
    }

    /// Law of f(w) as an ordered map.
    pub fn pushforward<K: Ord>(&self, f: impl Fn(&Permutation) -> K) -> BTreeMap<K, f64> {
        let mut out = BTreeMap::new();
        for (w, p) in self.iter() {
            *out.entry(f(w)).or_insert(0.0) += p;
        }
        out
    }

    /// Law of the pushforward through `map`, as a probability vector aligned
    /// with `permutations()` (the image must again lie in S_n).
    pub fn pushforward_perm(&self, map: impl Fn(&Permutation) -> Permutation) -> Vec<f64> {
        let mut out = vec![0.0; self.perms.len()];
        for (w, p) in self.iter() {
            out[lex_rank(&map(w))] += p;
        }
        out
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }
}

pub fn enumerate_law(params: MallowsParams) -> Result<ExactLaw> {
    if params.n > ENUMERATION_CAP {
        return Err(Error::TooLargeForEnumeration {
            n: params.n,
            cap: ENUMERATION_CAP,
        });
    }
    let perms = all_permutations(params.n);
    let weights: Vec<f64> = perms
        .iter()
        .map(|w| params.q.powi(w.inversions() as i32))
        .collect();
    let z: f64 = weights.iter().sum();
    let probs = weights.into_iter().map(|x| x / z).collect();
    Ok(ExactLaw {
        params,
        perms,
        probs,
        z,
    })
}

/// Exact moments of (des(w), des(w⁻¹)) at finite n.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MomentSummary {
    pub mean_des: f64,
    pub mean_two_sided: f64,
    pub var_des: f64,
    pub var_ides: f64,
    pub cov_des_ides: f64,
    pub var_two_sided: f64,
    /// cov_des_ides / var_des; 0 when var_des vanishes (n = 1).
    pub rho: f64,
}

pub fn exact_moments(law: &ExactLaw) -> MomentSummary {
    let pairs: Vec<(f64, f64, f64)> = law
        .iter()
        .map(|(w, p)| {
            let d = w.descent_count() as f64;
            let e = w.inverse().descent_count() as f64;
            (p, d, e)
        })
        .collect();
    let mean_des: f64 = pairs.iter().map(|(p, d, _)| p * d).sum();
    let mean_ides: f64 = pairs.iter().map(|(p, _, e)| p * e).sum();
    let var_des: f64 = pairs.iter().map(|(p, d, _)| p * (d - mean_des).powi(2)).sum();
    let var_ides: f64 = pairs.iter().map(|(p, _, e)| p * (e - mean_ides).powi(2)).sum();
    let cov: f64 = pairs
        .iter()
        .map(|(p, d, e)| p * (d - mean_des) * (e - mean_ides))
        .sum();
    let mean_two_sided = mean_des + mean_ides;
    let var_two_sided: f64 = pairs
        .iter()
        .map(|(p, d, e)| p * (d + e - mean_two_sided).powi(2))
        .sum();
    MomentSummary {
        mean_des,
        mean_two_sided,
        var_des,
        var_ides,
        cov_des_ides: cov,
        var_two_sided,
        rho: if var_des > 0.0 { cov / var_des } else { 0.0 },
    }
}

fn require_n_at_least_2(params: &MallowsParams) -> Result<()> {
    if params.n < 2 {
        return Err(Error::PreconditionViolated(format!(
            "moment formulas need n >= 2, got {}",
            params.n
        )));
    }
    Ok(())
}

/// E(des(w) + des(w⁻¹)) = 2q(n − 1)/(1 + q).
pub fn formula_mean_two_sided(params: MallowsParams) -> Result<f64> {
    require_n_at_least_2(&params)?;
    let q = params.q;
    Ok(2.0 * q * (params.n - 1) as f64 / (1.0 + q))
}

/// Closed-form Var(des(w)). The expression is invariant under q ↦ 1/q; it
/// is evaluated at min(q, 1/q).
pub fn formula_var_des(params: MallowsParams) -> Result<f64> {
    require_n_at_least_2(&params)?;
    let q = params.q.min(1.0 / params.q);
    let n = params.n as f64;
    let denom = (1.0 + q).powi(2) * (1.0 + q + q * q);
    Ok((n * q * (1.0 - q + q * q) - q * (1.0 - 3.0 * q + q * q)) / denom)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CovBounds {
    pub lower: f64,
    pub upper: f64,
}

impl CovBounds {
    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

/// Bounds on Cov(des(w), des(w⁻¹)) for 0 < q < 1.
pub fn cov_bounds(params: MallowsParams) -> Result<CovBounds> {
    require_n_at_least_2(&params)?;
    let q = params.q;
    if q >= 1.0 {
        return Err(domain(format!("covariance bounds need q < 1, got {q}")));
    }
    let m = (params.n - 1) as f64;
    let lower = q * m * (1.0 - q).powi(2) * euler_product(q) / (1.0 + q);
    let upper = q * m * (1.0 - q) * (1.0 + q).powi(2) / (1.0 - q.powi(params.n as i32));
    Ok(CovBounds { lower, upper })
}

fn validate_assignment(n: usize, assignment: &[(usize, u32)]) -> Result<()> {
    let mut pos_seen = vec![false; n + 1];
    let mut val_seen = vec![false; n + 1];
    for &(i, a) in assignment {
        let a = a as usize;
        if i == 0 || i > n || a == 0 || a > n {
            return Err(Error::PreconditionViolated(format!(
                "assignment w({i}) = {a} outside [{n}]"
            )));
        }
        if std::mem::replace(&mut pos_seen[i], true) || std::mem::replace(&mut val_seen[a], true) {
            return Err(Error::PreconditionViolated(
                "assignment must use distinct positions and distinct values".into(),
            ));
        }
    }
    Ok(())
}

/// The permutation with the given assignment on C and increasing values
/// elsewhere; it minimizes inversions among permutations honouring C.
pub fn minimal_completion(n: usize, assignment: &[(usize, u32)]) -> Result<Permutation> {
    validate_assignment(n, assignment)?;
    let mut values = vec![0u32; n];
    let mut used = vec![false; n + 1];
    for &(i, a) in assignment {
        values[i - 1] = a;
        used[a as usize] = true;
    }
    let mut free = (1..=n as u32).filter(|&v| !used[v as usize]);
    for slot in values.iter_mut().filter(|v| **v == 0) {
        *slot = free.next().unwrap();
    }
    Ok(Permutation::from_vec_unchecked(values))
}

/// Upper bound q^{l(w')} [n − |C|]_q! / [n]_q! on P(w(i) = a_i for i ∈ C),
/// valid for q ≤ 1.
pub fn prob_bound(assignment: &[(usize, u32)], params: MallowsParams) -> Result<f64> {
    if params.q > 1.0 {
        return Err(domain(format!("probability bound needs q <= 1, got {}", params.q)));
    }
    let n = params.n;
    if assignment.is_empty() {
        validate_assignment(n, assignment)?;
        return Ok(1.0);
    }
    let w = minimal_completion(n, assignment)?;
    let q = params.q;
    Ok(q.powi(w.inversions() as i32) * q_factorial((n - assignment.len()) as u32, q)
        / q_factorial(n as u32, q))
}

/// P(w(i) = a_i for i ∈ C) by enumeration.
pub fn exact_prob_assignment(law: &ExactLaw, assignment: &[(usize, u32)]) -> Result<f64> {
    validate_assignment(law.n(), assignment)?;
    Ok(law.event_probability(|w| assignment.iter().all(|&(i, a)| w.at(i) == a)))
}

/// P(des_i(w) = des_i(w⁻¹) for every i).
pub fn prob_equal_descent_sets(law: &ExactLaw) -> f64 {
    law.event_probability(|w| w.descent_set() == w.inverse().descent_set())
}

/// P(|w(i) − i| > 1).
pub fn prob_displaced(law: &ExactLaw, i: usize) -> f64 {
    law.event_probability(|w| (w.at(i) as i64 - i as i64).abs() > 1)
}
