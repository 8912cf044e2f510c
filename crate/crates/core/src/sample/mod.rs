//! Random generation of Mallows permutations and of prefixes of the infinite
//! Mallows process.
//!
//! Position i of a finite permutation receives the j-th smallest value not
//! yet used, where j has the truncated geometric law
//! P(j) = q^{j-1}(1 - q)/(1 - q^m) on [1, m], m = n - i + 1. Each choice of
//! j contributes exactly j - 1 inversions, which is why the product of the
//! rank probabilities is proportional to q^{l(w)}. The unused-value lookup
//! goes through an occupancy tree, so a draw costs O(n log n).

mod rng;

pub use rng::{RngStream, SeededRng};

use rand::Rng;
use rand_distr::{Distribution, Geometric};

use crate::error::{domain, Result};
use crate::exact::MallowsParams;
use crate::fenwick::OccupancyTree;
use crate::perm::{self, Permutation};

/// Below this distance from 1 the truncated geometric is drawn as uniform.
pub const UNIFORM_CUTOFF: f64 = 1e-6;

/// j ∈ [1, m] with P(j) ∝ q^{j-1}, for 0 < q ≤ 1.
pub fn truncated_geometric<R: Rng + ?Sized>(rng: &mut R, q: f64, m: usize) -> usize {
    debug_assert!(m >= 1 && q > 0.0 && q <= 1.0);
    if m == 1 {
        return 1;
    }
    if (1.0 - q).abs() < UNIFORM_CUTOFF {
        return rng.random_range(1..=m);
    }
    let ln_q = q.ln();
    // 1 - q^m without cancellation
    let mass = -(m as f64 * ln_q).exp_m1();
    let u: f64 = rng.random();
    let j = 1.0 + ((-u * mass).ln_1p() / ln_q).floor();
    (j.max(1.0) as usize).min(m)
}

/// One draw from μ_q on S_n. q > 1 is served by drawing from μ_{1/q} and
/// reversing.
pub fn sample_finite<R: Rng + ?Sized>(params: MallowsParams, rng: &mut R) -> Permutation {
    if params.q > 1.0 {
        return sample_sub_uniform(params.n, 1.0 / params.q, rng).reverse();
    }
    sample_sub_uniform(params.n, params.q, rng)
}

fn sample_sub_uniform<R: Rng + ?Sized>(n: usize, q: f64, rng: &mut R) -> Permutation {
    let mut unused = OccupancyTree::full(n);
    let mut values = Vec::with_capacity(n);
    for i in 0..n {
        let j = truncated_geometric(rng, q, n - i);
        values.push(unused.take(j).expect("rank within remaining values") as u32);
    }
    Permutation::from_vec_unchecked(values)
}

/// w(1..n) of the infinite Mallows process: distinct positive integers,
/// not necessarily bounded by n.
#[derive(Clone, Debug, PartialEq)]
pub struct ProcessPrefix {
    pub values: Vec<u64>,
    pub q: f64,
}

impl ProcessPrefix {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Relative order of w(1), ..., w(n) as an element of S_n.
    pub fn relative_order(&self) -> Permutation {
        perm::relative_order(&self.values)
    }
}

/// Geometric rank law of the process, P(j) = q^{j-1}(1 - q) on j ≥ 1.
pub(crate) fn rank_distribution(q: f64) -> Result<Geometric> {
    if !(q > 0.0 && q < 1.0) {
        return Err(domain(format!("the Mallows process needs 0 < q < 1, got {q}")));
    }
    Geometric::new(1.0 - q).map_err(|e| domain(e.to_string()))
}

pub fn sample_process_prefix<R: Rng + ?Sized>(n: usize, q: f64, rng: &mut R) -> Result<ProcessPrefix> {
    let ranks = rank_distribution(q)?;
    let js: Vec<usize> = (0..n).map(|_| 1 + ranks.sample(rng) as usize).collect();
    // the j-th unused value never exceeds (values used so far) + j
    let cap = n + js.iter().copied().max().unwrap_or(0);
    let mut unused = OccupancyTree::full(cap);
    let values = js
        .into_iter()
        .map(|j| unused.take(j).expect("capacity covers every rank") as u64)
        .collect();
    Ok(ProcessPrefix { values, q })
}
