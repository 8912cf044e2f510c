//! Exact checks of the independence structure of induced permutations.

use std::collections::BTreeMap;

use serde::Serialize;

use super::{q_factorial, ExactLaw};
use crate::error::{Error, Result};
use crate::perm::{IndexSet, Permutation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum IndependenceMode {
    /// (w^S, w^S') for separated S, S'.
    Direct,
    /// (w^S, (w⁻¹)^S') conditional on |w(S̄) ∩ S̄'| being 0 or 1.
    Inverse,
}

#[derive(Clone, Debug, Serialize)]
pub struct IndependenceCase {
    /// Conditioning event: `None` for the unconditional law, otherwise the
    /// size of w(S̄) ∩ S̄'.
    pub intersection_size: Option<usize>,
    pub event_probability: f64,
    /// max |P(a, b) − P(a)P(b)| over the product of the marginal supports.
    pub joint_deviation: f64,
    /// max |P(a) − μ_q(a)| for the first induced permutation.
    pub first_marginal_deviation: f64,
    pub second_marginal_deviation: f64,
}

impl IndependenceCase {
    pub fn max_deviation(&self) -> f64 {
        self.joint_deviation
            .max(self.first_marginal_deviation)
            .max(self.second_marginal_deviation)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IndependenceReport {
    pub mode: IndependenceMode,
    pub cases: Vec<IndependenceCase>,
}

impl IndependenceReport {
    pub fn max_deviation(&self) -> f64 {
        self.cases
            .iter()
            .map(IndependenceCase::max_deviation)
            .fold(0.0, f64::max)
    }
}

type Key = Vec<Permutation>;

/// Mallows probability of an element of a product of symmetric groups.
fn product_mallows(key: &Key, q: f64) -> f64 {
    key.iter()
        .map(|p| q.powi(p.inversions() as i32) / q_factorial(p.n() as u32, q))
        .product()
}

fn analyse(
    joint: &BTreeMap<(Key, Key), f64>,
    total: f64,
    q: f64,
    intersection_size: Option<usize>,
) -> IndependenceCase {
    let mut first: BTreeMap<&Key, f64> = BTreeMap::new();
    let mut second: BTreeMap<&Key, f64> = BTreeMap::new();
    for ((a, b), p) in joint {
        *first.entry(a).or_default() += p / total;
        *second.entry(b).or_default() += p / total;
    }
    let mut joint_deviation = 0.0f64;
    for (a, pa) in &first {
        for (b, pb) in &second {
            let pab = joint.get(&((*a).clone(), (*b).clone())).copied().unwrap_or(0.0) / total;
            joint_deviation = joint_deviation.max((pab - pa * pb).abs());
        }
    }
    let marginal_dev = |m: &BTreeMap<&Key, f64>| {
        m.iter()
            .map(|(key, p)| (p - product_mallows(key, q)).abs())
            .fold(0.0, f64::max)
    };
    IndependenceCase {
        intersection_size,
        event_probability: total,
        joint_deviation,
        first_marginal_deviation: marginal_dev(&first),
        second_marginal_deviation: marginal_dev(&second),
    }
}

pub fn independence_check(
    law: &ExactLaw,
    first: &IndexSet,
    second: &IndexSet,
    mode: IndependenceMode,
) -> Result<IndependenceReport> {
    let n = law.n();
    if first.n() != n || second.n() != n {
        return Err(Error::PreconditionViolated(
            "index sets must be built for the law's n".into(),
        ));
    }
    if first.is_empty() || second.is_empty() {
        return Err(Error::PreconditionViolated("index sets must be non-empty".into()));
    }
    let q = law.q();
    match mode {
        IndependenceMode::Direct => {
            if !first.is_separated_from(second) {
                return Err(Error::PreconditionViolated(
                    "direct mode needs |i - j| > 1 for all i in S, j in S'".into(),
                ));
            }
            let mut joint = BTreeMap::new();
            for (w, p) in law.iter() {
                let key = (w.induced(first)?, w.induced(second)?);
                *joint.entry(key).or_insert(0.0) += p;
            }
            Ok(IndependenceReport {
                mode,
                cases: vec![analyse(&joint, 1.0, q, None)],
            })
        }
        IndependenceMode::Inverse => {
            if !first.is_connected() || !second.is_connected() {
                return Err(Error::PreconditionViolated(
                    "inverse mode needs connected S and S'".into(),
                ));
            }
            let bar_first = first.associated_indices();
            let bar_second = second.associated_indices();
            let mut cases = Vec::new();
            for size in 0..=1 {
                let mut joint = BTreeMap::new();
                let mut total = 0.0;
                for (w, p) in law.iter() {
                    let hits = bar_first
                        .iter()
                        .filter(|&&i| bar_second.contains(&(w.at(i) as usize)))
                        .count();
                    if hits != size {
                        continue;
                    }
                    total += p;
                    let key = (w.induced(first)?, w.inverse().induced(second)?);
                    *joint.entry(key).or_insert(0.0) += p;
                }
                if total > 0.0 {
                    cases.push(analyse(&joint, total, q, Some(size)));
                }
            }
            Ok(IndependenceReport { mode, cases })
        }
    }
}
