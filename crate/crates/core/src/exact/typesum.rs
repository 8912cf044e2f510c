//! Exact double sums of covariances between per-move descent differences,
//! grouped into the six types of the variance-term expansion.
//!
//! With P_i = des(w) − des(w*ᵢ), V_i = des(w) − des(w*₋ᵢ) and
//! PI_i = des(w⁻¹) − des((w*ᵢ)⁻¹), VI_i = des(w⁻¹) − des((w*₋ᵢ)⁻¹), the
//! type t sum is Σ_{i,j} Cov(f_i, g_j) for the pair (f, g):
//!
//! | t | f | g  | bound / (n−1) |
//! |---|---|----|---------------|
//! | 1 | P | P  | 56            |
//! | 2 | P | PI | 56            |
//! | 3 | P | V  | 128           |
//! | 4 | P | VI | 256           |
//! | 5 | V | V  | 6507          |
//! | 6 | V | PI | 6507          |

use serde::Serialize;

use super::ExactLaw;
use crate::error::{Error, Result};
use crate::size_bias::{move_effects, MoveEffects};

/// Largest n for the O(n² · n!) type sums.
pub const TYPE_SUM_CAP: usize = 7;

const CONSTANTS: [f64; 6] = [56.0, 56.0, 128.0, 256.0, 6507.0, 6507.0];

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TypeSum {
    pub t: u8,
    /// Σ_{i,j} Cov(f_i, g_j).
    pub signed: f64,
    /// Σ_{i,j} |Cov(f_i, g_j)|.
    pub absolute: f64,
    /// Σ_{i,j} max(Cov(f_i, g_j), 0).
    pub positive_part: f64,
    /// constant · (n − 1).
    pub bound: f64,
    /// Whether the bound is claimed at this q: types 1–2 for every q,
    /// types 3–6 for q ≤ 1.
    pub admissible: bool,
    pub within_bound: bool,
}

fn pair(t: u8, e: &MoveEffects) -> (&[i8], &[i8]) {
    match t {
        1 => (&e.position_des, &e.position_des),
        2 => (&e.position_des, &e.position_ides),
        3 => (&e.position_des, &e.value_des),
        4 => (&e.position_des, &e.value_ides),
        5 => (&e.value_des, &e.value_des),
        6 => (&e.value_des, &e.position_ides),
        _ => unreachable!(),
    }
}

fn check_size(law: &ExactLaw) -> Result<()> {
    let n = law.n();
    if n > TYPE_SUM_CAP {
        return Err(Error::TooLargeForEnumeration { n, cap: TYPE_SUM_CAP });
    }
    if n < 2 {
        return Err(Error::PreconditionViolated("type sums need n >= 2".into()));
    }
    Ok(())
}

/// All six type sums in one pass over S_n.
pub fn type_sums(law: &ExactLaw) -> Result<Vec<TypeSum>> {
    check_size(law)?;
    let m = law.n() - 1;
    let effects: Vec<(MoveEffects, f64)> = law.iter().map(|(w, p)| (move_effects(w), p)).collect();
    Ok((1..=6u8)
        .map(|t| {
            let mut ef = vec![0.0; m];
            let mut eg = vec![0.0; m];
            let mut efg = vec![0.0; m * m];
            for (e, p) in &effects {
                let (f, g) = pair(t, e);
                for i in 0..m {
                    ef[i] += p * f[i] as f64;
                    eg[i] += p * g[i] as f64;
                    if f[i] != 0 {
                        for j in 0..m {
                            efg[i * m + j] += p * (f[i] * g[j]) as f64;
                        }
                    }
                }
            }
            let (mut signed, mut absolute, mut positive_part) = (0.0, 0.0, 0.0);
            for i in 0..m {
                for j in 0..m {
                    let c = efg[i * m + j] - ef[i] * eg[j];
                    signed += c;
                    absolute += c.abs();
                    positive_part += c.max(0.0);
                }
            }
            let bound = CONSTANTS[t as usize - 1] * m as f64;
            TypeSum {
                t,
                signed,
                absolute,
                positive_part,
                bound,
                admissible: t <= 2 || law.q() <= 1.0,
                within_bound: signed.abs() <= bound,
            }
        })
        .collect())
}

pub fn type_sum(t: u8, law: &ExactLaw) -> Result<TypeSum> {
    if !(1..=6).contains(&t) {
        return Err(Error::PreconditionViolated(format!("type must be in 1..=6, got {t}")));
    }
    Ok(type_sums(law)?[t as usize - 1])
}

/// Σ_{i,j} P(w(i+1) − w(i) = 1 and w(j+1) − w(j) = 1).
pub fn adjacency_pair_sum(law: &ExactLaw) -> Result<f64> {
    check_size(law)?;
    Ok(law
        .iter()
        .map(|(w, p)| {
            let k = w.values().windows(2).filter(|s| s[1] == s[0] + 1).count();
            p * (k * k) as f64
        })
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{enumerate_law, MallowsParams, EXACT_TOL};
    use crate::size_bias::{reverse_sort_position, reverse_sort_value};

    fn law(n: usize, q: f64) -> ExactLaw {
        enumerate_law(MallowsParams::new(n, q).unwrap()).unwrap()
    }

    #[test]
    fn n2_type1_is_quarter() {
        // P_1 = −1 on 12, 0 on 21, each with probability ½
        let s = type_sum(1, &law(2, 1.0)).unwrap();
        assert!((s.signed - 0.25).abs() < EXACT_TOL);
        assert!(s.within_bound);
    }

    #[test]
    fn matches_recomputation_from_full_permutations() {
        // independent oracle: recount descents of w* directly
        for (n, q) in [(4, 0.6), (5, 1.0), (4, 1.7)] {
            let l = law(n, q);
            let diff = |kind: usize, w: &crate::perm::Permutation, i: usize| -> f64 {
                let (d, di) = (w.descent_count() as f64, w.inverse().descent_count() as f64);
                let p = reverse_sort_position(w, i).unwrap();
                let v = reverse_sort_value(w, i).unwrap();
                match kind {
                    0 => d - p.descent_count() as f64,
                    1 => di - p.inverse().descent_count() as f64,
                    2 => d - v.descent_count() as f64,
                    _ => di - v.inverse().descent_count() as f64,
                }
            };
            let kinds = [(0, 0), (0, 1), (0, 2), (0, 3), (2, 2), (2, 1)];
            let sums = type_sums(&l).unwrap();
            for (t, &(a, b)) in kinds.iter().enumerate() {
                let mut total = 0.0;
                for i in 1..n {
                    for j in 1..n {
                        let ef = l.expectation(|w| diff(a, w, i));
                        let eg = l.expectation(|w| diff(b, w, j));
                        let efg = l.expectation(|w| diff(a, w, i) * diff(b, w, j));
                        total += efg - ef * eg;
                    }
                }
                assert!((sums[t].signed - total).abs() < 1e-12, "type {} n={n} q={q}", t + 1);
            }
        }
    }

    #[test]
    fn bounds_hold_for_small_n() {
        for n in 2..=6 {
            for q in [0.1, 0.5, 0.9, 1.0, 2.0] {
                for s in type_sums(&law(n, q)).unwrap() {
                    if s.admissible {
                        assert!(s.within_bound, "n={n} q={q} type {}", s.t);
                        assert!(s.absolute <= s.bound, "n={n} q={q} type {}", s.t);
                    }
                }
            }
        }
    }

    #[test]
    fn adjacency_sum_dominates_type5_near_uniform() {
        for n in 4..=6 {
            let q_min = 1.0 - 1.0 / ((n - 1) as f64).sqrt();
            for q in [q_min, 0.5 * (q_min + 1.0), 1.0] {
                let l = law(n, q);
                let adj = adjacency_pair_sum(&l).unwrap();
                assert!(adj <= 111.0 * (n - 1) as f64);
                let t5 = type_sum(5, &l).unwrap();
                assert!(t5.positive_part <= adj + EXACT_TOL);
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            type_sums(&law(8, 0.5)),
            Err(Error::TooLargeForEnumeration { n: 8, cap: 7 })
        ));
        assert!(type_sum(7, &law(3, 0.5)).is_err());
        assert!(type_sum(0, &law(3, 0.5)).is_err());
        assert!(type_sums(&law(1, 0.5)).is_err());
    }
}
