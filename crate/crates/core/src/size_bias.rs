//! The reverse-sorting size-bias coupling for X = des(w) + des(w⁻¹).
//!
//! A move picks i ∈ [n−1] and a side. On the position side the entries at
//! positions i, i+1 are put in decreasing order (w*ᵢ); on the value side the
//! values i, i+1 are arranged so that i+1 comes first (w*₋ᵢ). A uniform move
//! applied to w ~ μ_q yields X* with the size-bias law of X.
//!
//! Each move changes descents only locally, so the effect of all 2(n−1)
//! moves on des(w) and des(w⁻¹) is available in O(n) total.

use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::exact::{ExactLaw, MallowsParams};
use crate::par;
use crate::perm::{inverse_values, Permutation};
use crate::sample::{sample_finite, RngStream};
use crate::stats::Summary;

/// Largest n accepted by [`exact_coupling_check`].
pub const COUPLING_CAP: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Position,
    Value,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct CouplingMove {
    pub index: usize,
    pub side: Side,
}

impl CouplingMove {
    /// All 2(n−1) moves.
    pub fn all(n: usize) -> impl Iterator<Item = CouplingMove> {
        [Side::Position, Side::Value]
            .into_iter()
            .flat_map(move |side| (1..n).map(move |index| CouplingMove { index, side }))
    }

    pub fn uniform<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        assert!(n >= 2, "coupling moves need n >= 2");
        let k = rng.random_range(0..2 * (n - 1));
        let side = if k < n - 1 { Side::Position } else { Side::Value };
        CouplingMove { index: k % (n - 1) + 1, side }
    }
}

fn check_index(w: &Permutation, i: usize) -> Result<()> {
    if i == 0 || i >= w.n() {
        return Err(Error::IndexOutOfRange { index: i, max: w.n().saturating_sub(1) });
    }
    Ok(())
}

/// w*ᵢ: positions i, i+1 arranged descending.
pub fn reverse_sort_position(w: &Permutation, i: usize) -> Result<Permutation> {
    check_index(w, i)?;
    let mut v = w.values().to_vec();
    if v[i - 1] < v[i] {
        v.swap(i - 1, i);
    }
    Ok(Permutation::from_vec_unchecked(v))
}

/// w*₋ᵢ: values i and i+1 swapped if i currently precedes i+1.
pub fn reverse_sort_value(w: &Permutation, i: usize) -> Result<Permutation> {
    check_index(w, i)?;
    let mut v = w.values().to_vec();
    let pa = v.iter().position(|&x| x as usize == i).unwrap();
    let pb = v.iter().position(|&x| x as usize == i + 1).unwrap();
    if pa < pb {
        v[pa] = (i + 1) as u32;
        v[pb] = i as u32;
    }
    Ok(Permutation::from_vec_unchecked(v))
}

pub fn apply_move(w: &Permutation, mv: CouplingMove) -> Result<Permutation> {
    match mv.side {
        Side::Position => reverse_sort_position(w, mv.index),
        Side::Value => reverse_sort_value(w, mv.index),
    }
}

/// w* for a uniformly chosen move.
pub fn sample_coupled<R: Rng + ?Sized>(w: &Permutation, rng: &mut R) -> Result<(Permutation, CouplingMove)> {
    if w.n() < 2 {
        return Err(Error::PreconditionViolated("the coupling needs n >= 2".into()));
    }
    let mv = CouplingMove::uniform(w.n(), rng);
    Ok((apply_move(w, mv)?, mv))
}

/// des(v) − des(v*ᵢ) for the position move at 1-based i on the one-line
/// array `v`.
fn position_effect(v: &[u32], i: usize) -> i8 {
    let (a, b) = (v[i - 1], v[i]);
    if a > b {
        return 0;
    }
    let mut gained = 1i8;
    if i >= 2 {
        let l = v[i - 2];
        gained += (l > b) as i8 - (l > a) as i8;
    }
    if i < v.len() - 1 {
        let r = v[i + 1];
        gained += (a > r) as i8 - (b > r) as i8;
    }
    -gained
}

/// des(v) − des(v with values i, i+1 swapped), given that i precedes i+1:
/// the only comparison that can change is between the two values
/// themselves, and only when they are adjacent.
fn value_effect(positions: &[u32], i: usize) -> i8 {
    -((positions[i] == positions[i - 1] + 1) as i8)
}

/// Per-move differences des(w) − des(w*) and des(w⁻¹) − des((w*)⁻¹),
/// indexed by i − 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MoveEffects {
    /// des(w) − des(w*ᵢ).
    pub position_des: Vec<i8>,
    /// des(w⁻¹) − des((w*ᵢ)⁻¹).
    pub position_ides: Vec<i8>,
    /// des(w) − des(w*₋ᵢ).
    pub value_des: Vec<i8>,
    /// des(w⁻¹) − des((w*₋ᵢ)⁻¹).
    pub value_ides: Vec<i8>,
}

pub fn move_effects(w: &Permutation) -> MoveEffects {
    let v = w.values();
    let inv = inverse_values(v);
    let n = v.len();
    let mut e = MoveEffects {
        position_des: vec![0; n.saturating_sub(1)],
        position_ides: vec![0; n.saturating_sub(1)],
        value_des: vec![0; n.saturating_sub(1)],
        value_ides: vec![0; n.saturating_sub(1)],
    };
    for i in 1..n {
        if v[i - 1] < v[i] {
            e.position_des[i - 1] = position_effect(v, i);
            // on w⁻¹ this swaps the consecutive values i, i+1 sitting at
            // positions w(i) < w(i+1)
            e.position_ides[i - 1] = -((v[i] == v[i - 1] + 1) as i8);
        }
        if inv[i - 1] < inv[i] {
            e.value_des[i - 1] = value_effect(&inv, i);
            e.value_ides[i - 1] = position_effect(&inv, i);
        }
    }
    e
}

/// The four sums over moves and E(X − X* | w).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecompositionTerms {
    /// Σᵢ des(w) − des(w*ᵢ).
    pub sigma1: f64,
    /// Σᵢ des(w) − des(w*₋ᵢ).
    pub sigma2: f64,
    /// Σᵢ des(w⁻¹) − des((w*ᵢ)⁻¹).
    pub sigma3: f64,
    /// Σᵢ des(w⁻¹) − des((w*₋ᵢ)⁻¹).
    pub sigma4: f64,
    /// (Σ₁ + Σ₂ + Σ₃ + Σ₄)/(2(n−1)).
    pub delta_bar: f64,
}

pub fn decompose(w: &Permutation) -> Result<DecompositionTerms> {
    let n = w.n();
    if n < 2 {
        return Err(Error::PreconditionViolated("the coupling needs n >= 2".into()));
    }
    let e = move_effects(w);
    let sum = |xs: &[i8]| xs.iter().map(|&x| x as i64).sum::<i64>() as f64;
    let (sigma1, sigma2) = (sum(&e.position_des), sum(&e.value_des));
    let (sigma3, sigma4) = (sum(&e.position_ides), sum(&e.value_ides));
    Ok(DecompositionTerms {
        sigma1,
        sigma2,
        sigma3,
        sigma4,
        delta_bar: (sigma1 + sigma2 + sigma3 + sigma4) / (2 * (n - 1)) as f64,
    })
}

/// E(X − X* | w), exact over the 2(n−1) moves.
pub fn cond_exp_delta(w: &Permutation) -> Result<f64> {
    Ok(decompose(w)?.delta_bar)
}

#[derive(Clone, Debug, Serialize)]
pub struct CouplingCheck {
    /// Law of X* = two_sided(w*) under w ~ μ_q and a uniform move.
    pub coupled_law: BTreeMap<usize, f64>,
    /// x P(X = x)/E X.
    pub size_bias_law: BTreeMap<usize, f64>,
    pub max_deviation: f64,
}

pub fn exact_coupling_check(law: &ExactLaw) -> Result<CouplingCheck> {
    let n = law.n();
    if n > COUPLING_CAP {
        return Err(Error::TooLargeForEnumeration { n, cap: COUPLING_CAP });
    }
    if n < 2 {
        return Err(Error::PreconditionViolated("the coupling needs n >= 2".into()));
    }
    let moves: Vec<CouplingMove> = CouplingMove::all(n).collect();
    let weight = 1.0 / moves.len() as f64;
    let mut coupled_law = BTreeMap::new();
    for (w, p) in law.iter() {
        for &mv in &moves {
            *coupled_law.entry(apply_move(w, mv)?.two_sided()).or_insert(0.0) += p * weight;
        }
    }
    let x_law = law.pushforward(|w| w.two_sided());
    let mean: f64 = x_law.iter().map(|(&x, p)| x as f64 * p).sum();
    let size_bias_law: BTreeMap<usize, f64> = x_law
        .iter()
        .filter(|(&x, _)| x > 0)
        .map(|(&x, p)| (x, x as f64 * p / mean))
        .collect();
    let keys: std::collections::BTreeSet<usize> =
        coupled_law.keys().chain(size_bias_law.keys()).copied().collect();
    let max_deviation = keys
        .iter()
        .map(|k| {
            let a = coupled_law.get(k).copied().unwrap_or(0.0);
            let b = size_bias_law.get(k).copied().unwrap_or(0.0);
            (a - b).abs()
        })
        .fold(0.0, f64::max);
    Ok(CouplingCheck { coupled_law, size_bias_law, max_deviation })
}

/// max_v |P(w*ᵢ = v) − P(w = v | des_i(w) = 1)|.
pub fn conditional_law_deviation(law: &ExactLaw, i: usize) -> Result<f64> {
    check_index(&Permutation::identity(law.n()), i)?;
    let moved = law.pushforward_perm(|w| reverse_sort_position(w, i).expect("index checked"));
    let p_desc = law.event_probability(|w| w.at(i) > w.at(i + 1));
    Ok(law
        .iter()
        .zip(moved)
        .map(|((w, p), m)| {
            let cond = if w.at(i) > w.at(i + 1) { p / p_desc } else { 0.0 };
            (m - cond).abs()
        })
        .fold(0.0, f64::max))
}

/// Variance term of the Stein bound: Var E(X − X* | w).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct VarianceTerm {
    pub estimate: f64,
    pub se: f64,
    pub mean_delta: f64,
    /// 148/(n−1) at q = 1, 6847/(n−1) otherwise.
    pub bound: f64,
    pub pass: bool,
}

pub fn variance_bound(params: MallowsParams) -> f64 {
    let c = if params.q == 1.0 { 148.0 } else { 6847.0 };
    c / (params.n - 1) as f64
}

pub fn variance_term(params: MallowsParams, reps: u64, stream: &RngStream) -> Result<VarianceTerm> {
    if params.n < 2 {
        return Err(Error::PreconditionViolated("the coupling needs n >= 2".into()));
    }
    if reps < 2 {
        return Err(domain("variance estimation needs at least 2 reps"));
    }
    let deltas: Vec<f64> = par::map_indexed(reps, |k| {
        let w = sample_finite(params, &mut stream.at(k));
        cond_exp_delta(&w).expect("n >= 2")
    });
    let s = Summary::of(&deltas);
    let bound = variance_bound(params);
    Ok(VarianceTerm {
        estimate: s.variance,
        se: s.variance_std_error(),
        mean_delta: s.mean,
        bound,
        pass: s.variance <= bound,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TailSide {
    Upper,
    Lower,
}

/// Concentration bounds for X − μ, μ = 2(n−1)q/(1+q):
/// upper exp(−x²/(4(x/3 + μ))) for x ≥ 0, lower exp(−x²/(4μ)) for
/// 0 ≤ x < μ.
pub fn tail_bound(x: f64, mu: f64, side: TailSide) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(domain(format!("tail bounds need x >= 0, got {x}")));
    }
    match side {
        TailSide::Upper => Ok((-x * x / (4.0 * (x / 3.0 + mu))).exp()),
        TailSide::Lower if x < mu => Ok((-x * x / (4.0 * mu)).exp()),
        TailSide::Lower => Err(domain(format!("lower tail bound needs x < mu = {mu}, got {x}"))),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TailPoint {
    pub x: f64,
    /// Empirical P(X − μ ≥ x).
    pub upper_freq: f64,
    pub upper_se: f64,
    pub upper_bound: f64,
    pub upper_pass: bool,
    /// Empirical P(X − μ ≤ −x); the bound is absent when x ≥ μ.
    pub lower_freq: f64,
    pub lower_se: f64,
    pub lower_bound: Option<f64>,
    pub lower_pass: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TailReport {
    pub mu: f64,
    pub reps: u64,
    pub points: Vec<TailPoint>,
}

impl TailReport {
    pub fn pass(&self) -> bool {
        self.points
            .iter()
            .all(|p| p.upper_pass && p.lower_pass.unwrap_or(true))
    }
}

/// Empirical tail frequencies of X − μ against the bounds, each allowed a
/// slack of 3 binomial standard errors.
pub fn tail_check(params: MallowsParams, reps: u64, stream: &RngStream, xs: &[f64]) -> Result<TailReport> {
    if params.n < 2 {
        return Err(Error::PreconditionViolated("tail bounds need n >= 2".into()));
    }
    let mu = 2.0 * (params.n - 1) as f64 * params.q / (1.0 + params.q);
    let draws: Vec<f64> = par::map_indexed(reps, |k| {
        sample_finite(params, &mut stream.at(k)).two_sided() as f64 - mu
    });
    let freq = |hit: &dyn Fn(f64) -> bool| {
        let f = draws.iter().filter(|&&d| hit(d)).count() as f64 / reps as f64;
        (f, (f * (1.0 - f) / reps as f64).sqrt())
    };
    let mut points = Vec::with_capacity(xs.len());
    for &x in xs {
        let upper_bound = tail_bound(x, mu, TailSide::Upper)?;
        let (upper_freq, upper_se) = freq(&|d| d >= x);
        let (lower_freq, lower_se) = freq(&|d| d <= -x);
        let lower_bound = tail_bound(x, mu, TailSide::Lower).ok();
        points.push(TailPoint {
            x,
            upper_freq,
            upper_se,
            upper_bound,
            upper_pass: upper_freq <= upper_bound + 3.0 * upper_se,
            lower_freq,
            lower_se,
            lower_bound,
            lower_pass: lower_bound.map(|b| lower_freq <= b + 3.0 * lower_se),
        });
    }
    Ok(TailReport { mu, reps, points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{all_permutations, enumerate_law, EXACT_TOL};
    use crate::perm::perm;
    use crate::sample::SeededRng;
    use proptest::prelude::*;

    fn law(n: usize, q: f64) -> ExactLaw {
        enumerate_law(MallowsParams::new(n, q).unwrap()).unwrap()
    }

    #[test]
    fn position_examples() {
        assert_eq!(reverse_sort_position(&perm("123"), 1).unwrap(), perm("213"));
        assert_eq!(reverse_sort_position(&perm("3251476"), 2).unwrap(), perm("3521476"));
        assert_eq!(reverse_sort_position(&perm("321"), 1).unwrap(), perm("321"));
        assert!(matches!(
            reverse_sort_position(&perm("321"), 3),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(reverse_sort_position(&perm("321"), 0).is_err());
    }

    #[test]
    fn value_examples() {
        assert_eq!(reverse_sort_value(&perm("123"), 1).unwrap(), perm("213"));
        assert_eq!(reverse_sort_value(&perm("312"), 1).unwrap(), perm("321"));
        assert_eq!(reverse_sort_value(&perm("21"), 1).unwrap(), perm("21"));
        assert!(reverse_sort_value(&perm("21"), 2).is_err());
    }

    #[test]
    fn value_move_is_conjugated_position_move() {
        for n in 2..=6 {
            for w in all_permutations(n) {
                for i in 1..n {
                    let direct = reverse_sort_value(&w, i).unwrap();
                    let via = reverse_sort_position(&w.inverse(), i).unwrap().inverse();
                    assert_eq!(direct, via);
                }
            }
        }
    }

    #[test]
    fn position_move_adds_at_most_one_inversion() {
        for n in 2..=7 {
            for w in all_permutations(n) {
                for i in 1..n {
                    let d = reverse_sort_position(&w, i).unwrap().inversions() as i64 - w.inversions() as i64;
                    assert_eq!(d, (w.at(i) < w.at(i + 1)) as i64);
                }
            }
        }
    }

    #[test]
    fn moves_change_two_sided_by_at_most_two() {
        for n in 2..=7 {
            for w in all_permutations(n) {
                let x = w.two_sided() as i64;
                for mv in CouplingMove::all(n) {
                    let d = apply_move(&w, mv).unwrap().two_sided() as i64 - x;
                    assert!((-2..=2).contains(&d), "{w} {mv:?}");
                    assert!(d <= 2);
                }
            }
        }
    }

    #[test]
    fn local_effects_match_recount() {
        for n in 2..=7 {
            for w in all_permutations(n) {
                let e = move_effects(&w);
                let (d, di) = (w.descent_count() as i64, w.inverse().descent_count() as i64);
                for i in 1..n {
                    let p = reverse_sort_position(&w, i).unwrap();
                    let v = reverse_sort_value(&w, i).unwrap();
                    assert_eq!(e.position_des[i - 1] as i64, d - p.descent_count() as i64);
                    assert_eq!(e.position_ides[i - 1] as i64, di - p.inverse().descent_count() as i64);
                    assert_eq!(e.value_des[i - 1] as i64, d - v.descent_count() as i64);
                    assert_eq!(e.value_ides[i - 1] as i64, di - v.inverse().descent_count() as i64);
                }
            }
        }
    }

    #[test]
    fn value_move_effect_is_adjacency_indicator() {
        // des(w) − des(w*₋ᵢ) = −I{w⁻¹(i+1) − w⁻¹(i) = 1}
        // des(w⁻¹) − des((w*ᵢ)⁻¹) = −I{w(i+1) − w(i) = 1}
        for n in 2..=7 {
            for w in all_permutations(n) {
                let inv = w.inverse();
                for i in 1..n {
                    let v = reverse_sort_value(&w, i).unwrap();
                    let adj_values = inv.at(i + 1) as i64 - inv.at(i) as i64 == 1;
                    assert_eq!(w.descent_count() as i64 - v.descent_count() as i64, -(adj_values as i64));
                    let p = reverse_sort_position(&w, i).unwrap();
                    let adj_positions = w.at(i + 1) as i64 - w.at(i) as i64 == 1;
                    assert_eq!(
                        inv.descent_count() as i64 - p.inverse().descent_count() as i64,
                        -(adj_positions as i64)
                    );
                }
            }
        }
    }

    #[test]
    fn coupling_small_examples() {
        let c = exact_coupling_check(&law(2, 1.0)).unwrap();
        assert_eq!(c.coupled_law.len(), 1);
        assert!((c.coupled_law[&2] - 1.0).abs() < EXACT_TOL);
        let c = exact_coupling_check(&law(2, 0.5)).unwrap();
        assert!((c.coupled_law[&2] - 1.0).abs() < EXACT_TOL);
        let c = exact_coupling_check(&law(3, 1.0)).unwrap();
        assert!((c.size_bias_law[&2] - 2.0 / 3.0).abs() < EXACT_TOL);
        assert!((c.size_bias_law[&4] - 1.0 / 3.0).abs() < EXACT_TOL);
        assert!(c.max_deviation < EXACT_TOL);
    }

    #[test]
    fn coupling_is_exact() {
        for n in 2..=6 {
            for q in [0.5, 1.0, 2.0] {
                let c = exact_coupling_check(&law(n, q)).unwrap();
                assert!(c.max_deviation <= EXACT_TOL, "n={n} q={q}: {}", c.max_deviation);
                assert!(!c.coupled_law.contains_key(&0));
            }
        }
        assert!(matches!(
            exact_coupling_check(&law(7, 0.5)),
            Err(Error::TooLargeForEnumeration { .. })
        ));
    }

    #[test]
    fn coupled_draw_at_n2() {
        let mut rng = SeededRng::new(0, "n2", 0);
        for w in [perm("12"), perm("21")] {
            for _ in 0..10 {
                let (ws, _) = sample_coupled(&w, &mut rng).unwrap();
                assert_eq!(ws, perm("21"));
                assert_eq!(ws.two_sided(), 2);
            }
        }
        assert!(sample_coupled(&perm("1"), &mut rng).is_err());
    }

    #[test]
    fn uniform_move_covers_all() {
        let mut rng = SeededRng::new(0, "moves", 0);
        let mut seen = std::collections::HashSet::new();
        for _ in 0..1000 {
            seen.insert(CouplingMove::uniform(4, &mut rng));
        }
        assert_eq!(seen.len(), 6);
    }

    #[test]
    fn position_move_is_conditioning_on_descent() {
        for n in 2..=6 {
            for q in [0.3, 1.0, 2.5] {
                let l = law(n, q);
                for i in 1..n {
                    assert!(conditional_law_deviation(&l, i).unwrap() < EXACT_TOL);
                }
            }
        }
    }

    #[test]
    fn cond_exp_delta_examples() {
        assert_eq!(cond_exp_delta(&perm("21")).unwrap(), 0.0);
        assert_eq!(cond_exp_delta(&perm("12")).unwrap(), -2.0);
        assert!(cond_exp_delta(&perm("1")).is_err());
    }

    #[test]
    fn cond_exp_delta_matches_brute_force() {
        for n in 2..=6 {
            let m = 2.0 * (n - 1) as f64;
            for w in all_permutations(n) {
                let x = w.two_sided() as f64;
                let brute: f64 = CouplingMove::all(n)
                    .map(|mv| x - apply_move(&w, mv).unwrap().two_sided() as f64)
                    .sum::<f64>()
                    / m;
                assert!((cond_exp_delta(&w).unwrap() - brute).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn decomposition_summands_are_bounded() {
        for w in all_permutations(6) {
            let t = decompose(&w).unwrap();
            assert!(t.delta_bar.abs() <= 2.0);
            let e = move_effects(&w);
            for s in [&e.position_des, &e.position_ides, &e.value_des, &e.value_ides] {
                assert!(s.iter().all(|x| (-1..=2).contains(x)));
            }
        }
    }

    #[test]
    fn tail_bound_values() {
        assert_eq!(tail_bound(0.0, 5.0, TailSide::Upper).unwrap(), 1.0);
        assert_eq!(tail_bound(0.0, 5.0, TailSide::Lower).unwrap(), 1.0);
        let mu = 2.0 * 199.0 * 0.5 / 1.5;
        let b = tail_bound(20.0, mu, TailSide::Upper).unwrap();
        assert!((b - (-400.0 / (4.0 * (20.0 / 3.0 + mu))).exp()).abs() < 1e-15);
        assert!((b - 0.4879).abs() < 5e-5);
        assert!(tail_bound(mu, mu, TailSide::Lower).is_err());
        assert!(tail_bound(-1.0, mu, TailSide::Upper).is_err());
    }

    #[test]
    fn variance_term_small() {
        let stream = RngStream::new(0, "vterm-test");
        let v = variance_term(MallowsParams::new(30, 0.5).unwrap(), 2000, &stream).unwrap();
        assert!(v.pass);
        assert!(v.estimate > 0.0);
        assert_eq!(v.bound, 6847.0 / 29.0);
        let u = variance_bound(MallowsParams::new(30, 1.0).unwrap());
        assert_eq!(u, 148.0 / 29.0);
    }

    #[test]
    fn mean_delta_is_minus_variance_over_mean() {
        // E X* = E X²/E X, so E(X − X*) = −Var X/E X
        let l = law(5, 0.7);
        let mean: f64 = l.expectation(|w| w.two_sided() as f64);
        let var: f64 = l.expectation(|w| (w.two_sided() as f64 - mean).powi(2));
        let e_delta = l.expectation(|w| cond_exp_delta(w).unwrap());
        assert!((e_delta + var / mean).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn local_effects_match_on_large_perms(seed in 0u64..1000, n in 2usize..60) {
            let w = sample_finite(MallowsParams::new(n, 0.8).unwrap(), &mut SeededRng::new(seed, "pt", 0));
            let t = decompose(&w).unwrap();
            let x = w.two_sided() as f64;
            let brute: f64 = CouplingMove::all(n)
                .map(|mv| x - apply_move(&w, mv).unwrap().two_sided() as f64)
                .sum();
            prop_assert!((t.sigma1 + t.sigma2 + t.sigma3 + t.sigma4 - brute).abs() < 1e-9);
        }
    }
}
