//! Monte Carlo experiments for the limit behaviour of X = des(w) + des(w⁻¹):
//! the normal approximation rate for smooth test functions, the joint limit
//! of (des(w), des(w⁻¹)), the finite-n versus excursion estimates of the
//! asymptotic correlation, and the Poisson regime for small q.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::exact::{euler_product, MallowsParams};
use crate::par;
use crate::regen::{estimate_rho_excursion, DEFAULT_MAX_LEN};
use crate::sample::{sample_finite, RngStream};
use crate::stats::{self, Summary};

/// Largest q for which the excursion estimator is run.
pub const EXCURSION_Q_MAX: f64 = 0.8;

/// Minimum reps for the normal-approximation experiment.
pub const CLT_MIN_REPS: u64 = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TestFunction {
    Tanh,
    Cosine,
}

impl TestFunction {
    pub fn name(self) -> &'static str {
        match self {
            TestFunction::Tanh => "tanh",
            TestFunction::Cosine => "cosine",
        }
    }

    pub fn eval(self, x: f64) -> f64 {
        match self {
            TestFunction::Tanh => x.tanh(),
            TestFunction::Cosine => x.cos(),
        }
    }

    pub fn sup_norm(self) -> f64 {
        1.0
    }

    pub fn derivative_sup_norm(self) -> f64 {
        1.0
    }

    /// E h(Z) for Z ~ N(0, 1).
    pub fn reference(self) -> f64 {
        match self {
            TestFunction::Tanh => 0.0,
            TestFunction::Cosine => (-0.5f64).exp(),
        }
    }
}

impl std::str::FromStr for TestFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tanh" => Ok(TestFunction::Tanh),
            "cos" | "cosine" => Ok(TestFunction::Cosine),
            other => Err(Error::Parse(format!("unknown test function {other:?}"))),
        }
    }
}

/// (331‖h‖∞ + 167‖h'‖∞ max(q^{-1/2}, q^{1/2})) / √(n − 1).
pub fn normal_approx_bound(params: MallowsParams, h: TestFunction) -> f64 {
    let q = params.q;
    let spread = q.sqrt().max(1.0 / q.sqrt());
    (331.0 * h.sup_norm() + 167.0 * h.derivative_sup_norm() * spread) / ((params.n - 1) as f64).sqrt()
}

fn exact_mean(params: MallowsParams) -> f64 {
    2.0 * params.q * (params.n - 1) as f64 / (1.0 + params.q)
}

fn require_n2(params: MallowsParams) -> Result<()> {
    if params.n < 2 {
        return Err(Error::PreconditionViolated("n must be at least 2".into()));
    }
    Ok(())
}

/// `reps` draws of (des(w), des(w⁻¹)).
pub fn descent_pairs(params: MallowsParams, reps: u64, stream: &RngStream) -> Vec<(u32, u32)> {
    par::map_indexed(reps, |k| {
        let w = sample_finite(params, &mut stream.at(k));
        let d = w.descent_count() as u32;
        let e = w.inverse().descent_count() as u32;
        (d, e)
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CltReport {
    pub n: usize,
    pub q: f64,
    pub reps: u64,
    pub h: TestFunction,
    /// Exact E X used for centring.
    pub mean: f64,
    /// Sample standard deviation used for scaling.
    pub sd: f64,
    pub avg_h: f64,
    pub reference: f64,
    pub deviation: f64,
    pub deviation_se: f64,
    pub bound: f64,
    pub ks: f64,
    pub pass: bool,
}

/// Standardized draws W = (X − E X)/s with s the sample standard deviation,
/// together with s.
pub fn standardized_two_sided(params: MallowsParams, reps: u64, stream: &RngStream) -> Result<(Vec<f64>, f64)> {
    require_n2(params)?;
    let xs: Vec<f64> = descent_pairs(params, reps, stream)
        .into_iter()
        .map(|(d, e)| (d + e) as f64)
        .collect();
    let sd = Summary::of(&xs).sd();
    let mean = exact_mean(params);
    Ok((xs.into_iter().map(|x| (x - mean) / sd).collect(), sd))
}

/// Evaluates one test function on standardized draws.
pub fn clt_report(params: MallowsParams, h: TestFunction, ws: &[f64], sd: f64) -> CltReport {
    let hs: Vec<f64> = ws.iter().map(|&w| h.eval(w)).collect();
    let s = Summary::of(&hs);
    let deviation = (s.mean - h.reference()).abs();
    let bound = normal_approx_bound(params, h);
    CltReport {
        n: params.n,
        q: params.q,
        reps: ws.len() as u64,
        h,
        mean: exact_mean(params),
        sd,
        avg_h: s.mean,
        reference: h.reference(),
        deviation,
        deviation_se: s.std_error(),
        bound,
        ks: stats::ks_normal(ws),
        pass: deviation <= bound,
    }
}

pub fn clt_experiment(params: MallowsParams, reps: u64, h: TestFunction, stream: &RngStream) -> Result<CltReport> {
    if reps < CLT_MIN_REPS {
        return Err(Error::PreconditionViolated(format!("clt needs at least {CLT_MIN_REPS} reps")));
    }
    let (ws, sd) = standardized_two_sided(params, reps, stream)?;
    Ok(clt_report(params, h, &ws, sd))
}

/// Limits of Cov(des, des∘inv)/n and Var(des)/n give an interval for ρ
/// at q ≠ 1; ρ(q) = ρ(1/q).
pub fn rho_limit_bounds(q: f64) -> Option<(f64, f64)> {
    if q == 1.0 {
        return Some((0.0, 0.0));
    }
    let q = q.min(1.0 / q);
    let var = q * (1.0 - q + q * q) / ((1.0 + q).powi(2) * (1.0 + q + q * q));
    let lower = q * (1.0 - q).powi(2) * euler_product(q) / (1.0 + q) / var;
    let upper = q * (1.0 - q) * (1.0 + q).powi(2) / var;
    Some((lower.min(1.0), upper.min(1.0)))
}

#[derive(Clone, Debug, Serialize)]
pub struct BivariateResult {
    pub n: usize,
    pub q: f64,
    pub reps: u64,
    pub sample_correlation: f64,
    pub correlation_se: f64,
    pub rho_reference: f64,
    pub rho_reference_se: Option<f64>,
    /// "excursion", "uniform" or "bounds" (midpoint of the limiting interval).
    pub rho_reference_source: String,
    pub rho_bounds: (f64, f64),
    /// Kolmogorov distance of the standardized a·des + b·des(w⁻¹), keyed "a,b".
    pub projection_ks: BTreeMap<String, f64>,
}

pub const PROJECTIONS: [(u32, u32); 3] = [(1, 1), (2, 1), (1, 2)];

pub fn bivariate_experiment(
    params: MallowsParams,
    reps: u64,
    excursions: u64,
    stream: &RngStream,
) -> Result<BivariateResult> {
    require_n2(params)?;
    let pairs = descent_pairs(params, reps, &stream.child("finite"));
    let des: Vec<f64> = pairs.iter().map(|p| p.0 as f64).collect();
    let ides: Vec<f64> = pairs.iter().map(|p| p.1 as f64).collect();
    let corr = stats::pearson(&des, &ides);
    let half_mean = exact_mean(params) / 2.0;
    let mut projection_ks = BTreeMap::new();
    for (a, b) in PROJECTIONS {
        let ys: Vec<f64> = pairs.iter().map(|&(d, e)| (a * d + b * e) as f64).collect();
        let sd = Summary::of(&ys).sd();
        let centre = (a + b) as f64 * half_mean;
        let ws: Vec<f64> = ys.iter().map(|y| (y - centre) / sd).collect();
        projection_ks.insert(format!("{a},{b}"), stats::ks_normal(&ws));
    }
    let bounds = rho_limit_bounds(params.q).expect("q > 0");
    let q_sub = params.q.min(1.0 / params.q);
    let (rho_reference, rho_reference_se, source) = if params.q == 1.0 {
        (0.0, None, "uniform")
    } else if q_sub <= EXCURSION_Q_MAX && excursions > 0 {
        let r = estimate_rho_excursion(q_sub, excursions, &stream.child("excursion"), DEFAULT_MAX_LEN)?;
        (r.rho, Some(r.se), "excursion")
    } else {
        (0.5 * (bounds.0 + bounds.1), None, "bounds")
    };
    Ok(BivariateResult {
        n: params.n,
        q: params.q,
        reps,
        sample_correlation: corr.r,
        correlation_se: corr.se,
        rho_reference,
        rho_reference_se,
        rho_reference_source: source.into(),
        rho_bounds: bounds,
        projection_ks,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Figure1Row {
    pub q: f64,
    pub rho_finite: f64,
    pub se_finite: f64,
    pub rho_excursion: Option<f64>,
    pub se_excursion: Option<f64>,
    /// Set when the excursion estimate failed for this row.
    pub error: Option<String>,
}

/// Finite-n correlation and, for q ≤ 0.8, the excursion estimate, per grid
/// point. Per-row streams are keyed by q, so a row does not depend on the
/// rest of the grid.
pub fn figure1(grid: &[f64], n: usize, reps: u64, excursion_reps: u64, stream: &RngStream) -> Result<Vec<Figure1Row>> {
    if let Some(&bad) = grid.iter().find(|&&q| !(q > 0.0 && q < 1.0)) {
        return Err(domain(format!("grid points must lie in (0, 1), got {bad}")));
    }
    let mut rows = Vec::with_capacity(grid.len());
    for &q in grid {
        let params = MallowsParams::new(n, q)?;
        let row_stream = stream.child(&format!("q={q}"));
        let pairs = descent_pairs(params, reps, &row_stream.child("finite"));
        let des: Vec<f64> = pairs.iter().map(|p| p.0 as f64).collect();
        let ides: Vec<f64> = pairs.iter().map(|p| p.1 as f64).collect();
        let corr = stats::pearson(&des, &ides);
        let mut row = Figure1Row {
            q,
            rho_finite: corr.r,
            se_finite: corr.se,
            rho_excursion: None,
            se_excursion: None,
            error: None,
        };
        if q <= EXCURSION_Q_MAX {
            match estimate_rho_excursion(q, excursion_reps, &row_stream.child("excursion"), DEFAULT_MAX_LEN) {
                Ok(r) => {
                    row.rho_excursion = Some(r.rho);
                    row.se_excursion = Some(r.se);
                }
                Err(e @ Error::ExcursionTooLong { .. }) => {
                    eprintln!("warning: q = {q}: {e}");
                    row.error = Some(e.to_string());
                }
                Err(e) => return Err(e),
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

/// CSV with columns q, rho_finite, se_finite, rho_excursion, se_excursion;
/// missing estimates are empty cells.
pub fn figure1_csv(rows: &[Figure1Row]) -> String {
    let mut out = String::from("q,rho_finite,se_finite,rho_excursion,se_excursion\n");
    let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.q,
            r.rho_finite,
            r.se_finite,
            opt(r.rho_excursion),
            opt(r.se_excursion)
        );
    }
    out
}

/// Evenly spaced grid of `points` values in (0, 1): k/(points + 1).
pub fn default_grid(points: usize) -> Vec<f64> {
    (1..=points).map(|k| k as f64 / (points + 1) as f64).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct PoissonCheck {
    pub n: usize,
    pub q: f64,
    pub reps: u64,
    /// (n − 1)q/(1 + q).
    pub lambda: f64,
    /// 12q²n.
    pub bound: f64,
    pub vacuous: bool,
    pub empirical_tv: f64,
    pub tv_se: f64,
    pub pass: bool,
    /// Empirical P(X even).
    pub even_fraction: f64,
    /// 1 − 2q²n.
    pub even_bound: f64,
    pub even_pass: bool,
}

/// Tail mass dropped from the Poisson law.
pub const POISSON_TAIL: f64 = 1e-9;

pub fn poisson_experiment(params: MallowsParams, reps: u64, stream: &RngStream) -> Result<PoissonCheck> {
    require_n2(params)?;
    if reps < 2 {
        return Err(domain("poisson check needs at least 2 reps"));
    }
    let (n, q) = (params.n, params.q);
    let lambda = (n - 1) as f64 * q / (1.0 + q);
    let bound = 12.0 * q * q * n as f64;
    let vacuous = bound >= 1.0;
    if vacuous {
        eprintln!("warning: 12 q^2 n = {bound} >= 1, the total variation bound is vacuous");
    }
    let hist = par::fold_blocks(
        reps,
        BTreeMap::<usize, u64>::new,
        |acc, k| {
            let x = sample_finite(params, &mut stream.at(k)).two_sided();
            *acc.entry(x).or_insert(0) += 1;
        },
        |acc, other| {
            for (x, c) in other {
                *acc.entry(x).or_insert(0) += c;
            }
        },
    );
    let total = reps as f64;
    let empirical: BTreeMap<usize, f64> = hist.iter().map(|(&x, &c)| (x, c as f64 / total)).collect();
    let target: BTreeMap<usize, f64> = stats::poisson_pmf_truncated(lambda, POISSON_TAIL)
        .into_iter()
        .enumerate()
        .map(|(k, p)| (2 * k, p))
        .collect();
    let empirical_tv = stats::total_variation(&empirical, &target);
    // delta method: TV is linear in the empirical pmf given the signs
    let (mut m1, mut m2) = (0.0, 0.0);
    for (x, p) in &empirical {
        let s = (p - target.get(x).copied().unwrap_or(0.0)).signum();
        m1 += s * p;
        m2 += s * s * p;
    }
    let tv_se = 0.5 * ((m2 - m1 * m1).max(0.0) / total).sqrt();
    let even: u64 = hist.iter().filter(|(x, _)| *x % 2 == 0).map(|(_, c)| c).sum();
    let even_fraction = even as f64 / total;
    let even_se = (even_fraction * (1.0 - even_fraction) / total).sqrt();
    let even_bound = 1.0 - 2.0 * q * q * n as f64;
    Ok(PoissonCheck {
        n,
        q,
        reps,
        lambda,
        bound,
        vacuous,
        empirical_tv,
        tv_se,
        pass: empirical_tv <= bound + 3.0 * tv_se,
        even_fraction,
        even_bound,
        even_pass: even_fraction >= even_bound - 3.0 * even_se,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, q: f64) -> MallowsParams {
        MallowsParams::new(n, q).unwrap()
    }

    #[test]
    fn test_function_catalogue() {
        assert_eq!(TestFunction::Tanh.reference(), 0.0);
        assert!((TestFunction::Cosine.reference() - 0.606_530_659_712_633_4).abs() < 1e-15);
        assert_eq!("cos".parse::<TestFunction>().unwrap(), TestFunction::Cosine);
        assert!("sin".parse::<TestFunction>().is_err());
    }

    #[test]
    fn bound_value_at_uniform() {
        let b = normal_approx_bound(params(100_000, 1.0), TestFunction::Tanh);
        assert!((b - 498.0 / 99_999f64.sqrt()).abs() < 1e-12);
        assert!((b - 1.575).abs() < 1e-3);
        // symmetric in q ↔ 1/q
        let a = normal_approx_bound(params(50, 0.5), TestFunction::Cosine);
        let c = normal_approx_bound(params(50, 2.0), TestFunction::Cosine);
        assert!((a - c).abs() < 1e-12);
    }

    #[test]
    fn clt_small_run() {
        let r = clt_experiment(params(200, 0.5), 5000, TestFunction::Cosine, &RngStream::new(0, "clt")).unwrap();
        assert!(r.pass);
        assert!(r.deviation < 0.05);
        assert!(r.ks < 0.06);
        assert!(clt_experiment(params(200, 0.5), 10, TestFunction::Tanh, &RngStream::new(0, "clt")).is_err());
    }

    #[test]
    fn clt_is_symmetric_in_q() {
        let s = RngStream::new(1, "sym");
        let a = clt_experiment(params(100, 0.5), 20_000, TestFunction::Tanh, &s).unwrap();
        let b = clt_experiment(params(100, 2.0), 20_000, TestFunction::Tanh, &s).unwrap();
        // KS fluctuates at the 1/√reps scale
        assert!((a.ks - b.ks).abs() < 3.0 * 2.0 / (20_000f64).sqrt(), "{} vs {}", a.ks, b.ks);
    }

    #[test]
    fn rho_bounds_shrink_to_zero_at_one() {
        // the upper end behaves like 48(1 − q)
        let (lo, hi) = rho_limit_bounds(0.999).unwrap();
        assert!(lo >= 0.0 && hi < 0.05);
        assert!(rho_limit_bounds(0.9999).unwrap().1 < hi / 5.0);
        assert_eq!(rho_limit_bounds(1.0), Some((0.0, 0.0)));
        assert_eq!(rho_limit_bounds(0.3), rho_limit_bounds(1.0 / 0.3));
    }

    #[test]
    fn bivariate_uniform_is_uncorrelated() {
        let r = bivariate_experiment(params(300, 1.0), 4000, 0, &RngStream::new(2, "bv")).unwrap();
        assert!(r.sample_correlation.abs() < 4.0 * r.correlation_se.max(1.0 / 4000f64.sqrt()));
        assert_eq!(r.rho_reference_source, "uniform");
        assert_eq!(r.projection_ks.len(), 3);
    }

    #[test]
    fn figure1_schema_and_rows() {
        let rows = figure1(&[0.3, 0.9], 100, 300, 2000, &RngStream::new(0, "fig")).unwrap();
        assert!(rows[0].rho_excursion.is_some());
        assert!(rows[1].rho_excursion.is_none());
        let csv = figure1_csv(&rows);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "q,rho_finite,se_finite,rho_excursion,se_excursion");
        assert!(lines.nth(1).unwrap().ends_with(",,"));
        assert!(figure1(&[1.0], 100, 10, 10, &RngStream::new(0, "fig")).is_err());
    }

    #[test]
    fn figure1_row_depends_only_on_q() {
        let s = RngStream::new(0, "fig");
        let a = figure1(&[0.4], 50, 200, 500, &s).unwrap();
        let b = figure1(&[0.2, 0.4], 50, 200, 500, &s).unwrap();
        assert_eq!(a[0].rho_finite.to_bits(), b[1].rho_finite.to_bits());
    }

    #[test]
    fn poisson_formula_values() {
        let r = poisson_experiment(params(500, 0.004), 20_000, &RngStream::new(0, "pois")).unwrap();
        assert!((r.lambda - 499.0 * 0.004 / 1.004).abs() < 1e-12);
        assert!((r.lambda - 1.988).abs() < 1e-3);
        assert!((r.bound - 0.096).abs() < 1e-12);
        assert!(!r.vacuous);
        assert!(r.pass, "{r:?}");
        assert!(r.even_pass);
    }

    #[test]
    fn grid_is_interior() {
        let g = default_grid(100);
        assert_eq!(g.len(), 100);
        assert!(g.iter().all(|&q| q > 0.0 && q < 1.0));
    }
}
