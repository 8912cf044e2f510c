//! Regenerative structure of the Mallows process.
//!
//! The process is cut at every n where {w(1), ..., w(n)} = {1, ..., n}; the
//! blocks between cuts (excursions) are i.i.d. The chain
//! M_n = max_{i≤n} w(i) − n moves as M ← max(M, Z) − 1 with Z the geometric
//! rank, and its returns to 0 are exactly the cut times.

use rand::Rng;
use rand_distr::Distribution;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::exact::euler_product;
use crate::par;
use crate::perm::Permutation;
use crate::sample::{rank_distribution, RngStream};
use crate::stats::Summary;

/// Excursions longer than this abort with [`Error::ExcursionTooLong`].
pub const DEFAULT_MAX_LEN: usize = 1_000_000;

/// Batches used for the standard error of the ratio estimator.
pub const RHO_BATCHES: usize = 50;

/// One regeneration block, relabelled to a permutation of 1..=T.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Excursion {
    pub block: Permutation,
}

impl Excursion {
    pub fn size(&self) -> usize {
        self.block.n()
    }
}

fn check_q(q: f64) -> Result<()> {
    if q > 0.0 && q < 1.0 {
        Ok(())
    } else {
        Err(domain(format!("the Mallows process needs 0 < q < 1, got {q}")))
    }
}

/// Runs the process from a fresh block until the first cut.
///
/// Unused values below the running maximum are kept sorted in `holes`; rank
/// j either fills the j-th hole or jumps past the maximum, opening new holes.
/// The block closes when no holes remain.
pub fn sample_excursion<R: Rng + ?Sized>(q: f64, rng: &mut R, max_len: usize) -> Result<Excursion> {
    let ranks = rank_distribution(q)?;
    excursion_with(&ranks, q, rng, max_len)
}

fn excursion_with<R: Rng + ?Sized>(
    ranks: &rand_distr::Geometric,
    q: f64,
    rng: &mut R,
    max_len: usize,
) -> Result<Excursion> {
    let mut holes: Vec<u32> = Vec::new();
    let mut max = 0u32;
    let mut values = Vec::new();
    loop {
        if values.len() >= max_len {
            return Err(Error::ExcursionTooLong { max_len, q });
        }
        let j = 1 + ranks.sample(rng) as usize;
        let v = if j <= holes.len() {
            holes.remove(j - 1)
        } else {
            let v = max + (j - holes.len()) as u32;
            holes.extend(max + 1..v);
            max = v;
            v
        };
        values.push(v);
        if holes.is_empty() {
            return Ok(Excursion { block: Permutation::from_vec_unchecked(values) });
        }
    }
}

/// Consecutive excursions of one run of the process.
pub struct ExcursionStream<R> {
    q: f64,
    rng: R,
    max_len: usize,
    ranks: rand_distr::Geometric,
    failed: bool,
}

pub fn excursion_stream<R: Rng>(q: f64, rng: R, max_len: usize) -> Result<ExcursionStream<R>> {
    if max_len == 0 {
        return Err(domain("max_len must be at least 1"));
    }
    Ok(ExcursionStream { q, rng, max_len, ranks: rank_distribution(q)?, failed: false })
}

impl<R: Rng> Iterator for ExcursionStream<R> {
    type Item = Result<Excursion>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        let e = excursion_with(&self.ranks, self.q, &mut self.rng, self.max_len);
        self.failed = e.is_err();
        Some(e)
    }
}

/// μ_j = ∏_{k≥1}(1 − q^k) · q^j / ∏_{k=1}^{j}(1 − q^k), the stationary law
/// of M_n normalized to total mass 1.
pub fn stationary_pmf(j: usize, q: f64) -> Result<f64> {
    check_q(q)?;
    let mut p = euler_product(q);
    let mut qk = 1.0;
    for _ in 0..j {
        qk *= q;
        p *= q / (1.0 - qk);
    }
    Ok(p)
}

/// μ_0, μ_1, ... up to the first j whose tail mass is below 1e-15.
pub fn stationary_law(q: f64) -> Result<Vec<f64>> {
    check_q(q)?;
    let mut out = vec![euler_product(q)];
    let mut cum = out[0];
    let mut qk = 1.0;
    while 1.0 - cum >= 1e-15 {
        qk *= q;
        let next = out.last().unwrap() * q / (1.0 - qk);
        if next == 0.0 {
            break;
        }
        out.push(next);
        cum += next;
    }
    Ok(out)
}

/// M_n = max_{i≤n} w(i) − n.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ChainState {
    pub m: u64,
}

impl ChainState {
    /// M ← max(M, z) − 1 for a rank z ≥ 1.
    pub fn step(&mut self, z: u64) {
        debug_assert!(z >= 1);
        self.m = self.m.max(z) - 1;
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainRun {
    pub steps: u64,
    /// occupation[j] = number of steps after which M = j.
    pub occupation: Vec<u64>,
    /// Completed return times to 0, starting from M_0 = 0.
    pub return_times: Vec<u64>,
}

impl ChainRun {
    pub fn frequencies(&self) -> Vec<f64> {
        self.occupation.iter().map(|&c| c as f64 / self.steps as f64).collect()
    }

    pub fn return_time_summary(&self) -> Summary {
        let xs: Vec<f64> = self.return_times.iter().map(|&t| t as f64).collect();
        Summary::of(&xs)
    }
}

pub fn simulate_chain<R: Rng + ?Sized>(q: f64, steps: u64, rng: &mut R) -> Result<ChainRun> {
    let ranks = rank_distribution(q)?;
    let mut state = ChainState::default();
    let mut occupation = Vec::new();
    let mut return_times = Vec::new();
    let mut since_zero = 0u64;
    for _ in 0..steps {
        state.step(1 + ranks.sample(rng));
        since_zero += 1;
        let m = state.m as usize;
        if m >= occupation.len() {
            occupation.resize(m + 1, 0);
        }
        occupation[m] += 1;
        if m == 0 {
            return_times.push(since_zero);
            since_zero = 0;
        }
    }
    Ok(ChainRun { steps, occupation, return_times })
}

/// Monte Carlo estimates of E(L_n)/n and Var(L_n)/n, where L_n counts the
/// cuts among times 1..=n.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RenewalStats {
    pub n: u64,
    pub reps: u64,
    pub mean_ratio: f64,
    pub mean_ratio_se: f64,
    pub var_ratio: f64,
    pub var_ratio_se: f64,
}

pub fn renewal_stats(n: u64, q: f64, reps: u64, stream: &RngStream) -> Result<RenewalStats> {
    let ranks = rank_distribution(q)?;
    if reps < 2 {
        return Err(domain("renewal statistics need at least 2 reps"));
    }
    let counts: Vec<f64> = par::map_indexed(reps, |k| {
        let mut rng = stream.at(k);
        let mut state = ChainState::default();
        let mut cuts = 0u64;
        for _ in 0..n {
            state.step(1 + ranks.sample(&mut rng));
            cuts += (state.m == 0) as u64;
        }
        cuts as f64
    });
    let s = Summary::of(&counts);
    let nf = n as f64;
    Ok(RenewalStats {
        n,
        reps,
        mean_ratio: s.mean / nf,
        mean_ratio_se: s.std_error() / nf,
        var_ratio: s.variance / nf,
        var_ratio_se: s.variance_std_error() / nf,
    })
}

/// Moments of the excursion size T₀ and of the centred descent statistics
/// X = des(w₀) − T₀q/(1+q), Y = des(w₀⁻¹) − T₀q/(1+q).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ExcursionMoments {
    pub sample_count: u64,
    pub mean_t: f64,
    pub mean_t2: f64,
    pub mean_t3: f64,
    pub se_mean_t: f64,
    pub mean_des: f64,
    /// Sample mean of X and its standard error.
    pub mean_x: f64,
    pub se_mean_x: f64,
    pub var_x: f64,
    pub var_y: f64,
    pub cov_xy: f64,
}

impl ExcursionMoments {
    /// 1/E(T₀), the limit of E(L_n)/n.
    pub fn renewal_rate(&self) -> f64 {
        1.0 / self.mean_t
    }

    /// Var(T₀)/E(T₀)³, the limit of Var(L_n)/n.
    pub fn renewal_variance(&self) -> f64 {
        (self.mean_t2 - self.mean_t * self.mean_t) / self.mean_t.powi(3)
    }

    /// E(T₀²)/E(T₀)³; exceeds the variance limit by 1/E(T₀).
    pub fn second_moment_ratio(&self) -> f64 {
        self.mean_t2 / self.mean_t.powi(3)
    }
}

/// (T₀, des(w₀), des(w₀⁻¹)) for each of `count` independent excursions.
pub fn excursion_samples(
    q: f64,
    count: u64,
    stream: &RngStream,
    max_len: usize,
) -> Result<Vec<(usize, usize, usize)>> {
    let ranks = rank_distribution(q)?;
    par::map_indexed(count, |k| {
        let e = excursion_with(&ranks, q, &mut stream.at(k), max_len)?;
        Ok((e.size(), e.block.descent_count(), e.block.inverse().descent_count()))
    })
    .into_iter()
    .collect()
}

fn centred(q: f64, samples: &[(usize, usize, usize)]) -> (Vec<f64>, Vec<f64>) {
    let c = q / (1.0 + q);
    samples
        .iter()
        .map(|&(t, d, e)| (d as f64 - t as f64 * c, e as f64 - t as f64 * c))
        .unzip()
}

pub fn excursion_moments(q: f64, count: u64, stream: &RngStream, max_len: usize) -> Result<ExcursionMoments> {
    if count < 2 {
        return Err(domain("excursion moments need at least 2 excursions"));
    }
    let samples = excursion_samples(q, count, stream, max_len)?;
    let ts: Vec<f64> = samples.iter().map(|s| s.0 as f64).collect();
    let t = Summary::of(&ts);
    let nf = count as f64;
    let (xs, ys) = centred(q, &samples);
    let x = Summary::of(&xs);
    let y = Summary::of(&ys);
    Ok(ExcursionMoments {
        sample_count: count,
        mean_t: t.mean,
        mean_t2: ts.iter().map(|t| t * t).sum::<f64>() / nf,
        mean_t3: ts.iter().map(|t| t * t * t).sum::<f64>() / nf,
        se_mean_t: t.std_error(),
        mean_des: samples.iter().map(|s| s.1 as f64).sum::<f64>() / nf,
        mean_x: x.mean,
        se_mean_x: x.std_error(),
        var_x: x.variance,
        var_y: y.variance,
        cov_xy: sample_cov(&xs, &ys),
    })
}

fn sample_cov(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / (n - 1.0)
}

fn ratio(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mx) * (x - mx)).sum::<f64>() / (n - 1.0);
    sample_cov(xs, ys) / var
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct RhoEstimate {
    pub q: f64,
    pub rho: f64,
    /// Spread of the estimator over equal batches, divided by √batches.
    pub se: f64,
    pub mean_t: f64,
    pub n_excursions: u64,
}

/// Cov(X, Y)/Var(X) over independent excursions.
pub fn estimate_rho_excursion(q: f64, excursions: u64, stream: &RngStream, max_len: usize) -> Result<RhoEstimate> {
    if excursions < (2 * RHO_BATCHES) as u64 {
        return Err(domain(format!("need at least {} excursions", 2 * RHO_BATCHES)));
    }
    let samples = excursion_samples(q, excursions, stream, max_len)?;
    let (xs, ys) = centred(q, &samples);
    let size = xs.len() / RHO_BATCHES;
    let batch: Vec<f64> = (0..RHO_BATCHES)
        .map(|b| ratio(&xs[b * size..(b + 1) * size], &ys[b * size..(b + 1) * size]))
        .collect();
    let b = Summary::of(&batch);
    Ok(RhoEstimate {
        q,
        rho: ratio(&xs, &ys),
        se: b.std_error(),
        mean_t: samples.iter().map(|s| s.0 as f64).sum::<f64>() / excursions as f64,
        n_excursions: excursions,
    })
}
