//! Small statistical toolkit for the Monte Carlo checks: moment summaries,
//! correlation, Kolmogorov distance to N(0, 1), chi-square tests and total
//! variation between discrete laws.

use std::collections::BTreeMap;

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF, Discrete, Poisson};

/// Mean, unbiased variance and fourth central moment of a sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub variance: f64,
    #[serde(skip)]
    m4: f64,
}

impl Summary {
    pub fn of(xs: &[f64]) -> Self {
        let count = xs.len();
        if count == 0 {
            return Self { count, mean: f64::NAN, variance: f64::NAN, m4: f64::NAN };
        }
        let n = count as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let (s2, s4) = xs.iter().fold((0.0, 0.0), |(s2, s4), &x| {
            let d = (x - mean) * (x - mean);
            (s2 + d, s4 + d * d)
        });
        let variance = if count > 1 { s2 / (n - 1.0) } else { 0.0 };
        Self { count, mean, variance, m4: s4 / n }
    }

    pub fn sd(&self) -> f64 {
        self.variance.sqrt()
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        (self.variance / self.count as f64).sqrt()
    }

    /// Large-sample standard error of the variance estimate.
    pub fn variance_std_error(&self) -> f64 {
        let s4 = self.variance * self.variance;
        ((self.m4 - s4).max(0.0) / self.count as f64).sqrt()
    }
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Correlation {
    pub r: f64,
    /// Asymptotic standard error (1 − r²)/√(n − 1) under bivariate
    /// normality.
    pub se: f64,
}

pub fn pearson(xs: &[f64], ys: &[f64]) -> Correlation {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    let r = sxy / (sxx * syy).sqrt();
    Correlation { r, se: (1.0 - r * r) / (n - 1.0).sqrt() }
}

/// sup_x |F_n(x) − Φ(x)| for the empirical CDF of `xs`. Tied values are
/// treated as one jump.
pub fn ks_normal(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mut d = 0.0f64;
    let mut i = 0;
    while i < v.len() {
        let mut j = i;
        while j < v.len() && v[j] == v[i] {
            j += 1;
        }
        let phi = normal_cdf(v[i]);
        d = d.max((phi - i as f64 / n).abs()).max((j as f64 / n - phi).abs());
        i = j;
    }
    d
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

fn chi_square_p(statistic: f64, dof: usize) -> f64 {
    if dof == 0 {
        return 1.0;
    }
    ChiSquared::new(dof as f64).expect("positive dof").sf(statistic)
}

/// Groups cell indices so every group has weight ≥ `min`: heavy cells stand
/// alone, light cells are pooled, and a still-light pool joins the lightest
/// heavy cell.
fn pool_cells(weights: &[f64], min: f64) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut light = Vec::new();
    let mut light_weight = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        if w >= min {
            groups.push(vec![i]);
        } else {
            light.push(i);
            light_weight += w;
        }
    }
    if !light.is_empty() {
        if light_weight >= min || groups.is_empty() {
            groups.push(light);
        } else {
            let lightest = (0..groups.len())
                .min_by(|&a, &b| weights[groups[a][0]].total_cmp(&weights[groups[b][0]]))
                .unwrap();
            groups[lightest].extend(light);
        }
    }
    groups
}

/// Pearson goodness of fit of `counts` to the probability vector `probs`,
/// pooling cells with expected count below 5.
pub fn chi_square_gof(counts: &[u64], probs: &[f64]) -> ChiSquareTest {
    assert_eq!(counts.len(), probs.len());
    let total: u64 = counts.iter().sum();
    let expected: Vec<f64> = probs.iter().map(|p| p * total as f64).collect();
    let groups = pool_cells(&expected, 5.0);
    let mut statistic = 0.0;
    for g in &groups {
        let o: f64 = g.iter().map(|&i| counts[i] as f64).sum();
        let e: f64 = g.iter().map(|&i| expected[i]).sum();
        statistic += if e > 0.0 {
            (o - e) * (o - e) / e
        } else if o > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
    }
    let dof = groups.len().saturating_sub(1);
    ChiSquareTest { statistic, dof, p_value: chi_square_p(statistic, dof) }
}

/// Two-sample chi-square homogeneity test on aligned histograms, pooling
/// cells with fewer than 10 combined observations.
pub fn chi_square_two_sample(a: &[u64], b: &[u64]) -> ChiSquareTest {
    assert_eq!(a.len(), b.len());
    let na: u64 = a.iter().sum();
    let nb: u64 = b.iter().sum();
    let combined: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x + y) as f64).collect();
    let groups = pool_cells(&combined, 10.0);
    let (ka, kb) = ((nb as f64 / na as f64).sqrt(), (na as f64 / nb as f64).sqrt());
    let mut statistic = 0.0;
    let mut used = 0usize;
    for g in &groups {
        let x: f64 = g.iter().map(|&i| a[i] as f64).sum();
        let y: f64 = g.iter().map(|&i| b[i] as f64).sum();
        if x + y > 0.0 {
            statistic += (ka * x - kb * y).powi(2) / (x + y);
            used += 1;
        }
    }
    let dof = used.saturating_sub(1);
    ChiSquareTest { statistic, dof, p_value: chi_square_p(statistic, dof) }
}

/// ½ Σ |p(k) − q(k)| over the union of the supports.
pub fn total_variation<K: Ord + Clone>(p: &BTreeMap<K, f64>, q: &BTreeMap<K, f64>) -> f64 {
    let mut diff: BTreeMap<K, f64> = p.clone();
    for (k, v) in q {
        *diff.entry(k.clone()).or_insert(0.0) -= v;
    }
    0.5 * diff.values().map(|d| d.abs()).sum::<f64>()
}

/// Total variation between the empirical law of `counts` and `probs`.
pub fn total_variation_counts(counts: &[u64], probs: &[f64]) -> f64 {
    assert_eq!(counts.len(), probs.len());
    let total = counts.iter().sum::<u64>() as f64;
    0.5 * counts
        .iter()
        .zip(probs)
        .map(|(&c, &p)| (c as f64 / total - p).abs())
        .sum::<f64>()
}

/// Poisson(λ) pmf on 0..=K where K is the first point whose upper tail mass
/// is below `tail`.
pub fn poisson_pmf_truncated(lambda: f64, tail: f64) -> Vec<f64> {
    let dist = Poisson::new(lambda).expect("positive rate");
    let mut out = Vec::new();
    let mut cum = 0.0;
    let mut k = 0u64;
    loop {
        let p = dist.pmf(k);
        out.push(p);
        cum += p;
        if 1.0 - cum < tail && k as f64 > lambda {
            return out;
        }
        k += 1;
    }
}
