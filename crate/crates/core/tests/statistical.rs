//! Monte Carlo properties of the samplers and the normal approximation.

use std::collections::HashMap;
use std::time::Instant;

use mallows_core::exact::all_permutations;
use mallows_core::limits::{clt_experiment, standardized_two_sided, TestFunction};
use mallows_core::stats::{chi_square_two_sample, ks_normal};
use mallows_core::{sample_finite, sample_process_prefix, MallowsParams, Permutation, RngStream};

fn histogram(n: usize, draws: impl Iterator<Item = Permutation>) -> Vec<u64> {
    let index: HashMap<Vec<u32>, usize> = all_permutations(n)
        .into_iter()
        .enumerate()
        .map(|(i, w)| (w.into_values(), i))
        .collect();
    let mut counts = vec![0u64; index.len()];
    for w in draws {
        counts[index[w.values()]] += 1;
    }
    counts
}

#[test]
fn direct_and_process_samplers_agree() {
    for q in [0.3, 0.7] {
        let p = MallowsParams::new(5, q).unwrap();
        let s = RngStream::new(11, "agreement");
        let a = histogram(5, (0..100_000).map(|k| sample_finite(p, &mut s.child("a").at(k))));
        let b = histogram(
            5,
            (0..100_000).map(|k| sample_process_prefix(5, q, &mut s.child("b").at(k)).unwrap().relative_order()),
        );
        let t = chi_square_two_sample(&a, &b);
        assert!(t.p_value > 0.001, "q={q}: {t:?}");
    }
}

#[test]
fn sampler_scales_to_ten_million() {
    let start = Instant::now();
    let p = MallowsParams::new(10_000_000, 0.999).unwrap();
    let w = sample_finite(p, &mut RngStream::new(0, "scale").at(0));
    assert_eq!(w.n(), 10_000_000);
    let secs = start.elapsed().as_secs_f64();
    assert!(secs < 30.0, "took {secs:.1}s");
}

#[test]
fn kolmogorov_rate_is_root_n() {
    for q in [0.5, 1.0, 2.0] {
        let scaled: Vec<f64> = [100, 400, 1600]
            .iter()
            .map(|&n| {
                let p = MallowsParams::new(n, q).unwrap();
                let (ws, _) = standardized_two_sided(p, 100_000, &RngStream::new(0, "ks-rate")).unwrap();
                ks_normal(&ws) * (n as f64).sqrt()
            })
            .collect();
        let (lo, hi) = scaled.iter().fold((f64::MAX, 0.0f64), |(l, h), &x| (l.min(x), h.max(x)));
        assert!(hi / lo < 3.0, "q={q}: {scaled:?}");
    }
}

#[test]
fn ks_is_symmetric_under_q_inverse() {
    let stream = RngStream::new(0, "clt-sym");
    let reps = 100_000;
    let run = |q| clt_experiment(MallowsParams::new(300, q).unwrap(), reps, TestFunction::Tanh, &stream).unwrap();
    let (a, b) = (run(0.4), run(2.5));
    // KS statistic fluctuations are of order 1/√reps
    let se = 1.0 / (reps as f64).sqrt();
    assert!((a.ks - b.ks).abs() <= 3.0 * se * 2f64.sqrt(), "{} vs {}", a.ks, b.ks);
}
