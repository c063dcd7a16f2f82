//! Goodness-of-fit statistics used by the test suites and experiments.

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

/// Mean and unbiased variance.
pub fn sample_mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, if xs.len() > 1 { ss / (n - 1.0) } else { 0.0 })
}

pub fn normal_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Asymptotic Kolmogorov tail with Stephens' small-sample correction.
fn kolmogorov_p(d: f64, n_eff: f64) -> f64 {
    let s = n_eff.sqrt();
    let lambda = (s + 0.12 + 0.11 / s) * d;
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

pub fn ks_one_sample<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> TestResult {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let d = xs
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let f = cdf(*x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max);
    TestResult { statistic: d, p_value: kolmogorov_p(d, n) }
}

pub fn ks_two_sample(a: &[f64], b: &[f64]) -> TestResult {
    let mut xa = a.to_vec();
    let mut xb = b.to_vec();
    xa.sort_by(f64::total_cmp);
    xb.sort_by(f64::total_cmp);
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0_f64);
    while i < xa.len() && j < xb.len() {
        let x = xa[i].min(xb[j]);
        while i < xa.len() && xa[i] <= x {
            i += 1;
        }
        while j < xb.len() && xb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    TestResult { statistic: d, p_value: kolmogorov_p(d, na * nb / (na + nb)) }
}

/// Pearson goodness of fit of `counts` to `probs`. Cells with zero expected
/// probability must be empty, otherwise the p-value is 0.
pub fn chi_square_gof(counts: &[u64], probs: &[f64]) -> TestResult {
    let n: u64 = counts.iter().sum();
    let mut stat = 0.0;
    let mut cells = 0usize;
    for (c, p) in counts.iter().zip(probs) {
        if *p <= 0.0 {
            if *c > 0 {
                return TestResult { statistic: f64::INFINITY, p_value: 0.0 };
            }
            continue;
        }
        let e = n as f64 * p;
        stat += (*c as f64 - e) * (*c as f64 - e) / e;
        cells += 1;
    }
    if cells < 2 {
        return TestResult { statistic: 0.0, p_value: 1.0 };
    }
    let p_value = ChiSquared::new((cells - 1) as f64).map_or(f64::NAN, |d| 1.0 - d.cdf(stat));
    TestResult { statistic: stat, p_value }
}
