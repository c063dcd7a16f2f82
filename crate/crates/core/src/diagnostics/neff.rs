use std::io::Write;

use crate::error::{Error, Result};
use crate::exact::ExactMarginals;
use crate::io::fmt_f64;

#[derive(Clone, Debug, PartialEq)]
pub struct NeffReport {
    pub per_time_neff: Vec<f64>,
    pub repetitions: usize,
    /// Normalized errors `(estimate - mean) / sd`, one row per repetition.
    pub estimator_values: Option<Vec<Vec<f64>>>,
}

impl NeffReport {
    pub fn min(&self) -> f64 {
        self.per_time_neff.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.per_time_neff.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["t", "neff"])?;
        for (t, v) in self.per_time_neff.iter().enumerate() {
            wr.write_record([t.to_string(), fmt_f64(*v)])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Inverse mean squared normalized error of posterior-mean estimates, per time.
/// `estimates[r][t]` is repetition r's estimate of the smoothed mean at t.
pub fn effective_sample_size(estimates: &[Vec<f64>], oracle: &ExactMarginals, retain: bool) -> Result<NeffReport> {
    let r = estimates.len();
    if r < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: r });
    }
    let horizon = oracle.horizon();
    if let Some(bad) = estimates.iter().find(|e| e.len() != horizon) {
        return Err(Error::Dimension { expected: horizon, got: bad.len() });
    }
    let sd: Vec<f64> = oracle.variances.iter().map(|v| v.sqrt()).collect();
    let errors: Vec<Vec<f64>> = estimates
        .iter()
        .map(|e| (0..horizon).map(|t| (e[t] - oracle.means[t]) / sd[t]).collect())
        .collect();
    let per_time_neff = (0..horizon)
        .map(|t| {
            let mse = errors.iter().map(|e| e[t] * e[t]).sum::<f64>() / r as f64;
            if mse == 0.0 {
                log::warn!("zero estimation error at t = {t}; the estimates may reuse the oracle");
                f64::INFINITY
            } else {
                1.0 / mse
            }
        })
        .collect();
    Ok(NeffReport { per_time_neff, repetitions: r, estimator_values: retain.then_some(errors) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStreams;
    use proptest::prelude::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn oracle() -> ExactMarginals {
        ExactMarginals::new(vec![0.5, -1.0, 2.0], vec![1.0, 0.25, 4.0]).unwrap()
    }

    #[test]
    fn single_draw_estimator_has_unit_neff() {
        let o = oracle();
        let mut rng = RngStreams::new(1).stream(0);
        let est: Vec<Vec<f64>> = (0..20_000)
            .map(|_| (0..3).map(|t| o.means[t] + o.variances[t].sqrt() * rng.sample::<f64, _>(StandardNormal)).collect())
            .collect();
        let rep = effective_sample_size(&est, &o, false).unwrap();
        for v in rep.per_time_neff {
            assert!((v - 1.0).abs() < 0.05, "{v}");
        }
    }

    #[test]
    fn sample_means_of_n_draws_give_neff_n() {
        let o = oracle();
        let n = 50;
        let mut rng = RngStreams::new(2).stream(0);
        let est: Vec<Vec<f64>> = (0..250)
            .map(|_| {
                (0..3)
                    .map(|t| {
                        let s: f64 = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).sum();
                        o.means[t] + o.variances[t].sqrt() * s / n as f64
                    })
                    .collect()
            })
            .collect();
        let rep = effective_sample_size(&est, &o, true).unwrap();
        assert_eq!(rep.estimator_values.unwrap().len(), 250);
        // 1/N_eff is a mean of 250 chi-square(1)/N draws: relative sd sqrt(2/250).
        for v in rep.per_time_neff {
            assert!((v / n as f64 - 1.0).abs() < 4.0 * (2.0_f64 / 250.0).sqrt(), "{v}");
        }
    }

    #[test]
    fn zero_error_is_infinite() {
        let o = oracle();
        let rep = effective_sample_size(&[o.means.clone(), o.means.clone()], &o, false).unwrap();
        assert!(rep.per_time_neff.iter().all(|v| v.is_infinite()));
        let mut buf = Vec::new();
        rep.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("t,neff\n0,inf\n"));
    }

    #[test]
    fn needs_two_repetitions() {
        let o = oracle();
        assert!(matches!(
            effective_sample_size(&[o.means.clone()], &o, false),
            Err(Error::InsufficientSamples { .. })
        ));
    }

    proptest! {
        #[test]
        fn scale_invariance(scale in 0.01f64..100.0, errs in proptest::collection::vec(-3.0f64..3.0, 6)) {
            let o = oracle();
            let est: Vec<Vec<f64>> = errs.chunks(3).map(|c| (0..3).map(|t| o.means[t] + c[t]).collect()).collect();
            let scaled_o = ExactMarginals::new(o.means.clone(), o.variances.iter().map(|v| v * scale * scale).collect()).unwrap();
            let scaled: Vec<Vec<f64>> = errs.chunks(3).map(|c| (0..3).map(|t| o.means[t] + scale * c[t]).collect()).collect();
            let a = effective_sample_size(&est, &o, false).unwrap();
            let b = effective_sample_size(&scaled, &scaled_o, false).unwrap();
            for (x, y) in a.per_time_neff.iter().zip(&b.per_time_neff) {
                prop_assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0) || (x.is_infinite() && y.is_infinite()));
            }
        }
    }
}
