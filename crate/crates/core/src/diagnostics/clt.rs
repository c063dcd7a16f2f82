use serde::{Deserialize, Serialize};

use super::stats::{normal_quantile, sample_mean_var};
use crate::error::{Error, Result};
use crate::smc::PathEnsemble;

pub const DEFAULT_K_SCHEDULE_C: f64 = 2.0;

/// Number of passes `ceil(c ln N)`.
pub fn k_schedule(n: usize, c: f64) -> usize {
    if n <= 1 {
        return 0;
    }
    (c * (n as f64).ln()).ceil().max(0.0) as usize
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CltReport {
    pub mean: f64,
    /// Estimate of the variance of `mean` from a single run.
    pub var_single_run: f64,
    pub var_empirical: Option<f64>,
    pub n: usize,
    pub k: usize,
}

impl CltReport {
    /// Two-sided interval for the posterior expectation at confidence `level`.
    pub fn confidence_interval(&self, level: f64) -> (f64, f64) {
        let z = normal_quantile(0.5 + 0.5 * level);
        let half = z * self.var_single_run.sqrt();
        (self.mean - half, self.mean + half)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Estimates the variance of `N^{-1} sum_i h(xi_i)` by the sample variance of
/// the `h(xi_i)` over `N`. The ensemble must be equally weighted.
pub fn clt_variance_single_run<H: Fn(&[f64]) -> f64>(ensemble: &PathEnsemble, h: H, k_used: usize) -> Result<CltReport> {
    let n = ensemble.n_particles();
    if n < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: n });
    }
    if !ensemble.is_equally_weighted() {
        return Err(Error::Contract("single-run variance needs an equally weighted ensemble".into()));
    }
    let values: Vec<f64> = (0..n).map(|i| h(ensemble.path(i))).collect();
    let (mean, var) = sample_mean_var(&values);
    Ok(CltReport { mean, var_single_run: var / n as f64, var_empirical: None, n, k: k_used })
}
