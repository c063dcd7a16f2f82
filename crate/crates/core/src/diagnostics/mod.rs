//! Monte Carlo diagnostics for smoother output.

mod clt;
mod mse;
mod neff;
pub mod stats;

pub use clt::{clt_variance_single_run, k_schedule, CltReport, DEFAULT_K_SCHEDULE_C};
pub use mse::{mse_vs_passes, predicted_mse_limit, MseRow, WeightMode};
pub use neff::{effective_sample_size, NeffReport};

use crate::error::{Error, Result};
use crate::smc::PathEnsemble;

/// Weighted estimate of the posterior mean of `sum_t x_t`.
pub fn additive_functional(ensemble: &PathEnsemble) -> Result<f64> {
    if ensemble.state_dim() != 1 {
        return Err(Error::Dimension { expected: 1, got: ensemble.state_dim() });
    }
    Ok(ensemble.weighted_mean(|p| p.iter().sum()))
}

/// `2 exp(-N eps^2 / (2 osc^2))`.
pub fn hoeffding_bound(osc: f64, n: usize, epsilon: f64) -> f64 {
    2.0 * (-(n as f64) * epsilon * epsilon / (2.0 * osc * osc)).exp()
}
