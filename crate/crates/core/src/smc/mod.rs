//! Forward particle filters and the SMC smoothers built on them.

mod ensemble;
mod ffbsi;
mod filter;
mod resample;

pub use ensemble::PathEnsemble;
pub use ffbsi::{ffbsi, ffbsi_with_rejection_cap, FFBSI_MAX_REJECTIONS};
pub use filter::{bootstrap_filter, filter_smoother, fully_adapted_filter_lgm, FilterFrame, ResamplePolicy};
pub use resample::{multinomial_indices, multinomial_resample};

/// Normalise log-weights in place so that their exponentials sum to one.
/// Returns `false` when every weight is zero (or NaN).
pub fn log_normalize(log_weights: &mut [f64]) -> bool {
    let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return false;
    }
    let sum: f64 = log_weights.iter().map(|l| (l - max).exp()).sum();
    if !sum.is_finite() {
        return false;
    }
    let shift = max + sum.ln();
    log_weights.iter_mut().for_each(|l| *l -= shift);
    true
}
