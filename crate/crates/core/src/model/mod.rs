//! Hidden Markov model abstraction and the benchmark models.
//!
//! States are fixed-length real vectors passed as slices of length
//! [`HmmModel::state_dim`]; observations are scalars. All densities are
//! exposed in log space.

mod finite;
mod lgm;
mod record;
mod stovol;

pub use finite::FiniteHmm;
pub use lgm::{Lgm, LgmParams};
pub use record::{simulate, ObservationRecord};
pub use stovol::{StoVol, StoVolParams};

use rand::Rng;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Log-density of `Normal(mean, var)` at `x`.
#[inline]
pub fn log_normal_pdf(x: f64, mean: f64, var: f64) -> f64 {
    let d = x - mean;
    -0.5 * (LN_2PI + var.ln() + d * d / var)
}

/// The generative law of a hidden Markov model: initial law, transition
/// kernel and observation kernel, each with a log-density and a sampler.
///
/// Implementations are immutable and shared freely across threads.
pub trait HmmModel: Sync {
    fn state_dim(&self) -> usize;

    fn log_initial_density(&self, x: &[f64]) -> f64;

    /// Log-density of moving from `x` to `x_next`.
    fn log_transition_density(&self, x: &[f64], x_next: &[f64]) -> f64;

    fn log_observation_density(&self, x: &[f64], y: f64) -> f64;

    fn sample_initial<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]);

    fn sample_transition<R: Rng + ?Sized>(&self, x: &[f64], rng: &mut R, out: &mut [f64]);

    fn sample_observation<R: Rng + ?Sized>(&self, x: &[f64], rng: &mut R) -> f64;

    /// An upper bound on the transition density, when one is known.
    fn transition_density_bound(&self) -> Option<f64> {
        None
    }

    /// Stationary mean and variance of a one-dimensional state, when known.
    fn prior_moments(&self) -> Option<(f64, f64)> {
        None
    }
}

/// Runtime choice among the bundled models.
#[derive(Clone, Debug)]
pub enum AnyModel {
    Lgm(Lgm),
    StoVol(StoVol),
    Finite(FiniteHmm),
}

macro_rules! dispatch {
    ($self:ident, $m:ident => $e:expr) => {
        match $self {
            AnyModel::Lgm($m) => $e,
            AnyModel::StoVol($m) => $e,
            AnyModel::Finite($m) => $e,
        }
    };
}

impl HmmModel for AnyModel {
    fn state_dim(&self) -> usize {
        dispatch!(self, m => m.state_dim())
    }
    fn log_initial_density(&self, x: &[f64]) -> f64 {
        dispatch!(self, m => m.log_initial_density(x))
    }
    fn log_transition_density(&self, x: &[f64], x_next: &[f64]) -> f64 {
        dispatch!(self, m => m.log_transition_density(x, x_next))
    }
    fn log_observation_density(&self, x: &[f64], y: f64) -> f64 {
        dispatch!(self, m => m.log_observation_density(x, y))
    }
    fn sample_initial<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        dispatch!(self, m => m.sample_initial(rng, out))
    }
    fn sample_transition<R: Rng + ?Sized>(&self, x: &[f64], rng: &mut R, out: &mut [f64]) {
        dispatch!(self, m => m.sample_transition(x, rng, out))
    }
    fn sample_observation<R: Rng + ?Sized>(&self, x: &[f64], rng: &mut R) -> f64 {
        dispatch!(self, m => m.sample_observation(x, rng))
    }
    fn transition_density_bound(&self) -> Option<f64> {
        dispatch!(self, m => m.transition_density_bound())
    }
    fn prior_moments(&self) -> Option<(f64, f64)> {
        dispatch!(self, m => m.prior_moments())
    }
}
