use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{log_normal_pdf, HmmModel};
use crate::error::{Error, Result};

/// Parameters of the linear Gaussian model
/// `X_{t+1} = phi X_t + sigma_u U_t`, `Y_t = X_t + sigma_v V_t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LgmParams {
    pub phi: f64,
    pub sigma_u: f64,
    pub sigma_v: f64,
}

impl LgmParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.phi.abs() < 1.0) {
            return Err(Error::Config(format!("lgm: |phi| must be < 1, got {}", self.phi)));
        }
        if !(self.sigma_u > 0.0 && self.sigma_u.is_finite()) {
            return Err(Error::Config(format!("lgm: sigma_u must be positive, got {}", self.sigma_u)));
        }
        if !(self.sigma_v > 0.0 && self.sigma_v.is_finite()) {
            return Err(Error::Config(format!("lgm: sigma_v must be positive, got {}", self.sigma_v)));
        }
        Ok(())
    }

    /// Stationary variance `sigma_u^2 / (1 - phi^2)`.
    pub fn stationary_variance(&self) -> f64 {
        self.sigma_u * self.sigma_u / (1.0 - self.phi * self.phi)
    }
}

/// Linear Gaussian model with a stationary initial law.
#[derive(Clone, Debug)]
pub struct Lgm {
    params: LgmParams,
    init_var: f64,
    trans_var: f64,
    obs_var: f64,
}

impl Lgm {
    pub fn new(params: LgmParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params,
            init_var: params.stationary_variance(),
            trans_var: params.sigma_u * params.sigma_u,
            obs_var: params.sigma_v * params.sigma_v,
        })
    }

    pub fn params(&self) -> &LgmParams {
        &self.params
    }

    pub fn initial_variance(&self) -> f64 {
        self.init_var
    }
}

impl HmmModel for Lgm {
    fn state_dim(&self) -> usize {
        1
    }

    fn log_initial_density(&self, x: &[f64]) -> f64 {
        log_normal_pdf(x[0], 0.0, self.init_var)
    }

    fn log_transition_density(&self, x: &[f64], x_next: &[f64]) -> f64 {
        log_normal_pdf(x_next[0], self.params.phi * x[0], self.trans_var)
    }

    fn log_observation_density(&self, x: &[f64], y: f64) -> f64 {
        log_normal_pdf(y, x[0], self.obs_var)
    }

    fn sample_initial<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let z: f64 = rng.sample(StandardNormal);
        out[0] = self.init_var.sqrt() * z;
    }

    fn sample_transition<R: Rng + ?Sized>(&self, x: &[f64], rng: &mut R, out: &mut [f64]) {
        let z: f64 = rng.sample(StandardNormal);
        out[0] = self.params.phi * x[0] + self.params.sigma_u * z;
    }

    fn sample_observation<R: Rng + ?Sized>(&self, x: &[f64], rng: &mut R) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        x[0] + self.params.sigma_v * z
    }

    /// The Gaussian transition density peaks at its mean.
    fn transition_density_bound(&self) -> Option<f64> {
        Some(1.0 / (self.params.sigma_u * (2.0 * std::f64::consts::PI).sqrt()))
    }

    fn prior_moments(&self) -> Option<(f64, f64)> {
        Some((0.0, self.init_var))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paper_params() -> LgmParams {
        LgmParams { phi: 0.9, sigma_u: 0.6, sigma_v: 1.0 }
    }

    #[test]
    fn initial_variance_of_reference_parameters() {
        let m = Lgm::new(paper_params()).unwrap();
        assert!((m.initial_variance() - 0.36 / 0.19).abs() < 1e-12);
        assert!((m.initial_variance() - 1.894737).abs() < 1e-6);
    }

    #[test]
    fn iid_transition_is_standard_normal() {
        let m = Lgm::new(LgmParams { phi: 0.0, sigma_u: 1.0, sigma_v: 1.0 }).unwrap();
        let p = m.log_transition_density(&[0.0], &[0.0]).exp();
        assert!((p - 1.0 / (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn mean_centred_transition() {
        let m = Lgm::new(paper_params()).unwrap();
        let got = m.log_transition_density(&[1.0], &[0.9]);
        let want = -0.5 * (2.0 * std::f64::consts::PI * 0.36).ln();
        assert!((got - want).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_parameters() {
        for p in [
            LgmParams { phi: 1.0, sigma_u: 0.6, sigma_v: 1.0 },
            LgmParams { phi: -1.2, sigma_u: 0.6, sigma_v: 1.0 },
            LgmParams { phi: 0.5, sigma_u: 0.0, sigma_v: 1.0 },
            LgmParams { phi: 0.5, sigma_u: 0.6, sigma_v: -1.0 },
            LgmParams { phi: f64::NAN, sigma_u: 0.6, sigma_v: 1.0 },
        ] {
            assert!(matches!(Lgm::new(p), Err(Error::Config(_))));
        }
    }
}
