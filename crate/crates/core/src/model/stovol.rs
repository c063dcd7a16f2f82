use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{log_normal_pdf, HmmModel};
use crate::error::{Error, Result};

/// Parameters of the stochastic volatility model
/// `X_{t+1} = alpha X_t + sigma U_{t+1}`, `Y_t = beta exp(X_t / 2) V_t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StoVolParams {
    pub alpha: f64,
    pub sigma: f64,
    pub beta: f64,
}

impl StoVolParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.abs() < 1.0) {
            return Err(Error::Config(format!("stovol: |alpha| must be < 1, got {}", self.alpha)));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::Config(format!("stovol: sigma must be positive, got {}", self.sigma)));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::Config(format!("stovol: beta must be positive, got {}", self.beta)));
        }
        Ok(())
    }

    pub fn stationary_variance(&self) -> f64 {
        self.sigma * self.sigma / (1.0 - self.alpha * self.alpha)
    }
}

#[derive(Clone, Debug)]
pub struct StoVol {
    params: StoVolParams,
    init_var: f64,
    trans_var: f64,
}

impl StoVol {
    pub fn new(params: StoVolParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params,
            init_var: params.stationary_variance(),
            trans_var: params.sigma * params.sigma,
        })
    }

    pub fn params(&self) -> &StoVolParams {
        &self.params
    }

    pub fn initial_variance(&self) -> f64 {
        self.init_var
    }
}

impl HmmModel for StoVol {
    fn state_dim(&self) -> usize {
        1
    }

    fn log_initial_density(&self, x: &[f64]) -> f64 {
        log_normal_pdf(x[0], 0.0, self.init_var)
    }

    fn log_transition_density(&self, x: &[f64], x_next: &[f64]) -> f64 {
        log_normal_pdf(x_next[0], self.params.alpha * x[0], self.trans_var)
    }

    /// `Normal(y; 0, beta^2 e^x)`.
    fn log_observation_density(&self, x: &[f64], y: f64) -> f64 {
        let b2 = self.params.beta * self.params.beta;
        -0.5 * (super::LN_2PI + b2.ln() + x[0] + y * y * (-x[0]).exp() / b2)
    }

    fn sample_initial<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let z: f64 = rng.sample(StandardNormal);
        out[0] = self.init_var.sqrt() * z;
    }

    fn sample_transition<R: Rng + ?Sized>(&self, x: &[f64], rng: &mut R, out: &mut [f64]) {
        let z: f64 = rng.sample(StandardNormal);
        out[0] = self.params.alpha * x[0] + self.params.sigma * z;
    }

    fn sample_observation<R: Rng + ?Sized>(&self, x: &[f64], rng: &mut R) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        self.params.beta * (0.5 * x[0]).exp() * z
    }

    fn transition_density_bound(&self) -> Option<f64> {
        Some(1.0 / (self.params.sigma * (2.0 * std::f64::consts::PI).sqrt()))
    }

    fn prior_moments(&self) -> Option<(f64, f64)> {
        Some((0.0, self.init_var))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paper() -> StoVol {
        StoVol::new(StoVolParams { alpha: 0.3, sigma: 0.5, beta: 1.0 }).unwrap()
    }

    #[test]
    fn observation_density_at_origin() {
        for beta in [0.5, 1.0, 2.0] {
            let m = StoVol::new(StoVolParams { alpha: 0.3, sigma: 0.5, beta }).unwrap();
            let g = m.log_observation_density(&[0.0], 0.0).exp();
            assert!((g - 1.0 / (beta * (2.0 * std::f64::consts::PI).sqrt())).abs() < 1e-14);
        }
    }

    #[test]
    fn initial_variance_of_reference_parameters() {
        assert!((paper().initial_variance() - 0.25 / 0.91).abs() < 1e-15);
    }

    #[test]
    fn observation_density_mode_in_x() {
        // For fixed y != 0 the density in x peaks at ln(y^2 / beta^2); locate it by grid search.
        let m = StoVol::new(StoVolParams { alpha: 0.3, sigma: 0.5, beta: 1.3 }).unwrap();
        for y in [0.2, -0.7, 1.0, 2.5] {
            let (mut best_x, mut best) = (f64::NAN, f64::NEG_INFINITY);
            for i in 0..=200_000 {
                let x = -10.0 + 20.0 * i as f64 / 200_000.0;
                let v = m.log_observation_density(&[x], y);
                if v > best {
                    best = v;
                    best_x = x;
                }
            }
            let want = (y * y / (1.3f64 * 1.3)).ln();
            assert!((best_x - want).abs() < 2e-4, "y={y}: {best_x} vs {want}");
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(StoVol::new(StoVolParams { alpha: 1.0, sigma: 0.5, beta: 1.0 }).is_err());
        assert!(StoVol::new(StoVolParams { alpha: 0.3, sigma: 0.0, beta: 1.0 }).is_err());
        assert!(StoVol::new(StoVolParams { alpha: 0.3, sigma: 0.5, beta: 0.0 }).is_err());
    }
}
