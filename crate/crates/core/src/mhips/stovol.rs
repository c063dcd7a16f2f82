use rand::Rng;
use rand_distr::StandardNormal;

use super::{Ar1Bridge, GibbsKernel, Neighbors};
use crate::error::{Error, Result};
use crate::model::{HmmModel, StoVolParams};

pub const DEFAULT_REJECTION_CAP: u64 = 1_000_000;

const ENVELOPE_SLACK: f64 = 1e-9;

/// Tilt of the Gaussian proposal towards the observation.
pub fn stovol_gamma(y: f64, beta: f64) -> f64 {
    let r = y.abs() / beta;
    if r <= 1.0 {
        r * r
    } else {
        r
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RejectionDraw {
    pub value: f64,
    pub attempts: u64,
    /// Largest acceptance probability seen while drawing.
    pub max_accept_prob: f64,
}

#[derive(Clone, Debug)]
struct Shared {
    bridge: Ar1Bridge,
    beta2: f64,
    beta: f64,
}

impl Shared {
    fn new(params: &StoVolParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            bridge: Ar1Bridge {
                coef: params.alpha,
                innovation_var: params.sigma * params.sigma,
                initial_var: params.stationary_variance(),
            },
            beta2: params.beta * params.beta,
            beta: params.beta,
        })
    }

    /// Proposal mean, proposal variance and gamma.
    fn proposal(&self, nb: Neighbors<'_>, y: f64) -> (f64, f64, f64) {
        let (m0, s2) = self.bridge.moments(nb);
        let gamma = stovol_gamma(y, self.beta);
        (m0 - 0.5 * s2 * (1.0 - gamma), s2, gamma)
    }

    fn draw<R: Rng + ?Sized>(&self, nb: Neighbors<'_>, y: f64, rng: &mut R) -> f64 {
        let (c, s2, _) = self.proposal(nb, y);
        let z: f64 = rng.sample(StandardNormal);
        c + s2.sqrt() * z
    }

    fn log_accept_prob(&self, x: f64, y: f64, gamma: f64) -> f64 {
        let prefactor = if gamma > 0.0 {
            gamma * (y.abs().ln() - 0.5 * gamma.ln() - self.beta.ln())
        } else {
            0.0
        };
        prefactor - 0.5 * gamma * (x - 1.0) - (-x).exp() * y * y / (2.0 * self.beta2)
    }
}

/// Exact draws from the single-site conditional of the stochastic volatility
/// model by rejection from a tilted Gaussian.
#[derive(Clone, Debug)]
pub struct StoVolGibbsKernel {
    shared: Shared,
    rejection_cap: u64,
}

impl StoVolGibbsKernel {
    pub fn new(params: &StoVolParams) -> Result<Self> {
        Ok(Self { shared: Shared::new(params)?, rejection_cap: DEFAULT_REJECTION_CAP })
    }

    pub fn with_rejection_cap(mut self, cap: u64) -> Self {
        self.rejection_cap = cap.max(1);
        self
    }

    pub fn sample_full_conditional<R: Rng + ?Sized>(
        &self,
        nb: Neighbors<'_>,
        y: f64,
        rng: &mut R,
    ) -> Result<RejectionDraw> {
        let (c, s2, gamma) = self.shared.proposal(nb, y);
        let sd = s2.sqrt();
        let mut max_p: f64 = 0.0;
        for attempt in 1..=self.rejection_cap {
            let z: f64 = rng.sample(StandardNormal);
            let x = c + sd * z;
            let p = self.shared.log_accept_prob(x, y, gamma).exp();
            if p > 1.0 + ENVELOPE_SLACK {
                return Err(Error::EnvelopeViolation { probability: p });
            }
            max_p = max_p.max(p);
            if rng.random::<f64>() < p {
                return Ok(RejectionDraw { value: x, attempts: attempt, max_accept_prob: max_p });
            }
        }
        Err(Error::RejectionCap { attempts: self.rejection_cap })
    }

    /// Unnormalized log density of the single-site conditional.
    pub fn log_conditional(&self, nb: Neighbors<'_>, y: f64, x: f64) -> f64 {
        let (m0, s2) = self.shared.bridge.moments(nb);
        let m1 = m0 - 0.5 * s2;
        -(x - m1) * (x - m1) / (2.0 * s2) - (-x).exp() * y * y / (2.0 * self.shared.beta2)
    }
}

impl GibbsKernel for StoVolGibbsKernel {
    fn is_exact_gibbs(&self) -> bool {
        true
    }

    fn propose<R: Rng + ?Sized>(&self, nb: Neighbors<'_>, y: f64, rng: &mut R, out: &mut [f64]) -> Result<()> {
        out[0] = self.sample_full_conditional(nb, y, rng)?.value;
        Ok(())
    }

    fn log_proposal_density(&self, nb: Neighbors<'_>, y: f64, x: &[f64]) -> f64 {
        self.log_conditional(nb, y, x[0])
    }
}

/// The tilted Gaussian proposal of [`StoVolGibbsKernel`] used directly as a
/// Metropolis-Hastings proposal.
#[derive(Clone, Debug)]
pub struct StoVolMwgKernel {
    shared: Shared,
}

impl StoVolMwgKernel {
    pub fn new(params: &StoVolParams) -> Result<Self> {
        Ok(Self { shared: Shared::new(params)? })
    }
}

impl GibbsKernel for StoVolMwgKernel {
    fn is_exact_gibbs(&self) -> bool {
        false
    }

    fn propose<R: Rng + ?Sized>(&self, nb: Neighbors<'_>, y: f64, rng: &mut R, out: &mut [f64]) -> Result<()> {
        out[0] = self.shared.draw(nb, y, rng);
        Ok(())
    }

    fn log_proposal_density(&self, nb: Neighbors<'_>, y: f64, x: &[f64]) -> f64 {
        let (c, s2, _) = self.shared.proposal(nb, y);
        -(x[0] - c) * (x[0] - c) / (2.0 * s2)
    }

    fn log_accept_ratio<M: HmmModel>(
        &self,
        _model: &M,
        _nb: Neighbors<'_>,
        y: f64,
        current: &[f64],
        candidate: &[f64],
    ) -> Result<f64> {
        let (v, x) = (current[0], candidate[0]);
        let gamma = stovol_gamma(y, self.shared.beta);
        let lr = -0.5 * gamma * (x - v) - ((-x).exp() - (-v).exp()) * y * y / (2.0 * self.shared.beta2);
        if lr.is_nan() {
            return Err(Error::Contract("acceptance ratio is NaN".into()));
        }
        Ok(lr.min(0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mhips::generic_log_accept_ratio;
    use crate::model::StoVol;
    use crate::rng::RngStreams;

    fn params() -> StoVolParams {
        StoVolParams { alpha: 0.3, sigma: 0.5, beta: 1.0 }
    }

    #[test]
    fn gamma_is_continuous_at_beta() {
        for beta in [0.3, 1.0, 2.5] {
            assert!((stovol_gamma(beta, beta) - 1.0).abs() < 1e-15);
            assert!((stovol_gamma(beta * (1.0 + 1e-12), beta) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_observation_accepts_everything() {
        let k = StoVolGibbsKernel::new(&params()).unwrap();
        assert_eq!(stovol_gamma(0.0, 1.0), 0.0);
        for x in [-5.0, 0.0, 3.0] {
            assert_eq!(k.shared.log_accept_prob(x, 0.0, 0.0), 0.0);
        }
        let mut rng = RngStreams::new(1).stream(0);
        let d = k.sample_full_conditional(Neighbors::Alone, 0.0, &mut rng).unwrap();
        assert_eq!(d.attempts, 1);
    }

    #[test]
    fn envelope_peak_is_one() {
        let k = StoVolGibbsKernel::new(&params()).unwrap();
        for y in [0.1_f64, 0.7, 1.0, 2.0, 9.0] {
            let g = stovol_gamma(y, 1.0);
            let peak = (y * y / g).ln();
            let p = k.shared.log_accept_prob(peak, y, g);
            assert!(p.abs() < 1e-12, "y={y} log peak={p}");
            assert!(k.shared.log_accept_prob(peak + 0.3, y, g) < 0.0);
        }
    }

    #[test]
    fn rejection_cap_is_reported() {
        let k = StoVolGibbsKernel::new(&params()).unwrap().with_rejection_cap(1);
        let mut rng = RngStreams::new(3).stream(0);
        let mut hit = false;
        for _ in 0..200 {
            if let Err(e) = k.sample_full_conditional(Neighbors::Alone, 40.0, &mut rng) {
                assert!(matches!(e, Error::RejectionCap { attempts: 1 }));
                hit = true;
                break;
            }
        }
        assert!(hit);
    }

    #[test]
    fn mwg_closed_form_matches_generic_ratio() {
        let model = StoVol::new(params()).unwrap();
        let k = StoVolMwgKernel::new(&params()).unwrap();
        let mut rng = RngStreams::new(9).stream(0);
        for _ in 0..1000 {
            let u = [rng.random_range(-3.0..3.0)];
            let w = [rng.random_range(-3.0..3.0)];
            let v = [rng.random_range(-3.0..3.0)];
            let x = [rng.random_range(-3.0..3.0)];
            let y: f64 = rng.random_range(-4.0..4.0);
            for nb in [
                Neighbors::Interior { prev: &u, next: &w },
                Neighbors::Left { next: &w },
                Neighbors::Right { prev: &u },
                Neighbors::Alone,
            ] {
                let closed = k.log_accept_ratio(&model, nb, y, &v, &x).unwrap();
                let generic = generic_log_accept_ratio(&model, &k, nb, y, &v, &x).unwrap();
                assert!((closed.exp() - generic.exp()).abs() < 1e-12, "{closed} vs {generic}");
            }
        }
    }

    #[test]
    fn identity_move_is_accepted() {
        let model = StoVol::new(params()).unwrap();
        let k = StoVolMwgKernel::new(&params()).unwrap();
        let (u, w) = ([0.2], [-0.4]);
        let nb = Neighbors::Interior { prev: &u, next: &w };
        assert_eq!(k.log_accept_ratio(&model, nb, 1.3, &[0.5], &[0.5]).unwrap(), 0.0);
        assert_eq!(generic_log_accept_ratio(&model, &k, nb, 1.3, &[0.5], &[0.5]).unwrap(), 0.0);
    }
}
