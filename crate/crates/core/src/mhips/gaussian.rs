use rand::Rng;
use rand_distr::StandardNormal;

use super::{GibbsKernel, Neighbors};
use crate::error::Result;
use crate::model::{log_normal_pdf, LgmParams};

/// Conditional law of one component of a scalar Gaussian AR(1) chain with a
/// stationary start, given its neighbours and no observation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ar1Bridge {
    pub coef: f64,
    pub innovation_var: f64,
    pub initial_var: f64,
}

impl Ar1Bridge {
    /// Mean and variance of the neighbour-only conditional.
    pub fn moments(&self, nb: Neighbors<'_>) -> (f64, f64) {
        let (a, q) = (self.coef, self.innovation_var);
        let (mut prec, mut lin) = match nb.prev() {
            Some(u) => (1.0 / q, a * u[0] / q),
            None => (1.0 / self.initial_var, 0.0),
        };
        if let Some(w) = nb.next() {
            prec += a * a / q;
            lin += a * w[0] / q;
        }
        (lin / prec, 1.0 / prec)
    }
}

/// Exact full conditionals of the linear Gaussian model.
#[derive(Clone, Debug)]
pub struct LgmGibbsKernel {
    bridge: Ar1Bridge,
    obs_var: f64,
}

impl LgmGibbsKernel {
    pub fn new(params: &LgmParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            bridge: Ar1Bridge {
                coef: params.phi,
                innovation_var: params.sigma_u * params.sigma_u,
                initial_var: params.stationary_variance(),
            },
            obs_var: params.sigma_v * params.sigma_v,
        })
    }

    /// Mean and variance of `X_t` given its neighbours and `y_t`.
    pub fn conditional(&self, nb: Neighbors<'_>, y: f64) -> (f64, f64) {
        let (m0, v0) = self.bridge.moments(nb);
        let prec = 1.0 / v0 + 1.0 / self.obs_var;
        ((m0 / v0 + y / self.obs_var) / prec, 1.0 / prec)
    }
}

impl GibbsKernel for LgmGibbsKernel {
    fn is_exact_gibbs(&self) -> bool {
        true
    }

    fn propose<R: Rng + ?Sized>(&self, nb: Neighbors<'_>, y: f64, rng: &mut R, out: &mut [f64]) -> Result<()> {
        let (mean, var) = self.conditional(nb, y);
        let z: f64 = rng.sample(StandardNormal);
        out[0] = mean + var.sqrt() * z;
        Ok(())
    }

    fn log_proposal_density(&self, nb: Neighbors<'_>, y: f64, x: &[f64]) -> f64 {
        let (mean, var) = self.conditional(nb, y);
        log_normal_pdf(x[0], mean, var)
    }
}
