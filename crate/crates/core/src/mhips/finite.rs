use rand::Rng;

use super::{log_target, GibbsKernel, Neighbors};
use crate::error::{Error, Result};
use crate::model::FiniteHmm;

/// Kernels whose proposal is a probability mass function on the states of a
/// finite model, so that single-site transitions can be enumerated.
pub trait FiniteProposal: GibbsKernel {
    fn proposal_pmf(&self, nb: Neighbors<'_>, y: f64) -> Result<Vec<f64>>;
}

fn sample_pmf<R: Rng + ?Sized>(pmf: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in pmf.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    pmf.iter().rposition(|p| *p > 0.0).unwrap_or(pmf.len() - 1)
}

/// Exact single-site conditionals of a finite model.
#[derive(Clone, Debug)]
pub struct FiniteGibbsKernel {
    model: FiniteHmm,
}

impl FiniteGibbsKernel {
    pub fn new(model: FiniteHmm) -> Self {
        Self { model }
    }
}

impl FiniteProposal for FiniteGibbsKernel {
    fn proposal_pmf(&self, nb: Neighbors<'_>, y: f64) -> Result<Vec<f64>> {
        let mut lp: Vec<f64> = (0..self.model.n_states())
            .map(|j| log_target(&self.model, nb, y, &[j as f64]))
            .collect();
        if !crate::smc::log_normalize(&mut lp) {
            return Err(Error::Contract("single-site conditional has zero mass".into()));
        }
        Ok(lp.into_iter().map(f64::exp).collect())
    }
}

impl GibbsKernel for FiniteGibbsKernel {
    fn is_exact_gibbs(&self) -> bool {
        true
    }

    fn propose<R: Rng + ?Sized>(&self, nb: Neighbors<'_>, y: f64, rng: &mut R, out: &mut [f64]) -> Result<()> {
        let pmf = self.proposal_pmf(nb, y)?;
        out[0] = sample_pmf(&pmf, rng) as f64;
        Ok(())
    }

    fn log_proposal_density(&self, nb: Neighbors<'_>, y: f64, x: &[f64]) -> f64 {
        log_target(&self.model, nb, y, x)
    }
}

/// Independent uniform proposals over the states.
#[derive(Clone, Debug)]
pub struct FiniteUniformKernel {
    n_states: usize,
}

impl FiniteUniformKernel {
    pub fn new(n_states: usize) -> Result<Self> {
        if n_states == 0 {
            return Err(Error::Config("uniform kernel needs at least one state".into()));
        }
        Ok(Self { n_states })
    }
}

impl FiniteProposal for FiniteUniformKernel {
    fn proposal_pmf(&self, _nb: Neighbors<'_>, _y: f64) -> Result<Vec<f64>> {
        Ok(vec![1.0 / self.n_states as f64; self.n_states])
    }
}

impl GibbsKernel for FiniteUniformKernel {
    fn is_exact_gibbs(&self) -> bool {
        false
    }

    fn propose<R: Rng + ?Sized>(&self, _nb: Neighbors<'_>, _y: f64, rng: &mut R, out: &mut [f64]) -> Result<()> {
        out[0] = rng.random_range(0..self.n_states) as f64;
        Ok(())
    }

    fn log_proposal_density(&self, _nb: Neighbors<'_>, _y: f64, _x: &[f64]) -> f64 {
        0.0
    }
}

impl<K: FiniteProposal> FiniteProposal for super::ForceMetropolis<K> {
    fn proposal_pmf(&self, nb: Neighbors<'_>, y: f64) -> Result<Vec<f64>> {
        self.0.proposal_pmf(nb, y)
    }
}
