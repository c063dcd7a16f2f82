use super::{DiscreteChain, ExactMarginals, FunctionalMoments};
use crate::error::Result;
use crate::model::{FiniteHmm, ObservationRecord};

/// Exact smoothing marginals of a finite-state model.
#[derive(Clone, Debug)]
pub struct FiniteSmoothing {
    /// `masses[t][i] = P(X_t = i | y_{0:T})`.
    pub masses: Vec<Vec<f64>>,
    pub means: Vec<f64>,
    pub variances: Vec<f64>,
}

impl FiniteSmoothing {
    /// Fails when some marginal is a point mass (zero variance).
    pub fn to_marginals(&self) -> Result<ExactMarginals> {
        ExactMarginals::new(self.means.clone(), self.variances.clone())
    }
}

fn chain(model: &FiniteHmm, obs: &ObservationRecord) -> Result<DiscreteChain> {
    let n = model.n_states();
    let values: Vec<f64> = (0..n).map(|i| i as f64).collect();
    let transition: Vec<f64> = model.transition().iter().flatten().copied().collect();
    let log_emission = obs
        .observations
        .iter()
        .map(|&y| (0..n).map(|i| model.emission_prob(i, y).ln()).collect())
        .collect();
    DiscreteChain::new(values, vec![1.0; n], model.initial().to_vec(), transition, log_emission)
}

/// Forward-backward smoothing of a finite-state model.
pub fn finite_smoother(model: &FiniteHmm, obs: &ObservationRecord) -> Result<FiniteSmoothing> {
    let masses = chain(model, obs)?.smoothing_masses()?;
    let (means, variances) = masses
        .iter()
        .map(|p| {
            let m: f64 = p.iter().enumerate().map(|(i, q)| i as f64 * q).sum();
            let v: f64 = p.iter().enumerate().map(|(i, q)| (i as f64 - m).powi(2) * q).sum();
            (m, v)
        })
        .unzip();
    Ok(FiniteSmoothing { masses, means, variances })
}

/// Posterior moments of `sum_t X_t` for a finite-state model.
pub fn finite_additive_moments(model: &FiniteHmm, obs: &ObservationRecord) -> Result<FunctionalMoments> {
    chain(model, obs)?.additive_moments()
}
