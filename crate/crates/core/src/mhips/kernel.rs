use rand::Rng;

use crate::error::{Error, Result};
use crate::model::HmmModel;

/// The neighbours of the component being updated.
#[derive(Clone, Copy, Debug)]
pub enum Neighbors<'a> {
    /// t = 0 with T > 0: only the forward neighbour.
    Left { next: &'a [f64] },
    /// 0 < t < T.
    Interior { prev: &'a [f64], next: &'a [f64] },
    /// t = T with T > 0: only the backward neighbour.
    Right { prev: &'a [f64] },
    /// T = 0: a single component.
    Alone,
}

impl<'a> Neighbors<'a> {
    pub fn new(prev: Option<&'a [f64]>, next: Option<&'a [f64]>) -> Self {
        match (prev, next) {
            (None, Some(next)) => Neighbors::Left { next },
            (Some(prev), Some(next)) => Neighbors::Interior { prev, next },
            (Some(prev), None) => Neighbors::Right { prev },
            (None, None) => Neighbors::Alone,
        }
    }

    pub fn prev(&self) -> Option<&'a [f64]> {
        match *self {
            Neighbors::Interior { prev, .. } | Neighbors::Right { prev } => Some(prev),
            _ => None,
        }
    }

    pub fn next(&self) -> Option<&'a [f64]> {
        match *self {
            Neighbors::Left { next } | Neighbors::Interior { next, .. } => Some(next),
            _ => None,
        }
    }
}

/// A family of single-site proposals `r_t`, one per neighbour configuration.
///
/// `log_proposal_density` may omit any additive term that depends only on the
/// neighbours and the observation, since it only enters acceptance ratios
/// through differences at fixed neighbours.
pub trait GibbsKernel: Sync {
    fn state_dim(&self) -> usize {
        1
    }

    /// True when the proposal is the exact full conditional, so every move is
    /// accepted and the acceptance test is skipped.
    fn is_exact_gibbs(&self) -> bool;

    fn propose<R: Rng + ?Sized>(&self, nb: Neighbors<'_>, y: f64, rng: &mut R, out: &mut [f64]) -> Result<()>;

    fn log_proposal_density(&self, nb: Neighbors<'_>, y: f64, x: &[f64]) -> f64;

    /// `min(0, log alpha)` for moving from `current` to `candidate`.
    fn log_accept_ratio<M: HmmModel>(
        &self,
        model: &M,
        nb: Neighbors<'_>,
        y: f64,
        current: &[f64],
        candidate: &[f64],
    ) -> Result<f64> {
        generic_log_accept_ratio(model, self, nb, y, current, candidate)
    }
}

/// Log of the smoothing density restricted to one component, up to a constant:
/// the initial or incoming transition density, the observation density and the
/// outgoing transition density.
pub fn log_target<M: HmmModel>(model: &M, nb: Neighbors<'_>, y: f64, x: &[f64]) -> f64 {
    let mut lp = model.log_observation_density(x, y);
    match nb.prev() {
        Some(u) => lp += model.log_transition_density(u, x),
        None => lp += model.log_initial_density(x),
    }
    if let Some(w) = nb.next() {
        lp += model.log_transition_density(x, w);
    }
    lp
}

/// The Metropolis-Hastings ratio for a single-site move, clamped at zero:
/// `[pi_t(x) r_t(v)] / [pi_t(v) r_t(x)]` with `pi_t` the local target of
/// [`log_target`]. The current state must have positive target density.
pub fn generic_log_accept_ratio<M: HmmModel, K: GibbsKernel + ?Sized>(
    model: &M,
    kernel: &K,
    nb: Neighbors<'_>,
    y: f64,
    current: &[f64],
    candidate: &[f64],
) -> Result<f64> {
    let cur = log_target(model, nb, y, current);
    if !cur.is_finite() {
        return Err(Error::Contract("current state has zero smoothing density".into()));
    }
    let cand = log_target(model, nb, y, candidate);
    let lr = (cand - cur) + (kernel.log_proposal_density(nb, y, current) - kernel.log_proposal_density(nb, y, candidate));
    if lr.is_nan() {
        return Err(Error::Contract("acceptance ratio is NaN".into()));
    }
    Ok(lr.min(0.0))
}

/// Wraps a kernel so that the acceptance test always runs, even for an exact
/// Gibbs proposal.
#[derive(Clone, Debug)]
pub struct ForceMetropolis<K>(pub K);

impl<K: GibbsKernel> GibbsKernel for ForceMetropolis<K> {
    fn state_dim(&self) -> usize {
        self.0.state_dim()
    }

    fn is_exact_gibbs(&self) -> bool {
        false
    }

    fn propose<R: Rng + ?Sized>(&self, nb: Neighbors<'_>, y: f64, rng: &mut R, out: &mut [f64]) -> Result<()> {
        self.0.propose(nb, y, rng, out)
    }

    fn log_proposal_density(&self, nb: Neighbors<'_>, y: f64, x: &[f64]) -> f64 {
        self.0.log_proposal_density(nb, y, x)
    }

    fn log_accept_ratio<M: HmmModel>(
        &self,
        model: &M,
        nb: Neighbors<'_>,
        y: f64,
        current: &[f64],
        candidate: &[f64],
    ) -> Result<f64> {
        self.0.log_accept_ratio(model, nb, y, current, candidate)
    }
}
