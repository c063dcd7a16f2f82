//! Grid quadrature references for one-dimensional models.

use rayon::prelude::*;

use super::{DiscreteChain, ExactMarginals, FunctionalMoments};
use crate::error::{Error, Result};
use crate::model::{HmmModel, ObservationRecord};

/// Boundary mass above which [`grid_smoother_auto`] widens the grid.
pub const BOUNDARY_MASS_TOL: f64 = 1e-10;

/// `n_points` equally spaced nodes on `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub n_points: usize,
}

impl GridSpec {
    pub fn new(lo: f64, hi: f64, n_points: usize) -> Result<Self> {
        if n_points < 2 {
            return Err(Error::Config(format!("grid needs at least 2 points, got {n_points}")));
        }
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Config(format!("invalid grid bounds [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi, n_points })
    }

    /// Mean plus or minus `half_width_sd` stationary standard deviations.
    pub fn around_prior<M: HmmModel>(model: &M, half_width_sd: f64, n_points: usize) -> Result<Self> {
        let (mean, var) = model
            .prior_moments()
            .ok_or_else(|| Error::Config("model has no known stationary moments".into()))?;
        let h = half_width_sd * var.sqrt();
        Self::new(mean - h, mean + h, n_points)
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.n_points - 1) as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.n_points).map(|i| self.lo + h * i as f64).collect()
    }

    /// Trapezoidal quadrature weights.
    pub fn weights(&self) -> Vec<f64> {
        let h = self.spacing();
        let mut w = vec![h; self.n_points];
        w[0] = 0.5 * h;
        w[self.n_points - 1] = 0.5 * h;
        w
    }
}

fn discretise<M: HmmModel>(model: &M, obs: &ObservationRecord, grid: &GridSpec) -> Result<DiscreteChain> {
    if model.state_dim() != 1 {
        return Err(Error::Dimension { expected: 1, got: model.state_dim() });
    }
    obs.validate()?;
    let xs = grid.nodes();
    let n = xs.len();
    let initial: Vec<f64> = xs.iter().map(|x| model.log_initial_density(&[*x]).exp()).collect();
    let mut transition = vec![0.0; n * n];
    transition.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        for (j, m) in row.iter_mut().enumerate() {
            *m = model.log_transition_density(&[xs[i]], &[xs[j]]).exp();
        }
    });
    let log_emission = obs
        .observations
        .iter()
        .map(|&y| xs.iter().map(|x| model.log_observation_density(&[*x], y)).collect())
        .collect();
    DiscreteChain::new(xs, grid.weights(), initial, transition, log_emission)
}

fn moments(xs: &[f64], masses: &[Vec<f64>]) -> Result<ExactMarginals> {
    let (means, variances) = masses
        .iter()
        .map(|p| {
            let m: f64 = p.iter().zip(xs).map(|(q, x)| q * x).sum();
            let v: f64 = p.iter().zip(xs).map(|(q, x)| q * (x - m) * (x - m)).sum();
            (m, v)
        })
        .unzip();
    ExactMarginals::new(means, variances)
}

/// Smoothing marginals by exact forward-backward on a discretised state space.
pub fn grid_smoother<M: HmmModel>(model: &M, obs: &ObservationRecord, grid: &GridSpec) -> Result<ExactMarginals> {
    let chain = discretise(model, obs, grid)?;
    moments(chain.values(), &chain.smoothing_masses()?)
}

fn boundary_mass(masses: &[Vec<f64>]) -> f64 {
    masses
        .iter()
        .map(|p| p[0].max(p[p.len() - 1]))
        .fold(0.0, f64::max)
}

/// Grid smoother on the default grid (2000 points, prior mean plus or minus 6
/// standard deviations), widened until the mass in the end cells is below
/// [`BOUNDARY_MASS_TOL`] at every time step.
pub fn grid_smoother_auto<M: HmmModel>(model: &M, obs: &ObservationRecord) -> Result<(ExactMarginals, GridSpec)> {
    let mut grid = GridSpec::around_prior(model, 6.0, 2000)?;
    for _ in 0..8 {
        let chain = discretise(model, obs, &grid)?;
        let masses = chain.smoothing_masses()?;
        if boundary_mass(&masses) <= BOUNDARY_MASS_TOL {
            return Ok((moments(chain.values(), &masses)?, grid));
        }
        let centre = 0.5 * (grid.lo + grid.hi);
        let half = grid.hi - grid.lo;
        grid = GridSpec::new(centre - half, centre + half, 2 * grid.n_points - 1)?;
    }
    Err(Error::GridCoverage { t: 0 })
}

/// Posterior moments of `sum_t X_t` on a grid.
pub fn grid_additive_moments<M: HmmModel>(
    model: &M,
    obs: &ObservationRecord,
    grid: &GridSpec,
) -> Result<FunctionalMoments> {
    discretise(model, obs, grid)?.additive_moments()
}

/// Normalised CDF of an unnormalised one-dimensional log-density, by
/// trapezoidal quadrature on a grid and linear interpolation between nodes.
#[derive(Clone, Debug)]
pub struct GridCdf {
    nodes: Vec<f64>,
    cumulative: Vec<f64>,
}

impl GridCdf {
    pub fn cdf(&self, x: f64) -> f64 {
        let n = self.nodes.len();
        if x <= self.nodes[0] {
            return 0.0;
        }
        if x >= self.nodes[n - 1] {
            return 1.0;
        }
        let h = self.nodes[1] - self.nodes[0];
        let k = (((x - self.nodes[0]) / h) as usize).min(n - 2);
        let frac = (x - self.nodes[k]) / h;
        self.cumulative[k] + frac * (self.cumulative[k + 1] - self.cumulative[k])
    }
}

pub fn grid_conditional_cdf<F: Fn(f64) -> f64>(log_density: F, grid: &GridSpec) -> Result<GridCdf> {
    let nodes = grid.nodes();
    let ld: Vec<f64> = nodes.iter().map(|x| log_density(*x)).collect();
    let max = ld.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::GridCoverage { t: 0 });
    }
    let dens: Vec<f64> = ld.iter().map(|l| (l - max).exp()).collect();
    let h = grid.spacing();
    let mut cumulative = Vec::with_capacity(nodes.len());
    cumulative.push(0.0);
    for k in 1..nodes.len() {
        let c = cumulative[k - 1] + 0.5 * h * (dens[k - 1] + dens[k]);
        cumulative.push(c);
    }
    let total = cumulative[nodes.len() - 1];
    if !(total > 0.0) {
        return Err(Error::GridCoverage { t: 0 });
    }
    cumulative.iter_mut().for_each(|c| *c /= total);
    Ok(GridCdf { nodes, cumulative })
}
