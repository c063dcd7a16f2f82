use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::{log_normalize, multinomial_indices, PathEnsemble};
use crate::error::{Error, Result};
use crate::model::{log_normal_pdf, HmmModel, LgmParams, ObservationRecord};
use crate::rng::{RngStreams, BARRIER_STREAM};

/// When the bootstrap filter resamples.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ResamplePolicy {
    #[default]
    EveryStep,
    Never,
}

/// Particles, normalised log-weights and ancestor indices at one time step.
#[derive(Clone, Debug)]
pub struct FilterFrame {
    pub state_dim: usize,
    pub particles: Vec<f64>,
    pub log_weights: Vec<f64>,
    /// Index into the previous frame for each particle; `None` at t = 0.
    pub ancestors: Option<Vec<usize>>,
}

impl FilterFrame {
    pub fn n_particles(&self) -> usize {
        self.log_weights.len()
    }

    pub fn particle(&self, i: usize) -> &[f64] {
        &self.particles[i * self.state_dim..(i + 1) * self.state_dim]
    }

    pub fn weights(&self) -> Vec<f64> {
        self.log_weights.iter().map(|l| l.exp()).collect()
    }

    /// Weighted mean of the first state coordinate.
    pub fn mean(&self) -> f64 {
        (0..self.n_particles())
            .map(|i| self.log_weights[i].exp() * self.particle(i)[0])
            .sum()
    }
}

fn check(obs: &ObservationRecord, n: usize) -> Result<()> {
    obs.validate()?;
    if n == 0 {
        return Err(Error::Config("need at least one particle".into()));
    }
    Ok(())
}

/// Bootstrap particle filter: propose from the transition, weight by the
/// observation density, resample multinomially according to `policy`.
///
/// Particle `i` at step `t` draws from stream `(i, t)` of `streams`, and the
/// resampling at step `t` from the barrier stream, so the output does not
/// depend on the rayon thread count.
pub fn bootstrap_filter<M: HmmModel>(
    model: &M,
    obs: &ObservationRecord,
    n: usize,
    streams: &RngStreams,
    policy: ResamplePolicy,
) -> Result<Vec<FilterFrame>> {
    check(obs, n)?;
    let d = model.state_dim();
    let ys = &obs.observations;
    let mut frames: Vec<FilterFrame> = Vec::with_capacity(ys.len());

    let mut particles = vec![0.0; n * d];
    let mut lw = vec![0.0; n];
    particles
        .par_chunks_mut(d)
        .zip(lw.par_iter_mut())
        .enumerate()
        .for_each(|(i, (x, w))| {
            let mut rng = streams.stream_at(i as u64, 0);
            model.sample_initial(&mut rng, x);
            *w = model.log_observation_density(x, ys[0]);
        });
    if !log_normalize(&mut lw) {
        return Err(Error::FilterCollapse { t: 0 });
    }
    frames.push(FilterFrame { state_dim: d, particles, log_weights: lw, ancestors: None });

    for t in 1..ys.len() {
        let prev = &frames[t - 1];
        let (ancestors, prior): (Vec<usize>, Vec<f64>) = match policy {
            ResamplePolicy::EveryStep => {
                let mut rng = streams.stream_at(BARRIER_STREAM, t as u64);
                (multinomial_indices(&prev.weights(), n, &mut rng), vec![0.0; n])
            }
            ResamplePolicy::Never => ((0..n).collect(), prev.log_weights.clone()),
        };
        let mut particles = vec![0.0; n * d];
        let mut lw = vec![0.0; n];
        particles
            .par_chunks_mut(d)
            .zip(lw.par_iter_mut())
            .enumerate()
            .for_each(|(i, (x, w))| {
                let mut rng = streams.stream_at(i as u64, t as u64);
                model.sample_transition(prev.particle(ancestors[i]), &mut rng, x);
                *w = prior[i] + model.log_observation_density(x, ys[t]);
            });
        if !log_normalize(&mut lw) {
            return Err(Error::FilterCollapse { t });
        }
        frames.push(FilterFrame { state_dim: d, particles, log_weights: lw, ancestors: Some(ancestors) });
    }
    Ok(frames)
}

/// Fully adapted filter for the linear Gaussian model: resample by the
/// predictive likelihood `p(y_t | x_{t-1})` and propose from the exact
/// `p(x_t | x_{t-1}, y_t)`. All particle weights are equal.
pub fn fully_adapted_filter_lgm(
    params: &LgmParams,
    obs: &ObservationRecord,
    n: usize,
    streams: &RngStreams,
) -> Result<Vec<FilterFrame>> {
    params.validate()?;
    check(obs, n)?;
    let ys = &obs.observations;
    let q = params.sigma_u * params.sigma_u;
    let r = params.sigma_v * params.sigma_v;
    let p0 = params.stationary_variance();
    let uniform = vec![-(n as f64).ln(); n];
    let post_var = 1.0 / (1.0 / q + 1.0 / r);
    let post_sd = post_var.sqrt();

    let sample = |mean: f64, sd: f64, i: usize, t: usize| {
        let mut rng = streams.stream_at(i as u64, t as u64);
        let z: f64 = rng.sample(StandardNormal);
        mean + sd * z
    };

    let m0 = p0 * ys[0] / (p0 + r);
    let s0 = (p0 * r / (p0 + r)).sqrt();
    let particles: Vec<f64> = (0..n).into_par_iter().map(|i| sample(m0, s0, i, 0)).collect();
    let mut frames = vec![FilterFrame { state_dim: 1, particles, log_weights: uniform.clone(), ancestors: None }];

    for t in 1..ys.len() {
        let prev = &frames[t - 1];
        let mut first_stage: Vec<f64> = prev
            .particles
            .iter()
            .zip(&prev.log_weights)
            .map(|(x, lw)| lw + log_normal_pdf(ys[t], params.phi * x, q + r))
            .collect();
        if !log_normalize(&mut first_stage) {
            return Err(Error::FilterCollapse { t });
        }
        let w: Vec<f64> = first_stage.iter().map(|l| l.exp()).collect();
        let ancestors = multinomial_indices(&w, n, &mut streams.stream_at(BARRIER_STREAM, t as u64));
        let y = ys[t];
        let particles: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|i| {
                let x = prev.particles[ancestors[i]];
                let mean = post_var * (params.phi * x / q + y / r);
                sample(mean, post_sd, i, t)
            })
            .collect();
        frames.push(FilterFrame { state_dim: 1, particles, log_weights: uniform.clone(), ancestors: Some(ancestors) });
    }
    Ok(frames)
}

/// Filter-Smoother: trace each final particle's ancestry back to t = 0. The
/// paths carry the final-step weights.
pub fn filter_smoother(frames: &[FilterFrame]) -> Result<PathEnsemble> {
    let last = frames.last().ok_or_else(|| Error::Contract("no filter frames".into()))?;
    let n = last.n_particles();
    let d = last.state_dim;
    let horizon = frames.len();
    let mut paths = vec![0.0; n * horizon * d];
    paths.par_chunks_mut(horizon * d).enumerate().try_for_each(|(i, path)| {
        let mut idx = i;
        for t in (0..horizon).rev() {
            let frame = &frames[t];
            if idx >= frame.n_particles() {
                return Err(Error::Contract(format!("ancestor index {idx} out of range at t = {t}")));
            }
            path[t * d..(t + 1) * d].copy_from_slice(frame.particle(idx));
            if t > 0 {
                let anc = frame
                    .ancestors
                    .as_ref()
                    .ok_or_else(|| Error::Contract(format!("missing ancestors at t = {t}")))?;
                idx = anc[idx];
            }
        }
        Ok(())
    })?;
    PathEnsemble::new(n, horizon, d, paths, last.log_weights.clone())
}
