//! Forward filtering backward simulation with accept-reject backward draws.

use rand::Rng;
use rayon::prelude::*;

use super::{FilterFrame, PathEnsemble};
use crate::error::{Error, Result};
use crate::model::HmmModel;
use crate::rng::RngStreams;

/// Rejections allowed per backward draw before switching to exact sampling.
pub const FFBSI_MAX_REJECTIONS: usize = 100;

const BOUND_SLACK: f64 = 1e-9;

fn cumulative(frame: &FilterFrame) -> Vec<f64> {
    let mut acc = 0.0;
    frame
        .log_weights
        .iter()
        .map(|l| {
            acc += l.exp();
            acc
        })
        .collect()
}

fn categorical(cum: &[f64], u: f64) -> usize {
    let target = u * cum[cum.len() - 1];
    cum.partition_point(|c| *c <= target).min(cum.len() - 1)
}

/// Draws `n_out` equally weighted trajectories backward through the filter
/// particles. At each step a candidate index is drawn from the filter weights
/// and accepted with probability `m(candidate, next) / transition_density_bound`;
/// after [`FFBSI_MAX_REJECTIONS`] rejections the index is drawn exactly from
/// the backward kernel, which leaves the law unchanged.
pub fn ffbsi<M: HmmModel>(
    frames: &[FilterFrame],
    model: &M,
    n_out: usize,
    streams: &RngStreams,
    transition_density_bound: f64,
) -> Result<PathEnsemble> {
    ffbsi_with_rejection_cap(frames, model, n_out, streams, transition_density_bound, FFBSI_MAX_REJECTIONS)
}

/// [`ffbsi`] with an explicit rejection cap; a cap of zero always samples the
/// backward kernel exactly.
pub fn ffbsi_with_rejection_cap<M: HmmModel>(
    frames: &[FilterFrame],
    model: &M,
    n_out: usize,
    streams: &RngStreams,
    transition_density_bound: f64,
    max_rejections: usize,
) -> Result<PathEnsemble> {
    let horizon = frames.len();
    if horizon == 0 {
        return Err(Error::Contract("no filter frames".into()));
    }
    if n_out == 0 {
        return Err(Error::Config("need at least one output path".into()));
    }
    if !(transition_density_bound > 0.0) {
        return Err(Error::Config("transition density bound must be positive".into()));
    }
    let log_bound = transition_density_bound.ln();
    let d = model.state_dim();
    let cums: Vec<Vec<f64>> = frames.iter().map(cumulative).collect();

    let mut paths = vec![0.0; n_out * horizon * d];
    paths.par_chunks_mut(horizon * d).enumerate().try_for_each(|(j, path)| {
        let mut rng = streams.stream(j as u64);
        let mut idx = categorical(&cums[horizon - 1], rng.random());
        path[(horizon - 1) * d..].copy_from_slice(frames[horizon - 1].particle(idx));
        for t in (0..horizon - 1).rev() {
            let frame = &frames[t];
            let (head, tail) = path.split_at_mut((t + 1) * d);
            let next = &tail[..d];
            let mut accepted = None;
            for _ in 0..max_rejections {
                let k = categorical(&cums[t], rng.random());
                let lr = model.log_transition_density(frame.particle(k), next) - log_bound;
                if lr > BOUND_SLACK {
                    return Err(Error::Contract(format!(
                        "transition density exceeds the supplied bound by a factor {} at t = {t}",
                        lr.exp()
                    )));
                }
                if rng.random::<f64>() < lr.exp() {
                    accepted = Some(k);
                    break;
                }
            }
            idx = match accepted {
                Some(k) => k,
                None => exact_backward_index(frame, model, next, &mut rng).ok_or(Error::FilterCollapse { t })?,
            };
            head[t * d..].copy_from_slice(frame.particle(idx));
        }
        Ok(())
    })?;
    PathEnsemble::uniform(n_out, horizon, d, paths)
}

/// Index drawn with probability proportional to `w_k m(particle_k, next)`.
fn exact_backward_index<M: HmmModel, R: Rng + ?Sized>(
    frame: &FilterFrame,
    model: &M,
    next: &[f64],
    rng: &mut R,
) -> Option<usize> {
    let mut lw: Vec<f64> = (0..frame.n_particles())
        .map(|k| frame.log_weights[k] + model.log_transition_density(frame.particle(k), next))
        .collect();
    if !super::log_normalize(&mut lw) {
        return None;
    }
    let mut acc = 0.0;
    let cum: Vec<f64> = lw.iter().map(|l| {
        acc += l.exp();
        acc
    }).collect();
    Some(categorical(&cum, rng.random()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{simulate, Lgm, LgmParams};
    use crate::smc::{bootstrap_filter, ResamplePolicy};

    #[test]
    fn single_particle_returns_its_path() {
        let m = Lgm::new(LgmParams { phi: 0.9, sigma_u: 0.6, sigma_v: 1.0 }).unwrap();
        let obs = simulate(&m, 8, 1).unwrap();
        let frames = bootstrap_filter(&m, &obs, 1, &RngStreams::new(2), ResamplePolicy::EveryStep).unwrap();
        let e = ffbsi(&frames, &m, 3, &RngStreams::new(3), m.transition_density_bound().unwrap()).unwrap();
        for j in 0..3 {
            for t in 0..8 {
                assert_eq!(e.state(j, t), frames[t].particle(0));
            }
        }
    }

    #[test]
    fn undersized_bound_is_a_contract_error() {
        let m = Lgm::new(LgmParams { phi: 0.9, sigma_u: 0.6, sigma_v: 1.0 }).unwrap();
        let obs = simulate(&m, 8, 1).unwrap();
        let frames = bootstrap_filter(&m, &obs, 50, &RngStreams::new(2), ResamplePolicy::EveryStep).unwrap();
        let err = ffbsi(&frames, &m, 10, &RngStreams::new(3), 1e-3).unwrap_err();
        assert!(matches!(err, Error::Contract(_)));
    }

    #[test]
    fn categorical_respects_zero_weights() {
        let cum = [0.0, 0.5, 0.5, 1.0];
        for u in [0.0, 0.1, 0.49, 0.5, 0.75, 0.999_999] {
            let k = categorical(&cum, u);
            assert!(k == 1 || k == 3, "u={u} gave {k}");
        }
    }
}
