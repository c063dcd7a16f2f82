//! Exact transition operators on finite models, by enumeration of all paths.

use super::{FiniteProposal, Neighbors};
use crate::error::{Error, Result};
use crate::model::{FiniteHmm, HmmModel, ObservationRecord};

/// Index of a path in the enumeration: base `n_states`, time 0 least significant.
pub fn path_index(path: &[f64], n_states: usize) -> usize {
    path.iter().rev().fold(0, |acc, x| acc * n_states + *x as usize)
}

fn decode(mut idx: usize, n_states: usize, out: &mut [f64]) {
    for x in out.iter_mut() {
        *x = (idx % n_states) as f64;
        idx /= n_states;
    }
}

fn n_paths(n_states: usize, horizon: usize) -> Result<usize> {
    u32::try_from(horizon)
        .ok()
        .and_then(|h| n_states.checked_pow(h))
        .filter(|n| *n <= 1 << 24)
        .ok_or_else(|| Error::Config(format!("{n_states}^{horizon} paths is too many to enumerate")))
}

/// The joint smoothing distribution over all paths, in [`path_index`] order.
pub fn exact_path_distribution(model: &FiniteHmm, obs: &ObservationRecord) -> Result<Vec<f64>> {
    let horizon = obs.horizon();
    let n = model.n_states();
    let mut path = vec![0.0; horizon];
    let mut lp: Vec<f64> = (0..n_paths(n, horizon)?)
        .map(|idx| {
            decode(idx, n, &mut path);
            let mut l = model.log_initial_density(&path[..1]);
            for t in 0..horizon {
                if t > 0 {
                    l += model.log_transition_density(&path[t - 1..t], &path[t..t + 1]);
                }
                l += model.log_observation_density(&path[t..t + 1], obs.observations[t]);
            }
            l
        })
        .collect();
    if !crate::smc::log_normalize(&mut lp) {
        return Err(Error::Contract("observations have zero probability".into()));
    }
    Ok(lp.into_iter().map(f64::exp).collect())
}

/// Pushes a distribution over paths through one backward pass of single-site
/// updates (t = T down to 0) built from `kernel`'s proposal and acceptance ratio.
pub fn apply_backward_pass<K: FiniteProposal>(
    model: &FiniteHmm,
    kernel: &K,
    obs: &ObservationRecord,
    dist: &[f64],
) -> Result<Vec<f64>> {
    let horizon = obs.horizon();
    let n = model.n_states();
    if dist.len() != n_paths(n, horizon)? {
        return Err(Error::Dimension { expected: n_paths(n, horizon)?, got: dist.len() });
    }
    let mut cur = dist.to_vec();
    let mut path = vec![0.0; horizon];
    let mut cand = vec![0.0; horizon];
    for t in (0..horizon).rev() {
        let stride = n.pow(t as u32);
        let mut next = vec![0.0; cur.len()];
        for (idx, &mass) in cur.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            decode(idx, n, &mut path);
            let nb = Neighbors::new(
                (t > 0).then(|| &path[t - 1..t]),
                (t + 1 < horizon).then(|| &path[t + 1..t + 2]),
            );
            let y = obs.observations[t];
            let pmf = kernel.proposal_pmf(nb, y)?;
            let v = path[t] as usize;
            let base = idx - v * stride;
            let mut stay = 1.0;
            for (x, &q) in pmf.iter().enumerate() {
                if q == 0.0 || x == v {
                    continue;
                }
                let a = if kernel.is_exact_gibbs() {
                    1.0
                } else {
                    cand.copy_from_slice(&path);
                    cand[t] = x as f64;
                    kernel.log_accept_ratio(model, nb, y, &path[t..t + 1], &cand[t..t + 1])?.exp()
                };
                next[base + x * stride] += mass * q * a;
                stay -= q * a;
            }
            next[idx] += mass * stay;
        }
        cur = next;
    }
    Ok(cur)
}
