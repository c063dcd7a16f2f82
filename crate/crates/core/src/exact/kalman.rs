//! Kalman filter and Rauch-Tung-Striebel smoother for the scalar linear
//! Gaussian model.

use super::{ExactMarginals, FunctionalMoments};
use crate::error::{Error, Result};
use crate::model::{LgmParams, ObservationRecord};

#[derive(Clone, Debug)]
pub struct KalmanOutput {
    pub filtered: ExactMarginals,
    pub smoothed: ExactMarginals,
    /// Predicted variances `P_{t|t-1}` (the prior variance at t = 0).
    pub predicted_variances: Vec<f64>,
    /// Smoother gains `J_t = P_{t|t} phi / P_{t+1|t}`, length T.
    pub gains: Vec<f64>,
}

pub fn kalman(params: &LgmParams, obs: &ObservationRecord) -> Result<KalmanOutput> {
    params.validate()?;
    obs.validate()?;
    let phi = params.phi;
    let q = params.sigma_u * params.sigma_u;
    let r = params.sigma_v * params.sigma_v;
    let n = obs.horizon();

    let mut fm = Vec::with_capacity(n);
    let mut fv = Vec::with_capacity(n);
    let mut pv = Vec::with_capacity(n);
    let (mut m_pred, mut p_pred) = (0.0, params.stationary_variance());
    for (t, &y) in obs.observations.iter().enumerate() {
        if !(p_pred > 0.0) {
            return Err(Error::Contract(format!("non-positive predicted variance at t = {t}")));
        }
        pv.push(p_pred);
        let gain = p_pred / (p_pred + r);
        let m = m_pred + gain * (y - m_pred);
        let p = p_pred * r / (p_pred + r);
        fm.push(m);
        fv.push(p);
        m_pred = phi * m;
        p_pred = phi * phi * p + q;
    }

    let mut sm = fm.clone();
    let mut sv = fv.clone();
    let mut gains = vec![0.0; n.saturating_sub(1)];
    for t in (0..n.saturating_sub(1)).rev() {
        let j = fv[t] * phi / pv[t + 1];
        gains[t] = j;
        sm[t] = fm[t] + j * (sm[t + 1] - phi * fm[t]);
        sv[t] = fv[t] + j * j * (sv[t + 1] - pv[t + 1]);
    }

    Ok(KalmanOutput {
        filtered: ExactMarginals::new(fm, fv)?,
        smoothed: ExactMarginals::new(sm, sv)?,
        predicted_variances: pv,
        gains,
    })
}

/// Exact smoothing means and variances of the linear Gaussian model.
pub fn kalman_smoother(params: &LgmParams, obs: &ObservationRecord) -> Result<ExactMarginals> {
    Ok(kalman(params, obs)?.smoothed)
}

/// Posterior mean and variance of `sum_t X_t`, using the smoothed lag
/// covariances `Cov(X_s, X_t) = J_s ... J_{t-1} Var(X_t)` for `s < t`.
pub fn kalman_additive_moments(params: &LgmParams, obs: &ObservationRecord) -> Result<FunctionalMoments> {
    let k = kalman(params, obs)?;
    let n = obs.horizon();
    let mean = k.smoothed.means.iter().sum();
    let mut var = 0.0;
    for t in 0..n {
        let vt = k.smoothed.variances[t];
        var += vt;
        let mut prod = 1.0;
        for s in (0..t).rev() {
            prod *= k.gains[s];
            var += 2.0 * prod * vt;
        }
    }
    Ok(FunctionalMoments { mean, variance: var })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> LgmParams {
        LgmParams { phi: 0.9, sigma_u: 0.6, sigma_v: 1.0 }
    }

    #[test]
    fn single_observation_is_a_conjugate_update() {
        let p = params();
        let p0 = p.stationary_variance();
        let y = 1.7;
        let out = kalman_smoother(&p, &ObservationRecord::new(vec![y]).unwrap()).unwrap();
        assert!((out.means[0] - p0 * y / (p0 + 1.0)).abs() < 1e-14);
        assert!((out.variances[0] - p0 / (p0 + 1.0)).abs() < 1e-14);
    }

    #[test]
    fn uninformative_observations_recover_the_prior() {
        let p = LgmParams { phi: 0.9, sigma_u: 0.6, sigma_v: 1e8 };
        let obs = ObservationRecord::new(vec![1.0, -2.0, 0.5, 3.0, 0.0]).unwrap();
        let out = kalman_smoother(&p, &obs).unwrap();
        for t in 0..5 {
            assert!(out.means[t].abs() < 1e-4);
            assert!((out.variances[t] - p.stationary_variance()).abs() < 1e-4);
        }
    }

    #[test]
    fn smoothing_never_loses_information() {
        let obs = ObservationRecord::new(vec![0.3, -1.0, 2.0, 0.1, 0.7, -0.4]).unwrap();
        let k = kalman(&params(), &obs).unwrap();
        for t in 0..6 {
            assert!(k.smoothed.variances[t] <= k.filtered.variances[t] + 1e-15);
        }
    }
}
