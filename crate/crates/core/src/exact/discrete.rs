use crate::error::{Error, Result};

use super::FunctionalMoments;

/// A hidden Markov chain on finitely many support points, with quadrature
/// weights so that grid discretisations of continuous models and genuinely
/// finite models share one forward-backward implementation.
#[derive(Clone, Debug)]
pub struct DiscreteChain {
    values: Vec<f64>,
    weights: Vec<f64>,
    initial: Vec<f64>,
    transition: Vec<f64>,
    log_emission: Vec<Vec<f64>>,
}

struct Forward {
    /// Normalised filter masses (sum to one).
    filter: Vec<Vec<f64>>,
}

impl DiscreteChain {
    /// `initial[i]` and `transition[i * n + j]` are densities (or probabilities
    /// when all weights are one); `log_emission[t][j]` is the log observation
    /// density at time `t` in state `j`.
    pub fn new(
        values: Vec<f64>,
        weights: Vec<f64>,
        initial: Vec<f64>,
        transition: Vec<f64>,
        log_emission: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let n = values.len();
        if weights.len() != n || initial.len() != n || transition.len() != n * n {
            return Err(Error::Dimension { expected: n, got: weights.len().min(initial.len()) });
        }
        if log_emission.is_empty() || log_emission.iter().any(|e| e.len() != n) {
            return Err(Error::Dimension { expected: n, got: log_emission.first().map_or(0, Vec::len) });
        }
        Ok(Self { values, weights, initial, transition, log_emission })
    }

    pub fn n_points(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn emission(&self, t: usize) -> Vec<f64> {
        let le = &self.log_emission[t];
        let max = le.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY || max.is_nan() {
            return vec![0.0; le.len()];
        }
        le.iter().map(|l| (l - max).exp()).collect()
    }

    fn forward(&self) -> Result<Forward> {
        let n = self.n_points();
        let horizon = self.log_emission.len();
        let mut filter = Vec::with_capacity(horizon);
        let g0 = self.emission(0);
        let mut f: Vec<f64> = (0..n).map(|j| self.weights[j] * self.initial[j] * g0[j]).collect();
        normalise(&mut f, 0)?;
        filter.push(f);
        for t in 1..horizon {
            let prev = &filter[t - 1];
            let g = self.emission(t);
            let mut next = vec![0.0; n];
            for (i, &p) in prev.iter().enumerate() {
                if p == 0.0 {
                    continue;
                }
                let row = &self.transition[i * n..(i + 1) * n];
                for j in 0..n {
                    next[j] += p * row[j];
                }
            }
            for j in 0..n {
                next[j] *= self.weights[j] * g[j];
            }
            normalise(&mut next, t)?;
            filter.push(next);
        }
        Ok(Forward { filter })
    }

    /// Smoothing masses `P(X_t = x_j | y_{0:T})`, one vector per time step.
    pub fn smoothing_masses(&self) -> Result<Vec<Vec<f64>>> {
        let n = self.n_points();
        let horizon = self.log_emission.len();
        let fw = self.forward()?;
        let mut out = vec![Vec::new(); horizon];
        let mut beta = vec![1.0; n];
        for t in (0..horizon).rev() {
            if t < horizon - 1 {
                let g = self.emission(t + 1);
                let w: Vec<f64> = (0..n).map(|j| self.weights[j] * g[j] * beta[j]).collect();
                let mut nb = vec![0.0; n];
                for (i, b) in nb.iter_mut().enumerate() {
                    let row = &self.transition[i * n..(i + 1) * n];
                    *b = row.iter().zip(&w).map(|(m, w)| m * w).sum();
                }
                let max = nb.iter().copied().fold(0.0, f64::max);
                if max == 0.0 {
                    return Err(Error::GridCoverage { t });
                }
                nb.iter_mut().for_each(|b| *b /= max);
                beta = nb;
            }
            let mut m: Vec<f64> = fw.filter[t].iter().zip(&beta).map(|(f, b)| f * b).collect();
            normalise(&mut m, t)?;
            out[t] = m;
        }
        Ok(out)
    }

    /// Posterior mean and variance of `sum_t X_t`, by the forward recursion for
    /// additive functionals: O(T n^2), no pairwise marginals needed.
    pub fn additive_moments(&self) -> Result<FunctionalMoments> {
        let n = self.n_points();
        let horizon = self.log_emission.len();
        let fw = self.forward()?;
        let mut tau: Vec<f64> = self.values.clone();
        let mut sq: Vec<f64> = self.values.iter().map(|x| x * x).collect();
        for t in 1..horizon {
            let prev = &fw.filter[t - 1];
            let mut new_tau = vec![0.0; n];
            let mut new_sq = vec![0.0; n];
            for j in 0..n {
                let mut z = 0.0;
                let mut a = 0.0;
                let mut b = 0.0;
                for i in 0..n {
                    let k = prev[i] * self.transition[i * n + j];
                    z += k;
                    a += k * tau[i];
                    b += k * sq[i];
                }
                let x = self.values[j];
                if z > 0.0 {
                    a /= z;
                    b /= z;
                }
                new_tau[j] = a + x;
                new_sq[j] = b + 2.0 * x * a + x * x;
            }
            tau = new_tau;
            sq = new_sq;
        }
        let last = &fw.filter[horizon - 1];
        let mean: f64 = last.iter().zip(&tau).map(|(f, v)| f * v).sum();
        let second: f64 = last.iter().zip(&sq).map(|(f, v)| f * v).sum();
        Ok(FunctionalMoments { mean, variance: (second - mean * mean).max(0.0) })
    }
}

fn normalise(v: &mut [f64], t: usize) -> Result<()> {
    let s: f64 = v.iter().sum();
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::GridCoverage { t });
    }
    v.iter_mut().for_each(|x| *x /= s);
    Ok(())
}
