use rand::Rng;
use rand_distr::Exp1;

use super::PathEnsemble;

/// `n_out` iid categorical draws from normalised `weights`, returned in
/// nondecreasing order. Uses sorted uniforms from exponential spacings, so the
/// cost is O(N + n_out).
pub fn multinomial_indices<R: Rng + ?Sized>(weights: &[f64], n_out: usize, rng: &mut R) -> Vec<usize> {
    let spacings: Vec<f64> = (0..=n_out).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = spacings.iter().sum();
    let last = weights.iter().rposition(|w| *w > 0.0).unwrap_or(weights.len() - 1);
    let mut out = Vec::with_capacity(n_out);
    let mut acc_u = 0.0;
    let mut acc_w = weights[0];
    let mut j = 0;
    for e in &spacings[..n_out] {
        acc_u += e;
        let u = acc_u / total;
        while u >= acc_w && j < last {
            j += 1;
            acc_w += weights[j];
        }
        out.push(j);
    }
    out
}

/// Multinomial resampling of whole paths; the result is equally weighted.
pub fn multinomial_resample<R: Rng + ?Sized>(ensemble: &PathEnsemble, rng: &mut R) -> PathEnsemble {
    let n = ensemble.n_particles();
    let idx = multinomial_indices(&ensemble.weights(), n, rng);
    let mut paths = Vec::with_capacity(ensemble.paths().len());
    for i in idx {
        paths.extend_from_slice(ensemble.path(i));
    }
    PathEnsemble::uniform(n, ensemble.horizon(), ensemble.state_dim(), paths)
        .expect("resampled ensemble keeps the input shape")
}
