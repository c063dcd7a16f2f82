mod common;

use nalgebra::{DMatrix, DVector};
use pathsmooth_core::exact::{
    finite_additive_moments, finite_smoother, grid_additive_moments, grid_smoother, kalman_additive_moments,
    kalman_smoother, GridSpec,
};
use pathsmooth_core::mhips::{exact_path_distribution, path_index};
use pathsmooth_core::model::simulate;
use pathsmooth_core::{Lgm, LgmParams, ObservationRecord, RngStreams};
use rand::Rng;

/// Posterior of the whole latent vector by dense linear algebra.
fn dense_posterior(p: &LgmParams, y: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
    let n = y.len();
    let p0 = p.stationary_variance();
    let prior = DMatrix::from_fn(n, n, |i, j| p0 * p.phi.powi((i as i32 - j as i32).abs()));
    let r = p.sigma_v * p.sigma_v;
    let prec = prior.try_inverse().unwrap() + DMatrix::identity(n, n) / r;
    let cov = prec.try_inverse().unwrap();
    let mean = &cov * DVector::from_column_slice(y) / r;
    (mean, cov)
}

#[test]
fn kalman_matches_dense_gaussian_posterior() {
    let mut rng = RngStreams::new(21).stream(0);
    for case in 0..10 {
        let p = LgmParams {
            phi: rng.random_range(-0.95..0.95),
            sigma_u: rng.random_range(0.2..2.0),
            sigma_v: rng.random_range(0.2..2.0),
        };
        let obs = simulate(&Lgm::new(p).unwrap(), 12, case).unwrap();
        let (mean, cov) = dense_posterior(&p, &obs.observations);
        let k = kalman_smoother(&p, &obs).unwrap();
        for t in 0..12 {
            assert!((k.means[t] - mean[t]).abs() < 1e-9);
            assert!((k.variances[t] - cov[(t, t)]).abs() < 1e-9);
        }
        let a = kalman_additive_moments(&p, &obs).unwrap();
        assert!((a.mean - mean.sum()).abs() < 1e-9);
        assert!((a.variance - cov.sum()).abs() < 1e-9);
    }
}

#[test]
fn grid_additive_moments_match_kalman() {
    let p = common::reference_lgm_params();
    let m = Lgm::new(p).unwrap();
    let obs = simulate(&m, 15, 3).unwrap();
    let sd = p.stationary_variance().sqrt();
    let grid = GridSpec::new(-6.0 * sd, 6.0 * sd, 2000).unwrap();
    let g = grid_additive_moments(&m, &obs, &grid).unwrap();
    let k = kalman_additive_moments(&p, &obs).unwrap();
    assert!((g.mean - k.mean).abs() < 1e-4);
    assert!((g.variance - k.variance).abs() < 1e-4 * k.variance);
    let gm = grid_smoother(&m, &obs, &grid).unwrap();
    let km = kalman_smoother(&p, &obs).unwrap();
    for t in 0..15 {
        assert!((gm.means[t] - km.means[t]).abs() < 1e-4);
        assert!((gm.variances[t] - km.variances[t]).abs() < 1e-4);
    }
}

#[test]
fn finite_forward_backward_matches_enumeration() {
    let m = common::three_state();
    let obs = ObservationRecord::new(vec![1.0, 0.0, 0.0, 1.0, 1.0]).unwrap();
    let joint = exact_path_distribution(&m, &obs).unwrap();
    let fb = finite_smoother(&m, &obs).unwrap();
    let mut marg = vec![vec![0.0; 3]; 5];
    let (mut s1, mut s2) = (0.0, 0.0);
    let mut path = [0.0; 5];
    for (idx, p) in joint.iter().enumerate() {
        let mut k = idx;
        for x in path.iter_mut() {
            *x = (k % 3) as f64;
            k /= 3;
        }
        assert_eq!(path_index(&path, 3), idx);
        for t in 0..5 {
            marg[t][path[t] as usize] += p;
        }
        let s: f64 = path.iter().sum();
        s1 += p * s;
        s2 += p * s * s;
    }
    for t in 0..5 {
        for i in 0..3 {
            assert!((fb.masses[t][i] - marg[t][i]).abs() < 1e-12);
        }
    }
    let a = finite_additive_moments(&m, &obs).unwrap();
    assert!((a.mean - s1).abs() < 1e-12);
    assert!((a.variance - (s2 - s1 * s1)).abs() < 1e-12);
}
