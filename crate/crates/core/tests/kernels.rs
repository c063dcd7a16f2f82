mod common;

use pathsmooth_core::diagnostics::stats::{ks_one_sample, ks_two_sample, total_variation};
use pathsmooth_core::exact::{grid_conditional_cdf, GridSpec};
use pathsmooth_core::mhips::{
    generic_log_accept_ratio, log_target, mhips_improve, ForceMetropolis, GibbsKernel, LgmGibbsKernel, MhipsOptions,
    Neighbors, StoVolGibbsKernel, StoVolMwgKernel,
};
use pathsmooth_core::model::simulate;
use pathsmooth_core::pipeline::{run_smoother, Algorithm, SmootherSpec};
use pathsmooth_core::{AnyModel, HmmModel, RngStreams};
use rand::Rng;

/// A model whose log densities are all shifted by constants.
struct Shifted<M>(M, f64, f64, f64);

impl<M: HmmModel> HmmModel for Shifted<M> {
    fn state_dim(&self) -> usize {
        self.0.state_dim()
    }
    fn log_initial_density(&self, x: &[f64]) -> f64 {
        self.0.log_initial_density(x) + self.1
    }
    fn log_transition_density(&self, x: &[f64], x_next: &[f64]) -> f64 {
        self.0.log_transition_density(x, x_next) + self.2
    }
    fn log_observation_density(&self, x: &[f64], y: f64) -> f64 {
        self.0.log_observation_density(x, y) + self.3
    }
    fn sample_initial<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        self.0.sample_initial(rng, out)
    }
    fn sample_transition<R: Rng + ?Sized>(&self, x: &[f64], rng: &mut R, out: &mut [f64]) {
        self.0.sample_transition(x, rng, out)
    }
    fn sample_observation<R: Rng + ?Sized>(&self, x: &[f64], rng: &mut R) -> f64 {
        self.0.sample_observation(x, rng)
    }
}

fn all_cases<'a>(u: &'a [f64], w: &'a [f64]) -> [Neighbors<'a>; 4] {
    [
        Neighbors::Interior { prev: u, next: w },
        Neighbors::Left { next: w },
        Neighbors::Right { prev: u },
        Neighbors::Alone,
    ]
}

#[test]
fn lgm_gibbs_ratio_is_one() {
    let model = common::reference_lgm();
    let k = LgmGibbsKernel::new(&common::reference_lgm_params()).unwrap();
    let mut rng = RngStreams::new(1).stream(0);
    for _ in 0..1000 {
        let mut draw = || [rng.random_range(-4.0..4.0)];
        let (u, v, w, x) = (draw(), draw(), draw(), draw());
        let y: f64 = rng.random_range(-4.0..4.0);
        for nb in all_cases(&u, &w) {
            for (a, b) in [(&v, &x), (&x, &v)] {
                let lr = generic_log_accept_ratio(&model, &k, nb, y, a, b).unwrap();
                assert!((lr.exp() - 1.0).abs() < 1e-12, "{lr}");
            }
        }
    }
}

#[test]
fn lgm_conditional_matches_numeric_mode_and_curvature() {
    let model = common::reference_lgm();
    let k = LgmGibbsKernel::new(&common::reference_lgm_params()).unwrap();
    let (u, w, y) = ([1.0], [1.0], 0.5);
    let nb = Neighbors::Interior { prev: &u, next: &w };
    let f = |x: f64| log_target(&model, nb, y, &[x]);
    let (mut lo, mut hi) = (-10.0, 10.0);
    for _ in 0..200 {
        let (a, b) = (lo + (hi - lo) / 3.0, hi - (hi - lo) / 3.0);
        if f(a) < f(b) {
            lo = a;
        } else {
            hi = b;
        }
    }
    let mode = 0.5 * (lo + hi);
    let h = 1e-3;
    let curvature = -(f(mode + h) - 2.0 * f(mode) + f(mode - h)) / (h * h);
    let (mean, var) = k.conditional(nb, y);
    assert!((mean - mode).abs() < 1e-6);
    assert!((var - 1.0 / curvature).abs() < 1e-5);
}

#[test]
fn lgm_sampler_matches_its_density() {
    let model = common::reference_lgm();
    let k = LgmGibbsKernel::new(&common::reference_lgm_params()).unwrap();
    let mut rng = RngStreams::new(2).stream(0);
    let (u, w) = ([0.7], [-1.2]);
    let grid = GridSpec::new(-8.0, 8.0, 8001).unwrap();
    for nb in all_cases(&u, &w) {
        let mut out = [0.0];
        let xs: Vec<f64> = (0..10_000)
            .map(|_| {
                k.propose(nb, 0.4, &mut rng, &mut out).unwrap();
                out[0]
            })
            .collect();
        let cdf = grid_conditional_cdf(|x| log_target(&model, nb, 0.4, &[x]), &grid).unwrap();
        let r = ks_one_sample(&xs, |x| cdf.cdf(x));
        assert!(r.p_value > 0.01, "{nb:?}: p = {}", r.p_value);
    }
}

#[test]
fn stovol_rejection_sampler_law() {
    let model = common::reference_stovol();
    let k = StoVolGibbsKernel::new(&common::reference_stovol_params()).unwrap();
    let mut rng = RngStreams::new(3).stream(0);
    let (u, w) = ([0.0], [0.0]);
    let grid = GridSpec::new(-10.0, 10.0, 8001).unwrap();
    for nb in all_cases(&u, &w) {
        for y in [1.0, 0.1, 3.0] {
            let mut worst: f64 = 0.0;
            let xs: Vec<f64> = (0..10_000)
                .map(|_| {
                    let d = k.sample_full_conditional(nb, y, &mut rng).unwrap();
                    worst = worst.max(d.max_accept_prob);
                    d.value
                })
                .collect();
            assert!(worst <= 1.0 + 1e-9);
            let cdf = grid_conditional_cdf(|x| log_target(&model, nb, y, &[x]), &grid).unwrap();
            let r = ks_one_sample(&xs, |x| cdf.cdf(x));
            // Endpoint cases share one family-wise level of 0.01.
            let level = if matches!(nb, Neighbors::Interior { .. }) { 0.01 } else { 0.01 / 9.0 };
            assert!(r.p_value > level, "{nb:?} y={y}: p = {}", r.p_value);
        }
    }
}

/// One propose-accept step on a discretised state space, with proposal masses
/// proportional to the kernel's density at the nodes.
fn discretised_step<M: HmmModel, K: GibbsKernel>(model: &M, k: &K, nb: Neighbors<'_>, y: f64, nodes: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let normalise = |v: Vec<f64>| {
        let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = v.iter().map(|l| (l - max).exp()).collect();
        let s: f64 = e.iter().sum();
        e.into_iter().map(|x| x / s).collect::<Vec<_>>()
    };
    let target = normalise(nodes.iter().map(|x| log_target(model, nb, y, &[*x])).collect());
    let q = normalise(nodes.iter().map(|x| k.log_proposal_density(nb, y, &[*x])).collect());
    let mut next = vec![0.0; nodes.len()];
    for (i, &pi) in target.iter().enumerate() {
        let mut stay = 1.0;
        for (j, &qj) in q.iter().enumerate() {
            if j == i {
                continue;
            }
            let a = k.log_accept_ratio(model, nb, y, &[nodes[i]], &[nodes[j]]).unwrap().exp();
            next[j] += pi * qj * a;
            stay -= qj * a;
        }
        next[i] += pi * stay;
    }
    (target, next)
}

#[test]
fn stovol_mwg_preserves_discretised_conditional() {
    let model = common::reference_stovol();
    let k = StoVolMwgKernel::new(&common::reference_stovol_params()).unwrap();
    let nodes: Vec<f64> = (0..301).map(|i| -6.0 + 0.04 * i as f64).collect();
    let (u, w) = ([0.3], [-0.2]);
    for nb in all_cases(&u, &w) {
        for y in [0.0, 0.5, 2.5] {
            let (target, next) = discretised_step(&model, &k, nb, y, &nodes);
            assert!(total_variation(&target, &next) < 1e-10);
        }
    }
}

#[test]
fn acceptance_ratio_ignores_normalising_constants() {
    let base = common::reference_stovol();
    let shifted = Shifted(common::reference_stovol(), 3.0, -7.5, 11.0);
    let k = StoVolMwgKernel::new(&common::reference_stovol_params()).unwrap();
    let forced = ForceMetropolis(StoVolGibbsKernel::new(&common::reference_stovol_params()).unwrap());
    let mut rng = RngStreams::new(4).stream(0);
    for _ in 0..200 {
        let mut draw = || [rng.random_range(-3.0..3.0)];
        let (u, v, w, x) = (draw(), draw(), draw(), draw());
        let y: f64 = rng.random_range(-3.0..3.0);
        for nb in all_cases(&u, &w) {
            let a = generic_log_accept_ratio(&base, &k, nb, y, &v, &x).unwrap();
            let b = generic_log_accept_ratio(&shifted, &k, nb, y, &v, &x).unwrap();
            assert!((a - b).abs() < 1e-9);
            assert!(a <= 0.0);
            let g = forced.log_accept_ratio(&shifted, nb, y, &v, &x).unwrap();
            assert!(g.exp() > 1.0 - 1e-9);
        }
    }
}

#[test]
fn forced_metropolis_matches_exact_gibbs() {
    let m = AnyModel::Lgm(common::reference_lgm());
    let p = common::reference_lgm_params();
    let obs = simulate(&m, 20, 6).unwrap();
    let init = run_smoother(&m, &obs, &SmootherSpec::new(Algorithm::FilterSmoother, 4000, 0), &RngStreams::new(7))
        .unwrap()
        .ensemble;
    let exact = LgmGibbsKernel::new(&p).unwrap();
    let forced = ForceMetropolis(exact.clone());
    let opts = MhipsOptions::new(5);
    let (a, ta) = mhips_improve(&init, &m, &obs, &exact, opts, &RngStreams::new(8)).unwrap();
    let (b, tb) = mhips_improve(&init, &m, &obs, &forced, opts, &RngStreams::new(9)).unwrap();
    assert_eq!(ta.accepts, ta.proposals);
    let rate: f64 = tb.accepts.iter().sum::<u64>() as f64 / tb.proposals.iter().sum::<u64>() as f64;
    assert!(rate > 1.0 - 1e-9, "{rate}");
    for t in [0, 10, 19] {
        let xa: Vec<f64> = (0..4000).map(|i| a.state(i, t)[0]).collect();
        let xb: Vec<f64> = (0..4000).map(|i| b.state(i, t)[0]).collect();
        assert!(ks_two_sample(&xa, &xb).p_value > 0.01);
    }
}
