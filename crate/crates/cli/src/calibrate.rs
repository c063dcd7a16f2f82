//! Particle counts matched to a wall-clock budget, assuming cost linear in N.

use std::time::Instant;

use pathsmooth_core::pipeline::{run_smoother, Algorithm};
use pathsmooth_core::{AnyModel, ObservationRecord, RngStreams};
use serde::{Deserialize, Serialize};

use crate::config::SmootherSection;
use crate::error::{CliError, CliResult};

pub const PROBE_REPEATS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Probe {
    pub n: usize,
    pub seconds: f64,
}

/// Least-squares slope of seconds against N through the origin.
pub fn fit_linear_cost(probes: &[Probe]) -> CliResult<f64> {
    let sxx: f64 = probes.iter().map(|p| (p.n as f64).powi(2)).sum();
    let sxy: f64 = probes.iter().map(|p| p.n as f64 * p.seconds).sum();
    let a = sxy / sxx;
    if !(a > 0.0 && a.is_finite()) {
        return Err(CliError::Config(format!("cannot fit a positive per-particle cost from {probes:?}")));
    }
    Ok(a)
}

/// Coefficient of determination of `seconds = a N` about the mean of seconds.
pub fn r_squared(probes: &[Probe], a: f64) -> f64 {
    let mean = probes.iter().map(|p| p.seconds).sum::<f64>() / probes.len() as f64;
    let ss_res: f64 = probes.iter().map(|p| (p.seconds - a * p.n as f64).powi(2)).sum();
    let ss_tot: f64 = probes.iter().map(|p| (p.seconds - mean).powi(2)).sum();
    1.0 - ss_res / ss_tot
}

pub fn calibrated_n(per_particle_seconds: f64, budget_seconds: f64) -> usize {
    ((budget_seconds / per_particle_seconds).floor() as usize).max(1)
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub algorithm: Algorithm,
    pub probe_n: usize,
    pub probe_seconds: Vec<f64>,
    pub per_particle_seconds: f64,
    pub calibrated_n: usize,
}

/// Wall time of one smoother run, excluding everything but the algorithm.
pub fn time_run(
    model: &AnyModel,
    obs: &ObservationRecord,
    smoother: &SmootherSection,
    algorithm: Algorithm,
    n: usize,
    streams: &RngStreams,
) -> CliResult<f64> {
    let mut sec = smoother.clone();
    sec.algorithm = algorithm;
    if !algorithm.improves() {
        sec.kernel = None;
    }
    let spec = sec.spec(n);
    let start = Instant::now();
    run_smoother(model, obs, &spec, streams)?;
    Ok(start.elapsed().as_secs_f64())
}

pub fn calibrate_particles(
    model: &AnyModel,
    obs: &ObservationRecord,
    smoother: &SmootherSection,
    algorithms: &[Algorithm],
    probe_n: usize,
    budget_seconds: f64,
    streams: &RngStreams,
) -> CliResult<Vec<Calibration>> {
    algorithms
        .iter()
        .map(|&algorithm| {
            let probe_seconds = (0..PROBE_REPEATS)
                .map(|r| time_run(model, obs, smoother, algorithm, probe_n, &streams.child(r as u64)))
                .collect::<CliResult<Vec<f64>>>()?;
            let a = fit_linear_cost(&[Probe { n: probe_n, seconds: median(&probe_seconds) }])?;
            log::info!("{}: {probe_n} particles in {probe_seconds:?} s", algorithm.name());
            Ok(Calibration {
                algorithm,
                probe_n,
                probe_seconds,
                per_particle_seconds: a,
                calibrated_n: calibrated_n(a, budget_seconds),
            })
        })
        .collect()
}
