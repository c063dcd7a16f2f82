//! Shared fixtures for the benchmarks.

use pathsmooth_core::model::simulate;
use pathsmooth_core::smc::{bootstrap_filter, filter_smoother, FilterFrame, PathEnsemble, ResamplePolicy};
use pathsmooth_core::{AnyModel, Lgm, LgmParams, ObservationRecord, RngStreams, StoVol, StoVolParams};

pub const HORIZON: usize = 101;

pub fn lgm() -> AnyModel {
    AnyModel::Lgm(Lgm::new(LgmParams { phi: 0.9, sigma_u: 0.6, sigma_v: 1.0 }).expect("valid parameters"))
}

pub fn stovol() -> AnyModel {
    AnyModel::StoVol(StoVol::new(StoVolParams { alpha: 0.3, sigma: 0.5, beta: 1.0 }).expect("valid parameters"))
}

pub fn observations(model: &AnyModel) -> ObservationRecord {
    simulate(model, HORIZON, 7).expect("simulation succeeds")
}

pub fn frames(model: &AnyModel, obs: &ObservationRecord, n: usize) -> Vec<FilterFrame> {
    bootstrap_filter(model, obs, n, &RngStreams::new(1), ResamplePolicy::EveryStep).expect("filter runs")
}

pub fn initial_ensemble(model: &AnyModel, obs: &ObservationRecord, n: usize) -> PathEnsemble {
    filter_smoother(&frames(model, obs, n)).expect("ancestry traces")
}
