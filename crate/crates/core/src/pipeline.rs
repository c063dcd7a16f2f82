//! End-to-end smoothing runs: forward filter, optional backward simulation,
//! optional path improvement.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mhips::{
    mhips_improve, FiniteGibbsKernel, FiniteUniformKernel, GibbsKernel, LgmGibbsKernel, MhipsOptions, MhipsTrace,
    Neighbors, StoVolGibbsKernel, StoVolMwgKernel,
};
use crate::model::{AnyModel, HmmModel, ObservationRecord};
use crate::rng::RngStreams;
use crate::smc::{bootstrap_filter, ffbsi, filter_smoother, fully_adapted_filter_lgm, FilterFrame, PathEnsemble, ResamplePolicy};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    FilterSmoother,
    Ffbsi,
    /// Filter-Smoother followed by improvement passes.
    Mhifs,
    /// FFBSi followed by improvement passes.
    MhiFfbsi,
}

impl Algorithm {
    pub fn improves(self) -> bool {
        matches!(self, Algorithm::Mhifs | Algorithm::MhiFfbsi)
    }

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::FilterSmoother => "filter_smoother",
            Algorithm::Ffbsi => "ffbsi",
            Algorithm::Mhifs => "mhifs",
            Algorithm::MhiFfbsi => "mhi_ffbsi",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    #[default]
    Gibbs,
    Mwg,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForwardFilter {
    #[default]
    Bootstrap,
    FullyAdapted,
}

/// Any of the built-in kernels, dispatched by model and kernel kind.
#[derive(Clone, Debug)]
pub enum AnyKernel {
    Lgm(LgmGibbsKernel),
    StoVolGibbs(StoVolGibbsKernel),
    StoVolMwg(StoVolMwgKernel),
    FiniteGibbs(FiniteGibbsKernel),
    FiniteUniform(FiniteUniformKernel),
}

/// The kernel of `kind` for `model`. The linear Gaussian model only has an
/// exact Gibbs kernel; on finite models `Mwg` means uniform proposals.
pub fn make_kernel(model: &AnyModel, kind: KernelKind) -> Result<AnyKernel> {
    Ok(match (model, kind) {
        (AnyModel::Lgm(m), KernelKind::Gibbs) => AnyKernel::Lgm(LgmGibbsKernel::new(m.params())?),
        (AnyModel::Lgm(_), KernelKind::Mwg) => {
            return Err(Error::Config("the lgm model has no mwg kernel; use gibbs".into()))
        }
        (AnyModel::StoVol(m), KernelKind::Gibbs) => AnyKernel::StoVolGibbs(StoVolGibbsKernel::new(m.params())?),
        (AnyModel::StoVol(m), KernelKind::Mwg) => AnyKernel::StoVolMwg(StoVolMwgKernel::new(m.params())?),
        (AnyModel::Finite(m), KernelKind::Gibbs) => AnyKernel::FiniteGibbs(FiniteGibbsKernel::new(m.clone())),
        (AnyModel::Finite(m), KernelKind::Mwg) => AnyKernel::FiniteUniform(FiniteUniformKernel::new(m.n_states())?),
    })
}

macro_rules! each_kernel {
    ($k:expr, $inner:ident => $body:expr) => {
        match $k {
            AnyKernel::Lgm($inner) => $body,
            AnyKernel::StoVolGibbs($inner) => $body,
            AnyKernel::StoVolMwg($inner) => $body,
            AnyKernel::FiniteGibbs($inner) => $body,
            AnyKernel::FiniteUniform($inner) => $body,
        }
    };
}

impl GibbsKernel for AnyKernel {
    fn is_exact_gibbs(&self) -> bool {
        each_kernel!(self, k => k.is_exact_gibbs())
    }

    fn propose<R: Rng + ?Sized>(&self, nb: Neighbors<'_>, y: f64, rng: &mut R, out: &mut [f64]) -> Result<()> {
        each_kernel!(self, k => k.propose(nb, y, rng, out))
    }

    fn log_proposal_density(&self, nb: Neighbors<'_>, y: f64, x: &[f64]) -> f64 {
        each_kernel!(self, k => k.log_proposal_density(nb, y, x))
    }

    fn log_accept_ratio<M: HmmModel>(
        &self,
        model: &M,
        nb: Neighbors<'_>,
        y: f64,
        current: &[f64],
        candidate: &[f64],
    ) -> Result<f64> {
        each_kernel!(self, k => k.log_accept_ratio(model, nb, y, current, candidate))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmootherSpec {
    pub algorithm: Algorithm,
    #[serde(default)]
    pub kernel: KernelKind,
    pub n_particles: usize,
    #[serde(default)]
    pub passes: usize,
    #[serde(default = "default_true")]
    pub resample_first: bool,
    #[serde(default)]
    pub forward: ForwardFilter,
}

fn default_true() -> bool {
    true
}

impl SmootherSpec {
    pub fn new(algorithm: Algorithm, n_particles: usize, passes: usize) -> Self {
        Self {
            algorithm,
            kernel: KernelKind::Gibbs,
            n_particles,
            passes,
            resample_first: true,
            forward: ForwardFilter::Bootstrap,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SmootherOutput {
    pub ensemble: PathEnsemble,
    pub trace: Option<MhipsTrace>,
}

fn forward(model: &AnyModel, obs: &ObservationRecord, spec: &SmootherSpec, streams: &RngStreams) -> Result<Vec<FilterFrame>> {
    match (spec.forward, model) {
        (ForwardFilter::Bootstrap, _) => {
            bootstrap_filter(model, obs, spec.n_particles, streams, ResamplePolicy::EveryStep)
        }
        (ForwardFilter::FullyAdapted, AnyModel::Lgm(m)) => {
            fully_adapted_filter_lgm(m.params(), obs, spec.n_particles, streams)
        }
        (ForwardFilter::FullyAdapted, _) => {
            Err(Error::Config("the fully adapted filter is only available for the lgm model".into()))
        }
    }
}

/// Runs the smoother described by `spec`. Stages draw from disjoint children
/// of `streams`: 0 for the filter, 1 for backward simulation, 2 for passes.
pub fn run_smoother(
    model: &AnyModel,
    obs: &ObservationRecord,
    spec: &SmootherSpec,
    streams: &RngStreams,
) -> Result<SmootherOutput> {
    if spec.n_particles == 0 {
        return Err(Error::Config("n_particles must be at least 1".into()));
    }
    let kernel = if spec.algorithm.improves() { Some(make_kernel(model, spec.kernel)?) } else { None };
    let frames = forward(model, obs, spec, &streams.child(0))?;
    let initial = match spec.algorithm {
        Algorithm::FilterSmoother | Algorithm::Mhifs => filter_smoother(&frames)?,
        Algorithm::Ffbsi | Algorithm::MhiFfbsi => {
            let bound = model
                .transition_density_bound()
                .ok_or_else(|| Error::Config("ffbsi needs a bounded transition density".into()))?;
            ffbsi(&frames, model, spec.n_particles, &streams.child(1), bound)?
        }
    };
    match kernel {
        None => Ok(SmootherOutput { ensemble: initial, trace: None }),
        Some(k) => {
            let opts = MhipsOptions { passes: spec.passes, resample_first: spec.resample_first };
            let (ensemble, trace) = mhips_improve(&initial, model, obs, &k, opts, &streams.child(2))?;
            Ok(SmootherOutput { ensemble, trace: Some(trace) })
        }
    }
}

/// Runs `f` for each repetition on its own child stream family, in parallel,
/// returning results in repetition order. Errors carry the repetition index.
pub fn run_repetitions<T, F>(repetitions: usize, streams: &RngStreams, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, &RngStreams) -> Result<T> + Sync,
{
    (0..repetitions)
        .into_par_iter()
        .map(|r| f(r, &streams.child(r as u64)).map_err(|e| Error::Repetition { index: r, source: Box::new(e) }))
        .collect()
}
