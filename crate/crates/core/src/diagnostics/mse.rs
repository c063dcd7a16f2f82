use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::FunctionalMoments;
use crate::io::fmt_f64;
use crate::mhips::{mhips_improve_tracked, GibbsKernel, MhipsOptions};
use crate::model::{HmmModel, ObservationRecord};
use crate::rng::RngStreams;
use crate::smc::PathEnsemble;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightMode {
    /// Keep the initial weights through the passes.
    Original,
    /// Resample to equal weights before the first pass.
    Resampled,
}

impl fmt::Display for WeightMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeightMode::Original => "original",
            WeightMode::Resampled => "resampled",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MseRow {
    pub k: usize,
    pub weight_mode: WeightMode,
    pub mse: f64,
    pub predicted_limit: f64,
}

impl MseRow {
    pub fn write_csv<W: Write>(rows: &[MseRow], w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["k", "weight_mode", "mse", "predicted_limit"])?;
        for r in rows {
            wr.write_record([r.k.to_string(), r.weight_mode.to_string(), fmt_f64(r.mse), fmt_f64(r.predicted_limit)])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Large-pass limit of the mean squared error of `sum_i w_i h(xi_i[k])`.
pub fn predicted_mse_limit(var_h: f64, sum_squared_weights: f64) -> f64 {
    var_h * sum_squared_weights
}

/// Mean squared error of the improved estimator of `Pi h` after each pass count
/// in `schedule`, over `repetitions` independent runs. `init` builds the
/// initial ensemble of one repetition from its own streams.
#[allow(clippy::too_many_arguments)]
pub fn mse_vs_passes<M, K, F>(
    model: &M,
    obs: &ObservationRecord,
    kernel: &K,
    init: F,
    h: &(dyn Fn(&[f64]) -> f64 + Sync),
    oracle: Option<FunctionalMoments>,
    schedule: &[usize],
    mode: WeightMode,
    repetitions: usize,
    streams: &RngStreams,
) -> Result<Vec<MseRow>>
where
    M: HmmModel,
    K: GibbsKernel,
    F: Fn(&RngStreams) -> Result<PathEnsemble> + Sync,
{
    let oracle = oracle.ok_or_else(|| Error::Config("mse_vs_passes needs an exact value of the functional".into()))?;
    if repetitions == 0 {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    let k_max = schedule.iter().copied().max().unwrap_or(0);
    let opts = MhipsOptions { passes: k_max, resample_first: mode == WeightMode::Resampled };
    let runs: Vec<Result<(Vec<f64>, f64)>> = (0..repetitions)
        .into_par_iter()
        .map(|r| {
            let rs = streams.child(r as u64);
            let start = init(&rs.child(0))?;
            let (out, trace) = mhips_improve_tracked(&start, model, obs, kernel, opts, &rs.child(1), Some(h))?;
            Ok((trace.per_pass, out.sum_squared_weights()))
        })
        .collect();
    let mut sq_err = vec![0.0; k_max + 1];
    let mut ssw = 0.0;
    for run in runs {
        let (per_pass, s) = run?;
        for (k, est) in per_pass.iter().enumerate() {
            sq_err[k] += (est - oracle.mean) * (est - oracle.mean);
        }
        ssw += s;
    }
    let r = repetitions as f64;
    let limit = predicted_mse_limit(oracle.variance, ssw / r);
    Ok(schedule
        .iter()
        .map(|&k| MseRow { k, weight_mode: mode, mse: sq_err[k] / r, predicted_limit: limit })
        .collect())
}
