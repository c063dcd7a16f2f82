use std::io::Write;

use rand::Rng;
use rayon::prelude::*;

use super::{GibbsKernel, Neighbors};
use crate::error::{Error, Result};
use crate::model::{HmmModel, ObservationRecord};
use crate::rng::{RngStreams, BARRIER_STREAM};
use crate::smc::{multinomial_resample, PathEnsemble};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MhipsOptions {
    pub passes: usize,
    pub resample_first: bool,
}

impl MhipsOptions {
    pub fn new(passes: usize) -> Self {
        Self { passes, resample_first: true }
    }
}

/// Move counts per time index, summed over chains and passes.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MhipsTrace {
    pub proposals: Vec<u64>,
    pub accepts: Vec<u64>,
    /// Weighted mean of the tracked path functional after each pass,
    /// starting with the initial ensemble.
    pub per_pass: Vec<f64>,
}

impl MhipsTrace {
    fn new(horizon: usize) -> Self {
        Self { proposals: vec![0; horizon], accepts: vec![0; horizon], per_pass: Vec::new() }
    }

    pub fn acceptance_rates(&self) -> Vec<f64> {
        self.proposals
            .iter()
            .zip(&self.accepts)
            .map(|(p, a)| if *p == 0 { f64::NAN } else { *a as f64 / *p as f64 })
            .collect()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["t", "proposals", "accepts"])?;
        for (t, (p, a)) in self.proposals.iter().zip(&self.accepts).enumerate() {
            wr.write_record([t.to_string(), p.to_string(), a.to_string()])?;
        }
        wr.flush()?;
        Ok(())
    }
}

pub fn mhips_improve<M: HmmModel, K: GibbsKernel>(
    ensemble: &PathEnsemble,
    model: &M,
    obs: &ObservationRecord,
    kernel: &K,
    opts: MhipsOptions,
    streams: &RngStreams,
) -> Result<(PathEnsemble, MhipsTrace)> {
    mhips_improve_tracked(ensemble, model, obs, kernel, opts, streams, None)
}

/// As [`mhips_improve`], additionally recording the weighted mean of
/// `functional` over the paths after every pass.
pub fn mhips_improve_tracked<M: HmmModel, K: GibbsKernel>(
    ensemble: &PathEnsemble,
    model: &M,
    obs: &ObservationRecord,
    kernel: &K,
    opts: MhipsOptions,
    streams: &RngStreams,
    functional: Option<&(dyn Fn(&[f64]) -> f64 + Sync)>,
) -> Result<(PathEnsemble, MhipsTrace)> {
    let horizon = ensemble.horizon();
    let d = ensemble.state_dim();
    if horizon != obs.horizon() {
        return Err(Error::Dimension { expected: obs.horizon(), got: horizon });
    }
    if d != model.state_dim() {
        return Err(Error::Dimension { expected: model.state_dim(), got: d });
    }
    if kernel.state_dim() != d {
        return Err(Error::Dimension { expected: d, got: kernel.state_dim() });
    }
    let mut out = if opts.resample_first {
        multinomial_resample(ensemble, &mut streams.stream(BARRIER_STREAM))
    } else {
        ensemble.clone()
    };
    let mut trace = MhipsTrace::new(horizon);
    if let Some(h) = functional {
        trace.per_pass.push(out.weighted_mean(h));
    }
    let y = &obs.observations;
    for pass in 1..=opts.passes {
        let counts: Vec<Result<Vec<(u64, u64)>>> = out
            .paths_mut()
            .par_chunks_mut(horizon * d)
            .enumerate()
            .map(|(i, path)| {
                let mut rng = streams.stream_at(i as u64, pass as u64);
                backward_pass(model, kernel, y, path, d, &mut rng)
            })
            .collect();
        for c in counts {
            for (t, (p, a)) in c?.into_iter().enumerate() {
                trace.proposals[t] += p;
                trace.accepts[t] += a;
            }
        }
        if let Some(h) = functional {
            trace.per_pass.push(out.weighted_mean(h));
        }
    }
    Ok((out, trace))
}

/// One sweep t = T..0 over a single path, in place. Returns per-t
/// (proposals, accepts).
fn backward_pass<M: HmmModel, K: GibbsKernel, R: Rng + ?Sized>(
    model: &M,
    kernel: &K,
    y: &[f64],
    path: &mut [f64],
    d: usize,
    rng: &mut R,
) -> Result<Vec<(u64, u64)>> {
    let horizon = y.len();
    let exact = kernel.is_exact_gibbs();
    let mut counts = vec![(0u64, 0u64); horizon];
    let mut cand = vec![0.0; d];
    for t in (0..horizon).rev() {
        let (before, rest) = path.split_at_mut(t * d);
        let (cur, after) = rest.split_at_mut(d);
        let nb = Neighbors::new(
            (t > 0).then(|| &before[(t - 1) * d..]),
            (t + 1 < horizon).then(|| &after[..d]),
        );
        kernel.propose(nb, y[t], rng, &mut cand)?;
        let accept = exact || {
            let la = kernel.log_accept_ratio(model, nb, y[t], cur, &cand)?;
            la >= 0.0 || rng.random::<f64>().ln() < la
        };
        counts[t].0 += 1;
        if accept {
            cur.copy_from_slice(&cand);
            counts[t].1 += 1;
        }
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mhips::{FiniteGibbsKernel, LgmGibbsKernel};
    use crate::model::{FiniteHmm, Lgm, LgmParams};

    fn lgm() -> (Lgm, LgmGibbsKernel, ObservationRecord) {
        let p = LgmParams { phi: 0.9, sigma_u: 0.6, sigma_v: 1.0 };
        let m = Lgm::new(p).unwrap();
        let obs = crate::model::simulate(&m, 6, 4).unwrap();
        (m, LgmGibbsKernel::new(&p).unwrap(), obs)
    }

    fn random_ensemble(n: usize, horizon: usize) -> PathEnsemble {
        let mut rng = RngStreams::new(77).stream(0);
        let paths: Vec<f64> = (0..n * horizon).map(|_| rng.random_range(-2.0..2.0)).collect();
        let lw: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..0.0)).collect();
        PathEnsemble::new(n, horizon, 1, paths, lw).unwrap()
    }

    #[test]
    fn zero_passes_without_resampling_is_identity() {
        let (m, k, obs) = lgm();
        let e = random_ensemble(20, obs.horizon());
        let opts = MhipsOptions { passes: 0, resample_first: false };
        let (out, trace) = mhips_improve(&e, &m, &obs, &k, opts, &RngStreams::new(1)).unwrap();
        assert_eq!(out, e);
        assert!(trace.proposals.iter().all(|p| *p == 0));
    }

    #[test]
    fn resampling_first_equalizes_weights() {
        let (m, k, obs) = lgm();
        let e = random_ensemble(20, obs.horizon());
        let (out, _) = mhips_improve(&e, &m, &obs, &k, MhipsOptions::new(2), &RngStreams::new(1)).unwrap();
        assert!(out.is_equally_weighted());
    }

    #[test]
    fn exact_gibbs_accepts_every_move() {
        let (m, k, obs) = lgm();
        let e = random_ensemble(10, obs.horizon());
        let (_, trace) = mhips_improve(&e, &m, &obs, &k, MhipsOptions::new(3), &RngStreams::new(2)).unwrap();
        assert!(trace.proposals.iter().all(|p| *p == 30));
        assert_eq!(trace.proposals, trace.accepts);
    }

    #[test]
    fn horizon_mismatch_is_rejected() {
        let (m, k, obs) = lgm();
        let e = random_ensemble(5, obs.horizon() + 1);
        let r = mhips_improve(&e, &m, &obs, &k, MhipsOptions::new(1), &RngStreams::new(1));
        assert!(matches!(r, Err(Error::Dimension { .. })));
    }

    #[test]
    fn output_is_independent_of_thread_count() {
        let (m, k, obs) = lgm();
        let e = random_ensemble(64, obs.horizon());
        let run = |threads| {
            rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| {
                mhips_improve(&e, &m, &obs, &k, MhipsOptions::new(4), &RngStreams::new(5)).unwrap()
            })
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn chains_are_equivariant_under_relabelling() {
        // Chain i draws from stream i, so swapping two input paths together with
        // their streams swaps the outputs.
        let (m, k, obs) = lgm();
        let e = random_ensemble(2, obs.horizon());
        let h = obs.horizon();
        let opts = MhipsOptions { passes: 3, resample_first: false };
        let streams = RngStreams::new(8);
        let (a, _) = mhips_improve(&e, &m, &obs, &k, opts, &streams).unwrap();
        let p0 = e.path(0).to_vec();
        let mut single = PathEnsemble::uniform(1, h, 1, p0).unwrap();
        single = mhips_improve(&single, &m, &obs, &k, opts, &streams).unwrap().0;
        assert_eq!(single.path(0), a.path(0));
    }

    #[test]
    fn tracked_functional_has_one_entry_per_pass() {
        let (m, k, obs) = lgm();
        let e = random_ensemble(10, obs.horizon());
        let f = |p: &[f64]| p.iter().sum::<f64>();
        let (out, trace) =
            mhips_improve_tracked(&e, &m, &obs, &k, MhipsOptions::new(4), &RngStreams::new(3), Some(&f)).unwrap();
        assert_eq!(trace.per_pass.len(), 5);
        assert!((trace.per_pass[4] - out.weighted_mean(f)).abs() < 1e-12);
    }

    #[test]
    fn trace_csv_header() {
        let t = MhipsTrace { proposals: vec![2, 2], accepts: vec![1, 2], per_pass: vec![] };
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "t,proposals,accepts\n0,2,1\n1,2,2\n");
    }

    #[test]
    fn single_component_path() {
        let m = FiniteHmm::new(vec![0.5, 0.5], vec![vec![0.5, 0.5]; 2], vec![vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap();
        let obs = ObservationRecord::new(vec![1.0]).unwrap();
        let e = PathEnsemble::uniform(2000, 1, 1, vec![0.0; 2000]).unwrap();
        let k = FiniteGibbsKernel::new(m.clone());
        let (out, _) = mhips_improve(&e, &m, &obs, &k, MhipsOptions::new(1), &RngStreams::new(3)).unwrap();
        let frac = out.paths().iter().filter(|x| **x == 1.0).count() as f64 / 2000.0;
        let p = 0.8 / 0.9;
        assert!((frac - p).abs() < 4.0 * (p * (1.0 - p) / 2000.0).sqrt());
    }
}
