//! Runs the subcommands and writes their artifacts plus a manifest.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use pathsmooth_core::diagnostics::{
    clt_variance_single_run, effective_sample_size, mse_vs_passes, stats::sample_mean_var, CltReport, MseRow,
};
use pathsmooth_core::exact::{
    finite_additive_moments, finite_smoother, grid_additive_moments, grid_smoother_auto, kalman_additive_moments,
    kalman_smoother, ExactMarginals, FunctionalMoments,
};
use pathsmooth_core::model::simulate;
use pathsmooth_core::pipeline::{make_kernel, run_repetitions, run_smoother, Algorithm, SmootherSpec};
use pathsmooth_core::{AnyModel, ObservationRecord, PathEnsemble, RngStreams};
use serde::{Deserialize, Serialize};

use crate::calibrate::{calibrate_particles, Calibration};
use crate::config::Config;
use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Smooth,
    Neff,
    Clt,
    MsePasses,
    Calibrate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Smooth => "smooth",
            Command::Neff => "neff",
            Command::Clt => "clt",
            Command::MsePasses => "mse-passes",
            Command::Calibrate => "calibrate",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Seeds {
    pub seed: u64,
    pub data_seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub config_hash: String,
    pub seeds: Seeds,
    pub threads: usize,
    pub calibrated_n: BTreeMap<String, usize>,
    pub wall_times: BTreeMap<String, f64>,
    pub outputs: Vec<String>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

struct Outputs {
    dir: PathBuf,
    written: Vec<String>,
}

impl Outputs {
    fn new(dir: &Path) -> CliResult<Self> {
        fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
        Ok(Self { dir: dir.to_path_buf(), written: Vec::new() })
    }

    fn write<F>(&mut self, name: &str, f: F) -> CliResult<()>
    where
        F: FnOnce(&mut BufWriter<File>) -> pathsmooth_core::Result<()>,
    {
        let path = self.dir.join(name);
        let io = |source| CliError::Io { path: path.clone(), source };
        let mut w = BufWriter::new(File::create(&path).map_err(io)?);
        f(&mut w)?;
        w.flush().map_err(io)?;
        self.written.push(name.to_string());
        Ok(())
    }

    fn write_text(&mut self, name: &str, text: &str) -> CliResult<()> {
        self.write(name, |w| Ok(w.write_all(text.as_bytes())?))
    }
}

struct Timer(BTreeMap<String, f64>);

impl Timer {
    fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> CliResult<T>) -> CliResult<T> {
        let start = Instant::now();
        let out = f()?;
        self.0.insert(stage.to_string(), start.elapsed().as_secs_f64());
        Ok(out)
    }
}

pub fn load_observations(cfg: &Config, model: &AnyModel) -> CliResult<ObservationRecord> {
    match &cfg.model.observations {
        Some(path) => {
            let f = File::open(path)
                .map_err(|e| CliError::Config(format!("cannot open observations {}: {e}", path.display())))?;
            let rec = ObservationRecord::read_csv(f, cfg.data_seed())?;
            if let Some(h) = cfg.model.horizon {
                if h != rec.horizon() {
                    return Err(CliError::Config(format!(
                        "model.horizon = {h} but {} holds {} observations",
                        path.display(),
                        rec.horizon()
                    )));
                }
            }
            Ok(rec)
        }
        None => Ok(simulate(model, cfg.model.horizon.unwrap_or(0), cfg.data_seed())?),
    }
}

/// Exact smoothing means and variances: Kalman for the linear Gaussian model,
/// quadrature for stochastic volatility, forward-backward for finite models.
pub fn exact_marginals(model: &AnyModel, obs: &ObservationRecord) -> CliResult<ExactMarginals> {
    Ok(match model {
        AnyModel::Lgm(m) => kalman_smoother(m.params(), obs)?,
        AnyModel::StoVol(m) => grid_smoother_auto(m, obs)?.0,
        AnyModel::Finite(m) => finite_smoother(m, obs)?.to_marginals()?,
    })
}

/// Exact posterior mean and variance of `sum_t X_t`.
pub fn exact_additive(model: &AnyModel, obs: &ObservationRecord) -> CliResult<FunctionalMoments> {
    Ok(match model {
        AnyModel::Lgm(m) => kalman_additive_moments(m.params(), obs)?,
        AnyModel::StoVol(m) => {
            let (_, grid) = grid_smoother_auto(m, obs)?;
            grid_additive_moments(m, obs, &grid)?
        }
        AnyModel::Finite(m) => finite_additive_moments(m, obs)?,
    })
}

fn path_sum(p: &[f64]) -> f64 {
    p.iter().sum()
}

/// Runs `command` inside a pool of `experiment.threads` threads and writes the
/// manifest last.
pub fn run(command: Command, cfg: &Config) -> CliResult<Manifest> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.experiment.threads)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {} threads: {e}", cfg.experiment.threads)))?;
    pool.install(|| run_in_pool(command, cfg))
}

fn run_in_pool(command: Command, cfg: &Config) -> CliResult<Manifest> {
    let model = cfg.model.spec.build()?;
    let mut out = Outputs::new(&cfg.output.dir)?;
    let mut timer = Timer(BTreeMap::new());
    let mut calibrated = BTreeMap::new();
    let streams = RngStreams::new(cfg.seed()).child(1);

    let obs = timer.time("observations", || load_observations(cfg, &model))?;
    out.write("observations.csv", |w| obs.write_csv(w))?;
    out.write_text("config.toml", &cfg.to_toml()?)?;

    let mut budget_n = |timer: &mut Timer| -> CliResult<usize> {
        match cfg.experiment.cpu_budget {
            None => Ok(cfg.smoother.n_particles),
            Some(budget) => {
                let algorithm = cfg.smoother.algorithm;
                let c = timer.time("calibration", || {
                    calibrate_particles(
                        &model,
                        &obs,
                        &cfg.smoother,
                        &[algorithm],
                        cfg.experiment.probe_n,
                        budget,
                        &RngStreams::new(cfg.seed()).child(2),
                    )
                })?;
                calibrated.insert(algorithm.name().to_string(), c[0].calibrated_n);
                Ok(c[0].calibrated_n)
            }
        }
    };

    match command {
        Command::Simulate => {}
        Command::Smooth => {
            let n = budget_n(&mut timer)?;
            let spec = cfg.smoother.spec(n);
            let res = timer.time("smoother", || Ok(run_smoother(&model, &obs, &spec, &streams)?))?;
            out.write("ensemble.csv", |w| res.ensemble.write_csv(w))?;
            if res.ensemble.state_dim() == 1 {
                out.write("ensemble.bin", |w| res.ensemble.write_binary(w))?;
            }
            if let Some(trace) = &res.trace {
                out.write("trace.csv", |w| trace.write_csv(w))?;
            }
        }
        Command::Neff => {
            let n = budget_n(&mut timer)?;
            let spec = cfg.smoother.spec(n);
            let oracle = timer.time("oracle", || exact_marginals(&model, &obs))?;
            let estimates = timer.time("repetitions", || {
                Ok(run_repetitions(cfg.experiment.repetitions, &streams, |_, s| {
                    Ok(run_smoother(&model, &obs, &spec, s)?.ensemble.marginal_means())
                })?)
            })?;
            let report = effective_sample_size(&estimates, &oracle, false)?;
            out.write("exact.csv", |w| oracle.write_csv(w))?;
            out.write("neff.csv", |w| report.write_csv(w))?;
        }
        Command::Clt => {
            check_equal_weight_output(cfg)?;
            let oracle = timer.time("oracle", || exact_additive(&model, &obs))?;
            let mut reports = Vec::new();
            for n in cfg.n_values() {
                let spec = cfg.smoother.spec(n);
                let stage = format!("repetitions_n{n}");
                let report = timer.time(&stage, || clt_at(&model, &obs, &spec, cfg.experiment.repetitions, &streams.child(n as u64)))?;
                out.write(&format!("clt_n{n}.json"), |w| Ok(w.write_all(report.to_json()?.as_bytes())?))?;
                reports.push(report);
            }
            out.write("clt.csv", |w| write_clt_summary(w, &reports, &oracle))?;
        }
        Command::MsePasses => {
            let oracle = timer.time("oracle", || exact_additive(&model, &obs))?;
            let kernel = make_kernel(&model, cfg.smoother.kernel.unwrap_or_default())?;
            let base = match cfg.smoother.algorithm {
                Algorithm::FilterSmoother | Algorithm::Mhifs => Algorithm::FilterSmoother,
                Algorithm::Ffbsi | Algorithm::MhiFfbsi => Algorithm::Ffbsi,
            };
            let mut base_spec = SmootherSpec::new(base, cfg.smoother.n_particles, 0);
            base_spec.forward = cfg.smoother.forward;
            let init = |s: &RngStreams| Ok(run_smoother(&model, &obs, &base_spec, s)?.ensemble);
            let k_values = cfg.k_values();
            let mut rows: Vec<MseRow> = Vec::new();
            for mode in &cfg.experiment.weight_modes {
                let stage = format!("repetitions_{mode}");
                let r = timer.time(&stage, || {
                    Ok(mse_vs_passes(
                        &model,
                        &obs,
                        &kernel,
                        init,
                        &path_sum,
                        Some(oracle),
                        &k_values,
                        *mode,
                        cfg.experiment.repetitions,
                        &streams,
                    )?)
                })?;
                rows.extend(r);
            }
            out.write("mse.csv", |w| MseRow::write_csv(&rows, w))?;
        }
        Command::Calibrate => {
            let budget = cfg
                .experiment
                .cpu_budget
                .ok_or_else(|| CliError::Config("calibrate needs experiment.cpu_budget".into()))?;
            let algorithms =
                if cfg.experiment.algorithms.is_empty() { vec![cfg.smoother.algorithm] } else { cfg.experiment.algorithms.clone() };
            let cal: Vec<Calibration> = timer.time("calibration", || {
                calibrate_particles(
                    &model,
                    &obs,
                    &cfg.smoother,
                    &algorithms,
                    cfg.experiment.probe_n,
                    budget,
                    &RngStreams::new(cfg.seed()).child(2),
                )
            })?;
            for c in &cal {
                calibrated.insert(c.algorithm.name().to_string(), c.calibrated_n);
            }
            let json = serde_json::to_string_pretty(&cal).map_err(pathsmooth_core::Error::from)?;
            out.write_text("calibration.json", &json)?;
        }
    }

    let manifest = Manifest {
        command: command.name().to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: cfg.hash()?,
        seeds: Seeds { seed: cfg.seed(), data_seed: cfg.data_seed() },
        threads: cfg.experiment.threads,
        calibrated_n: calibrated,
        wall_times: timer.0,
        outputs: out.written.clone(),
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(pathsmooth_core::Error::from)?;
    out.write_text(MANIFEST_FILE, &json)?;
    Ok(manifest)
}

fn check_equal_weight_output(cfg: &Config) -> CliResult<()> {
    let s = &cfg.smoother;
    let equal = match s.algorithm {
        Algorithm::Ffbsi => true,
        Algorithm::FilterSmoother => false,
        Algorithm::Mhifs => s.resample_first,
        Algorithm::MhiFfbsi => true,
    };
    if equal {
        Ok(())
    } else {
        Err(CliError::Config("clt needs equally weighted output: use ffbsi, or an improved smoother with resample_first".into()))
    }
}

/// One single-run report from the first repetition, with the spread of the
/// estimate across all repetitions as the empirical variance.
pub fn clt_at(
    model: &AnyModel,
    obs: &ObservationRecord,
    spec: &SmootherSpec,
    repetitions: usize,
    streams: &RngStreams,
) -> CliResult<CltReport> {
    let runs: Vec<(f64, Option<CltReport>)> = run_repetitions(repetitions, streams, |r, s| {
        let e: PathEnsemble = run_smoother(model, obs, spec, s)?.ensemble;
        let single = if r == 0 { Some(clt_variance_single_run(&e, path_sum, spec.passes)?) } else { None };
        Ok((e.weighted_mean(path_sum), single))
    })?;
    let means: Vec<f64> = runs.iter().map(|r| r.0).collect();
    let mut report = runs.into_iter().next().and_then(|r| r.1).expect("at least one repetition");
    if repetitions >= 2 {
        report.var_empirical = Some(sample_mean_var(&means).1);
    }
    Ok(report)
}

fn write_clt_summary<W: Write>(w: W, reports: &[CltReport], oracle: &FunctionalMoments) -> pathsmooth_core::Result<()> {
    let mut w = w;
    writeln!(w, "n,k,mean,var_single_run,var_empirical,exact_mean,exact_var_over_n")?;
    for r in reports {
        let emp = r.var_empirical.map(pathsmooth_core::io::fmt_f64).unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.n,
            r.k,
            pathsmooth_core::io::fmt_f64(r.mean),
            pathsmooth_core::io::fmt_f64(r.var_single_run),
            emp,
            pathsmooth_core::io::fmt_f64(oracle.mean),
            pathsmooth_core::io::fmt_f64(oracle.variance / r.n as f64),
        )?;
    }
    Ok(())
}
