//! Experiment configuration, read from TOML.

use std::path::{Path, PathBuf};

use pathsmooth_core::diagnostics::{k_schedule, WeightMode, DEFAULT_K_SCHEDULE_C};
use pathsmooth_core::pipeline::{Algorithm, ForwardFilter, KernelKind, SmootherSpec};
use pathsmooth_core::{AnyModel, FiniteHmm, Lgm, LgmParams, StoVol, StoVolParams};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub model: ModelSection,
    pub smoother: SmootherSection,
    #[serde(default)]
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSection {
    #[serde(flatten)]
    pub spec: ModelSpec,
    /// Number of time steps T + 1. Optional when observations are read from file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    /// CSV with header `t,y[,x_true]`; simulated from the model when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observations: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    Lgm(LgmParams),
    Stovol(StoVolParams),
    Finite(FiniteSpec),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteSpec {
    pub initial: Vec<f64>,
    pub transition: Vec<Vec<f64>>,
    pub emission: Vec<Vec<f64>>,
}

impl ModelSpec {
    pub fn build(&self) -> CliResult<AnyModel> {
        Ok(match self {
            ModelSpec::Lgm(p) => AnyModel::Lgm(Lgm::new(*p)?),
            ModelSpec::Stovol(p) => AnyModel::StoVol(StoVol::new(*p)?),
            ModelSpec::Finite(f) => {
                AnyModel::Finite(FiniteHmm::new(f.initial.clone(), f.transition.clone(), f.emission.clone())?)
            }
        })
    }
}

/// A fixed pass count, or `ceil(c ln N)` written as `{ log_n = c }`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Passes {
    Fixed(usize),
    LogN { log_n: f64 },
}

impl Default for Passes {
    fn default() -> Self {
        Passes::Fixed(0)
    }
}

impl Passes {
    pub fn resolve(self, n: usize) -> usize {
        match self {
            Passes::Fixed(k) => k,
            Passes::LogN { log_n } => k_schedule(n, log_n),
        }
    }
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmootherSection {
    pub algorithm: Algorithm,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelKind>,
    pub n_particles: usize,
    #[serde(default)]
    pub passes: Passes,
    #[serde(default = "default_true")]
    pub resample_first: bool,
    #[serde(default)]
    pub forward: ForwardFilter,
}

impl SmootherSection {
    pub fn spec(&self, n: usize) -> SmootherSpec {
        SmootherSpec {
            algorithm: self.algorithm,
            kernel: self.kernel.unwrap_or_default(),
            n_particles: n,
            passes: if self.algorithm.improves() { self.passes.resolve(n) } else { 0 },
            resample_first: self.resample_first,
            forward: self.forward,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "seed_repr")]
    pub seed: Option<u64>,
    /// Seed for simulated observations; defaults to `seed`.
    #[serde(default, skip_serializing_if = "Option::is_none", with = "seed_repr")]
    pub data_seed: Option<u64>,
    /// Wall-clock budget per run in seconds; when set, N is calibrated to it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cpu_budget: Option<f64>,
    /// Particle counts for `clt`; defaults to the smoother's N.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub n_values: Vec<usize>,
    /// Pass counts reported by `mse-passes`; defaults to 0..=30.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub k_values: Vec<usize>,
    #[serde(default = "default_weight_modes")]
    pub weight_modes: Vec<WeightMode>,
    /// Particle count probed by `calibrate`.
    #[serde(default = "default_probe_n")]
    pub probe_n: usize,
    /// Algorithms compared by `calibrate`; defaults to the smoother's.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub algorithms: Vec<Algorithm>,
    #[serde(default = "default_threads")]
    pub threads: usize,
}

/// TOML integers are signed, so seeds above `i64::MAX` are written as strings.
mod seed_repr {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Int(u64),
        Str(String),
    }

    pub fn serialize<S: Serializer>(v: &Option<u64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(x) if *x <= i64::MAX as u64 => x.serialize(s),
            Some(x) => x.to_string().serialize(s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<u64>, D::Error> {
        match Option::<Repr>::deserialize(d)? {
            None => Ok(None),
            Some(Repr::Int(x)) => Ok(Some(x)),
            Some(Repr::Str(s)) => s.trim().parse().map(Some).map_err(serde::de::Error::custom),
        }
    }
}

fn default_repetitions() -> usize {
    1
}

fn default_weight_modes() -> Vec<WeightMode> {
    vec![WeightMode::Original, WeightMode::Resampled]
}

fn default_probe_n() -> usize {
    1000
}

fn default_threads() -> usize {
    1
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            repetitions: default_repetitions(),
            seed: None,
            data_seed: None,
            cpu_budget: None,
            n_values: Vec::new(),
            k_values: Vec::new(),
            weight_modes: default_weight_modes(),
            probe_n: default_probe_n(),
            algorithms: Vec::new(),
            threads: default_threads(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: default_dir() }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
}

pub const SEED_ENV: &str = "PATHSMOOTH_SEED";

impl Config {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> CliResult<String> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        if let (Some(obs), Some(dir)) = (&cfg.model.observations, path.parent()) {
            if obs.is_relative() {
                cfg.model.observations = Some(dir.join(obs));
            }
        }
        Ok(cfg)
    }

    /// Applies overrides, resolves the seed (flag, then file, then
    /// `PATHSMOOTH_SEED`) and validates.
    pub fn resolve(mut self, o: &Overrides) -> CliResult<Self> {
        if let Some(n) = o.n {
            self.smoother.n_particles = n;
            self.experiment.n_values = vec![n];
        }
        if let Some(k) = o.k {
            self.smoother.passes = Passes::Fixed(k);
            if self.experiment.k_values.is_empty() {
                self.experiment.k_values = (0..=k).collect();
            } else {
                self.experiment.k_values.retain(|v| *v < k);
                self.experiment.k_values.push(k);
            }
        }
        if let Some(out) = &o.out {
            self.output.dir = out.clone();
        }
        if let Some(t) = o.threads {
            self.experiment.threads = t;
        }
        if let Some(s) = o.seed {
            self.experiment.seed = Some(s);
        }
        if self.experiment.seed.is_none() {
            if let Ok(v) = std::env::var(SEED_ENV) {
                let s = v
                    .trim()
                    .parse()
                    .map_err(|_| CliError::Config(format!("{SEED_ENV}={v:?} is not a 64-bit seed")))?;
                self.experiment.seed = Some(s);
            }
        }
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: &str| Err(CliError::Config(m.to_string()));
        self.model.spec.build()?;
        if self.model.observations.is_none() && self.model.horizon.is_none() {
            return bad("model.horizon is required when no observations file is given");
        }
        if self.model.horizon == Some(0) {
            return bad("model.horizon must be at least 1");
        }
        if self.smoother.n_particles == 0 || self.experiment.n_values.contains(&0) {
            return bad("n_particles must be at least 1");
        }
        if self.experiment.repetitions == 0 {
            return bad("experiment.repetitions must be at least 1");
        }
        if self.experiment.seed.is_none() {
            return Err(CliError::Config(format!(
                "no seed: set experiment.seed, pass --seed or export {SEED_ENV}"
            )));
        }
        if self.experiment.threads == 0 {
            return bad("experiment.threads must be at least 1");
        }
        if let Passes::LogN { log_n } = self.smoother.passes {
            if !(log_n >= 0.0 && log_n.is_finite()) {
                return bad("passes.log_n must be a nonnegative number");
            }
        }
        if self.smoother.kernel.is_some() && !self.smoother.algorithm.improves() {
            return bad("smoother.kernel only applies to mhifs and mhi_ffbsi");
        }
        if self.smoother.algorithm.improves() {
            pathsmooth_core::pipeline::make_kernel(&self.model.spec.build()?, self.smoother.kernel.unwrap_or_default())?;
        }
        if let Some(b) = self.experiment.cpu_budget {
            if !(b > 0.0 && b.is_finite()) {
                return bad("experiment.cpu_budget must be positive");
            }
        }
        if self.experiment.probe_n == 0 {
            return bad("experiment.probe_n must be at least 1");
        }
        Ok(())
    }

    pub fn seed(&self) -> u64 {
        self.experiment.seed.expect("validated config has a seed")
    }

    pub fn data_seed(&self) -> u64 {
        self.experiment.data_seed.unwrap_or_else(|| self.seed())
    }

    /// Hex SHA-256 of the resolved configuration.
    pub fn hash(&self) -> CliResult<String> {
        let digest = Sha256::digest(self.to_toml()?.as_bytes());
        Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
    }

    pub fn k_values(&self) -> Vec<usize> {
        if self.experiment.k_values.is_empty() {
            (0..=30).collect()
        } else {
            self.experiment.k_values.clone()
        }
    }

    pub fn n_values(&self) -> Vec<usize> {
        if self.experiment.n_values.is_empty() {
            vec![self.smoother.n_particles]
        } else {
            self.experiment.n_values.clone()
        }
    }
}

pub fn default_log_n_passes() -> Passes {
    Passes::LogN { log_n: DEFAULT_K_SCHEDULE_C }
}
