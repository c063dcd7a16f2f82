use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::io::fmt_f64;

const MAGIC: &[u8; 4] = b"PSE1";

/// `N` weighted particle paths of length `T + 1`.
///
/// `paths` is row-major: particle, then time, then state coordinate.
/// `log_weights` are normalised so that their exponentials sum to one.
#[derive(Clone, Debug, PartialEq)]
pub struct PathEnsemble {
    n_particles: usize,
    horizon: usize,
    state_dim: usize,
    paths: Vec<f64>,
    log_weights: Vec<f64>,
}

impl PathEnsemble {
    /// Builds an ensemble, normalising the supplied log-weights.
    pub fn new(
        n_particles: usize,
        horizon: usize,
        state_dim: usize,
        paths: Vec<f64>,
        mut log_weights: Vec<f64>,
    ) -> Result<Self> {
        if n_particles == 0 || horizon == 0 || state_dim == 0 {
            return Err(Error::Config("ensemble dimensions must be positive".into()));
        }
        if paths.len() != n_particles * horizon * state_dim {
            return Err(Error::Dimension { expected: n_particles * horizon * state_dim, got: paths.len() });
        }
        if log_weights.len() != n_particles {
            return Err(Error::Dimension { expected: n_particles, got: log_weights.len() });
        }
        if paths.iter().any(|x| !x.is_finite()) {
            return Err(Error::Contract("ensemble contains non-finite states".into()));
        }
        if !super::log_normalize(&mut log_weights) {
            return Err(Error::Contract("ensemble weights are all zero".into()));
        }
        Ok(Self { n_particles, horizon, state_dim, paths, log_weights })
    }

    /// Equally weighted ensemble.
    pub fn uniform(n_particles: usize, horizon: usize, state_dim: usize, paths: Vec<f64>) -> Result<Self> {
        let lw = vec![-(n_particles as f64).ln(); n_particles];
        Self::new(n_particles, horizon, state_dim, paths, lw)
    }

    pub fn n_particles(&self) -> usize {
        self.n_particles
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn paths(&self) -> &[f64] {
        &self.paths
    }

    pub(crate) fn paths_mut(&mut self) -> &mut [f64] {
        &mut self.paths
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn weights(&self) -> Vec<f64> {
        self.log_weights.iter().map(|l| l.exp()).collect()
    }

    pub fn path(&self, i: usize) -> &[f64] {
        let len = self.horizon * self.state_dim;
        &self.paths[i * len..(i + 1) * len]
    }

    pub fn state(&self, i: usize, t: usize) -> &[f64] {
        let d = self.state_dim;
        let start = (i * self.horizon + t) * d;
        &self.paths[start..start + d]
    }

    /// `sum_i w_i^2`, which is `1/N` exactly for equal weights.
    pub fn sum_squared_weights(&self) -> f64 {
        self.log_weights.iter().map(|l| (2.0 * l).exp()).sum()
    }

    pub fn is_equally_weighted(&self) -> bool {
        let target = -(self.n_particles as f64).ln();
        self.log_weights.iter().all(|l| (l - target).abs() < 1e-9)
    }

    /// Weighted mean of a path functional.
    pub fn weighted_mean<H: Fn(&[f64]) -> f64>(&self, h: H) -> f64 {
        (0..self.n_particles)
            .map(|i| self.log_weights[i].exp() * h(self.path(i)))
            .sum()
    }

    /// Weighted posterior-mean estimate of each one-dimensional marginal.
    pub fn marginal_means(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.horizon];
        for i in 0..self.n_particles {
            let w = self.log_weights[i].exp();
            for (t, m) in out.iter_mut().enumerate() {
                *m += w * self.state(i, t)[0];
            }
        }
        out
    }

    fn require_scalar(&self) -> Result<()> {
        if self.state_dim != 1 {
            return Err(Error::Dimension { expected: 1, got: self.state_dim });
        }
        Ok(())
    }

    /// CSV with header `i,t,state,log_weight`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        self.require_scalar()?;
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["i", "t", "state", "log_weight"])?;
        for i in 0..self.n_particles {
            let lw = fmt_f64(self.log_weights[i]);
            for t in 0..self.horizon {
                out.write_record([i.to_string(), t.to_string(), fmt_f64(self.state(i, t)[0]), lw.clone()])?;
            }
        }
        out.flush()?;
        Ok(())
    }

    /// Binary dump: `PSE1`, little-endian `u64` N and T+1, then the paths and
    /// the log-weights as little-endian `f64`.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        self.require_scalar()?;
        w.write_all(MAGIC)?;
        w.write_all(&(self.n_particles as u64).to_le_bytes())?;
        w.write_all(&(self.horizon as u64).to_le_bytes())?;
        for x in self.paths.iter().chain(&self.log_weights) {
            w.write_all(&x.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("not a PSE1 ensemble dump".into()));
        }
        let mut word = [0u8; 8];
        r.read_exact(&mut word)?;
        let n = u64::from_le_bytes(word) as usize;
        r.read_exact(&mut word)?;
        let horizon = u64::from_le_bytes(word) as usize;
        let mut read_vec = |len: usize| -> Result<Vec<f64>> {
            (0..len)
                .map(|_| {
                    r.read_exact(&mut word)?;
                    Ok(f64::from_le_bytes(word))
                })
                .collect()
        };
        let paths = read_vec(n * horizon)?;
        let log_weights = read_vec(n)?;
        Ok(Self { n_particles: n, horizon, state_dim: 1, paths, log_weights })
    }
}
