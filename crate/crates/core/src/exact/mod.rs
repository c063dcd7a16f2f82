//! Exact and brute-force smoothing references.

mod discrete;
mod finite;
mod grid;
mod kalman;

use std::io::Write;

pub use discrete::DiscreteChain;
pub use finite::{finite_additive_moments, finite_smoother, FiniteSmoothing};
pub use grid::{
    grid_additive_moments, grid_conditional_cdf, grid_smoother, grid_smoother_auto, GridCdf, GridSpec,
};
pub use kalman::{kalman, kalman_additive_moments, kalman_smoother, KalmanOutput};

use crate::error::{Error, Result};
use crate::io::fmt_f64;

/// Per-time smoothing means and variances.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactMarginals {
    pub means: Vec<f64>,
    pub variances: Vec<f64>,
}

impl ExactMarginals {
    pub fn new(means: Vec<f64>, variances: Vec<f64>) -> Result<Self> {
        if means.len() != variances.len() {
            return Err(Error::Dimension { expected: means.len(), got: variances.len() });
        }
        if let Some(t) = variances.iter().position(|v| !(*v > 0.0)) {
            return Err(Error::Contract(format!("non-positive smoothing variance at t = {t}")));
        }
        Ok(Self { means, variances })
    }

    pub fn horizon(&self) -> usize {
        self.means.len()
    }

    /// CSV with header `t,mean,variance`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["t", "mean", "variance"])?;
        for (t, (m, v)) in self.means.iter().zip(&self.variances).enumerate() {
            out.write_record([t.to_string(), fmt_f64(*m), fmt_f64(*v)])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Posterior mean and variance of a scalar path functional.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FunctionalMoments {
    pub mean: f64,
    pub variance: f64,
}
