use rand::Rng;
use serde::{Deserialize, Serialize};

use super::HmmModel;
use crate::error::{Error, Result};

const ROW_TOL: f64 = 1e-9;

/// A hidden Markov model on states `0..n_states` with observations in
/// `0..n_symbols`. States and observations are carried as `f64` indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteHmm {
    initial: Vec<f64>,
    transition: Vec<Vec<f64>>,
    emission: Vec<Vec<f64>>,
}

fn check_row(name: &str, row: &[f64]) -> Result<()> {
    if row.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
        return Err(Error::Config(format!("{name}: entries must be finite and nonnegative")));
    }
    let s: f64 = row.iter().sum();
    if (s - 1.0).abs() > ROW_TOL {
        return Err(Error::Config(format!("{name}: row sums to {s}, not 1")));
    }
    Ok(())
}

impl FiniteHmm {
    pub fn new(initial: Vec<f64>, transition: Vec<Vec<f64>>, emission: Vec<Vec<f64>>) -> Result<Self> {
        let n = initial.len();
        if n == 0 {
            return Err(Error::Config("finite hmm needs at least one state".into()));
        }
        if transition.len() != n || transition.iter().any(|r| r.len() != n) {
            return Err(Error::Config(format!("transition matrix must be {n} x {n}")));
        }
        if emission.len() != n || emission.iter().any(|r| r.len() != emission[0].len()) || emission[0].is_empty() {
            return Err(Error::Config(format!("emission matrix must have {n} equal nonempty rows")));
        }
        check_row("initial", &initial)?;
        for r in &transition {
            check_row("transition", r)?;
        }
        for r in &emission {
            check_row("emission", r)?;
        }
        Ok(Self { initial, transition, emission })
    }

    pub fn n_states(&self) -> usize {
        self.initial.len()
    }

    pub fn n_symbols(&self) -> usize {
        self.emission[0].len()
    }

    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    pub fn transition(&self) -> &[Vec<f64>] {
        &self.transition
    }

    pub fn emission(&self) -> &[Vec<f64>] {
        &self.emission
    }

    /// Index of a state value, or `None` if it is not an exact state index.
    pub fn state_index(&self, x: f64) -> Option<usize> {
        index_of(x, self.n_states())
    }

    /// Emission probability of observing `y` in state `i`.
    pub fn emission_prob(&self, i: usize, y: f64) -> f64 {
        index_of(y, self.n_symbols()).map_or(0.0, |k| self.emission[i][k])
    }
}

fn index_of(x: f64, n: usize) -> Option<usize> {
    if x >= 0.0 && x.fract() == 0.0 && (x as usize) < n {
        Some(x as usize)
    } else {
        None
    }
}

fn draw(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.iter().rposition(|p| *p > 0.0).unwrap_or(probs.len() - 1)
}

impl HmmModel for FiniteHmm {
    fn state_dim(&self) -> usize {
        1
    }

    fn log_initial_density(&self, x: &[f64]) -> f64 {
        self.state_index(x[0]).map_or(f64::NEG_INFINITY, |i| self.initial[i].ln())
    }

    fn log_transition_density(&self, x: &[f64], x_next: &[f64]) -> f64 {
        match (self.state_index(x[0]), self.state_index(x_next[0])) {
            (Some(i), Some(j)) => self.transition[i][j].ln(),
            _ => f64::NEG_INFINITY,
        }
    }

    fn log_observation_density(&self, x: &[f64], y: f64) -> f64 {
        self.state_index(x[0]).map_or(f64::NEG_INFINITY, |i| self.emission_prob(i, y).ln())
    }

    fn sample_initial<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        out[0] = draw(&self.initial, rng.random()) as f64;
    }

    fn sample_transition<R: Rng + ?Sized>(&self, x: &[f64], rng: &mut R, out: &mut [f64]) {
        let i = x[0] as usize;
        out[0] = draw(&self.transition[i], rng.random()) as f64;
    }

    fn sample_observation<R: Rng + ?Sized>(&self, x: &[f64], rng: &mut R) -> f64 {
        let i = x[0] as usize;
        draw(&self.emission[i], rng.random()) as f64
    }

    fn transition_density_bound(&self) -> Option<f64> {
        self.transition.iter().flatten().copied().reduce(f64::max)
    }
}
