use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::HmmModel;
use crate::error::{Error, Result};
use crate::io::fmt_f64;
use crate::rng::RngStreams;

/// A fixed observation sequence `y_0..y_T`, optionally with the latent states
/// that generated it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservationRecord {
    pub seed: u64,
    pub observations: Vec<f64>,
    pub true_states: Option<Vec<f64>>,
}

impl ObservationRecord {
    pub fn new(observations: Vec<f64>) -> Result<Self> {
        let rec = Self { seed: 0, observations, true_states: None };
        rec.validate()?;
        Ok(rec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.observations.is_empty() {
            return Err(Error::Config("observation record is empty".into()));
        }
        if let Some(x) = &self.true_states {
            if x.len() != self.observations.len() {
                return Err(Error::Format(format!(
                    "{} true states for {} observations",
                    x.len(),
                    self.observations.len()
                )));
            }
        }
        Ok(())
    }

    /// Number of time steps, `T + 1`.
    pub fn horizon(&self) -> usize {
        self.observations.len()
    }

    /// CSV with header `t,y[,x_true]`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        match &self.true_states {
            Some(xs) => {
                out.write_record(["t", "y", "x_true"])?;
                for (t, (y, x)) in self.observations.iter().zip(xs).enumerate() {
                    out.write_record([t.to_string(), fmt_f64(*y), fmt_f64(*x)])?;
                }
            }
            None => {
                out.write_record(["t", "y"])?;
                for (t, y) in self.observations.iter().enumerate() {
                    out.write_record([t.to_string(), fmt_f64(*y)])?;
                }
            }
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R, seed: u64) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let headers = rdr.headers()?.clone();
        let has_x = match headers.iter().collect::<Vec<_>>().as_slice() {
            ["t", "y"] => false,
            ["t", "y", "x_true"] => true,
            other => return Err(Error::Format(format!("unexpected observation header {other:?}"))),
        };
        let mut ys = Vec::new();
        let mut xs = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let t: usize = rec[0].trim().parse().map_err(|_| Error::Format(format!("bad t on row {row}")))?;
            if t != row {
                return Err(Error::Format(format!("expected t = {row}, found {t}")));
            }
            ys.push(parse_f64(&rec[1])?);
            if has_x {
                xs.push(parse_f64(&rec[2])?);
            }
        }
        let rec = Self { seed, observations: ys, true_states: has_x.then_some(xs) };
        rec.validate()?;
        Ok(rec)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let rec: Self = serde_json::from_str(s)?;
        rec.validate()?;
        Ok(rec)
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim().parse().map_err(|_| Error::Format(format!("not a number: {s:?}")))
}

/// Draw a latent path and observations of length `horizon` from the model.
/// Only one-dimensional models can record their true states.
pub fn simulate<M: HmmModel>(model: &M, horizon: usize, seed: u64) -> Result<ObservationRecord> {
    if horizon == 0 {
        return Err(Error::Config("horizon must be at least 1".into()));
    }
    let d = model.state_dim();
    let mut rng = RngStreams::new(seed).stream(0);
    let mut states = vec![0.0; horizon * d];
    let mut ys = Vec::with_capacity(horizon);
    model.sample_initial(&mut rng, &mut states[..d]);
    ys.push(model.sample_observation(&states[..d], &mut rng));
    for t in 1..horizon {
        let (prev, cur) = states.split_at_mut(t * d);
        model.sample_transition(&prev[(t - 1) * d..], &mut rng, &mut cur[..d]);
        ys.push(model.sample_observation(&cur[..d], &mut rng));
    }
    Ok(ObservationRecord {
        seed,
        observations: ys,
        true_states: (d == 1).then_some(states),
    })
}
