//! Particle smoothing for hidden Markov models: forward filters, backward
//! simulation, Metropolis-Hastings path improvement, exact oracles and
//! Monte Carlo diagnostics.

pub mod diagnostics;
pub mod error;
pub mod exact;
pub mod io;
pub mod mhips;
pub mod pipeline;
pub mod model;
pub mod rng;
pub mod smc;

pub use error::{Error, Result};
pub use model::{AnyModel, FiniteHmm, HmmModel, Lgm, LgmParams, ObservationRecord, StoVol, StoVolParams};
pub use rng::RngStreams;
pub use smc::PathEnsemble;
