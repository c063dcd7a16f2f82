//! Metropolis-Hastings improvement of particle paths.
//!
//! Each of the N paths seeds an independent single-site Metropolis-within-Gibbs
//! chain on the joint smoothing law. One pass updates the components backward
//! from t = T to t = 0; the update at t sees the previous-pass value at t - 1
//! and the current-pass value at t + 1.

mod enumerate;
mod finite;
mod gaussian;
mod improve;
mod kernel;
mod stovol;

pub use enumerate::{apply_backward_pass, exact_path_distribution, path_index};
pub use finite::{FiniteGibbsKernel, FiniteProposal, FiniteUniformKernel};
pub use gaussian::{Ar1Bridge, LgmGibbsKernel};
pub use improve::{mhips_improve, mhips_improve_tracked, MhipsOptions, MhipsTrace};
pub use kernel::{generic_log_accept_ratio, log_target, ForceMetropolis, GibbsKernel, Neighbors};
pub use stovol::{stovol_gamma, RejectionDraw, StoVolGibbsKernel, StoVolMwgKernel, DEFAULT_REJECTION_CAP};
