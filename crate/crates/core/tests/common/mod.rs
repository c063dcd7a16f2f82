#![allow(dead_code)]

use pathsmooth_core::{FiniteHmm, Lgm, LgmParams, StoVol, StoVolParams};

pub fn reference_lgm_params() -> LgmParams {
    LgmParams { phi: 0.9, sigma_u: 0.6, sigma_v: 1.0 }
}

pub fn reference_lgm() -> Lgm {
    Lgm::new(reference_lgm_params()).unwrap()
}

pub fn reference_stovol_params() -> StoVolParams {
    StoVolParams { alpha: 0.3, sigma: 0.5, beta: 1.0 }
}

pub fn reference_stovol() -> StoVol {
    StoVol::new(reference_stovol_params()).unwrap()
}

/// Three hidden states, two symbols, every transition possible.
pub fn three_state() -> FiniteHmm {
    FiniteHmm::new(
        vec![0.5, 0.3, 0.2],
        vec![vec![0.7, 0.2, 0.1], vec![0.25, 0.5, 0.25], vec![0.1, 0.3, 0.6]],
        vec![vec![0.8, 0.2], vec![0.4, 0.6], vec![0.1, 0.9]],
    )
    .unwrap()
}
