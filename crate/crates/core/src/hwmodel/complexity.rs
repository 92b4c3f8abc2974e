use serde::Serialize;

use crate::baselines::{Lmmse, Ocd};
use crate::count::MulTally;
use crate::detector::{gbcd_equalize_with, matched_filter, DenoiserSchedule, FloatPath, GbcdConfig, Preprocessed};
use crate::error::Result;
use crate::mimo::{complex_gaussian_matrix, Constellation};
use crate::rng::seeded;
use crate::CVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Gbcd,
    Ocd,
    Lmmse,
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Gbcd => "gbcd",
            Self::Ocd => "ocd",
            Self::Lmmse => "lmmse",
        })
    }
}

/// Real-valued multiplications per coherence block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ComplexityReport {
    pub algorithm: Algorithm,
    pub b: usize,
    pub u: usize,
    /// Iterations (0 when not applicable).
    pub k: usize,
    /// Block size (0 when not applicable).
    pub l: usize,
    pub preprocessing: u64,
    pub per_transmission: u64,
}

impl ComplexityReport {
    pub fn total(&self, t: u64) -> u64 {
        self.preprocessing + t * self.per_transmission
    }
}

/// Closed form at block size 2.
pub fn gbcd_closed_form(b: usize, u: usize, k: usize) -> ComplexityReport {
    let (b6, u6, k6) = (b as u64, u as u64, k as u64);
    ComplexityReport {
        algorithm: Algorithm::Gbcd,
        b,
        u,
        k,
        l: 2,
        preprocessing: 2 * b6 * u6 * u6 + u6 * (2 * u6 + 2) + 3 * u6,
        per_transmission: 4 * b6 * u6 + 8 * k6 * u6 + 4 * k6 * u6 * u6,
    }
}

/// Gram matrix plus Cholesky factorization.
pub fn lmmse_preprocessing_closed_form(b: usize, u: usize) -> u64 {
    let (b6, u6) = (b as u64, u as u64);
    2 * b6 * u6 * u6 + (2 * u6 * u6 * u6 - 2 * u6) / 3
}

fn instance(b: usize, u: usize) -> (crate::CMatrix, CVector) {
    let mut rng = seeded(0x00C0_FFEE);
    let h = complex_gaussian_matrix(b, u, 1.0, &mut rng);
    let y = complex_gaussian_matrix(b, 1, 1.0, &mut rng).column(0).into_owned();
    (h, y)
}

/// Instrumented count of the GBCD implementation (denoiser not counted).
pub fn complexity_gbcd(b: usize, u: usize, k: usize, l: usize) -> Result<ComplexityReport> {
    let (h, y) = instance(b, u);
    let cfg = GbcdConfig { block_size: l, sort: true, iterations: k };
    let mut pre_t = MulTally::default();
    let pre = Preprocessed::with(&h, 0.1, 1.0, &cfg, &FloatPath, &mut pre_t)?;
    let mut eq_t = MulTally::default();
    let y_mf = matched_filter(&h, &y, &mut eq_t);
    let sched = DenoiserSchedule::boxed(&Constellation::new(4)?);
    gbcd_equalize_with(&pre, &y_mf, &sched, k, &FloatPath, &mut eq_t, None)?;
    Ok(ComplexityReport {
        algorithm: Algorithm::Gbcd,
        b,
        u,
        k,
        l,
        preprocessing: pre_t.0,
        per_transmission: eq_t.0,
    })
}

/// Instrumented count of implicit LMMSE: matched filter and two triangular
/// solves per transmission.
pub fn complexity_lmmse(b: usize, u: usize) -> Result<ComplexityReport> {
    let (h, y) = instance(b, u);
    let mut pre_t = MulTally::default();
    let det = Lmmse::new(&h, 0.1, 1.0, &mut pre_t)?;
    let mut eq_t = MulTally::default();
    det.equalize(&h, &y, &mut eq_t);
    Ok(ComplexityReport {
        algorithm: Algorithm::Lmmse,
        b,
        u,
        k: 0,
        l: 0,
        preprocessing: pre_t.0,
        per_transmission: eq_t.0,
    })
}

/// Instrumented count of OCD.
pub fn complexity_ocd(b: usize, u: usize, k: usize) -> Result<ComplexityReport> {
    let (h, y) = instance(b, u);
    let mut pre_t = MulTally::default();
    let ocd = Ocd::new(&h, &mut pre_t)?;
    let mut eq_t = MulTally::default();
    ocd.equalize(&h, &y, k, 1.0, &mut eq_t)?;
    Ok(ComplexityReport {
        algorithm: Algorithm::Ocd,
        b,
        u,
        k,
        l: 1,
        preprocessing: pre_t.0,
        per_transmission: eq_t.0,
    })
}
