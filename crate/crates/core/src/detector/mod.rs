//! Gram-domain block coordinate descent (GBCD) detection.
//!
//! Preprocessing runs once per channel realization: Gram matrix,
//! reciprocal single-UE SINRs, SINR-sorted UE blocks and block inverses.
//! Equalization runs per receive vector on the matched-filter output and a
//! residual `r = y_mf - G z` that is updated in place after every block.

mod gbcd;
mod preprocess;
mod trace;

pub use gbcd::{
    gbcd_equalize, gbcd_equalize_with, residual_gap, DenoiserSchedule, EqualizerState, StepHook,
    GbcdDetector, LlrNormalization,
};
pub use preprocess::{
    block_inverses, gram, matched_filter, reciprocal_sinr, sort_ues, GbcdConfig, Preprocessed,
    SINGULAR_RELATIVE_DET,
};
pub use trace::{EqualizerTrace, TraceRow};

use num_complex::Complex64;

/// Arithmetic hooks of the detector datapath.
///
/// The float path is the identity everywhere; the fixed-point model
/// overrides these to quantize signals and replace divisions by a LUT.
pub trait Datapath: Sync {
    fn reciprocal(&self, x: f64) -> f64 {
        1.0 / x
    }
    fn gram_entry(&self, x: Complex64) -> Complex64 {
        x
    }
    fn estimate(&self, x: Complex64) -> Complex64 {
        x
    }
}

/// Double-precision datapath.
#[derive(Debug, Default, Clone, Copy)]
pub struct FloatPath;

impl Datapath for FloatPath {}
