//! Symbol denoisers and soft-output computation.

mod llr;
mod plm;
mod pme;

pub use llr::{
    compute_llrs, llr_to_prob, max_log_llrs, max_log_llrs_exhaustive, LlrParams, SoftOutput,
    XI_FLOOR,
};
pub use plm::{PlmMode, PlmTable};
pub use pme::{clip_unit, fit_omega, pme_exact, pme_exact_complex, pme_piecewise, PmeFit};

use num_complex::Complex64;

/// Projection onto `[-amplitude, amplitude]` on each axis.
///
/// For square QAM the tightest convex polytope around the alphabet is this
/// box, so the projection is an independent clip of both axes.
pub fn box_denoise(v: Complex64, amplitude: f64) -> Complex64 {
    Complex64::new(
        v.re.clamp(-amplitude, amplitude),
        v.im.clamp(-amplitude, amplitude),
    )
}
