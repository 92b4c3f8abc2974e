//! Reference detectors: implicit LMMSE through a Cholesky factorization,
//! and channel-domain optimized coordinate descent (OCD) with BOX denoising.

mod cholesky;
mod lmmse;
mod ocd;

pub use cholesky::{backward_substitution, forward_substitution, CholeskyFactor};
pub use lmmse::{lmmse_detect, Lmmse};
pub use ocd::{ocd_detect, ocd_equalize, Ocd};
