//! Soft-output massive-MIMO uplink detection by Gram-domain block
//! coordinate descent, with baselines, a coded simulation chain, a
//! deep-unfolding trainer and analytical hardware models.

pub mod baselines;
pub mod count;
pub mod denoise;
pub mod detector;
pub mod error;
pub mod experiment;
pub mod fec;
pub mod hwmodel;
pub mod mimo;
pub mod rng;
pub mod unfolding;

pub use num_complex::Complex64;

/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<Complex64>;
/// Dense complex column vector.
pub type CVector = nalgebra::DVector<Complex64>;

pub use count::{MulTally, NoTally, Tally};
pub use denoise::{PlmMode, PlmTable, SoftOutput};
pub use detector::{GbcdConfig, GbcdDetector, Preprocessed};
pub use error::{Error, Result};
pub use mimo::{ChannelCondition, ChannelModel, Constellation};

#[cfg(test)]
pub(crate) mod testutil {
    use crate::mimo::complex_gaussian_matrix;
    use crate::rng::seeded;
    use crate::CMatrix;

    /// Unit-variance i.i.d. complex Gaussian `b x u` matrix.
    pub fn channel(b: usize, u: usize, seed: u64) -> CMatrix {
        complex_gaussian_matrix(b, u, 1.0, &mut seeded(seed))
    }
}
