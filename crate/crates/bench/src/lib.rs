//! Benchmark fixtures.

use gbcd_core::mimo::{gen_channel, transmit};
use gbcd_core::rng::stream;
use gbcd_core::{CMatrix, ChannelModel, Constellation};

/// One channel realization with `t` received vectors.
pub struct Fixture {
    pub h: CMatrix,
    pub y: CMatrix,
    pub n0: f64,
    pub constellation: Constellation,
}

impl Fixture {
    pub fn new(b: usize, u: usize, order: usize, t: usize, snr_db: f64) -> Self {
        let mut rng = stream(0xBE7C, &[b as u64, u as u64]);
        let constellation = Constellation::new(order).expect("supported order");
        let h = gen_channel(b, u, &ChannelModel::Rayleigh, &mut rng).expect("valid dimensions").h;
        let batch = transmit(&h, &constellation, t, snr_db, &mut rng).expect("valid dimensions");
        Self {
            h,
            y: batch.y,
            n0: batch.n0,
            constellation,
        }
    }

    /// 128 antennas, 16 UEs, 256-QAM.
    pub fn reference(t: usize) -> Self {
        Self::new(128, 16, 256, t, 25.0)
    }
}
