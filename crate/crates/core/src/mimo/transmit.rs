use nalgebra::DMatrix;
use rand::Rng;

use super::channel::complex_gaussian;
use super::Constellation;
use crate::error::{Error, Result};
use crate::CMatrix;

/// One coherence block worth of transmissions.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmissionBatch {
    /// `U x T` transmitted symbols.
    pub s: CMatrix,
    /// Label of every transmitted symbol, `labels[u][t]`.
    pub labels: Vec<Vec<usize>>,
    /// Bits of every UE in transmission order, `bits_per_symbol` per symbol.
    pub bits: Vec<Vec<u8>>,
    /// `B x T` receive matrix.
    pub y: CMatrix,
    /// `B x T` noise realization, kept for the reconstruction check.
    pub n: CMatrix,
    pub n0: f64,
}

impl TransmissionBatch {
    pub fn transmissions(&self) -> usize {
        self.s.ncols()
    }
}

/// Noise variance giving per-antenna receive SNR `snr_db`.
///
/// The receive SNR is `Es ||H||_F^2 / (B N0)`: total received signal power
/// per BS antenna over the noise variance. With unit-variance channel
/// entries this is `U Es / N0`.
pub fn noise_variance(h: &CMatrix, snr_db: f64, es: f64) -> f64 {
    let b = h.nrows() as f64;
    let energy = h.iter().map(|x| x.norm_sqr()).sum::<f64>();
    es * energy / (b * 10f64.powf(snr_db / 10.0))
}

/// `Y = H S + N` for given symbols.
pub fn transmit_symbols<R: Rng + ?Sized>(
    h: &CMatrix,
    s: &CMatrix,
    n0: f64,
    rng: &mut R,
) -> (CMatrix, CMatrix) {
    let n = DMatrix::from_fn(h.nrows(), s.ncols(), |_, _| {
        if n0 > 0.0 {
            complex_gaussian(rng, n0)
        } else {
            Default::default()
        }
    });
    (h * s + &n, n)
}

/// Maps per-UE bit streams onto symbols and sends them through `h`.
pub fn transmit_bits<R: Rng + ?Sized>(
    h: &CMatrix,
    constellation: &Constellation,
    bits: Vec<Vec<u8>>,
    snr_db: f64,
    rng: &mut R,
) -> Result<TransmissionBatch> {
    if !snr_db.is_finite() {
        return Err(Error::InvalidParameter(format!("snr_db = {snr_db}")));
    }
    let u = h.ncols();
    if bits.len() != u {
        return Err(Error::LengthMismatch {
            expected: u,
            actual: bits.len(),
        });
    }
    let m = constellation.bits_per_symbol();
    let t = bits[0].len() / m;
    if t == 0 {
        return Err(Error::InvalidParameter("no transmissions".into()));
    }
    let mut labels = Vec::with_capacity(u);
    for stream in &bits {
        if stream.len() != t * m {
            return Err(Error::LengthMismatch {
                expected: t * m,
                actual: stream.len(),
            });
        }
        labels.push(
            stream
                .chunks(m)
                .map(|c| constellation.label_of(c))
                .collect::<Vec<_>>(),
        );
    }
    let s = DMatrix::from_fn(u, t, |ue, col| constellation.point(labels[ue][col]));
    let n0 = noise_variance(h, snr_db, 1.0);
    let (y, n) = transmit_symbols(h, &s, n0, rng);
    Ok(TransmissionBatch {
        s,
        labels,
        bits,
        y,
        n,
        n0,
    })
}

/// Draws `t` uniform symbols per UE and transmits them.
pub fn transmit<R: Rng + ?Sized>(
    h: &CMatrix,
    constellation: &Constellation,
    t: usize,
    snr_db: f64,
    rng: &mut R,
) -> Result<TransmissionBatch> {
    if t == 0 {
        return Err(Error::InvalidParameter("T must be at least 1".into()));
    }
    let m = constellation.bits_per_symbol();
    let bits = (0..h.ncols())
        .map(|_| (0..t * m).map(|_| rng.random_range(0..2u8)).collect())
        .collect();
    transmit_bits(h, constellation, bits, snr_db, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mimo::{gen_channel, ChannelModel};
    use crate::rng::seeded;
    use num_complex::Complex64;

    #[test]
    fn reconstruction_is_exact() {
        let mut rng = seeded(2);
        let c = Constellation::new(16).unwrap();
        let ch = gen_channel(8, 4, &ChannelModel::Rayleigh, &mut rng).unwrap();
        let batch = transmit(&ch.h, &c, 5, 10.0, &mut rng).unwrap();
        let rec = &ch.h * &batch.s + &batch.n;
        assert_eq!(rec, batch.y);
        assert_eq!(batch.transmissions(), 5);
    }

    #[test]
    fn snr_definition() {
        let mut rng = seeded(4);
        let ch = gen_channel(16, 4, &ChannelModel::Rayleigh, &mut rng).unwrap();
        let n0 = noise_variance(&ch.h, 10.0, 1.0);
        let energy: f64 = ch.h.iter().map(|x| x.norm_sqr()).sum();
        assert!((energy / (16.0 * n0) - 10.0).abs() < 1e-9);
    }

    #[test]
    fn noiseless_limit() {
        let mut rng = seeded(8);
        let c = Constellation::new(4).unwrap();
        let ch = gen_channel(4, 2, &ChannelModel::Rayleigh, &mut rng).unwrap();
        let batch = transmit(&ch.h, &c, 3, 400.0, &mut rng).unwrap();
        let hs = &ch.h * &batch.s;
        for (a, b) in hs.iter().zip(batch.y.iter()) {
            assert!((a - b).norm() < 1e-12);
        }
        let (y, _) = transmit_symbols(&ch.h, &batch.s, 0.0, &mut rng);
        assert_eq!(y, hs);
    }

    #[test]
    fn noise_only_variance() {
        let mut rng = seeded(12);
        let h = DMatrix::from_element(100, 2, Complex64::new(1.0, 0.0));
        let s = DMatrix::zeros(2, 1000);
        let (y, _) = transmit_symbols(&h, &s, 0.7, &mut rng);
        let var = y.iter().map(|x| x.norm_sqr()).sum::<f64>() / y.len() as f64;
        assert!((var / 0.7 - 1.0).abs() < 0.05, "{var}");
    }

    #[test]
    fn noise_is_fresh_per_transmission() {
        // Correlation between column 0 and column 1 noise across seeds.
        let h = DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
        let s = DMatrix::zeros(1, 2);
        let mut acc = Complex64::new(0.0, 0.0);
        let mut p0 = 0.0;
        let mut p1 = 0.0;
        for seed in 0..20_000 {
            let (y, _) = transmit_symbols(&h, &s, 1.0, &mut seeded(seed));
            acc += y[(0, 0)] * y[(0, 1)].conj();
            p0 += y[(0, 0)].norm_sqr();
            p1 += y[(0, 1)].norm_sqr();
        }
        let rho = acc.norm() / (p0 * p1).sqrt();
        assert!(rho < 0.03, "{rho}");
    }

    #[test]
    fn symbols_are_uniform() {
        let mut rng = seeded(13);
        let c = Constellation::new(4).unwrap();
        let h = DMatrix::from_element(2, 2, Complex64::new(1.0, 0.0));
        let batch = transmit(&h, &c, 20_000, 10.0, &mut rng).unwrap();
        let mut hist = [0usize; 4];
        for row in &batch.labels {
            for &l in row {
                hist[l] += 1;
            }
        }
        for count in hist {
            assert!((count as f64 / 10_000.0 - 1.0).abs() < 0.05);
        }
    }
}
