use num_complex::Complex64;

use super::cholesky::CholeskyFactor;
use crate::count::{NoTally, Tally};
use crate::denoise::{max_log_llrs, LlrParams, SoftOutput};
use crate::detector::{gram, matched_filter};
use crate::error::Result;
use crate::mimo::Constellation;
use crate::{CMatrix, CVector};

/// Implicit LMMSE: `s = A^{-1} H^H y` with `A = G + (N0/Es) I`.
#[derive(Debug, Clone)]
pub struct Lmmse {
    pub factor: CholeskyFactor,
    /// Exact post-equalization gains `[A^{-1} G]_uu`.
    pub mu: Vec<f64>,
    pub es: f64,
}

impl Lmmse {
    pub fn new<T: Tally>(h: &CMatrix, n0: f64, es: f64, tally: &mut T) -> Result<Self> {
        let u = h.ncols();
        let ratio = n0 / es;
        let a = gram(h, tally) + CMatrix::identity(u, u) * Complex64::new(ratio, 0.0);
        let factor = CholeskyFactor::new(&a, tally)?;
        // A^{-1} G = I - (N0/Es) A^{-1}
        let mu = factor
            .inverse_diagonal()
            .into_iter()
            .map(|d| 1.0 - ratio * d)
            .collect();
        Ok(Self { factor, mu, es })
    }

    pub fn equalize<T: Tally>(&self, h: &CMatrix, y: &CVector, tally: &mut T) -> CVector {
        let y_mf = matched_filter(h, y, tally);
        self.factor.solve(&y_mf, tally)
    }

    pub fn detect<T: Tally>(&self, h: &CMatrix, y: &CVector, c: &Constellation, tally: &mut T) -> SoftOutput {
        let s_hat = self.equalize(h, y, tally);
        let params = LlrParams::from_gains(self.mu.clone(), self.es);
        SoftOutput {
            llrs: max_log_llrs(s_hat.as_slice(), &params, c),
            bits_per_symbol: c.bits_per_symbol(),
            estimates: s_hat.iter().copied().collect(),
            xi_floored: params.xi_floored,
        }
    }
}

pub fn lmmse_detect(h: &CMatrix, y: &CVector, n0: f64, es: f64, c: &Constellation) -> Result<SoftOutput> {
    Ok(Lmmse::new(h, n0, es, &mut NoTally)?.detect(h, y, c, &mut NoTally))
}
