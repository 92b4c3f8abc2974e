use num_complex::Complex64;

use crate::count::{Tally, ABS2, CMUL, RCMUL};
use crate::error::{Error, Result};
use crate::{CMatrix, CVector};

/// Lower-triangular `L` with `L L^H = A` and a real positive diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct CholeskyFactor {
    pub l: CMatrix,
}

impl CholeskyFactor {
    /// Row-by-column factorization; a division by the real pivot costs 2.
    pub fn new<T: Tally>(a: &CMatrix, tally: &mut T) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::InvalidDimensions(format!("{}x{} is not square", n, a.ncols())));
        }
        let mut l = CMatrix::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)].re;
            for k in 0..j {
                d -= l[(j, k)].norm_sqr();
            }
            tally.add(ABS2 * j as u64);
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::NotPositiveDefinite(j));
            }
            let ljj = d.sqrt();
            l[(j, j)] = Complex64::new(ljj, 0.0);
            for i in j + 1..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)].conj();
                }
                l[(i, j)] = s / ljj;
                tally.add(CMUL * j as u64 + RCMUL);
            }
        }
        Ok(Self { l })
    }

    /// Solves `A x = b`.
    pub fn solve<T: Tally>(&self, b: &CVector, tally: &mut T) -> CVector {
        let w = forward_substitution(&self.l, b, tally);
        backward_substitution(&self.l, &w, tally)
    }

    /// Diagonal of `A^{-1}` from the columns of `L^{-1}`.
    pub fn inverse_diagonal(&self) -> Vec<f64> {
        let n = self.l.nrows();
        let mut diag = vec![0.0; n];
        for col in 0..n {
            let mut e = CVector::zeros(n);
            e[col] = Complex64::new(1.0, 0.0);
            let w = forward_substitution(&self.l, &e, &mut crate::count::NoTally);
            // [A^-1]_cc = sum_k |[L^-1]_kc|^2
            diag[col] = w.iter().map(|x| x.norm_sqr()).sum();
        }
        diag
    }
}

/// Solves `L w = b`.
pub fn forward_substitution<T: Tally>(l: &CMatrix, b: &CVector, tally: &mut T) -> CVector {
    let n = l.nrows();
    let mut w = CVector::zeros(n);
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[(i, k)] * w[k];
        }
        w[i] = s / l[(i, i)].re;
        tally.add(CMUL * i as u64 + RCMUL);
    }
    w
}

/// Solves `L^H x = w`.
pub fn backward_substitution<T: Tally>(l: &CMatrix, w: &CVector, tally: &mut T) -> CVector {
    let n = l.nrows();
    let mut x = CVector::zeros(n);
    for i in (0..n).rev() {
        let mut s = w[i];
        for k in i + 1..n {
            s -= l[(k, i)].conj() * x[k];
        }
        x[i] = s / l[(i, i)].re;
        tally.add(CMUL * (n - 1 - i) as u64 + RCMUL);
    }
    x
}
