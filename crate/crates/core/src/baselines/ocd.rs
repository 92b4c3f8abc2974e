use num_complex::Complex64;

use crate::count::{NoTally, Tally, ABS2, CMUL, RCMUL};
use crate::denoise::{box_denoise, compute_llrs, SoftOutput};
use crate::error::{Error, Result};
use crate::mimo::Constellation;
use crate::{CMatrix, CVector};

/// Channel-domain coordinate descent: per UE, exact least squares on the
/// column `h_u` against the receive-domain residual, then BOX clipping.
/// UEs are visited in natural order.
#[derive(Debug, Clone)]
pub struct Ocd {
    pub col_energy: Vec<f64>,
    inv_energy: Vec<f64>,
}

impl Ocd {
    pub fn new<T: Tally>(h: &CMatrix, tally: &mut T) -> Result<Self> {
        let b = h.nrows() as u64;
        let mut col_energy = Vec::with_capacity(h.ncols());
        let mut inv_energy = Vec::with_capacity(h.ncols());
        for (u, col) in h.column_iter().enumerate() {
            let e = col.norm_squared();
            tally.add(ABS2 * b + 1);
            if !(e > 0.0) {
                return Err(Error::DegenerateChannel(u));
            }
            col_energy.push(e);
            inv_energy.push(1.0 / e);
        }
        Ok(Self { col_energy, inv_energy })
    }

    /// Returns `(z, v_last)`.
    pub fn equalize<T: Tally>(
        &self,
        h: &CMatrix,
        y: &CVector,
        iterations: usize,
        amplitude: f64,
        tally: &mut T,
    ) -> Result<(CVector, CVector)> {
        if iterations == 0 {
            return Err(Error::InvalidParameter("OCD needs at least one iteration".into()));
        }
        let (b, u) = h.shape();
        let mut r = y.clone();
        let mut z = CVector::zeros(u);
        let mut v_last = CVector::zeros(u);
        for _ in 0..iterations {
            for k in 0..u {
                let col = h.column(k);
                let corr = col.dotc(&r);
                let v = z[k] + corr * self.inv_energy[k];
                let z_new = box_denoise(v, amplitude);
                let delta = z_new - z[k];
                r.axpy(-delta, &col, Complex64::new(1.0, 0.0));
                tally.add(2 * CMUL * b as u64 + RCMUL);
                v_last[k] = v;
                z[k] = z_new;
            }
        }
        Ok((z, v_last))
    }
}

pub fn ocd_equalize(h: &CMatrix, y: &CVector, iterations: usize, c: &Constellation) -> Result<(CVector, CVector)> {
    Ocd::new(h, &mut NoTally)?.equalize(h, y, iterations, c.max_amplitude(), &mut NoTally)
}

/// OCD with Neumann-approximated LLRs at `alpha = N0 / Es`.
pub fn ocd_detect(
    h: &CMatrix,
    y: &CVector,
    n0: f64,
    es: f64,
    iterations: usize,
    c: &Constellation,
) -> Result<SoftOutput> {
    let ocd = Ocd::new(h, &mut NoTally)?;
    let (_, v) = ocd.equalize(h, y, iterations, c.max_amplitude(), &mut NoTally)?;
    Ok(compute_llrs(v.as_slice(), &ocd.col_energy, es, n0 / es, c))
}
