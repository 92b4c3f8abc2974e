use nalgebra::DVector;
use num_complex::Complex64;

use super::preprocess::{matched_filter, GbcdConfig, Preprocessed};
use super::{Datapath, FloatPath};
use crate::count::{NoTally, Tally, CMUL};
use crate::denoise::{compute_llrs, PlmTable, SoftOutput};
use crate::error::{Error, Result};
use crate::mimo::Constellation;
use crate::{CMatrix, CVector};

/// Per-iteration denoiser tables.
///
/// A single table is reused for every iteration; otherwise there must be at
/// least one table per iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct DenoiserSchedule {
    tables: Vec<PlmTable>,
}

impl DenoiserSchedule {
    pub fn boxed(c: &Constellation) -> Self {
        Self {
            tables: vec![PlmTable::box_clip(c.max_amplitude())],
        }
    }

    /// Piecewise-linear PME with `(rho[k], beta[k])` in iteration `k`.
    ///
    /// Inputs are on the unit-energy constellation scale, so `beta` near the
    /// PAM half-spacing `scale` places the ramps between the symbols.
    pub fn pme(rho: &[f64], beta: &[f64], c: &Constellation) -> Result<Self> {
        if rho.len() != beta.len() || rho.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "PME schedule needs equal nonempty rho/beta ({} vs {})",
                rho.len(),
                beta.len()
            )));
        }
        let side = c.pam_points().len();
        let tables = rho
            .iter()
            .zip(beta)
            .map(|(&r, &b)| PlmTable::pme(r, b, side, c.scale()))
            .collect::<Result<_>>()?;
        Ok(Self { tables })
    }

    pub fn from_tables(tables: Vec<PlmTable>) -> Result<Self> {
        if tables.is_empty() {
            return Err(Error::InvalidParameter("empty denoiser schedule".into()));
        }
        Ok(Self { tables })
    }

    pub fn table(&self, k: usize) -> &PlmTable {
        &self.tables[k.min(self.tables.len() - 1)]
    }

    pub fn tables(&self) -> &[PlmTable] {
        &self.tables
    }

    fn check(&self, iterations: usize) -> Result<()> {
        if iterations == 0 {
            return Err(Error::InvalidParameter(
                "GBCD needs at least one iteration".into(),
            ));
        }
        if self.tables.len() > 1 && self.tables.len() < iterations {
            return Err(Error::InvalidParameter(format!(
                "denoiser schedule has {} tables for {iterations} iterations",
                self.tables.len()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EqualizerState {
    pub z: CVector,
    /// `y_mf - G z`, maintained by recursion.
    pub r: CVector,
    /// Unconstrained estimates of the final iteration.
    pub v_last: CVector,
    /// Completed outer iterations.
    pub k: usize,
}

pub fn gbcd_equalize(
    pre: &Preprocessed,
    y_mf: &CVector,
    schedule: &DenoiserSchedule,
    iterations: usize,
) -> Result<EqualizerState> {
    gbcd_equalize_with(pre, y_mf, schedule, iterations, &FloatPath, &mut NoTally, None)
}

/// Observer called after every inner (block) step with `(k, m, state)`.
pub type StepHook<'a> = &'a mut dyn FnMut(usize, usize, &EqualizerState);

pub fn gbcd_equalize_with<P: Datapath, T: Tally>(
    pre: &Preprocessed,
    y_mf: &CVector,
    schedule: &DenoiserSchedule,
    iterations: usize,
    path: &P,
    tally: &mut T,
    mut hook: Option<StepHook<'_>>,
) -> Result<EqualizerState> {
    schedule.check(iterations)?;
    let u = pre.users();
    if y_mf.len() != u {
        return Err(Error::LengthMismatch {
            expected: u,
            actual: y_mf.len(),
        });
    }
    let g = &pre.gram;
    let mut st = EqualizerState {
        z: DVector::zeros(u),
        r: y_mf.clone(),
        v_last: DVector::zeros(u),
        k: 0,
    };
    let mut delta = Vec::new();
    for k in 0..iterations {
        let table = schedule.table(k);
        for (m, (a, kinv)) in pre.blocks.iter().zip(&pre.block_inverses).enumerate() {
            let l = a.len();
            delta.clear();
            for i in 0..l {
                let mut v = st.z[a[i]];
                for j in 0..l {
                    v += kinv[(i, j)] * st.r[a[j]];
                }
                st.v_last[a[i]] = v;
                let z_new = path.estimate(Complex64::new(table.eval(v.re), table.eval(v.im)));
                delta.push(z_new - st.z[a[i]]);
                st.z[a[i]] = z_new;
            }
            tally.add(CMUL * (l * l) as u64);
            for row in 0..u {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, &col) in a.iter().enumerate() {
                    acc += g[(row, col)] * delta[j];
                }
                st.r[row] -= acc;
            }
            tally.add(CMUL * (u * l) as u64);
            if let Some(h) = hook.as_mut() {
                h(k, m, &st);
            }
        }
        st.k = k + 1;
    }
    Ok(st)
}

/// `||r - (y_mf - G z)|| / ||y_mf||`.
pub fn residual_gap(pre: &Preprocessed, y_mf: &CVector, st: &EqualizerState) -> f64 {
    let direct = y_mf - &pre.gram * &st.z;
    (&st.r - direct).norm() / y_mf.norm().max(f64::MIN_POSITIVE)
}

/// LLR normalization `alpha` of the Neumann gain approximation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LlrNormalization {
    /// `alpha = N0 / Es`.
    NoiseRatio,
    Fixed(f64),
}

impl LlrNormalization {
    pub fn alpha(&self, n0: f64, es: f64) -> f64 {
        match *self {
            Self::NoiseRatio => n0 / es,
            Self::Fixed(a) => a,
        }
    }
}

/// Complete soft-output GBCD detector.
#[derive(Debug, Clone)]
pub struct GbcdDetector {
    pub constellation: Constellation,
    pub config: GbcdConfig,
    pub schedule: DenoiserSchedule,
    pub normalization: LlrNormalization,
}

impl GbcdDetector {
    pub fn boxed(constellation: Constellation, config: GbcdConfig) -> Self {
        Self {
            schedule: DenoiserSchedule::boxed(&constellation),
            constellation,
            config,
            normalization: LlrNormalization::NoiseRatio,
        }
    }

    /// Detects every column of `y` against one channel realization.
    pub fn detect(&self, h: &CMatrix, y: &CMatrix, n0: f64) -> Result<Vec<SoftOutput>> {
        self.detect_with(h, y, n0, &FloatPath, &mut NoTally)
    }

    pub fn detect_with<P: Datapath, T: Tally>(
        &self,
        h: &CMatrix,
        y: &CMatrix,
        n0: f64,
        path: &P,
        tally: &mut T,
    ) -> Result<Vec<SoftOutput>> {
        let es = self.constellation.energy();
        let pre = Preprocessed::with(h, n0, es, &self.config, path, tally)?;
        let alpha = self.normalization.alpha(n0, es);
        let diag = pre.gram_diag();
        y.column_iter()
            .map(|col| {
                let y_mf = matched_filter(h, &col.into_owned(), tally);
                let st = gbcd_equalize_with(&pre, &y_mf, &self.schedule, self.config.iterations, path, tally, None)?;
                Ok(compute_llrs(st.v_last.as_slice(), &diag, es, alpha, &self.constellation))
            })
            .collect()
    }
}
