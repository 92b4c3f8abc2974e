use std::io::Write;

use num_complex::Complex64;

use super::gbcd::{gbcd_equalize_with, DenoiserSchedule, EqualizerState};
use super::preprocess::Preprocessed;
use super::FloatPath;
use crate::count::NoTally;
use crate::error::Result;
use crate::CVector;

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    pub block: usize,
    pub residual_norm: f64,
    pub z: Vec<Complex64>,
}

/// Residual norm and estimate snapshot after every block step.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EqualizerTrace {
    pub rows: Vec<TraceRow>,
}

impl EqualizerTrace {
    pub fn record(
        pre: &Preprocessed,
        y_mf: &CVector,
        schedule: &DenoiserSchedule,
        iterations: usize,
    ) -> Result<(EqualizerState, Self)> {
        let mut rows = Vec::new();
        let mut hook = |k: usize, m: usize, st: &EqualizerState| {
            rows.push(TraceRow {
                iteration: k,
                block: m,
                residual_norm: st.r.norm(),
                z: st.z.iter().copied().collect(),
            });
        };
        let st = gbcd_equalize_with(pre, y_mf, schedule, iterations, &FloatPath, &mut NoTally, Some(&mut hook))?;
        Ok((st, Self { rows }))
    }

    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        let users = self.rows.first().map_or(0, |r| r.z.len());
        write!(w, "iteration,block,residual_norm")?;
        for u in 0..users {
            write!(w, ",z{u}_re,z{u}_im")?;
        }
        writeln!(w)?;
        for r in &self.rows {
            write!(w, "{},{},{:e}", r.iteration, r.block, r.residual_norm)?;
            for z in &r.z {
                write!(w, ",{:e},{:e}", z.re, z.im)?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}
