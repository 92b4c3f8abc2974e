use std::io::Write;

use super::complexity::{complexity_gbcd, complexity_lmmse, complexity_ocd, Algorithm};
use super::power::PowerFit;
use super::timing::TimingModel;
use crate::error::Result;

pub const HWMODEL_HEADER: &str = "algorithm,B,U,K,T,pre_mults,eq_mults,total,theta_bps,eta,p_watts_fit";

#[derive(Debug, Clone, PartialEq)]
pub struct HwModelConfig {
    pub b: usize,
    pub u: usize,
    pub k: usize,
    pub order: usize,
    pub f_clk_hz: f64,
    pub t_values: Vec<u64>,
    /// Power model in watts.
    pub power: PowerFit,
}

impl Default for HwModelConfig {
    fn default() -> Self {
        Self {
            b: 128,
            u: 16,
            k: 3,
            order: 256,
            f_clk_hz: 887e6,
            t_values: vec![1, 2, 4, 6, 8, 10, 11, 12, 13, 14, 16, 20, 30, 40, 54, 64, 100],
            power: PowerFit {
                p_tilde: 0.420,
                p_equ: 0.367,
                r_squared: f64::NAN,
            },
        }
    }
}

/// One CSV row; timing and power apply to the GBCD design only.
#[derive(Debug, Clone, PartialEq)]
pub struct HwRow {
    pub algorithm: Algorithm,
    pub b: usize,
    pub u: usize,
    pub k: usize,
    pub t: u64,
    pub pre_mults: u64,
    pub eq_mults: u64,
    pub total: u64,
    pub timing: Option<(f64, f64, f64)>,
}

pub fn hwmodel_rows(cfg: &HwModelConfig) -> Result<Vec<HwRow>> {
    let reports = [
        complexity_gbcd(cfg.b, cfg.u, cfg.k, 2)?,
        complexity_ocd(cfg.b, cfg.u, cfg.k)?,
        complexity_lmmse(cfg.b, cfg.u)?,
    ];
    let timing = TimingModel::for_dims(cfg.b, cfg.u);
    let mut rows = Vec::new();
    for r in &reports {
        for &t in &cfg.t_values {
            let tf = t as f64;
            rows.push(HwRow {
                algorithm: r.algorithm,
                b: cfg.b,
                u: cfg.u,
                k: r.k,
                t,
                pre_mults: r.preprocessing,
                eq_mults: t * r.per_transmission,
                total: r.total(t),
                timing: (r.algorithm == Algorithm::Gbcd).then(|| {
                    (
                        timing.throughput(tf, cfg.order, cfg.u, cfg.f_clk_hz),
                        timing.utilization(tf),
                        cfg.power.predict_with(tf, &timing),
                    )
                }),
            });
        }
    }
    Ok(rows)
}

pub fn write_hwmodel_csv<W: Write>(w: &mut W, rows: &[HwRow]) -> Result<()> {
    writeln!(w, "{HWMODEL_HEADER}")?;
    for r in rows {
        write!(w, "{},{},{},{},{},{},{},{}", r.algorithm, r.b, r.u, r.k, r.t, r.pre_mults, r.eq_mults, r.total)?;
        match r.timing {
            Some((theta, eta, p)) => writeln!(w, ",{theta:.6e},{eta:.6},{p:.6}")?,
            None => writeln!(w, ",,,")?,
        }
    }
    Ok(())
}
