//! Piecewise-linear mapping tables.
//!
//! A table maps a real input through a range identifier (sorted bin
//! boundaries) to a slope/bias pair and returns `slope * x + bias`. The same
//! structure evaluates the BOX clip, the piecewise-linear PME and the per-bit
//! LLR distance difference.
//!
//! Text form (TOML):
//!
//! ```toml
//! mode = "pme"
//! boundaries = [-1.5, -0.5, 0.5, 1.5]
//! slopes = [0.0, 0.5, 0.0, 0.5, 0.0]
//! biases = [-1.0, 0.0, 0.0, 0.0, 1.0]
//! ```

use serde::{Deserialize, Serialize};

use super::pme::clip_unit;
use crate::error::{Error, Result};
use crate::mimo::Constellation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlmMode {
    Box,
    Pme,
    LlrDistance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlmTable {
    pub mode: PlmMode,
    pub boundaries: Vec<f64>,
    pub slopes: Vec<f64>,
    pub biases: Vec<f64>,
}

impl PlmTable {
    pub fn new(mode: PlmMode, boundaries: Vec<f64>, slopes: Vec<f64>, biases: Vec<f64>) -> Result<Self> {
        if slopes.len() != boundaries.len() + 1 || biases.len() != slopes.len() {
            return Err(Error::InvalidParameter(format!(
                "PLM table needs bins = boundaries + 1 (got {} boundaries, {} slopes, {} biases)",
                boundaries.len(),
                slopes.len(),
                biases.len()
            )));
        }
        if boundaries.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParameter(
                "PLM boundaries must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            mode,
            boundaries,
            slopes,
            biases,
        })
    }

    /// Clip to `[-amplitude, amplitude]`.
    pub fn box_clip(amplitude: f64) -> Self {
        Self {
            mode: PlmMode::Box,
            boundaries: vec![-amplitude, amplitude],
            slopes: vec![0.0, 1.0, 0.0],
            biases: vec![-amplitude, 0.0, amplitude],
        }
    }

    /// `out_scale * sum_{k=-gamma}^{gamma} clip(rho (x + 2 beta k))` for a
    /// `side`-level PAM alphabet.
    pub fn pme(rho: f64, beta: f64, side: usize, out_scale: f64) -> Result<Self> {
        if !(rho > 0.0 && beta > 0.0 && rho.is_finite() && beta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "PME needs rho > 0 and beta > 0 (rho={rho}, beta={beta})"
            )));
        }
        let gamma = (side / 2) as i64 - 1;
        let ks: Vec<f64> = (-gamma..=gamma).map(|k| k as f64).collect();
        let mut points: Vec<f64> = ks
            .iter()
            .flat_map(|&k| [-2.0 * beta * k - 1.0 / rho, -2.0 * beta * k + 1.0 / rho])
            .collect();
        points.sort_by(f64::total_cmp);
        points.dedup();
        let segment = |x: f64| -> (f64, f64) {
            let (mut slope, mut bias) = (0.0, 0.0);
            for &k in &ks {
                let t = rho * (x + 2.0 * beta * k);
                if t >= 1.0 || t <= -1.0 {
                    bias += clip_unit(t);
                } else {
                    slope += rho;
                    bias += 2.0 * rho * beta * k;
                }
            }
            (out_scale * slope, out_scale * bias)
        };
        Ok(Self::from_probe(PlmMode::Pme, points, segment))
    }

    /// Table for bit `bit` (MSB first) of one axis: the max-log distance
    /// difference `min_{a: bit=0} (x - a)^2 - min_{a: bit=1} (x - a)^2` over
    /// the unit-gain PAM alphabet.
    pub fn llr_distance(constellation: &Constellation, bit: usize) -> Result<Self> {
        let half = constellation.bits_per_axis();
        if bit >= half {
            return Err(Error::InvalidParameter(format!(
                "axis bit {bit} out of range (axis has {half} bits)"
            )));
        }
        let pam = constellation.pam_points();
        let labels = constellation.pam_labels();
        let shift = half - 1 - bit;
        let mut points: Vec<f64> = Vec::new();
        for i in 0..pam.len() {
            for j in i + 1..pam.len() {
                points.push(0.5 * (pam[i] + pam[j]));
            }
        }
        points.sort_by(f64::total_cmp);
        points.dedup();
        let segment = |x: f64| -> (f64, f64) {
            let nearest = |value: u32| -> f64 {
                *pam.iter()
                    .zip(labels)
                    .filter(|(_, &l)| (l >> shift) & 1 == value)
                    .map(|(a, _)| a)
                    .min_by(|a, b| (x - **a).abs().total_cmp(&(x - **b).abs()))
                    .unwrap()
            };
            let (a0, a1) = (nearest(0), nearest(1));
            (2.0 * (a1 - a0), a0 * a0 - a1 * a1)
        };
        Ok(Self::from_probe(PlmMode::LlrDistance, points, segment))
    }

    fn from_probe(mode: PlmMode, boundaries: Vec<f64>, segment: impl Fn(f64) -> (f64, f64)) -> Self {
        let n = boundaries.len();
        let probe = |bin: usize| -> f64 {
            match (bin, n) {
                (_, 0) => 0.0,
                (0, _) => boundaries[0] - 1.0,
                (b, _) if b == n => boundaries[n - 1] + 1.0,
                (b, _) => 0.5 * (boundaries[b - 1] + boundaries[b]),
            }
        };
        let (slopes, biases) = (0..=n).map(|b| segment(probe(b))).unzip();
        Self {
            mode,
            boundaries,
            slopes,
            biases,
        }
    }

    /// Range identifier: index of the bin containing `x`.
    pub fn bin(&self, x: f64) -> usize {
        self.boundaries.partition_point(|&b| b <= x)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let i = self.bin(x);
        self.slopes[i] * x + self.biases[i]
    }

    /// Slope of the bin containing `x`.
    pub fn slope_at(&self, x: f64) -> f64 {
        self.slopes[self.bin(x)]
    }

    pub fn bins(&self) -> usize {
        self.slopes.len()
    }

    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("PLM table serializes")
    }

    pub fn from_text(s: &str) -> Result<Self> {
        let t: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        Self::new(t.mode, t.boundaries, t.slopes, t.biases)
    }
}
