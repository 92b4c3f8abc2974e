use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::CMatrix;

/// Propagation condition of a channel realization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelCondition {
    #[serde(alias = "nonlos", alias = "non-los")]
    NonLos,
    Los,
}

impl std::fmt::Display for ChannelCondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ChannelCondition::NonLos => f.write_str("nonlos"),
            ChannelCondition::Los => f.write_str("los"),
        }
    }
}

/// Knobs of the uniform-linear-array Rician model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LosParams {
    /// Rician K-factor in dB; `f64::INFINITY` removes the scattered part.
    pub k_factor_db: f64,
    /// UE angles are drawn uniformly from `[-max_angle_deg, max_angle_deg]`.
    pub max_angle_deg: f64,
    /// Minimum pairwise angular separation.
    pub min_separation_deg: f64,
}

impl Default for LosParams {
    fn default() -> Self {
        Self {
            k_factor_db: 10.0,
            max_angle_deg: 60.0,
            min_separation_deg: 1.0,
        }
    }
}

/// Synthetic channel model standing in for a ray-tracing generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelModel {
    /// i.i.d. circularly-symmetric complex Gaussian entries of unit variance.
    Rayleigh,
    /// Planar-wavefront steering vectors plus a Rician scattered part.
    Los(LosParams),
}

impl ChannelModel {
    pub fn condition(&self) -> ChannelCondition {
        match self {
            ChannelModel::Rayleigh => ChannelCondition::NonLos,
            ChannelModel::Los(_) => ChannelCondition::Los,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// `B x U` channel matrix.
    pub h: CMatrix,
    pub condition: ChannelCondition,
    /// Per-UE receive power in dB relative to the mean over UEs.
    pub ue_power_db: Vec<f64>,
}

/// Receive-power window of the power control, in dB around the mean.
pub const POWER_CONTROL_DB: f64 = 3.0;

/// `b x u` matrix of i.i.d. circularly-symmetric complex Gaussians.
pub fn complex_gaussian_matrix<R: Rng + ?Sized>(b: usize, u: usize, variance: f64, rng: &mut R) -> CMatrix {
    DMatrix::from_fn(b, u, |_, _| complex_gaussian(rng, variance))
}

pub(crate) fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

fn check_dims(b: usize, u: usize) -> Result<()> {
    if u == 0 || b == 0 || b < u {
        return Err(Error::InvalidDimensions(format!(
            "need B >= U >= 1, got B={b}, U={u}"
        )));
    }
    Ok(())
}

/// Draws a channel realization and applies power control.
pub fn gen_channel<R: Rng + ?Sized>(
    b: usize,
    u: usize,
    model: &ChannelModel,
    rng: &mut R,
) -> Result<ChannelRealization> {
    check_dims(b, u)?;
    match model {
        ChannelModel::Rayleigh => {
            let h = DMatrix::from_fn(b, u, |_, _| complex_gaussian(rng, 1.0));
            finish(h, ChannelCondition::NonLos)
        }
        ChannelModel::Los(p) => {
            let angles = draw_angles(u, p, rng)?;
            gen_los_with_angles(b, &angles, p.k_factor_db, rng)
        }
    }
}

fn draw_angles<R: Rng + ?Sized>(u: usize, p: &LosParams, rng: &mut R) -> Result<Vec<f64>> {
    let max = p.max_angle_deg.to_radians();
    let sep = p.min_separation_deg.to_radians();
    if sep * (u as f64 - 1.0) > 2.0 * max {
        return Err(Error::InvalidParameter(format!(
            "{u} UEs cannot be separated by {}° within ±{}°",
            p.min_separation_deg, p.max_angle_deg
        )));
    }
    const ATTEMPTS: usize = 10_000;
    for _ in 0..ATTEMPTS {
        let mut angles: Vec<f64> = (0..u).map(|_| rng.random_range(-max..=max)).collect();
        angles.sort_by(f64::total_cmp);
        if angles.windows(2).all(|w| w[1] - w[0] >= sep) {
            // Undo the sort so UE order carries no angular information.
            for i in (1..u).rev() {
                let j = rng.random_range(0..=i);
                angles.swap(i, j);
            }
            return Ok(angles);
        }
    }
    Err(Error::InvalidParameter(format!(
        "angle draw with {}° separation failed after {ATTEMPTS} attempts",
        p.min_separation_deg
    )))
}

/// Half-wavelength ULA steering vector with unit-modulus entries.
pub fn steering_vector(b: usize, angle: f64) -> Vec<Complex64> {
    let phase = PI * angle.sin();
    (0..b)
        .map(|n| Complex64::from_polar(1.0, -phase * n as f64))
        .collect()
}

/// LoS channel for explicit UE angles (radians).
pub fn gen_los_with_angles<R: Rng + ?Sized>(
    b: usize,
    angles: &[f64],
    k_factor_db: f64,
    rng: &mut R,
) -> Result<ChannelRealization> {
    let u = angles.len();
    check_dims(b, u)?;
    let k = 10f64.powf(k_factor_db / 10.0);
    let (w_los, w_scat) = if k.is_infinite() {
        (1.0, 0.0)
    } else {
        ((k / (k + 1.0)).sqrt(), (1.0 / (k + 1.0)).sqrt())
    };
    let mut h = DMatrix::zeros(b, u);
    for (col, &theta) in angles.iter().enumerate() {
        let a = steering_vector(b, theta);
        let phi = Complex64::from_polar(1.0, rng.random_range(0.0..2.0 * PI));
        for row in 0..b {
            let scat = if w_scat > 0.0 {
                complex_gaussian(rng, 1.0) * w_scat
            } else {
                Complex64::new(0.0, 0.0)
            };
            h[(row, col)] = a[row] * phi * w_los + scat;
        }
    }
    finish(h, ChannelCondition::Los)
}

fn finish(mut h: CMatrix, condition: ChannelCondition) -> Result<ChannelRealization> {
    let ue_power_db = power_control(&mut h)?;
    Ok(ChannelRealization {
        h,
        condition,
        ue_power_db,
    })
}

/// Clips each column's energy into `mean · 10^(±0.3)` and returns the
/// resulting per-UE power relative to the new mean, in dB.
pub fn power_control(h: &mut CMatrix) -> Result<Vec<f64>> {
    let energies: Vec<f64> = h.column_iter().map(|c| c.norm_squared()).collect();
    for (u, &e) in energies.iter().enumerate() {
        if !(e > 0.0) || !e.is_finite() {
            return Err(Error::DegenerateChannel(u));
        }
    }
    let mean = energies.iter().sum::<f64>() / energies.len() as f64;
    let window = 10f64.powf(POWER_CONTROL_DB / 10.0);
    let (lo, hi) = (mean / window, mean * window);
    for (u, &e) in energies.iter().enumerate() {
        let target = e.clamp(lo, hi);
        if target != e {
            let g = (target / e).sqrt();
            h.column_mut(u).iter_mut().for_each(|x| *x *= g);
        }
    }
    let controlled: Vec<f64> = h.column_iter().map(|c| c.norm_squared()).collect();
    let mean = controlled.iter().sum::<f64>() / controlled.len() as f64;
    Ok(controlled.iter().map(|e| 10.0 * (e / mean).log10()).collect())
}

/// Adds the least-squares channel-estimation error `E` with i.i.d. entries
/// of variance `N0 / (Es U)`.
pub fn estimate_channel<R: Rng + ?Sized>(h: &CMatrix, n0: f64, es: f64, rng: &mut R) -> CMatrix {
    let u = h.ncols() as f64;
    let var = n0 / (es * u);
    if var == 0.0 {
        return h.clone();
    }
    h.map(|x| x + complex_gaussian(rng, var))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn rejects_bad_dimensions() {
        let mut rng = seeded(1);
        assert!(gen_channel(2, 4, &ChannelModel::Rayleigh, &mut rng).is_err());
        assert!(gen_channel(4, 0, &ChannelModel::Rayleigh, &mut rng).is_err());
    }

    #[test]
    fn seeded_generation_is_bit_identical() {
        let a = gen_channel(4, 2, &ChannelModel::Rayleigh, &mut seeded(11)).unwrap();
        let b = gen_channel(4, 2, &ChannelModel::Rayleigh, &mut seeded(11)).unwrap();
        assert_eq!(a.h.shape(), (4, 2));
        for (x, y) in a.h.iter().zip(b.h.iter()) {
            assert_eq!(x.re.to_bits(), y.re.to_bits());
            assert_eq!(x.im.to_bits(), y.im.to_bits());
        }
    }

    #[test]
    fn power_control_bounds_spread() {
        let mut rng = seeded(5);
        for model in [ChannelModel::Rayleigh, ChannelModel::Los(LosParams::default())] {
            for _ in 0..200 {
                let ch = gen_channel(4, 4, &model, &mut rng).unwrap();
                let max = ch.ue_power_db.iter().cloned().fold(f64::MIN, f64::max);
                let min = ch.ue_power_db.iter().cloned().fold(f64::MAX, f64::min);
                assert!(max - min <= 2.0 * POWER_CONTROL_DB + 1e-9, "{max} {min}");
                assert!(ch.h.iter().all(|x| x.re.is_finite() && x.im.is_finite()));
            }
        }
    }

    #[test]
    fn power_control_clips_an_outlier_column() {
        let mut h = DMatrix::from_element(2, 2, Complex64::new(1.0, 0.0));
        h[(0, 1)] = Complex64::new(100.0, 0.0);
        let db = power_control(&mut h).unwrap();
        assert!((db[0] - db[1]).abs() <= 6.0 + 1e-9);
    }

    #[test]
    fn zero_column_is_rejected() {
        let mut h = DMatrix::from_element(3, 2, Complex64::new(1.0, 0.0));
        h.column_mut(1).fill(Complex64::new(0.0, 0.0));
        assert_eq!(power_control(&mut h), Err(Error::DegenerateChannel(1)));
    }

    #[test]
    fn colinear_los_users_give_rank_one_gram() {
        let mut rng = seeded(3);
        let ch = gen_los_with_angles(8, &[0.3, 0.3], f64::INFINITY, &mut rng).unwrap();
        let h = &ch.h;
        let g = h.adjoint() * h;
        let off = g[(0, 1)].norm();
        let geo = (g[(0, 0)].re * g[(1, 1)].re).sqrt();
        assert!((off - geo).abs() < 1e-9 * geo);
    }

    #[test]
    fn estimation_error_is_exact_without_noise() {
        let mut rng = seeded(9);
        let ch = gen_channel(4, 2, &ChannelModel::Rayleigh, &mut rng).unwrap();
        assert_eq!(estimate_channel(&ch.h, 0.0, 1.0, &mut rng), ch.h);
    }

    #[test]
    fn estimation_error_variance() {
        let mut rng = seeded(21);
        // N0 = Es U gives unit variance.
        let h = DMatrix::zeros(1000, 100);
        let e = estimate_channel(&h, 100.0, 1.0, &mut rng);
        let var = e.iter().map(|x| x.norm_sqr()).sum::<f64>() / 1e5;
        assert!((var - 1.0).abs() < 0.05, "{var}");
        // Doubling U halves the variance.
        let h2 = DMatrix::zeros(500, 200);
        let e2 = estimate_channel(&h2, 100.0, 1.0, &mut rng);
        let var2 = e2.iter().map(|x| x.norm_sqr()).sum::<f64>() / 1e5;
        assert!((var2 / var - 0.5).abs() < 0.05, "{var2}");
    }
}
