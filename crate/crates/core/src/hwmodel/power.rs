use super::timing::TimingModel;
use crate::error::{Error, Result};

/// Least-squares fit of `P(T) = P_tilde + eta(T) P_equ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerFit {
    pub p_tilde: f64,
    pub p_equ: f64,
    pub r_squared: f64,
}

impl PowerFit {
    pub fn predict(&self, t: f64) -> f64 {
        self.predict_with(t, &TimingModel::default())
    }

    pub fn predict_with(&self, t: f64, timing: &TimingModel) -> f64 {
        self.p_tilde + timing.utilization(t) * self.p_equ
    }
}

/// Fit over `(T, power)` samples with the 128x16 timing model.
pub fn fit_power(samples: &[(f64, f64)]) -> Result<PowerFit> {
    fit_power_with(samples, &TimingModel::default())
}

/// The model is linear in both unknowns, so ordinary least squares on
/// `[1, eta(T)]` solves it in closed form.
pub fn fit_power_with(samples: &[(f64, f64)], timing: &TimingModel) -> Result<PowerFit> {
    let n = samples.len() as f64;
    let xs: Vec<f64> = samples.iter().map(|&(t, _)| timing.utilization(t)).collect();
    let ys: Vec<f64> = samples.iter().map(|&(_, p)| p).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if samples.len() < 2 || !(sxx > 1e-15 * (1.0 + mx * mx)) {
        return Err(Error::InvalidParameter(
            "power fit needs at least two distinct T values".into(),
        ));
    }
    let p_equ = sxy / sxx;
    let p_tilde = my - p_equ * mx;
    let ss_res: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - p_tilde - p_equ * x).powi(2)).sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(PowerFit { p_tilde, p_equ, r_squared })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn truth(t: f64) -> f64 {
        420.0 + t / (t + 9.0) * 367.0
    }

    #[test]
    fn noiseless_recovery() {
        let s: Vec<(f64, f64)> = (1..=9).map(|i| (6.0 * i as f64, truth(6.0 * i as f64))).collect();
        let f = fit_power(&s).unwrap();
        assert!((f.p_tilde - 420.0).abs() < 1e-9);
        assert!((f.p_equ - 367.0).abs() < 1e-9);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
        assert!((f.p_tilde + f.p_equ - 787.0).abs() < 1e-9);
    }

    #[test]
    fn two_samples_interpolate() {
        let f = fit_power(&[(6.0, 500.0), (54.0, 700.0)]).unwrap();
        assert!((f.predict(6.0) - 500.0).abs() < 1e-9);
        assert!((f.predict(54.0) - 700.0).abs() < 1e-9);
        assert_eq!(f.r_squared, 1.0);
    }

    #[test]
    fn rank_deficient() {
        assert!(fit_power(&[(6.0, 1.0), (6.0, 2.0)]).is_err());
        assert!(fit_power(&[(6.0, 1.0)]).is_err());
    }
}
