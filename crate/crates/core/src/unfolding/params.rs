use serde::{Deserialize, Serialize};

use crate::detector::{DenoiserSchedule, GbcdConfig, GbcdDetector, LlrNormalization};
use crate::error::{Error, Result};
use crate::mimo::{ChannelCondition, Constellation};

/// Trained unfolding parameters of one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedParams {
    pub order: usize,
    pub snr_db: f64,
    pub condition: ChannelCondition,
    pub rho: Vec<f64>,
    pub beta: Vec<f64>,
    pub alpha: f64,
    #[serde(default)]
    pub epochs: usize,
    #[serde(default)]
    pub val_loss: f64,
    #[serde(default)]
    pub seed: u64,
}

impl TrainedParams {
    /// Parameters under which the PME denoiser reduces to the BOX clip:
    /// unit ramps centred on the PAM levels.
    pub fn box_equivalent(c: &Constellation, k: usize, alpha: f64) -> Self {
        Self {
            order: c.order(),
            snr_db: f64::NAN,
            condition: ChannelCondition::NonLos,
            rho: vec![1.0 / c.scale(); k],
            beta: vec![c.scale(); k],
            alpha,
            epochs: 0,
            val_loss: f64::NAN,
            seed: 0,
        }
    }

    pub fn iterations(&self) -> usize {
        self.rho.len()
    }

    pub fn parameter_count(&self) -> usize {
        self.rho.len() + self.beta.len() + 1
    }

    pub fn validate(&self) -> Result<()> {
        let ok = !self.rho.is_empty()
            && self.rho.len() == self.beta.len()
            && self.rho.iter().chain(&self.beta).all(|&x| x > 0.0 && x.is_finite())
            && self.alpha >= 0.0
            && self.alpha.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "trained parameters need K >= 1 positive (rho, beta) pairs and alpha >= 0: {self:?}"
            )))
        }
    }

    pub fn schedule(&self, c: &Constellation) -> Result<DenoiserSchedule> {
        DenoiserSchedule::pme(&self.rho, &self.beta, c)
    }

    pub fn detector(&self, c: &Constellation, block_size: usize, sort: bool) -> Result<GbcdDetector> {
        self.validate()?;
        Ok(GbcdDetector {
            schedule: self.schedule(c)?,
            constellation: c.clone(),
            config: GbcdConfig {
                block_size,
                sort,
                iterations: self.iterations(),
            },
            normalization: LlrNormalization::Fixed(self.alpha),
        })
    }

    /// Unconstrained coordinates: log for `rho` and `beta`, inverse
    /// softplus for `alpha`.
    pub(crate) fn to_theta(&self) -> Vec<f64> {
        let mut t: Vec<f64> = self.rho.iter().chain(&self.beta).map(|x| x.ln()).collect();
        t.push(inv_softplus(self.alpha));
        t
    }

    pub(crate) fn with_theta(&self, theta: &[f64]) -> Self {
        let k = self.rho.len();
        let mut p = self.clone();
        for i in 0..k {
            p.rho[i] = theta[i].exp();
            p.beta[i] = theta[k + i].exp();
        }
        p.alpha = softplus(theta[2 * k]);
        p
    }
}

/// `ln(1 + e^x)` without overflow or cancellation.
pub(crate) fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn inv_softplus(y: f64) -> f64 {
    if y > 30.0 {
        y
    } else {
        y.exp_m1().max(f64::MIN_POSITIVE).ln()
    }
}
