use std::path::Path;

use serde::{Deserialize, Serialize};

use super::params::TrainedParams;
use crate::error::{Error, Result};
use crate::mimo::ChannelCondition;

pub const MIN_TRAINED_SNR_DB: f64 = 0.0;
pub const MAX_TRAINED_SNR_DB: f64 = 25.0;

/// Trained parameters keyed by modulation, channel condition, iteration
/// count and SNR, stored as TOML `[[scenario]]` tables.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParamStore {
    #[serde(default, rename = "scenario")]
    pub records: Vec<TrainedParams>,
}

/// Result of a parameter query.
#[derive(Debug, Clone, PartialEq)]
pub enum Lookup {
    Params {
        params: TrainedParams,
        /// The record's SNR differs from the query.
        fallback: bool,
    },
    /// Below the trained SNR range: use the BOX denoiser.
    Box,
}

impl ParamStore {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_text(&text)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let store: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        for r in &store.records {
            r.validate()?;
        }
        Ok(store)
    }

    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("parameter store serializes")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    /// Replaces any record with the same key.
    pub fn insert(&mut self, p: TrainedParams) {
        self.records.retain(|r| {
            !(r.order == p.order && r.condition == p.condition && r.iterations() == p.iterations() && r.snr_db == p.snr_db)
        });
        self.records.push(p);
        self.records.sort_by(|a, b| {
            (a.order, a.condition as u8, a.iterations())
                .cmp(&(b.order, b.condition as u8, b.iterations()))
                .then(a.snr_db.total_cmp(&b.snr_db))
        });
    }

    /// Below 0 dB the BOX denoiser is used; above 25 dB the 25 dB record
    /// is used; otherwise the record with the nearest SNR.
    pub fn lookup(&self, order: usize, condition: ChannelCondition, iterations: usize, snr_db: f64) -> Result<Lookup> {
        if snr_db < MIN_TRAINED_SNR_DB {
            log::info!("SNR {snr_db} dB below trained range; using BOX");
            return Ok(Lookup::Box);
        }
        let target = snr_db.min(MAX_TRAINED_SNR_DB);
        let best = self
            .records
            .iter()
            .filter(|r| r.order == order && r.condition == condition && r.iterations() == iterations)
            .min_by(|a, b| (a.snr_db - target).abs().total_cmp(&(b.snr_db - target).abs()))
            .ok_or_else(|| {
                Error::MissingParams(format!("no parameters for {order}-QAM, {condition}, K = {iterations}"))
            })?;
        let fallback = best.snr_db != snr_db;
        if fallback {
            log::info!("SNR {snr_db} dB served by parameters trained at {} dB", best.snr_db);
        }
        Ok(Lookup::Params {
            params: best.clone(),
            fallback,
        })
    }
}
