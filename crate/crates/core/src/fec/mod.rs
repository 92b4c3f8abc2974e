//! Coded-block chain: rate-1/2 constraint-length-7 convolutional code with
//! generators 133/171 (octal), puncturing to 3/4 and 5/6, trellis
//! termination, random interleaving and max-log Viterbi decoding.
//!
//! Decoder inputs follow the repo LLR convention (`LLR > 0` favours bit 1).

mod conv;
mod interleave;
mod viterbi;

pub use conv::{depuncture, encode_mother, puncture, punctured_len, CONSTRAINT_LENGTH, GENERATORS};
pub use interleave::Interleaver;
pub use viterbi::viterbi_decode;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Zero bits appended to drive the encoder back to state 0.
pub const TAIL_BITS: usize = CONSTRAINT_LENGTH - 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CodeRate {
    #[serde(rename = "1/2")]
    Half,
    #[serde(rename = "3/4")]
    ThreeQuarters,
    #[serde(rename = "5/6")]
    FiveSixths,
}

impl CodeRate {
    pub const ALL: [CodeRate; 3] = [Self::Half, Self::ThreeQuarters, Self::FiveSixths];

    /// Keep masks for the two generator outputs, one period each.
    pub fn masks(&self) -> (&'static [u8], &'static [u8]) {
        match self {
            Self::Half => (&[1], &[1]),
            Self::ThreeQuarters => (&[1, 1, 0], &[1, 0, 1]),
            Self::FiveSixths => (&[1, 1, 0, 1, 0], &[1, 0, 1, 0, 1]),
        }
    }

    pub fn value(&self) -> f64 {
        match self {
            Self::Half => 0.5,
            Self::ThreeQuarters => 0.75,
            Self::FiveSixths => 5.0 / 6.0,
        }
    }
}

impl std::fmt::Display for CodeRate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Half => "1/2",
            Self::ThreeQuarters => "3/4",
            Self::FiveSixths => "5/6",
        })
    }
}

impl std::str::FromStr for CodeRate {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "1/2" => Ok(Self::Half),
            "3/4" => Ok(Self::ThreeQuarters),
            "5/6" => Ok(Self::FiveSixths),
            other => Err(Error::Config(format!("unknown code rate {other:?}"))),
        }
    }
}

/// One codeword of `coded_len` bits.
///
/// The payload is the longest message whose terminated, punctured encoding
/// fits; leftover positions are zero padding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeConfig {
    pub rate: CodeRate,
    pub coded_len: usize,
    pub interleaver_seed: u64,
    payload_len: usize,
    interleaver: Interleaver,
}

impl CodeConfig {
    pub fn new(rate: CodeRate, coded_len: usize, interleaver_seed: u64) -> Result<Self> {
        let mut n = 0usize;
        while punctured_len(n + 1 + TAIL_BITS, rate) <= coded_len {
            n += 1;
        }
        if n == 0 {
            return Err(Error::InvalidParameter(format!(
                "{coded_len} coded bits cannot hold a terminated rate-{rate} codeword"
            )));
        }
        Ok(Self {
            rate,
            coded_len,
            interleaver_seed,
            payload_len: n,
            interleaver: Interleaver::new(coded_len, interleaver_seed),
        })
    }

    /// Codeword carrying `n_symbols` symbols of `bits_per_symbol` bits.
    pub fn for_block(rate: CodeRate, n_symbols: usize, bits_per_symbol: usize, seed: u64) -> Result<Self> {
        Self::new(rate, n_symbols * bits_per_symbol, seed)
    }

    pub fn payload_len(&self) -> usize {
        self.payload_len
    }

    pub fn interleaver(&self) -> &Interleaver {
        &self.interleaver
    }
}

/// Terminated, punctured, zero-padded encoding (not interleaved).
pub fn encode(bits: &[u8], cfg: &CodeConfig) -> Result<Vec<u8>> {
    if bits.len() != cfg.payload_len {
        return Err(Error::LengthMismatch {
            expected: cfg.payload_len,
            actual: bits.len(),
        });
    }
    let mut msg = bits.to_vec();
    msg.resize(bits.len() + TAIL_BITS, 0);
    let mut out = puncture(&encode_mother(&msg), cfg.rate);
    out.resize(cfg.coded_len, 0);
    Ok(out)
}

/// Soft decoding of a (deinterleaved) codeword.
pub fn decode(llrs: &[f64], cfg: &CodeConfig) -> Result<Vec<u8>> {
    if llrs.len() != cfg.coded_len {
        return Err(Error::LengthMismatch {
            expected: cfg.coded_len,
            actual: llrs.len(),
        });
    }
    let steps = cfg.payload_len + TAIL_BITS;
    let used = punctured_len(steps, cfg.rate);
    let mother = depuncture(&llrs[..used], cfg.rate, steps)?;
    let mut bits = viterbi_decode(&mother, true);
    bits.truncate(cfg.payload_len);
    Ok(bits)
}

/// Encode then interleave.
pub fn encode_interleaved(bits: &[u8], cfg: &CodeConfig) -> Result<Vec<u8>> {
    cfg.interleaver.interleave(&encode(bits, cfg)?)
}

/// Deinterleave then decode; `block_ok` compares against `truth` when given.
pub fn decode_interleaved(llrs: &[f64], cfg: &CodeConfig, truth: Option<&[u8]>) -> Result<(Vec<u8>, bool)> {
    let bits = decode(&cfg.interleaver.deinterleave(llrs)?, cfg)?;
    let ok = truth.is_some_and(|t| t == bits.as_slice());
    Ok((bits, ok))
}
