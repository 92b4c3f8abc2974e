use super::CodeRate;
use crate::error::{Error, Result};

pub const CONSTRAINT_LENGTH: usize = 7;
/// Generator polynomials, octal 133 and 171; the newest bit is the MSB.
pub const GENERATORS: [u32; 2] = [0o133, 0o171];

fn parity(x: u32) -> u8 {
    (x.count_ones() & 1) as u8
}

/// Rate-1/2 encoding without termination; outputs alternate `g1, g2`.
pub fn encode_mother(bits: &[u8]) -> Vec<u8> {
    let mut reg = 0u32;
    let mut out = Vec::with_capacity(2 * bits.len());
    for &b in bits {
        reg = (reg >> 1) | (u32::from(b & 1) << (CONSTRAINT_LENGTH - 1));
        out.push(parity(reg & GENERATORS[0]));
        out.push(parity(reg & GENERATORS[1]));
    }
    out
}

/// Coded length of `steps` trellis steps after puncturing.
pub fn punctured_len(steps: usize, rate: CodeRate) -> usize {
    let (m0, m1) = rate.masks();
    (0..steps)
        .map(|t| usize::from(m0[t % m0.len()] + m1[t % m1.len()]))
        .sum()
}

pub fn puncture<T: Copy>(mother: &[T], rate: CodeRate) -> Vec<T> {
    let (m0, m1) = rate.masks();
    let p = m0.len();
    mother
        .chunks(2)
        .enumerate()
        .flat_map(|(t, pair)| {
            let keep0 = (m0[t % p] == 1).then_some(pair[0]);
            let keep1 = (m1[t % p] == 1).then(|| pair[1]);
            keep0.into_iter().chain(keep1)
        })
        .collect()
}

/// Restores the mother-code layout; punctured positions get LLR 0.
pub fn depuncture(llrs: &[f64], rate: CodeRate, steps: usize) -> Result<Vec<f64>> {
    let expected = punctured_len(steps, rate);
    if llrs.len() != expected {
        return Err(Error::LengthMismatch {
            expected,
            actual: llrs.len(),
        });
    }
    let (m0, m1) = rate.masks();
    let p = m0.len();
    let mut it = llrs.iter();
    let mut out = Vec::with_capacity(2 * steps);
    for t in 0..steps {
        for mask in [m0, m1] {
            out.push(if mask[t % p] == 1 { *it.next().unwrap() } else { 0.0 });
        }
    }
    Ok(out)
}
