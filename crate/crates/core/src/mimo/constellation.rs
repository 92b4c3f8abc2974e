use num_complex::Complex64;

use crate::error::{Error, Result};

/// Gray-mapped square QAM alphabet with unit average energy.
///
/// Points are indexed by their bit label. A label holds `bits_per_symbol`
/// bits, read MSB first: the upper half carries the Gray label of the
/// in-phase PAM level, the lower half that of the quadrature level. Bit
/// index `b` in LLR arrays refers to this MSB-first order.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    order: usize,
    bits_per_symbol: usize,
    scale: f64,
    points: Vec<Complex64>,
    pam_points: Vec<f64>,
    pam_labels: Vec<u32>,
}

fn gray(i: u32) -> u32 {
    i ^ (i >> 1)
}

impl Constellation {
    pub fn new(order: usize) -> Result<Self> {
        let side = match order {
            4 => 2,
            16 => 4,
            64 => 8,
            256 => 16,
            _ => return Err(Error::UnsupportedOrder(order)),
        };
        let bits_per_symbol = order.trailing_zeros() as usize;
        let half = bits_per_symbol / 2;
        // Es of the odd-integer grid is 2(Q-1)/3.
        let scale = (3.0 / (2.0 * (order as f64 - 1.0))).sqrt();
        let pam_points: Vec<f64> = (0..side)
            .map(|i| scale * (2.0 * i as f64 - (side as f64 - 1.0)))
            .collect();
        let pam_labels: Vec<u32> = (0..side as u32).map(gray).collect();

        let mut points = vec![Complex64::new(0.0, 0.0); order];
        for (i, &re) in pam_points.iter().enumerate() {
            for (q, &im) in pam_points.iter().enumerate() {
                let label = ((pam_labels[i] << half) | pam_labels[q]) as usize;
                points[label] = Complex64::new(re, im);
            }
        }
        Ok(Self {
            order,
            bits_per_symbol,
            scale,
            points,
            pam_points,
            pam_labels,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    /// Bits carried by one real axis.
    pub fn bits_per_axis(&self) -> usize {
        self.bits_per_symbol / 2
    }

    /// Factor mapping the odd-integer PAM grid to unit symbol energy.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Largest PAM amplitude; the BOX denoiser clips each axis to `[-A, A]`.
    pub fn max_amplitude(&self) -> f64 {
        *self.pam_points.last().unwrap()
    }

    /// Points indexed by bit label.
    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn point(&self, label: usize) -> Complex64 {
        self.points[label]
    }

    /// Per-axis PAM levels in ascending order.
    pub fn pam_points(&self) -> &[f64] {
        &self.pam_points
    }

    /// Gray label of each PAM level, aligned with `pam_points`.
    pub fn pam_labels(&self) -> &[u32] {
        &self.pam_labels
    }

    /// Bit `b` (MSB first) of point `label`.
    pub fn bit(&self, label: usize, b: usize) -> u8 {
        ((label >> (self.bits_per_symbol - 1 - b)) & 1) as u8
    }

    /// Labels whose bit `b` equals `value`.
    pub fn bit_subset(&self, b: usize, value: u8) -> Vec<usize> {
        (0..self.order).filter(|&l| self.bit(l, b) == value).collect()
    }

    /// Label of the symbol carrying `bits` (MSB first).
    pub fn label_of(&self, bits: &[u8]) -> usize {
        debug_assert_eq!(bits.len(), self.bits_per_symbol);
        bits.iter().fold(0usize, |acc, &b| (acc << 1) | (b & 1) as usize)
    }

    pub fn map_bits(&self, bits: &[u8]) -> Complex64 {
        self.points[self.label_of(bits)]
    }

    /// Index of the PAM level nearest to `x`.
    pub fn nearest_pam(&self, x: f64) -> usize {
        let side = self.pam_points.len() as f64;
        let idx = ((x / self.scale + side - 1.0) / 2.0).round();
        idx.clamp(0.0, side - 1.0) as usize
    }

    /// Label of the point nearest to `v`.
    pub fn slice(&self, v: Complex64) -> usize {
        let half = self.bits_per_axis();
        let i = self.pam_labels[self.nearest_pam(v.re)];
        let q = self.pam_labels[self.nearest_pam(v.im)];
        ((i << half) | q) as usize
    }

    /// Mean energy of the alphabet.
    pub fn energy(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.order as f64
    }
}
