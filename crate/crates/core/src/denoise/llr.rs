//! Max-log LLRs with approximate post-equalization gains.
//!
//! Sign convention: `LLR > 0` means the bit is more likely `1`. It follows
//! from taking the bit-0 distance minus the bit-1 distance, and matches
//! `P(bit = 1) = (1 + tanh(LLR / 2)) / 2`.

use num_complex::Complex64;

use crate::mimo::Constellation;

/// Floor on the NPI variance, relative to `Es`.
pub const XI_FLOOR: f64 = 1e-9;

/// Per-UE channel gains and noise-plus-interference variances.
#[derive(Debug, Clone, PartialEq)]
pub struct LlrParams {
    pub alpha: f64,
    pub mu: Vec<f64>,
    pub xi: Vec<f64>,
    /// Set when any `xi` hit the floor.
    pub xi_floored: bool,
}

impl LlrParams {
    /// Truncated-Neumann gains `mu = G_uu / (G_uu + alpha)` and
    /// `xi = Es (1 - mu) mu`.
    pub fn neumann(gram_diag: &[f64], alpha: f64, es: f64) -> Self {
        let mu = gram_diag.iter().map(|&g| g / (g + alpha)).collect();
        let mut p = Self::from_gains(mu, es);
        p.alpha = alpha;
        p
    }

    /// Gains known exactly (LMMSE); `xi = Es (1 - mu) mu` with flooring.
    pub fn from_gains(mu: Vec<f64>, es: f64) -> Self {
        let floor = XI_FLOOR * es;
        let mut xi_floored = false;
        let xi = mu
            .iter()
            .map(|&m| {
                let x = es * (1.0 - m) * m;
                if x < floor || !x.is_finite() {
                    xi_floored = true;
                    floor
                } else {
                    x
                }
            })
            .collect();
        Self {
            alpha: f64::NAN,
            mu,
            xi,
            xi_floored,
        }
    }
}

/// Soft detector output for one transmission.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftOutput {
    /// Row-major `U x bits_per_symbol` LLRs.
    pub llrs: Vec<f64>,
    pub bits_per_symbol: usize,
    /// Unconstrained estimates the LLRs were computed from.
    pub estimates: Vec<Complex64>,
    pub xi_floored: bool,
}

impl SoftOutput {
    pub fn users(&self) -> usize {
        self.estimates.len()
    }

    pub fn llr(&self, u: usize, b: usize) -> f64 {
        self.llrs[u * self.bits_per_symbol + b]
    }

    pub fn user_llrs(&self, u: usize) -> &[f64] {
        &self.llrs[u * self.bits_per_symbol..(u + 1) * self.bits_per_symbol]
    }

    /// Label decided from the LLR signs.
    pub fn hard_label(&self, u: usize) -> usize {
        self.user_llrs(u)
            .iter()
            .fold(0usize, |acc, &l| (acc << 1) | usize::from(l > 0.0))
    }
}

/// Max-log LLRs via the per-axis decomposition of square Gray QAM.
///
/// The distance `|s - mu a|^2` splits into an in-phase and a quadrature
/// term, and every bit lives on one axis, so each minimum reduces to a scan
/// over the `sqrt(Q)` PAM levels of that axis.
pub fn max_log_llrs(s_hat: &[Complex64], params: &LlrParams, c: &Constellation) -> Vec<f64> {
    let m = c.bits_per_symbol();
    let half = c.bits_per_axis();
    let pam = c.pam_points();
    let labels = c.pam_labels();
    let mut out = Vec::with_capacity(s_hat.len() * m);
    let mut dist = vec![0.0; pam.len()];
    for (u, s) in s_hat.iter().enumerate() {
        let (mu, xi) = (params.mu[u], params.xi[u]);
        for x in [s.re, s.im] {
            for (d, &a) in dist.iter_mut().zip(pam) {
                *d = (x - mu * a) * (x - mu * a);
            }
            for j in 0..half {
                let shift = half - 1 - j;
                let mut best = [f64::INFINITY; 2];
                for (&d, &l) in dist.iter().zip(labels) {
                    let v = ((l >> shift) & 1) as usize;
                    if d < best[v] {
                        best[v] = d;
                    }
                }
                out.push((best[0] - best[1]) / xi);
            }
        }
    }
    out
}

/// Max-log LLRs by exhaustive search over all `Q` points.
pub fn max_log_llrs_exhaustive(s_hat: &[Complex64], params: &LlrParams, c: &Constellation) -> Vec<f64> {
    let m = c.bits_per_symbol();
    let mut out = Vec::with_capacity(s_hat.len() * m);
    for (u, s) in s_hat.iter().enumerate() {
        let (mu, xi) = (params.mu[u], params.xi[u]);
        for b in 0..m {
            let mut best = [f64::INFINITY; 2];
            for (label, p) in c.points().iter().enumerate() {
                let d = (s - p * mu).norm_sqr();
                let v = c.bit(label, b) as usize;
                best[v] = best[v].min(d);
            }
            out.push((best[0] - best[1]) / xi);
        }
    }
    out
}

/// LLRs of the unconstrained final estimates with Neumann-approximated gains.
pub fn compute_llrs(
    v_final: &[Complex64],
    gram_diag: &[f64],
    es: f64,
    alpha: f64,
    c: &Constellation,
) -> SoftOutput {
    let params = LlrParams::neumann(gram_diag, alpha, es);
    SoftOutput {
        llrs: max_log_llrs(v_final, &params, c),
        bits_per_symbol: c.bits_per_symbol(),
        estimates: v_final.to_vec(),
        xi_floored: params.xi_floored,
    }
}

/// `P(bit = 1)` for an LLR in the repo convention.
pub fn llr_to_prob(llr: f64) -> f64 {
    0.5 * (1.0 + (0.5 * llr).tanh())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use rand::Rng;

    #[test]
    fn prob_values() {
        assert_eq!(llr_to_prob(0.0), 0.5);
        assert_eq!(llr_to_prob(f64::INFINITY), 1.0);
        assert!((llr_to_prob(2.0) - 0.880_797_077_977_882_4).abs() < 1e-15);
        assert!(llr_to_prob(-3.0) < 0.5);
    }

    #[test]
    fn sign_pattern_matches_label_on_points() {
        let c = Constellation::new(16).unwrap();
        let g = [50.0];
        let alpha = 0.5;
        let mu = g[0] / (g[0] + alpha);
        for label in 0..16 {
            let s = c.point(label) * mu;
            let out = compute_llrs(&[s], &g, 1.0, alpha, &c);
            assert_eq!(out.hard_label(0), label);
            for b in 0..4 {
                assert!(out.llr(0, b).abs() > 1.0);
            }
        }
    }

    #[test]
    fn equidistant_point_gives_zero_llr() {
        let c = Constellation::new(4).unwrap();
        let p = LlrParams::from_gains(vec![0.8], 1.0);
        // On the imaginary axis the in-phase bit is undecided.
        let l = max_log_llrs(&[Complex64::new(0.0, 0.4)], &p, &c);
        assert_eq!(l[0], 0.0);
        assert!(l[1] != 0.0);
    }

    #[test]
    fn axis_scan_matches_exhaustive_search() {
        let mut rng = seeded(31);
        for q in [4, 16, 64, 256] {
            let c = Constellation::new(q).unwrap();
            let s: Vec<Complex64> = (0..50)
                .map(|_| Complex64::new(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)))
                .collect();
            let mu: Vec<f64> = (0..50).map(|_| rng.random_range(0.3..0.99)).collect();
            let p = LlrParams::from_gains(mu, 1.0);
            let a = max_log_llrs(&s, &p, &c);
            let b = max_log_llrs_exhaustive(&s, &p, &c);
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() <= 1e-10 * (1.0 + y.abs()));
            }
        }
    }

    #[test]
    fn negating_an_axis_flips_gray_msb() {
        // With binary-reflected Gray labels the axis MSB is the sign bit.
        let c = Constellation::new(64).unwrap();
        let p = LlrParams::from_gains(vec![0.9], 1.0);
        let s = Complex64::new(0.37, -0.81);
        let a = max_log_llrs(&[s], &p, &c);
        let b = max_log_llrs(&[Complex64::new(-s.re, s.im)], &p, &c);
        assert!((a[0] + b[0]).abs() < 1e-12);
        for j in 1..3 {
            assert!((a[j] - b[j]).abs() < 1e-12);
        }
        for j in 3..6 {
            assert_eq!(a[j], b[j]);
        }
    }

    #[test]
    fn xi_floor_is_flagged() {
        let p = LlrParams::neumann(&[10.0], 0.0, 1.0);
        assert!(p.xi_floored);
        assert_eq!(p.xi[0], XI_FLOOR);
        let q = LlrParams::neumann(&[10.0], 1.0, 1.0);
        assert!(!q.xi_floored);
        assert!(q.mu[0] > 0.0 && q.mu[0] < 1.0);
    }
}
