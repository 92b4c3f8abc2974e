use num_complex::Complex64;

/// `max(min(x, 1), -1)`.
pub fn clip_unit(x: f64) -> f64 {
    x.clamp(-1.0, 1.0)
}

/// Posterior mean of a uniform PAM symbol observed as `v = beta a + e` with
/// Gaussian `e` of precision `2 omega`.
pub fn pme_exact(v: f64, omega: f64, beta: f64, pam: &[f64]) -> f64 {
    let exps: Vec<f64> = pam.iter().map(|&a| -omega * (v - beta * a).powi(2)).collect();
    let max = exps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let (mut num, mut den) = (0.0, 0.0);
    for (&a, &e) in pam.iter().zip(&exps) {
        let w = (e - max).exp();
        num += a * w;
        den += w;
    }
    num / den
}

/// Complex PME applied per axis.
pub fn pme_exact_complex(v: Complex64, omega: f64, beta: f64, pam: &[f64]) -> Complex64 {
    Complex64::new(
        pme_exact(v.re, omega, beta, pam),
        pme_exact(v.im, omega, beta, pam),
    )
}

/// Piecewise-linear PME by direct summation of `2 gamma + 1` clips,
/// `gamma = sqrt(Q)/2 - 1`. Output lies on the odd-integer PAM scale.
pub fn pme_piecewise(v: f64, rho: f64, beta: f64, order: usize) -> f64 {
    let side = (order as f64).sqrt().round() as i64;
    let gamma = side / 2 - 1;
    (-gamma..=gamma)
        .map(|k| clip_unit(rho * (v + 2.0 * beta * k as f64)))
        .sum()
}

/// Exact-PME precision fitted to a piecewise curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PmeFit {
    pub omega: f64,
    /// Largest absolute gap between the two curves on the fitting grid.
    pub sup_gap: f64,
    pub rms_gap: f64,
}

/// Least-squares fit of the exact-PME precision to the scaled piecewise
/// curve `scale * pme_piecewise(x; rho, beta)` over `[-span, span]`.
///
/// The piecewise `beta` places transitions at `2 beta k`; on the normalized
/// alphabet the exact PME has its transitions at `beta_exact * 2 scale k`,
/// so the comparison uses `beta_exact = beta / scale`.
pub fn fit_omega(rho: f64, beta: f64, pam: &[f64], scale: f64, span: f64) -> PmeFit {
    let order = pam.len() * pam.len();
    let n = 2001;
    let xs: Vec<f64> = (0..n)
        .map(|i| -span + 2.0 * span * i as f64 / (n - 1) as f64)
        .collect();
    let target: Vec<f64> = xs
        .iter()
        .map(|&x| scale * pme_piecewise(x, rho, beta, order))
        .collect();
    let beta_exact = beta / scale;
    let sse = |log_omega: f64| -> f64 {
        let omega = log_omega.exp();
        xs.iter()
            .zip(&target)
            .map(|(&x, &t)| (pme_exact(x, omega, beta_exact, pam) - t).powi(2))
            .sum()
    };
    // Golden-section search on log(omega).
    let (mut lo, mut hi) = (-10.0f64, 12.0f64);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - phi * (hi - lo);
    let mut b = lo + phi * (hi - lo);
    let (mut fa, mut fb) = (sse(a), sse(b));
    for _ in 0..120 {
        if fa < fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - phi * (hi - lo);
            fa = sse(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + phi * (hi - lo);
            fb = sse(b);
        }
    }
    let omega = (0.5 * (lo + hi)).exp();
    let gaps: Vec<f64> = xs
        .iter()
        .zip(&target)
        .map(|(&x, &t)| (pme_exact(x, omega, beta_exact, pam) - t).abs())
        .collect();
    PmeFit {
        omega,
        sup_gap: gaps.iter().cloned().fold(0.0, f64::max),
        rms_gap: (gaps.iter().map(|g| g * g).sum::<f64>() / n as f64).sqrt(),
    }
}
