use num_complex::Complex64;
use rayon::prelude::*;

use super::params::{softplus, TrainedParams};
use crate::count::NoTally;
use crate::denoise::XI_FLOOR;
use crate::detector::{matched_filter, GbcdConfig, Preprocessed};
use crate::error::Result;
use crate::mimo::Constellation;
use crate::{CMatrix, CVector};

/// Probabilities are clamped to `[PROB_CLAMP, 1 - PROB_CLAMP]` in the loss.
pub const PROB_CLAMP: f64 = 1e-12;

/// One training sample with its parameter-independent preprocessing.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub pre: Preprocessed,
    pub y_mf: CVector,
    /// Row-major `U x bits_per_symbol` transmitted bits.
    pub bits: Vec<u8>,
}

impl Prepared {
    pub fn new(h: &CMatrix, y: &CVector, bits: Vec<u8>, n0: f64, es: f64, block_size: usize) -> Result<Self> {
        let cfg = GbcdConfig {
            block_size,
            sort: true,
            iterations: 1,
        };
        Ok(Self {
            pre: Preprocessed::new(h, n0, es, &cfg)?,
            y_mf: matched_filter(h, y, &mut NoTally),
            bits,
        })
    }
}

/// Derivatives of the loss with respect to the natural parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub rho: Vec<f64>,
    pub beta: Vec<f64>,
    pub alpha: f64,
}

impl Gradient {
    fn zeros(k: usize) -> Self {
        Self {
            rho: vec![0.0; k],
            beta: vec![0.0; k],
            alpha: 0.0,
        }
    }

    fn add_scaled(&mut self, o: &Self, s: f64) {
        for (a, b) in self.rho.iter_mut().zip(&o.rho) {
            *a += s * b;
        }
        for (a, b) in self.beta.iter_mut().zip(&o.beta) {
            *a += s * b;
        }
        self.alpha += s * o.alpha;
    }

    /// `[rho..., beta..., alpha]`.
    pub fn flatten(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.rho.iter().chain(&self.beta).copied().collect();
        v.push(self.alpha);
        v
    }
}

/// Piecewise-linear PME on one axis with its partial derivatives.
struct Axis {
    scale: f64,
    gamma: i64,
}

struct AxisEval {
    value: f64,
    d_x: f64,
    d_rho: f64,
    d_beta: f64,
    /// Distance of the closest clip argument from a kink.
    margin: f64,
}

impl Axis {
    fn new(c: &Constellation) -> Self {
        Self {
            scale: c.scale(),
            gamma: (c.pam_points().len() / 2) as i64 - 1,
        }
    }

    fn eval(&self, x: f64, rho: f64, beta: f64) -> AxisEval {
        let mut e = AxisEval {
            value: 0.0,
            d_x: 0.0,
            d_rho: 0.0,
            d_beta: 0.0,
            margin: f64::INFINITY,
        };
        for j in -self.gamma..=self.gamma {
            let j = j as f64;
            let arg = x + 2.0 * beta * j;
            let t = rho * arg;
            e.margin = e.margin.min((t.abs() - 1.0).abs());
            if t >= 1.0 {
                e.value += 1.0;
            } else if t <= -1.0 {
                e.value -= 1.0;
            } else {
                e.value += t;
                e.d_x += rho;
                e.d_rho += arg;
                e.d_beta += 2.0 * rho * j;
            }
        }
        e.value *= self.scale;
        e.d_x *= self.scale;
        e.d_rho *= self.scale;
        e.d_beta *= self.scale;
        e
    }
}

/// Forward record of one sample.
struct Tape {
    /// `(iteration, block, v_A)` per inner step.
    steps: Vec<(usize, usize, Vec<Complex64>)>,
    v_last: Vec<Complex64>,
    clip_margin: f64,
}

fn unroll(p: &TrainedParams, s: &Prepared, c: &Constellation) -> Tape {
    let axis = Axis::new(c);
    let pre = &s.pre;
    let g = &pre.gram;
    let u = pre.users();
    let k_iter = p.rho.len();
    let mut z = vec![Complex64::new(0.0, 0.0); u];
    let mut r: Vec<Complex64> = s.y_mf.iter().copied().collect();
    let mut v_last = vec![Complex64::new(0.0, 0.0); u];
    let mut steps = Vec::with_capacity(k_iter * pre.blocks.len());
    let mut clip_margin = f64::INFINITY;
    for k in 0..k_iter {
        let (rho, beta) = (p.rho[k], p.beta[k]);
        for (m, (a, kinv)) in pre.blocks.iter().zip(&pre.block_inverses).enumerate() {
            let l = a.len();
            let mut v = Vec::with_capacity(l);
            let mut delta = Vec::with_capacity(l);
            for i in 0..l {
                let mut vi = z[a[i]];
                for j in 0..l {
                    vi += kinv[(i, j)] * r[a[j]];
                }
                let (er, ei) = (axis.eval(vi.re, rho, beta), axis.eval(vi.im, rho, beta));
                clip_margin = clip_margin.min(er.margin).min(ei.margin);
                let zn = Complex64::new(er.value, ei.value);
                delta.push(zn - z[a[i]]);
                z[a[i]] = zn;
                v.push(vi);
            }
            for (row, rr) in r.iter_mut().enumerate() {
                for (j, &col) in a.iter().enumerate() {
                    *rr -= g[(row, col)] * delta[j];
                }
            }
            if k + 1 == k_iter {
                for (i, &ai) in a.iter().enumerate() {
                    v_last[ai] = v[i];
                }
            }
            steps.push((k, m, v));
        }
    }
    Tape {
        steps,
        v_last,
        clip_margin,
    }
}

/// Per-UE gain terms.
struct Gains {
    mu: Vec<f64>,
    xi: Vec<f64>,
    floored: Vec<bool>,
}

fn gains(p: &TrainedParams, pre: &Preprocessed) -> Gains {
    let es = pre.es;
    let mut out = Gains {
        mu: Vec::new(),
        xi: Vec::new(),
        floored: Vec::new(),
    };
    for g in pre.gram_diag() {
        let mu = g / (g + p.alpha);
        let xi = es * (1.0 - mu) * mu;
        let floored = !(xi >= XI_FLOOR * es);
        out.mu.push(mu);
        out.xi.push(if floored { XI_FLOOR * es } else { xi });
        out.floored.push(floored);
    }
    out
}

/// Max-log LLR of one axis bit with the winning levels of both classes.
struct AxisLlr {
    llr: f64,
    a0: f64,
    a1: f64,
    margin: f64,
}

fn axis_llrs(x: f64, mu: f64, xi: f64, c: &Constellation) -> Vec<AxisLlr> {
    let half = c.bits_per_axis();
    let pam = c.pam_points();
    let labels = c.pam_labels();
    (0..half)
        .map(|j| {
            let shift = half - 1 - j;
            let mut best = [(f64::INFINITY, 0.0); 2];
            let mut second = [f64::INFINITY; 2];
            for (&a, &l) in pam.iter().zip(labels) {
                let d = (x - mu * a) * (x - mu * a);
                let v = ((l >> shift) & 1) as usize;
                if d < best[v].0 {
                    second[v] = best[v].0;
                    best[v] = (d, a);
                } else if d < second[v] {
                    second[v] = d;
                }
            }
            let gap = |v: usize| {
                if second[v].is_finite() {
                    (second[v] - best[v].0) / (second[v] + best[v].0 + 1e-300)
                } else {
                    1.0
                }
            };
            AxisLlr {
                llr: (best[0].0 - best[1].0) / xi,
                a0: best[0].1,
                a1: best[1].1,
                margin: gap(0).min(gap(1)),
            }
        })
        .collect()
}

/// LLR magnitude at which the probability reaches the clamp.
fn clamp_llr() -> f64 {
    ((1.0 - PROB_CLAMP) / PROB_CLAMP).ln()
}

/// BCE of one bit as `softplus(-LLR)` or `softplus(LLR)`, accurate for
/// tiny losses. Returns `(loss, P(bit = 1), clamped)`.
fn bce(llr: f64, bit: u8) -> (f64, f64, bool) {
    let lim = clamp_llr();
    let clamped = llr.abs() > lim;
    let l = llr.clamp(-lim, lim);
    let prob = 0.5 * (1.0 + (0.5 * l).tanh());
    let loss = if bit == 1 { softplus(-l) } else { softplus(l) };
    (loss, prob, clamped)
}

/// LLRs of the unrolled model, row-major `U x bits_per_symbol`.
pub fn forward_llrs(p: &TrainedParams, s: &Prepared, c: &Constellation) -> Vec<f64> {
    let tape = unroll(p, s, c);
    let gn = gains(p, &s.pre);
    let mut out = Vec::new();
    for (u, v) in tape.v_last.iter().enumerate() {
        for x in [v.re, v.im] {
            out.extend(axis_llrs(x, gn.mu[u], gn.xi[u], c).into_iter().map(|a| a.llr));
        }
    }
    out
}

/// Loss of one sample and its gradient.
pub fn sample_loss_grad(p: &TrainedParams, s: &Prepared, c: &Constellation) -> (f64, Gradient) {
    let k_iter = p.rho.len();
    let tape = unroll(p, s, c);
    let pre = &s.pre;
    let gn = gains(p, pre);
    let m_bits = c.bits_per_symbol();
    let half = c.bits_per_axis();
    let u_count = pre.users();
    let es = pre.es;
    let mut loss = 0.0;
    let mut grad = Gradient::zeros(k_iter);
    let mut v_bar_last = vec![Complex64::new(0.0, 0.0); u_count];
    let diag = pre.gram_diag();

    for u in 0..u_count {
        let (mu, xi) = (gn.mu[u], gn.xi[u]);
        let mut mu_bar = 0.0;
        let mut xi_bar = 0.0;
        for (ax, x) in [tape.v_last[u].re, tape.v_last[u].im].into_iter().enumerate() {
            let mut x_bar = 0.0;
            for (j, a) in axis_llrs(x, mu, xi, c).into_iter().enumerate() {
                let bit = s.bits[u * m_bits + ax * half + j];
                let (term, prob, clamped) = bce(a.llr, bit);
                loss += term;
                if clamped {
                    continue;
                }
                let l_bar = prob - f64::from(bit);
                // LLR = (d0 - d1) / xi with d = (x - mu a)^2
                x_bar += l_bar * 2.0 * mu * (a.a1 - a.a0) / xi;
                mu_bar += l_bar * 2.0 * (a.a1 * (x - mu * a.a1) - a.a0 * (x - mu * a.a0)) / xi;
                xi_bar -= l_bar * a.llr / xi;
            }
            if ax == 0 {
                v_bar_last[u].re = x_bar;
            } else {
                v_bar_last[u].im = x_bar;
            }
        }
        if !gn.floored[u] {
            mu_bar += xi_bar * es * (1.0 - 2.0 * mu);
        }
        let g = diag[u];
        grad.alpha -= mu_bar * g / ((g + p.alpha) * (g + p.alpha));
    }

    let axis = Axis::new(c);
    let gm = &pre.gram;
    let mut r_bar = vec![Complex64::new(0.0, 0.0); u_count];
    let mut z_bar = vec![Complex64::new(0.0, 0.0); u_count];
    for (k, m, v) in tape.steps.iter().rev() {
        let (k, m) = (*k, *m);
        let a = &pre.blocks[m];
        let kinv = &pre.block_inverses[m];
        let l = a.len();
        let (rho, beta) = (p.rho[k], p.beta[k]);
        // r_after = r_before - G_A delta
        let d_bar: Vec<Complex64> = a
            .iter()
            .map(|&col| {
                -(0..u_count)
                    .map(|row| gm[(row, col)].conj() * r_bar[row])
                    .sum::<Complex64>()
            })
            .collect();
        let mut v_bar = Vec::with_capacity(l);
        for i in 0..l {
            let zn_bar = z_bar[a[i]] + d_bar[i];
            let (er, ei) = (axis.eval(v[i].re, rho, beta), axis.eval(v[i].im, rho, beta));
            let mut vb = Complex64::new(er.d_x * zn_bar.re, ei.d_x * zn_bar.im);
            grad.rho[k] += er.d_rho * zn_bar.re + ei.d_rho * zn_bar.im;
            grad.beta[k] += er.d_beta * zn_bar.re + ei.d_beta * zn_bar.im;
            if k + 1 == k_iter {
                vb += v_bar_last[a[i]];
            }
            v_bar.push(vb);
        }
        // v = K r_A + z_old
        for j in 0..l {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..l {
                acc += kinv[(i, j)].conj() * v_bar[i];
            }
            r_bar[a[j]] += acc;
        }
        for i in 0..l {
            z_bar[a[i]] = v_bar[i] - d_bar[i];
        }
    }
    (loss, grad)
}

/// Mean loss and gradient over the batch; per-sample terms are reduced in
/// index order so the result does not depend on the thread count.
pub fn grad(p: &TrainedParams, batch: &[Prepared], c: &Constellation) -> (f64, Gradient) {
    let parts: Vec<(f64, Gradient)> = batch.par_iter().map(|s| sample_loss_grad(p, s, c)).collect();
    let n = batch.len().max(1) as f64;
    let mut total = Gradient::zeros(p.rho.len());
    let mut loss = 0.0;
    for (l, g) in &parts {
        loss += l;
        total.add_scaled(g, 1.0 / n);
    }
    (loss / n, total)
}

/// Mean per-sample BCE summed over UEs and bits.
pub fn forward_loss(p: &TrainedParams, batch: &[Prepared], c: &Constellation) -> f64 {
    let parts: Vec<f64> = batch
        .par_iter()
        .map(|s| {
            forward_llrs(p, s, c)
                .iter()
                .zip(&s.bits)
                .map(|(&l, &b)| bce(l, b).0)
                .sum()
        })
        .collect();
    parts.iter().sum::<f64>() / batch.len().max(1) as f64
}

/// Smallest distance of the sample's evaluation from a non-differentiable
/// point: clip kinks, argmin switches, the probability clamp and the
/// variance floor.
pub fn smooth_margin(p: &TrainedParams, s: &Prepared, c: &Constellation) -> f64 {
    let tape = unroll(p, s, c);
    let gn = gains(p, &s.pre);
    let mut margin = tape.clip_margin;
    for (u, v) in tape.v_last.iter().enumerate() {
        if gn.floored[u] {
            return 0.0;
        }
        for x in [v.re, v.im] {
            for a in axis_llrs(x, gn.mu[u], gn.xi[u], c) {
                margin = margin.min(a.margin).min((a.llr.abs() - clamp_llr()).abs() / clamp_llr());
            }
        }
    }
    margin
}
