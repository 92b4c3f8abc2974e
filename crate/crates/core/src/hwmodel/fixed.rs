use num_complex::Complex64;
use rayon::prelude::*;

use crate::count::NoTally;
use crate::denoise::{max_log_llrs, LlrParams, SoftOutput};
use crate::detector::{gbcd_equalize_with, matched_filter, Datapath, GbcdConfig, GbcdDetector, Preprocessed};
use crate::error::Result;
use crate::mimo::{gen_channel, transmit, ChannelModel, Constellation};
use crate::rng::stream;
use crate::CMatrix;

/// Two's-complement fixed-point format of one real component.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FxpFormat {
    pub bits: u32,
    pub frac: i32,
    pub signed: bool,
}

impl FxpFormat {
    pub const fn signed(bits: u32, frac: i32) -> Self {
        Self { bits, frac, signed: true }
    }

    pub fn lsb(&self) -> f64 {
        (-self.frac as f64).exp2()
    }

    pub fn max_code(&self) -> i64 {
        if self.signed {
            (1i64 << (self.bits - 1)) - 1
        } else {
            (1i64 << self.bits) - 1
        }
    }

    pub fn min_code(&self) -> i64 {
        if self.signed {
            -(1i64 << (self.bits - 1))
        } else {
            0
        }
    }

    pub fn max_value(&self) -> f64 {
        self.max_code() as f64 * self.lsb()
    }

    pub fn min_value(&self) -> f64 {
        self.min_code() as f64 * self.lsb()
    }
}

/// Round half to even, then saturate.
pub fn quantize(x: f64, f: FxpFormat) -> f64 {
    if x.is_nan() {
        return 0.0;
    }
    let scaled = x * (f.frac as f64).exp2();
    let code = scaled.round_ties_even().clamp(f.min_code() as f64, f.max_code() as f64);
    code * f.lsb()
}

pub fn quantize_complex(x: Complex64, f: FxpFormat) -> Complex64 {
    Complex64::new(quantize(x.re, f), quantize(x.im, f))
}

pub const LUT_SEGMENTS: usize = 64;

/// Piecewise-linear reciprocal: `1/m` on the mantissa `m` in `[1, 2)` by
/// chords over 64 uniform segments, exponent handled by a shift.
#[derive(Debug, Clone, PartialEq)]
pub struct ReciprocalLut {
    slopes: Vec<f64>,
    biases: Vec<f64>,
}

impl Default for ReciprocalLut {
    fn default() -> Self {
        let n = LUT_SEGMENTS as f64;
        let (slopes, biases) = (0..LUT_SEGMENTS)
            .map(|i| {
                let a = 1.0 + i as f64 / n;
                let b = a + 1.0 / n;
                let s = (1.0 / b - 1.0 / a) * n;
                (s, 1.0 / a - s * a)
            })
            .unzip();
        Self { slopes, biases }
    }
}

impl ReciprocalLut {
    pub fn eval(&self, x: f64) -> f64 {
        if x == 0.0 || !x.is_finite() {
            return if x == 0.0 { f64::MAX } else { 0.0 };
        }
        let sign = x.signum();
        let a = x.abs();
        let mut e = a.log2().floor() as i32;
        let mut m = a / f64::from(e).exp2();
        if m >= 2.0 {
            m /= 2.0;
            e += 1;
        } else if m < 1.0 {
            m *= 2.0;
            e -= 1;
        }
        let i = (((m - 1.0) * LUT_SEGMENTS as f64) as usize).min(LUT_SEGMENTS - 1);
        sign * (self.slopes[i] * m + self.biases[i]) * f64::from(-e).exp2()
    }
}

/// Formats of the quantized signals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FxpPlan {
    pub h: FxpFormat,
    pub y: FxpFormat,
    pub gram: FxpFormat,
    pub y_mf: FxpFormat,
    pub z: FxpFormat,
    pub llr: FxpFormat,
}

impl FxpPlan {
    pub const WIDTHS: [u32; 6] = [12, 12, 15, 18, 11, 18];

    /// Binary points from dynamic-range profiling (`ProfileConfig::default`).
    pub const FROZEN: FxpPlan = FxpPlan {
        h: FxpFormat::signed(12, 9),
        y: FxpFormat::signed(12, 7),
        gram: FxpFormat::signed(15, 6),
        y_mf: FxpFormat::signed(18, 8),
        z: FxpFormat::signed(11, 9),
        llr: FxpFormat::signed(18, 6),
    };

    /// Integer bits cover each percentile; the rest are fractional.
    pub fn from_profile(r: &DynamicRange) -> Self {
        let [h, y, gram, y_mf, z, llr] = Self::WIDTHS;
        let fmt = |bits: u32, p: f64| {
            let mut int = 0i32;
            while f64::from(int).exp2() <= p {
                int += 1;
            }
            FxpFormat::signed(bits, bits as i32 - 1 - int)
        };
        Self {
            h: fmt(h, r.h),
            y: fmt(y, r.y),
            gram: fmt(gram, r.gram),
            y_mf: fmt(y_mf, r.y_mf),
            z: fmt(z, r.z),
            llr: fmt(llr, r.llr),
        }
    }
}

impl Default for FxpPlan {
    fn default() -> Self {
        Self::FROZEN
    }
}

/// Datapath quantizing the Gram matrix and estimates, with LUT reciprocals.
#[derive(Debug, Clone, Default)]
pub struct FixedPath {
    pub plan: FxpPlan,
    pub lut: ReciprocalLut,
}

impl Datapath for FixedPath {
    fn reciprocal(&self, x: f64) -> f64 {
        self.lut.eval(x)
    }
    fn gram_entry(&self, x: Complex64) -> Complex64 {
        quantize_complex(x, self.plan.gram)
    }
    fn estimate(&self, x: Complex64) -> Complex64 {
        quantize_complex(x, self.plan.z)
    }
}

/// GBCD with every stored signal quantized.
#[derive(Debug, Clone)]
pub struct FixedPointGbcd {
    pub detector: GbcdDetector,
    pub path: FixedPath,
}

impl FixedPointGbcd {
    pub fn new(detector: GbcdDetector) -> Self {
        Self {
            detector,
            path: FixedPath::default(),
        }
    }

    pub fn detect(&self, h: &CMatrix, y: &CMatrix, n0: f64) -> Result<Vec<SoftOutput>> {
        let plan = &self.path.plan;
        let det = &self.detector;
        let c = &det.constellation;
        let es = c.energy();
        let hq = h.map(|x| quantize_complex(x, plan.h));
        let yq = y.map(|x| quantize_complex(x, plan.y));
        let pre = Preprocessed::with(&hq, n0, es, &det.config, &self.path, &mut NoTally)?;
        let alpha = det.normalization.alpha(n0, es);
        let mu: Vec<f64> = pre
            .gram_diag()
            .iter()
            .map(|&g| g * self.path.lut.eval(g + alpha))
            .collect();
        let mut params = LlrParams::from_gains(mu, es);
        params.alpha = alpha;
        yq.column_iter()
            .map(|col| {
                let y_mf = matched_filter(&hq, &col.into_owned(), &mut NoTally).map(|x| quantize_complex(x, plan.y_mf));
                let st = gbcd_equalize_with(&pre, &y_mf, &det.schedule, det.config.iterations, &self.path, &mut NoTally, None)?;
                let llrs = max_log_llrs(st.v_last.as_slice(), &params, c)
                    .into_iter()
                    .map(|l| quantize(l, plan.llr))
                    .collect();
                Ok(SoftOutput {
                    llrs,
                    bits_per_symbol: c.bits_per_symbol(),
                    estimates: st.v_last.iter().copied().collect(),
                    xi_floored: params.xi_floored,
                })
            })
            .collect()
    }
}

/// Scenario the binary points are profiled on.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileConfig {
    pub b: usize,
    pub u: usize,
    pub order: usize,
    pub snr_db: f64,
    pub iterations: usize,
    pub realizations: usize,
    pub percentile: f64,
    pub seed: u64,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        Self {
            b: 128,
            u: 16,
            order: 256,
            snr_db: 20.0,
            iterations: 3,
            realizations: 10_000,
            percentile: 0.9999,
            seed: 0x5EED,
        }
    }
}

/// Per-signal percentile of the component magnitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicRange {
    pub h: f64,
    pub y: f64,
    pub gram: f64,
    pub y_mf: f64,
    pub z: f64,
    pub llr: f64,
}

/// Float-pipeline magnitudes over random realizations.
pub fn profile_dynamic_range(cfg: &ProfileConfig) -> Result<DynamicRange> {
    let c = Constellation::new(cfg.order)?;
    let det = GbcdDetector::boxed(
        c.clone(),
        GbcdConfig {
            iterations: cfg.iterations,
            ..GbcdConfig::default()
        },
    );
    let samples: Vec<[Vec<f64>; 6]> = (0..cfg.realizations)
        .into_par_iter()
        .map(|i| -> Result<[Vec<f64>; 6]> {
            let mut rng = stream(cfg.seed, &[i as u64]);
            let ch = gen_channel(cfg.b, cfg.u, &ChannelModel::Rayleigh, &mut rng)?;
            let batch = transmit(&ch.h, &c, 1, cfg.snr_db, &mut rng)?;
            let pre = Preprocessed::new(&ch.h, batch.n0, c.energy(), &det.config)?;
            let y = batch.y.column(0).into_owned();
            let y_mf = matched_filter(&ch.h, &y, &mut NoTally);
            let st = crate::detector::gbcd_equalize(&pre, &y_mf, &det.schedule, det.config.iterations)?;
            let out = det.detect(&ch.h, &batch.y, batch.n0)?;
            let comps = |it: &mut dyn Iterator<Item = Complex64>| -> Vec<f64> {
                it.flat_map(|x| [x.re.abs(), x.im.abs()]).collect()
            };
            Ok([
                comps(&mut ch.h.iter().copied()),
                comps(&mut y.iter().copied()),
                comps(&mut pre.gram.iter().copied()),
                comps(&mut y_mf.iter().copied()),
                comps(&mut st.z.iter().copied()),
                out[0].llrs.iter().map(|l| l.abs()).collect(),
            ])
        })
        .collect::<Result<_>>()?;
    let pct = |k: usize| -> f64 {
        let mut v: Vec<f64> = samples.iter().flat_map(|s| s[k].iter().copied()).collect();
        v.sort_by(f64::total_cmp);
        let idx = ((v.len() as f64 * cfg.percentile).ceil() as usize).clamp(1, v.len()) - 1;
        v[idx]
    };
    Ok(DynamicRange {
        h: pct(0),
        y: pct(1),
        gram: pct(2),
        y_mf: pct(3),
        z: pct(4),
        llr: pct(5),
    })
}
