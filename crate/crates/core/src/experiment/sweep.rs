use std::io::Write;

use rand::Rng;
use rayon::prelude::*;

use super::config::{DetectorKind, ExperimentConfig, PmeSource};
use super::digest::Digest;
use crate::baselines::{Lmmse, Ocd};
use crate::count::NoTally;
use crate::denoise::{compute_llrs, SoftOutput};
use crate::detector::{GbcdConfig, GbcdDetector};
use crate::error::{Error, Result};
use crate::fec::{decode_interleaved, encode_interleaved, CodeConfig};
use crate::hwmodel::FixedPointGbcd;
use crate::mimo::{gen_channel, transmit, transmit_bits, Constellation, TransmissionBatch};
use crate::rng::stream;
use crate::unfolding::{grid_search, train, DatasetSpec, Lookup, ParamStore, TrainConfig, TrainedParams};
use crate::CMatrix;

const TRIAL_STREAM: u64 = 0x5157;
const UNCODED_STREAM: u64 = 0x5E12;
const INTERLEAVER_STREAM: u64 = 0x1A7E;

pub const SWEEP_HEADER: &str = "snr_db,detector,bler,ser,trials,block_errors";

pub const ABLATION_VARIANTS: [&str; 6] = [
    "cd-box",
    "cd-box+sort",
    "gbcd-box",
    "gbcd-box+sort",
    "gbcd-pme-empirical",
    "gbcd-pme-trained",
];

/// A detector ready to run at one SNR point.
#[derive(Debug, Clone)]
pub enum ResolvedDetector {
    Gbcd(GbcdDetector),
    FixedGbcd(FixedPointGbcd),
    Lmmse,
    Ocd { iterations: usize },
}

impl ResolvedDetector {
    /// Soft outputs for every column of `y`.
    pub fn detect(&self, h: &CMatrix, y: &CMatrix, n0: f64, c: &Constellation) -> Result<Vec<SoftOutput>> {
        let es = c.energy();
        match self {
            Self::Gbcd(d) => d.detect(h, y, n0),
            Self::FixedGbcd(d) => d.detect(h, y, n0),
            Self::Lmmse => {
                let lmmse = Lmmse::new(h, n0, es, &mut NoTally)?;
                Ok(y
                    .column_iter()
                    .map(|col| lmmse.detect(h, &col.into_owned(), c, &mut NoTally))
                    .collect())
            }
            Self::Ocd { iterations } => {
                let ocd = Ocd::new(h, &mut NoTally)?;
                y.column_iter()
                    .map(|col| {
                        let (_, v) = ocd.equalize(h, &col.into_owned(), *iterations, c.max_amplitude(), &mut NoTally)?;
                        Ok(compute_llrs(v.as_slice(), &ocd.col_energy, es, n0 / es, c))
                    })
                    .collect()
            }
        }
    }

    fn gbcd(det: GbcdDetector, fixed_point: bool) -> Self {
        if fixed_point {
            Self::FixedGbcd(FixedPointGbcd::new(det))
        } else {
            Self::Gbcd(det)
        }
    }
}

/// Error tallies of one detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Counts {
    pub blocks: u64,
    pub block_errors: u64,
    pub symbols: u64,
    pub symbol_errors: u64,
    /// Digest of every `(H, Y, N0)` the detector was given.
    pub input_digest: u64,
}

impl Counts {
    pub fn bler(&self) -> f64 {
        ratio(self.block_errors, self.blocks)
    }

    pub fn ser(&self) -> f64 {
        ratio(self.symbol_errors, self.symbols)
    }

    fn absorb(&mut self, other: &Counts) {
        self.blocks += other.blocks;
        self.block_errors += other.block_errors;
        self.symbols += other.symbols;
        self.symbol_errors += other.symbol_errors;
        let mut d = Digest(self.input_digest);
        d.u64(other.input_digest);
        self.input_digest = d.0;
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Outcome of one SNR point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub snr_db: f64,
    /// Channel trials simulated; each carries one codeword per UE.
    pub trials: u64,
    /// One entry per detector, in the order given.
    pub counts: Vec<Counts>,
    /// Digest of every `(H, S, N)` drawn.
    pub realization_digest: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub snr_db: f64,
    pub detector: String,
    pub bler: f64,
    pub ser: f64,
    /// Codewords simulated.
    pub trials: u64,
    pub block_errors: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationRow {
    pub snr_db: f64,
    pub trials: u64,
    /// `(bler, ser)` per variant, in `ABLATION_VARIANTS` order.
    pub variants: Vec<(f64, f64)>,
}

struct TrialOutcome {
    counts: Vec<Counts>,
    digest: u64,
}

/// Draws of one trial: per-UE payloads and one `(H, batch)` per
/// coherence group, in subcarrier order.
#[derive(Debug, Clone)]
pub struct Trial {
    pub payloads: Vec<Vec<u8>>,
    pub groups: Vec<(CMatrix, TransmissionBatch)>,
    /// Digest of every `(H, S, N)` drawn.
    pub digest: u64,
}

/// Codeword layout shared by every trial of `cfg`.
pub fn code_config(cfg: &ExperimentConfig) -> Result<CodeConfig> {
    let c = Constellation::new(cfg.order)?;
    let interleaver_seed = stream(cfg.seed, &[INTERLEAVER_STREAM]).random();
    CodeConfig::for_block(cfg.code_rate, cfg.n_d, c.bits_per_symbol(), interleaver_seed)
}

/// Regenerates trial `trial` at `snr_db`.
pub fn draw_trial(cfg: &ExperimentConfig, code: &CodeConfig, snr_db: f64, trial: u64) -> Result<Trial> {
    let c = Constellation::new(cfg.order)?;
    // Keyed by trial only: SNR points share channel, payload and unit-noise draws.
    let mut rng = stream(cfg.seed, &[TRIAL_STREAM, trial]);
    let model = cfg.model();
    let m = c.bits_per_symbol();
    let payloads: Vec<Vec<u8>> = (0..cfg.u)
        .map(|_| (0..code.payload_len()).map(|_| rng.random_range(0..2u8)).collect())
        .collect();
    let coded = payloads
        .iter()
        .map(|p| encode_interleaved(p, code))
        .collect::<Result<Vec<_>>>()?;
    let mut digest = Digest::default();
    let mut groups = Vec::new();
    let mut start = 0;
    while start < cfg.n_d {
        let len = cfg.group().min(cfg.n_d - start);
        let ch = gen_channel(cfg.b, cfg.u, &model, &mut rng)?;
        let bits = coded.iter().map(|cw| cw[start * m..(start + len) * m].to_vec()).collect();
        let batch = transmit_bits(&ch.h, &c, bits, snr_db, &mut rng)?;
        digest.complex(ch.h.iter());
        digest.complex(batch.s.iter());
        digest.complex(batch.n.iter());
        groups.push((ch.h, batch));
        start += len;
    }
    Ok(Trial {
        payloads,
        groups,
        digest: digest.0,
    })
}

fn one_trial(
    cfg: &ExperimentConfig,
    c: &Constellation,
    code: &CodeConfig,
    snr_db: f64,
    trial: u64,
    detectors: &[ResolvedDetector],
) -> Result<TrialOutcome> {
    let drawn = draw_trial(cfg, code, snr_db, trial)?;
    let m = c.bits_per_symbol();
    let mut llrs = vec![vec![Vec::with_capacity(cfg.n_d * m); cfg.u]; detectors.len()];
    let mut counts = vec![Counts::default(); detectors.len()];
    let mut digests = vec![Digest::default(); detectors.len()];
    for (h, batch) in &drawn.groups {
        for (d, det) in detectors.iter().enumerate() {
            digests[d].complex(h.iter());
            digests[d].complex(batch.y.iter());
            digests[d].u64(batch.n0.to_bits());
            let out = det.detect(h, &batch.y, batch.n0, c)?;
            for (t, soft) in out.iter().enumerate() {
                for ue in 0..cfg.u {
                    llrs[d][ue].extend_from_slice(soft.user_llrs(ue));
                    counts[d].symbols += 1;
                    counts[d].symbol_errors += u64::from(soft.hard_label(ue) != batch.labels[ue][t]);
                }
            }
        }
    }
    for (d, cnt) in counts.iter_mut().enumerate() {
        for ue in 0..cfg.u {
            let (_, ok) = decode_interleaved(&llrs[d][ue], code, Some(&drawn.payloads[ue]))?;
            cnt.blocks += 1;
            cnt.block_errors += u64::from(!ok);
        }
        cnt.input_digest = digests[d].0;
    }
    Ok(TrialOutcome {
        counts,
        digest: drawn.digest,
    })
}

/// Monte-Carlo at one SNR point for already resolved detectors.
///
/// Trials run in rounds of `cfg.round`; the point stops after the round in
/// which every detector reached `min_block_errors`, or at `cfg.trials`.
pub fn run_point(cfg: &ExperimentConfig, snr_db: f64, detectors: &[ResolvedDetector]) -> Result<PointResult> {
    cfg.validate()?;
    let c = Constellation::new(cfg.order)?;
    let code = code_config(cfg)?;
    let mut total = vec![Counts::default(); detectors.len()];
    let mut realization = Digest::default();
    let mut done = 0u64;
    let max = cfg.trials as u64;
    while done < max {
        let end = (done + cfg.round as u64).min(max);
        let outcomes = (done..end)
            .into_par_iter()
            .map(|t| one_trial(cfg, &c, &code, snr_db, t, detectors))
            .collect::<Result<Vec<_>>>()?;
        for o in &outcomes {
            realization.u64(o.digest);
            for (acc, x) in total.iter_mut().zip(&o.counts) {
                acc.absorb(x);
            }
        }
        done = end;
        if total.iter().all(|x| x.block_errors >= cfg.min_block_errors) {
            break;
        }
    }
    Ok(PointResult {
        snr_db,
        trials: done,
        counts: total,
        realization_digest: realization.0,
    })
}

fn dataset(cfg: &ExperimentConfig, snr_db: f64) -> DatasetSpec {
    DatasetSpec {
        b: cfg.b,
        u: cfg.u,
        order: cfg.order,
        snr_db,
        model: cfg.model(),
        block_size: cfg.block_size,
    }
}

fn gbcd_config(cfg: &ExperimentConfig, block_size: usize, sort: bool) -> GbcdConfig {
    GbcdConfig {
        block_size,
        sort,
        iterations: cfg.iterations,
    }
}

/// Trained PME parameters for one point; `None` selects BOX.
fn pme_params(cfg: &ExperimentConfig, snr_db: f64, store: Option<&ParamStore>) -> Result<Option<TrainedParams>> {
    let found = match (&cfg.pme, store) {
        (Some(PmeSource::Train), _) => {
            let tc = TrainConfig {
                iterations: cfg.iterations,
                seed: cfg.seed,
                train_samples: cfg.train_samples.unwrap_or(TrainConfig::default().train_samples),
                ..TrainConfig::default()
            };
            return Ok(Some(train(&dataset(cfg, snr_db), &tc)?.params));
        }
        (Some(PmeSource::Store(_)), Some(s)) => s.lookup(cfg.order, cfg.model().condition(), cfg.iterations, snr_db),
        _ => Err(Error::MissingParams("no PME parameter source configured".into())),
    };
    match found {
        Ok(Lookup::Params { params, .. }) => Ok(Some(params)),
        Ok(Lookup::Box) => Ok(None),
        Err(Error::MissingParams(m)) if cfg.allow_box_fallback => {
            log::warn!("{m}; falling back to BOX at {snr_db} dB");
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

fn load_store(cfg: &ExperimentConfig) -> Result<Option<ParamStore>> {
    match &cfg.pme {
        Some(PmeSource::Store(path)) => match ParamStore::load(path) {
            Ok(s) => Ok(Some(s)),
            Err(Error::Io(e)) if cfg.allow_box_fallback => {
                log::warn!("parameter store {}: {e}", path.display());
                Ok(None)
            }
            Err(Error::Io(e)) => Err(Error::MissingParams(format!("{}: {e}", path.display()))),
            Err(e) => Err(e),
        },
        _ => Ok(None),
    }
}

fn pme_or_box(
    cfg: &ExperimentConfig,
    c: &Constellation,
    params: Option<TrainedParams>,
    sort: bool,
) -> Result<ResolvedDetector> {
    let det = match params {
        Some(p) => p.detector(c, cfg.block_size, sort)?,
        None => GbcdDetector::boxed(c.clone(), gbcd_config(cfg, cfg.block_size, sort)),
    };
    Ok(ResolvedDetector::gbcd(det, cfg.fixed_point))
}

fn resolve(
    cfg: &ExperimentConfig,
    c: &Constellation,
    kind: DetectorKind,
    snr_db: f64,
    store: Option<&ParamStore>,
) -> Result<ResolvedDetector> {
    Ok(match kind {
        DetectorKind::GbcdBox => ResolvedDetector::gbcd(
            GbcdDetector::boxed(c.clone(), gbcd_config(cfg, cfg.block_size, true)),
            cfg.fixed_point,
        ),
        DetectorKind::GbcdPme => pme_or_box(cfg, c, pme_params(cfg, snr_db, store)?, true)?,
        DetectorKind::Lmmse => ResolvedDetector::Lmmse,
        DetectorKind::Ocd => ResolvedDetector::Ocd {
            iterations: cfg.iterations,
        },
    })
}

/// Coded sweep over every configured SNR point and detector.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let c = Constellation::new(cfg.order)?;
    let store = load_store(cfg)?;
    let mut rows = Vec::new();
    for &snr in &cfg.snr_db {
        let dets = cfg
            .detectors
            .iter()
            .map(|&k| resolve(cfg, &c, k, snr, store.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        let point = run_point(cfg, snr, &dets)?;
        log::info!("{snr} dB: {} trials", point.trials);
        for (kind, x) in cfg.detectors.iter().zip(&point.counts) {
            rows.push(SweepRow {
                snr_db: snr,
                detector: kind.name().to_string(),
                bler: x.bler(),
                ser: x.ser(),
                trials: x.blocks,
                block_errors: x.block_errors,
            });
        }
    }
    Ok(rows)
}

/// Grid of the empirical single-pair PME search, relative to the BOX
/// equivalent `(1/c, c)`.
const RHO_FACTORS: [f64; 6] = [0.75, 1.0, 1.25, 1.5, 2.0, 3.0];
const BETA_FACTORS: [f64; 3] = [0.9, 1.0, 1.1];
const GRID_SAMPLES: usize = 300;

/// The six variants at every SNR point on paired realizations.
pub fn run_ablation(cfg: &ExperimentConfig) -> Result<(Vec<AblationRow>, Vec<PointResult>)> {
    cfg.validate()?;
    let c = Constellation::new(cfg.order)?;
    let store = load_store(cfg)?;
    let boxed = |l, sort| ResolvedDetector::gbcd(GbcdDetector::boxed(c.clone(), gbcd_config(cfg, l, sort)), cfg.fixed_point);
    let mut rows = Vec::new();
    let mut points = Vec::new();
    for &snr in &cfg.snr_db {
        let rho: Vec<f64> = RHO_FACTORS.iter().map(|f| f / c.scale()).collect();
        let beta: Vec<f64> = BETA_FACTORS.iter().map(|f| f * c.scale()).collect();
        let empirical = grid_search(&dataset(cfg, snr), cfg.iterations, &rho, &beta, GRID_SAMPLES, cfg.seed)?;
        let trained = pme_params(cfg, snr, store.as_ref())?;
        let dets = vec![
            boxed(1, false),
            boxed(1, true),
            boxed(cfg.block_size, false),
            boxed(cfg.block_size, true),
            pme_or_box(cfg, &c, Some(empirical), true)?,
            pme_or_box(cfg, &c, trained, true)?,
        ];
        let point = run_point(cfg, snr, &dets)?;
        rows.push(AblationRow {
            snr_db: snr,
            trials: point.counts[0].blocks,
            variants: point.counts.iter().map(|x| (x.bler(), x.ser())).collect(),
        });
        points.push(point);
    }
    Ok((rows, points))
}

/// Uncoded SER: one fresh channel and one transmission per realization,
/// every detector on the same draws.
pub fn uncoded_ser(
    spec: &DatasetSpec,
    detectors: &[ResolvedDetector],
    realizations: usize,
    seed: u64,
) -> Result<Vec<Counts>> {
    let c = spec.constellation()?;
    let per: Vec<Vec<Counts>> = (0..realizations as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, &[UNCODED_STREAM, i]);
            let ch = gen_channel(spec.b, spec.u, &spec.model, &mut rng)?;
            let batch = transmit(&ch.h, &c, 1, spec.snr_db, &mut rng)?;
            detectors
                .iter()
                .map(|det| {
                    let out = det.detect(&ch.h, &batch.y, batch.n0, &c)?;
                    let mut cnt = Counts::default();
                    let mut d = Digest::default();
                    d.complex(ch.h.iter());
                    d.complex(batch.y.iter());
                    cnt.input_digest = d.0;
                    for ue in 0..spec.u {
                        cnt.symbols += 1;
                        cnt.symbol_errors += u64::from(out[0].hard_label(ue) != batch.labels[ue][0]);
                    }
                    Ok(cnt)
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut total = vec![Counts::default(); detectors.len()];
    for row in &per {
        for (acc, x) in total.iter_mut().zip(row) {
            acc.absorb(x);
        }
    }
    Ok(total)
}

pub fn write_sweep_csv<W: Write>(w: &mut W, rows: &[SweepRow]) -> Result<()> {
    writeln!(w, "{SWEEP_HEADER}")?;
    for r in rows {
        writeln!(w, "{},{},{},{},{},{}", r.snr_db, r.detector, r.bler, r.ser, r.trials, r.block_errors)?;
    }
    Ok(())
}

pub fn write_ablation_csv<W: Write>(w: &mut W, rows: &[AblationRow]) -> Result<()> {
    write!(w, "snr_db,trials")?;
    for v in ABLATION_VARIANTS {
        write!(w, ",{v}_bler,{v}_ser")?;
    }
    writeln!(w)?;
    for r in rows {
        write!(w, "{},{}", r.snr_db, r.trials)?;
        for (bler, ser) in &r.variants {
            write!(w, ",{bler},{ser}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}
