use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::model::{forward_loss, grad, Prepared};
use super::params::{sigmoid, TrainedParams};
use crate::error::{Error, Result};
use crate::mimo::{gen_channel, transmit, ChannelModel, Constellation};
use crate::rng::stream;

const TRAIN_STREAM: u64 = 0x7EA1;
const VALIDATION_STREAM: u64 = 0x7EA2;
const SHUFFLE_STREAM: u64 = 0x7EA3;

/// Scenario that training samples are drawn from; one fresh channel and
/// one transmission per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSpec {
    pub b: usize,
    pub u: usize,
    pub order: usize,
    pub snr_db: f64,
    pub model: ChannelModel,
    pub block_size: usize,
}

impl DatasetSpec {
    /// 16x4 i.i.d. Rayleigh.
    pub fn desk(order: usize, snr_db: f64) -> Self {
        Self {
            b: 16,
            u: 4,
            order,
            snr_db,
            model: ChannelModel::Rayleigh,
            block_size: 2,
        }
    }

    pub fn constellation(&self) -> Result<Constellation> {
        Constellation::new(self.order)
    }
}

/// Samples `first..first + count` of stream `set`.
pub fn generate_samples(spec: &DatasetSpec, seed: u64, set: u64, count: usize) -> Result<Vec<Prepared>> {
    let c = spec.constellation()?;
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, &[set, i as u64]);
            let ch = gen_channel(spec.b, spec.u, &spec.model, &mut rng)?;
            let batch = transmit(&ch.h, &c, 1, spec.snr_db, &mut rng)?;
            let bits = batch.bits.concat();
            Prepared::new(&ch.h, &batch.y.column(0).into_owned(), bits, batch.n0, c.energy(), spec.block_size)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub iterations: usize,
    pub train_samples: usize,
    pub val_samples: usize,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Early-stopping window in epochs.
    pub patience: usize,
    pub learning_rate: f64,
    pub lr_decay: f64,
    /// Epochs without improvement before the learning rate decays.
    pub plateau: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            iterations: 3,
            train_samples: 2000,
            val_samples: 500,
            batch_size: 100,
            max_epochs: 100,
            patience: 10,
            learning_rate: 1e-2,
            lr_decay: 0.5,
            plateau: 5,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub params: TrainedParams,
    /// Validation loss of the initial parameters followed by one entry per epoch.
    pub val_history: Vec<f64>,
    pub best_epoch: usize,
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    const B1: f64 = 0.9;
    const B2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(n: usize) -> Self {
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    fn step(&mut self, theta: &mut [f64], g: &[f64], lr: f64) {
        self.t += 1;
        let c1 = 1.0 - Self::B1.powi(self.t);
        let c2 = 1.0 - Self::B2.powi(self.t);
        for i in 0..theta.len() {
            self.m[i] = Self::B1 * self.m[i] + (1.0 - Self::B1) * g[i];
            self.v[i] = Self::B2 * self.v[i] + (1.0 - Self::B2) * g[i] * g[i];
            theta[i] -= lr * (self.m[i] / c1) / ((self.v[i] / c2).sqrt() + Self::EPS);
        }
    }
}

/// Adam on the batch BCE, starting from the BOX-equivalent parameters.
pub fn train(spec: &DatasetSpec, cfg: &TrainConfig) -> Result<TrainReport> {
    let c = spec.constellation()?;
    let alpha0 = spec.u as f64 / 10f64.powf(spec.snr_db / 10.0);
    let mut init = TrainedParams::box_equivalent(&c, cfg.iterations, alpha0);
    init.snr_db = spec.snr_db;
    init.condition = spec.model.condition();
    init.seed = cfg.seed;
    train_from(spec, cfg, init)
}

pub(crate) fn train_from(spec: &DatasetSpec, cfg: &TrainConfig, init: TrainedParams) -> Result<TrainReport> {
    init.validate()?;
    if cfg.batch_size == 0 || cfg.train_samples == 0 || cfg.val_samples == 0 {
        return Err(Error::InvalidParameter("training needs nonempty sets and batches".into()));
    }
    let c = spec.constellation()?;
    let train_set = generate_samples(spec, cfg.seed, TRAIN_STREAM, cfg.train_samples)?;
    let val_set = generate_samples(spec, cfg.seed, VALIDATION_STREAM, cfg.val_samples)?;
    let k = init.iterations();
    let mut theta = init.to_theta();
    let mut adam = Adam::new(theta.len());
    let mut lr = cfg.learning_rate;
    let mut best = init.clone();
    best.val_loss = forward_loss(&init, &val_set, &c);
    let mut history = vec![best.val_loss];
    let mut best_epoch = 0;
    let mut since_best = 0;
    let mut since_decay = 0;
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    for epoch in 1..=cfg.max_epochs {
        order.shuffle(&mut stream(cfg.seed, &[SHUFFLE_STREAM, epoch as u64]));
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<Prepared> = chunk.iter().map(|&i| train_set[i].clone()).collect();
            let params = init.with_theta(&theta);
            let (loss, g) = grad(&params, &batch, &c);
            if !loss.is_finite() {
                return Err(Error::Diverged(format!("training loss {loss} at epoch {epoch}")));
            }
            // Chain rule into the unconstrained coordinates.
            let mut gt = Vec::with_capacity(theta.len());
            gt.extend(g.rho.iter().zip(&params.rho).map(|(d, x)| d * x));
            gt.extend(g.beta.iter().zip(&params.beta).map(|(d, x)| d * x));
            gt.push(g.alpha * sigmoid(theta[2 * k]));
            adam.step(&mut theta, &gt, lr);
        }
        let params = init.with_theta(&theta);
        let val = forward_loss(&params, &val_set, &c);
        if !val.is_finite() {
            return Err(Error::Diverged(format!("validation loss {val} at epoch {epoch}")));
        }
        history.push(val);
        log::debug!("epoch {epoch}: validation loss {val:.6}, lr {lr:e}");
        if val < best.val_loss {
            best = params;
            best.val_loss = val;
            best_epoch = epoch;
            since_best = 0;
            since_decay = 0;
        } else {
            since_best += 1;
            since_decay += 1;
            if since_decay >= cfg.plateau {
                lr *= cfg.lr_decay;
                since_decay = 0;
            }
            if since_best >= cfg.patience {
                break;
            }
        }
    }
    best.epochs = history.len() - 1;
    Ok(TrainReport {
        params: best,
        val_history: history,
        best_epoch,
    })
}

/// One `(rho, beta)` pair shared by all iterations, picked by validation
/// loss over a grid with `alpha = N0 / Es`.
pub fn grid_search(
    spec: &DatasetSpec,
    iterations: usize,
    rho_grid: &[f64],
    beta_grid: &[f64],
    samples: usize,
    seed: u64,
) -> Result<TrainedParams> {
    let c = spec.constellation()?;
    let set = generate_samples(spec, seed, VALIDATION_STREAM, samples)?;
    let alpha = spec.u as f64 / 10f64.powf(spec.snr_db / 10.0);
    let mut best: Option<TrainedParams> = None;
    for &r in rho_grid {
        for &b in beta_grid {
            let mut p = TrainedParams::box_equivalent(&c, iterations, alpha);
            p.rho = vec![r; iterations];
            p.beta = vec![b; iterations];
            p.snr_db = spec.snr_db;
            p.condition = spec.model.condition();
            p.seed = seed;
            p.val_loss = forward_loss(&p, &set, &c);
            if best.as_ref().is_none_or(|q| p.val_loss < q.val_loss) {
                best = Some(p);
            }
        }
    }
    best.ok_or_else(|| Error::InvalidParameter("empty PME grid".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> TrainConfig {
        TrainConfig {
            train_samples: 300,
            val_samples: 100,
            max_epochs: 8,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn deterministic() {
        let spec = DatasetSpec::desk(16, 10.0);
        let a = train(&spec, &small()).unwrap();
        let b = train(&spec, &small()).unwrap();
        assert_eq!(a, b);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let c = pool.install(|| train(&spec, &small())).unwrap();
        assert_eq!(a, c);
    }

    #[test]
    fn returns_best_validation_point() {
        let spec = DatasetSpec::desk(16, 10.0);
        let r = train(&spec, &small()).unwrap();
        let min = r.val_history.iter().copied().fold(f64::INFINITY, f64::min);
        assert_eq!(r.params.val_loss, min);
        assert_eq!(r.val_history[r.best_epoch], min);
        assert_eq!(r.params.parameter_count(), 7);
    }

    #[test]
    fn improves_on_initialization() {
        let spec = DatasetSpec::desk(16, 10.0);
        let r = train(&spec, &small()).unwrap();
        assert!(r.params.val_loss < r.val_history[0]);
    }

    #[test]
    fn disjoint_train_and_validation_channels() {
        let spec = DatasetSpec::desk(4, 10.0);
        let a = generate_samples(&spec, 3, TRAIN_STREAM, 20).unwrap();
        let b = generate_samples(&spec, 3, VALIDATION_STREAM, 20).unwrap();
        for x in &a {
            assert!(b.iter().all(|y| x.pre.gram != y.pre.gram));
        }
    }

    #[test]
    fn grid_search_returns_grid_point() {
        let spec = DatasetSpec::desk(16, 10.0);
        let c = spec.constellation().unwrap();
        let p = grid_search(&spec, 3, &[2.0, 1.0 / c.scale()], &[c.scale(), 0.35], 50, 1).unwrap();
        assert_eq!(p.rho.len(), 3);
        assert!(p.rho.iter().all(|&r| r == p.rho[0]));
    }
}
