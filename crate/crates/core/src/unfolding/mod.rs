//! Deep unfolding of GBCD with the piecewise-linear PME denoiser.
//!
//! The `K` iterations are unrolled into a differentiable model with
//! `2K + 1` scalars: a slope `rho` and offset `beta` per iteration, shared
//! by all blocks, plus the LLR normalization `alpha`. The loss is the
//! binary cross-entropy of the bit probabilities implied by the max-log
//! LLRs, and gradients are computed in reverse mode by hand.

mod model;
mod params;
mod store;
mod train;

pub use model::{
    forward_llrs, forward_loss, grad, sample_loss_grad, smooth_margin, Gradient, Prepared, PROB_CLAMP,
};
pub use params::TrainedParams;
pub use store::{Lookup, ParamStore, MAX_TRAINED_SNR_DB, MIN_TRAINED_SNR_DB};
pub use train::{generate_samples, grid_search, train, DatasetSpec, TrainConfig, TrainReport};
