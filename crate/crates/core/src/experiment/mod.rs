//! Monte-Carlo harness: coded BLER and uncoded SER sweeps, the
//! incremental-technique ablation, and CSV output.
//!
//! A trial is one coded transmission: every UE sends one codeword spread
//! over `n_d` subcarriers, with one channel realization per coherence group
//! of subcarriers. All randomness of a trial comes from a stream keyed by
//! `(seed, trial index)`, so results do not depend on the number of worker
//! threads, all detectors see the same realizations, and SNR points differ
//! only in the noise scale.

mod config;
mod digest;
mod sweep;

pub use config::{ChannelSpec, DetectorKind, ExperimentConfig, PmeSource, TrainingConfig};
pub use digest::Digest;
pub use sweep::{
    code_config, draw_trial, run_ablation, run_point, run_sweep, uncoded_ser, write_ablation_csv, write_sweep_csv, AblationRow, Counts,
    PointResult, ResolvedDetector, SweepRow, Trial, ABLATION_VARIANTS, SWEEP_HEADER,
};
