//! Analytical hardware models: real-multiplication counts, throughput and
//! utilization, the power model fit, and a fixed-point datapath.

mod complexity;
mod fixed;
mod power;
mod report;
mod timing;

pub use complexity::{
    complexity_gbcd, complexity_lmmse, complexity_ocd, gbcd_closed_form, lmmse_preprocessing_closed_form,
    Algorithm, ComplexityReport,
};
pub use fixed::{
    profile_dynamic_range, quantize, quantize_complex, DynamicRange, FixedPath, FixedPointGbcd, FxpFormat,
    FxpPlan, ProfileConfig, ReciprocalLut, LUT_SEGMENTS,
};
pub use power::{fit_power, fit_power_with, PowerFit};
pub use report::{hwmodel_rows, write_hwmodel_csv, HwModelConfig, HwRow, HWMODEL_HEADER};
pub use timing::{throughput, utilization, TimingModel};
