//! Risk spectra, the empirical and kernel SRM estimators, asymptotic
//! variance and reports.

pub mod estimate;
pub mod report;
pub mod spectrum;
pub mod variance;

pub use estimate::{
    empirical_srm, empirical_srm_losses, kernel_srm, kernel_srm_cdf, kernel_srm_losses, KernelSrmValue,
};
pub use report::{
    config_hash, EstimateReport, EstimatorKind, Interval, IntervalMethod, Provenance, SignConvention, Units,
};
pub use spectrum::{
    distortion_eval, lstat_weights, phi, validate_admissible, AdmissibilityReport, CustomSpectrum,
    DistortionFunction, LStatWeights, Mirrored, Monotonicity, RiskSpectrum, Spectrum, MAX_BETA,
};
pub use variance::{
    asymptotic_variance, clt_interval, plug_in_variance, AsymptoticSpec, AsymptoticVariance,
    DEFAULT_CLIP, DEFAULT_VARIANCE_GRID,
};
