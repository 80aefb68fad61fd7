//! Nonlinear least-squares fitting of calibrated spectra.

mod diagnostics;
mod lm;
mod spectrum;

pub use diagnostics::{residual_diagnostics, Diagnostics, RunsTest};
pub use lm::{levenberg_marquardt, LmOptions, LmOutcome, ParamSpace};
pub use spectrum::{
    fit_detection_efficiency, fit_spectrum, Estimate, FitParameter, FitProblem, FitResult,
    FreeParameter,
};
