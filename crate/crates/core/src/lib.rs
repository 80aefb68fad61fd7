//! Linearized quantum-noise model of an interferometric displacement
//! measurement on a cavity-optomechanical system.
//!
//! The crate is organised bottom-up:
//!
//! * [`params`] – physical parameter set (oscillator, cavity, drive tones,
//!   bath, detection chain).
//! * [`model`] – frequency-domain response functions and symmetrized noise
//!   spectral densities (imprecision, backaction, thermal, correlations).
//! * [`limits`] – standard quantum limit, variational quadrature
//!   optimisation, sub-SQL bands, cooperativity and force SNR.
//! * [`langevin`] – exact-discretization time-domain simulator of the
//!   underlying Langevin equations with a Welch PSD estimator, used as an
//!   independent oracle for [`model`].
//! * [`calibration`] – backaction-referenced `g₀` extraction and
//!   voltage-to-displacement conversion via a phase-modulation tone.
//! * [`fit`] – Levenberg–Marquardt fitting of calibrated spectra.
//!
//! All internal frequencies and rates are angular (rad/s). Spectral
//! densities are double-sided and symmetrized, so a displacement density is
//! in m²·s (= m²/Hz double-sided).

pub mod calibration;
pub mod constants;
pub mod error;
pub mod fit;
pub mod langevin;
pub mod limits;
pub mod model;
pub mod optim;
pub mod params;
pub mod presets;

pub use error::{Error, ErrorKind, Result};
pub use num_complex::Complex64;
pub use params::{
    Detection, DriveTone, MechanicalOscillator, OpticalCavity, SystemParams, ThermalBath, ToneRole,
};
