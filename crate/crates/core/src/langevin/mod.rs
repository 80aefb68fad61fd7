//! Time-domain oracle: exact Gaussian propagation of the linear quantum
//! Langevin equations, synthetic homodyne photocurrents and Welch spectral
//! estimation.
//!
//! The simulation runs in dimensionless form (time in units of 1/Ω_m,
//! displacement in x_zpf, momentum in m·Ω_m·x_zpf) and converts back to SI
//! at the boundary. Symmetrized spectra of a linear system depend only on
//! the symmetrized input intensities, so classical Gaussian noise with the
//! quantum intensities reproduces them.

mod compare;
mod integrate;
mod state_space;
mod welch;

pub use compare::{
    compare_to_analytic, displacement_estimate, expected_photocurrent_psd, BandComparison,
    ComparisonOptions, ComparisonReport,
};
pub use integrate::{
    integrate, simulate_photocurrent_psds, synthesize_photocurrent, Discretization,
    IntegrationOptions, PhotocurrentSynth, PortInputs, Simulator, Step, StreamOptions, TimeTrace,
};
pub use state_space::{build_state_space, stationary_covariance, StateSpace};
pub use welch::{welch_psd, PsdEstimate, WelchAccumulator, Window};
