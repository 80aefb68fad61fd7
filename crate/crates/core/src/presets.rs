//! Reference parameter sets.

use crate::constants::TWO_PI;
use crate::error::Result;
use crate::limits::coupling_for_cooperativity;
use crate::params::{
    Detection, DriveTone, MechanicalOscillator, OpticalCavity, SystemParams, ThermalBath, ToneRole,
};
use std::f64::consts::FRAC_PI_2;

/// Mechanical resonance of the membrane mode, rad/s.
pub const MECH_FREQUENCY: f64 = TWO_PI * 1.135e6;
pub const MECH_QUALITY: f64 = 1.03e9;
/// Effective mass in kg.
pub const MECH_MASS: f64 = 2.3e-12;
/// Total cavity linewidth, rad/s.
pub const CAVITY_LINEWIDTH: f64 = TWO_PI * 16.2e6;
pub const OVERCOUPLING: f64 = 0.95;
pub const DETECTION_EFFICIENCY: f64 = 0.77;
pub const BATH_TEMPERATURE: f64 = 10.0;
pub const QUANTUM_COOPERATIVITY: f64 = 17.3;
/// Vacuum optomechanical coupling, rad/s.
pub const VACUUM_COUPLING: f64 = TWO_PI * 120.7;
/// Probe detuning as a fraction of the cavity linewidth (slightly red).
pub const DETUNING_FRACTION: f64 = -0.1;
/// Mechanical quality factor used for time-domain simulation.
pub const DESK_QUALITY: f64 = 1.0e4;

/// Operating point of the membrane-in-the-middle experiment at quantum
/// cooperativity `cooperativity`; the probe coupling is solved for.
pub fn operating_point(cooperativity: f64) -> Result<SystemParams> {
    let oscillator = MechanicalOscillator::from_quality(MECH_MASS, MECH_FREQUENCY, MECH_QUALITY)?;
    let detuning = DETUNING_FRACTION * CAVITY_LINEWIDTH;
    let cavity = OpticalCavity::from_linewidth(CAVITY_LINEWIDTH, OVERCOUPLING, detuning)?;
    let bath = ThermalBath::from_temperature(BATH_TEMPERATURE, MECH_FREQUENCY, 0.0)?;
    let g = coupling_for_cooperativity(
        cooperativity,
        CAVITY_LINEWIDTH,
        bath.occupancy(),
        oscillator.damping(),
    )?;
    let probe = DriveTone::from_coupling(VACUUM_COUPLING, g, detuning, ToneRole::Probe)?;
    let detection = Detection::new(FRAC_PI_2, DETECTION_EFFICIENCY)?;
    SystemParams::new(oscillator, cavity, probe, None, bath, detection)
}

/// [`operating_point`] at the headline cooperativity.
pub fn reference_operating_point() -> Result<SystemParams> {
    operating_point(QUANTUM_COOPERATIVITY)
}

/// Rescaled copy of the operating point that a time-domain simulation can
/// resolve: the quality factor drops to `quality` while κ/Ω_m, the probe
/// coupling, the backaction rate and the cooperativity are preserved. The
/// bath occupancy is lowered so that n_eff·Γ_m stays fixed.
pub fn desk_scale(cooperativity: f64, quality: f64) -> Result<SystemParams> {
    let full = operating_point(cooperativity)?;
    let oscillator = MechanicalOscillator::from_quality(MECH_MASS, MECH_FREQUENCY, quality)?;
    let gamma = full.bath.decoherence_rate(full.oscillator.damping());
    let bath = ThermalBath::from_occupancy(gamma / oscillator.damping(), 0.0)?;
    SystemParams::new(
        oscillator,
        full.cavity,
        full.probe,
        None,
        bath,
        full.detection,
    )
}
