//! Physical constants (CODATA), fixed to 12 significant digits.

/// Reduced Planck constant ħ in J·s.
pub const HBAR: f64 = 1.05457181765e-34;

/// Boltzmann constant k_B in J/K.
pub const K_B: f64 = 1.38064900000e-23;

/// 2π, for the Hz ↔ rad/s conversions done at the edges of the crate.
pub const TWO_PI: f64 = std::f64::consts::TAU;

/// Converts a linear frequency in Hz into an angular frequency in rad/s.
#[inline]
pub fn hz_to_rad(f: f64) -> f64 {
    TWO_PI * f
}

/// Converts an angular frequency in rad/s into Hz.
#[inline]
pub fn rad_to_hz(omega: f64) -> f64 {
    omega / TWO_PI
}
