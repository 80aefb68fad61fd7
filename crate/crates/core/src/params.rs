//! Physical parameter set of the linearized optomechanical measurement.
//!
//! Every constructor validates its invariants; the structs are immutable
//! afterwards except through the `with_*` builders, which re-validate.

use crate::constants::{HBAR, K_B};
use crate::error::{Error, Result};
use std::f64::consts::PI;

fn require_positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be finite and > 0, got {v}")))
    }
}

fn require_nonnegative(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be finite and >= 0, got {v}")))
    }
}

fn require_finite(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be finite, got {v}")))
    }
}

/// Bose–Einstein occupancy of a mode at angular frequency `omega` (rad/s)
/// and temperature `temperature` (K).
pub fn bose_occupancy(omega: f64, temperature: f64) -> f64 {
    if temperature <= 0.0 {
        return 0.0;
    }
    1.0 / (HBAR * omega / (K_B * temperature)).exp_m1()
}

/// Normalizes a homodyne angle into `[0, π)`.
pub fn normalize_theta(theta: f64) -> f64 {
    let t = theta.rem_euclid(PI);
    // rem_euclid can round up to exactly π for tiny negative inputs
    if t >= PI {
        0.0
    } else {
        t
    }
}

/// Damped harmonic oscillator: effective mass, resonance and energy damping rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MechanicalOscillator {
    mass: f64,
    frequency: f64,
    damping: f64,
    zpf: f64,
}

impl MechanicalOscillator {
    /// `mass` in kg, `frequency` Ω_m and `damping` Γ_m in rad/s.
    pub fn new(mass: f64, frequency: f64, damping: f64) -> Result<Self> {
        require_positive("mass", mass)?;
        require_positive("mechanical frequency", frequency)?;
        require_positive("mechanical damping", damping)?;
        Ok(Self {
            mass,
            frequency,
            damping,
            zpf: (HBAR / (2.0 * mass * frequency)).sqrt(),
        })
    }

    pub fn from_quality(mass: f64, frequency: f64, quality: f64) -> Result<Self> {
        require_positive("quality factor", quality)?;
        Self::new(mass, frequency, frequency / quality)
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    pub fn damping(&self) -> f64 {
        self.damping
    }

    /// Zero-point displacement amplitude sqrt(ħ/2mΩ_m) in m.
    pub fn zpf(&self) -> f64 {
        self.zpf
    }

    /// Zero-point momentum amplitude m·Ω_m·x_zpf = ħ/(2 x_zpf) in kg·m/s.
    pub fn zpf_momentum(&self) -> f64 {
        self.mass * self.frequency * self.zpf
    }

    pub fn quality(&self) -> f64 {
        self.frequency / self.damping
    }
}

/// Two-port optical cavity. `kappa1` is the input (loss) port, `kappa2` the
/// port that is detected; `detuning` is the probe detuning Δ (negative = red).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticalCavity {
    kappa1: f64,
    kappa2: f64,
    detuning: f64,
}

impl OpticalCavity {
    pub fn new(kappa1: f64, kappa2: f64, detuning: f64) -> Result<Self> {
        require_nonnegative("kappa1", kappa1)?;
        require_nonnegative("kappa2", kappa2)?;
        require_finite("detuning", detuning)?;
        if kappa1 + kappa2 <= 0.0 {
            return Err(Error::invalid("kappa", "total linewidth must be > 0"));
        }
        Ok(Self {
            kappa1,
            kappa2,
            detuning,
        })
    }

    /// Builds a cavity from its total linewidth and the fraction κ₂/κ
    /// leaking through the detected port.
    pub fn from_linewidth(kappa: f64, overcoupling: f64, detuning: f64) -> Result<Self> {
        require_positive("kappa", kappa)?;
        if !(0.0..=1.0).contains(&overcoupling) {
            return Err(Error::invalid(
                "overcoupling",
                format!("kappa2/kappa must lie in [0, 1], got {overcoupling}"),
            ));
        }
        let kappa2 = overcoupling * kappa;
        Self::new(kappa - kappa2, kappa2, detuning)
    }

    pub fn kappa(&self) -> f64 {
        self.kappa1 + self.kappa2
    }

    pub fn kappa1(&self) -> f64 {
        self.kappa1
    }

    pub fn kappa2(&self) -> f64 {
        self.kappa2
    }

    pub fn overcoupling(&self) -> f64 {
        self.kappa2 / self.kappa()
    }

    pub fn detuning(&self) -> f64 {
        self.detuning
    }

    pub fn with_detuning(self, detuning: f64) -> Result<Self> {
        Self::new(self.kappa1, self.kappa2, detuning)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ToneRole {
    Probe,
    Auxiliary,
}

/// A coherent drive: vacuum coupling g₀ enhanced by the intracavity photon number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveTone {
    g0: f64,
    n_cav: f64,
    detuning: f64,
    role: ToneRole,
}

impl DriveTone {
    pub fn new(g0: f64, n_cav: f64, detuning: f64, role: ToneRole) -> Result<Self> {
        require_positive("g0", g0)?;
        require_nonnegative("intracavity photon number", n_cav)?;
        require_finite("tone detuning", detuning)?;
        Ok(Self {
            g0,
            n_cav,
            detuning,
            role,
        })
    }

    /// Builds a tone from the linearized coupling g instead of n_cav.
    pub fn from_coupling(g0: f64, g: f64, detuning: f64, role: ToneRole) -> Result<Self> {
        require_positive("g0", g0)?;
        require_nonnegative("coupling", g)?;
        let ratio = g / g0;
        Self::new(g0, ratio * ratio, detuning, role)
    }

    pub fn g0(&self) -> f64 {
        self.g0
    }

    pub fn photons(&self) -> f64 {
        self.n_cav
    }

    /// Linearized coupling g = g₀·sqrt(n_cav) in rad/s.
    pub fn coupling(&self) -> f64 {
        self.g0 * self.n_cav.sqrt()
    }

    pub fn detuning(&self) -> f64 {
        self.detuning
    }

    pub fn role(&self) -> ToneRole {
        self.role
    }
}

/// Mechanical bath: thermal occupancy plus the excess occupancy imposed by
/// an auxiliary cooling beam.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalBath {
    n_th: f64,
    n_aux: f64,
    temperature: Option<f64>,
}

impl ThermalBath {
    pub fn from_occupancy(n_th: f64, n_aux: f64) -> Result<Self> {
        require_nonnegative("thermal occupancy", n_th)?;
        require_nonnegative("auxiliary occupancy", n_aux)?;
        Ok(Self {
            n_th,
            n_aux,
            temperature: None,
        })
    }

    /// Thermal occupancy from the Bose formula at the mechanical frequency.
    pub fn from_temperature(temperature: f64, mech_frequency: f64, n_aux: f64) -> Result<Self> {
        require_nonnegative("temperature", temperature)?;
        require_positive("mechanical frequency", mech_frequency)?;
        let mut bath = Self::from_occupancy(bose_occupancy(mech_frequency, temperature), n_aux)?;
        bath.temperature = Some(temperature);
        Ok(bath)
    }

    pub fn n_th(&self) -> f64 {
        self.n_th
    }

    pub fn n_aux(&self) -> f64 {
        self.n_aux
    }

    pub fn temperature(&self) -> Option<f64> {
        self.temperature
    }

    /// Effective occupancy n_th + n_aux.
    pub fn occupancy(&self) -> f64 {
        self.n_th + self.n_aux
    }

    /// Thermal decoherence rate γ = n_eff·Γ_m.
    pub fn decoherence_rate(&self, damping: f64) -> f64 {
        self.occupancy() * damping
    }
}

/// Homodyne detection chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    theta: f64,
    efficiency: f64,
}

impl Detection {
    pub fn new(theta: f64, efficiency: f64) -> Result<Self> {
        require_finite("theta", theta)?;
        if !(efficiency > 0.0 && efficiency <= 1.0) {
            return Err(Error::invalid(
                "efficiency",
                format!("detection efficiency must lie in (0, 1], got {efficiency}"),
            ));
        }
        Ok(Self {
            theta: normalize_theta(theta),
            efficiency,
        })
    }

    /// Homodyne angle in `[0, π)`.
    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn efficiency(&self) -> f64 {
        self.efficiency
    }
}

/// Complete parameter set.
///
/// The probe tone shares the cavity detuning; an optional auxiliary tone
/// adds its own dynamical backaction (same cavity linewidth, its own
/// detuning) while its heating enters through [`ThermalBath::n_aux`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub oscillator: MechanicalOscillator,
    pub cavity: OpticalCavity,
    pub probe: DriveTone,
    pub auxiliary: Option<DriveTone>,
    pub bath: ThermalBath,
    pub detection: Detection,
}

impl SystemParams {
    pub fn new(
        oscillator: MechanicalOscillator,
        cavity: OpticalCavity,
        probe: DriveTone,
        auxiliary: Option<DriveTone>,
        bath: ThermalBath,
        detection: Detection,
    ) -> Result<Self> {
        let sys = Self {
            oscillator,
            cavity,
            probe,
            auxiliary,
            bath,
            detection,
        };
        sys.validate()?;
        Ok(sys)
    }

    pub fn validate(&self) -> Result<()> {
        if self.probe.role != ToneRole::Probe {
            return Err(Error::invalid("probe", "probe tone must carry the probe role"));
        }
        if let Some(aux) = &self.auxiliary {
            if aux.role != ToneRole::Auxiliary {
                return Err(Error::invalid(
                    "auxiliary",
                    "auxiliary tone must carry the auxiliary role",
                ));
            }
        }
        let dp = self.probe.detuning;
        let dc = self.cavity.detuning;
        if (dp - dc).abs() > 1e-12 * dp.abs().max(dc.abs()).max(self.cavity.kappa()) {
            return Err(Error::invalid(
                "probe detuning",
                format!("probe detuning {dp} differs from cavity detuning {dc}"),
            ));
        }
        Ok(())
    }

    /// Probe coupling g in rad/s.
    pub fn coupling(&self) -> f64 {
        self.probe.coupling()
    }

    pub fn theta(&self) -> f64 {
        self.detection.theta
    }

    pub fn efficiency(&self) -> f64 {
        self.detection.efficiency
    }

    /// Efficiency with which the detected-port output reaches the photocurrent.
    ///
    /// The detection efficiency is referenced to the total cavity decay, so
    /// the fraction of the port-2 field that is actually detected is
    /// η_det·κ/κ₂. Values above one are unphysical.
    pub fn port_efficiency(&self) -> f64 {
        self.detection.efficiency * self.cavity.kappa() / self.cavity.kappa2
    }

    /// All tones that exert dynamical backaction (probe first).
    pub fn tones(&self) -> impl Iterator<Item = &DriveTone> {
        std::iter::once(&self.probe).chain(self.auxiliary.iter())
    }

    /// Replaces the probe coupling g, keeping g₀ and rescaling n_cav.
    pub fn with_probe_coupling(mut self, g: f64) -> Result<Self> {
        self.probe = DriveTone::from_coupling(self.probe.g0, g, self.probe.detuning, ToneRole::Probe)?;
        Ok(self)
    }

    /// Moves both the cavity and the probe detuning.
    pub fn with_probe_detuning(mut self, detuning: f64) -> Result<Self> {
        self.cavity = self.cavity.with_detuning(detuning)?;
        self.probe = DriveTone::new(self.probe.g0, self.probe.n_cav, detuning, ToneRole::Probe)?;
        Ok(self)
    }

    pub fn with_efficiency(mut self, efficiency: f64) -> Result<Self> {
        self.detection = Detection::new(self.detection.theta, efficiency)?;
        Ok(self)
    }

    pub fn with_theta(mut self, theta: f64) -> Result<Self> {
        self.detection = Detection::new(theta, self.detection.efficiency)?;
        Ok(self)
    }

    pub fn with_bath(mut self, bath: ThermalBath) -> Self {
        self.bath = bath;
        self
    }

    pub fn with_oscillator(mut self, oscillator: MechanicalOscillator) -> Self {
        self.oscillator = oscillator;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quality_and_zpf_are_consistent() {
        let osc = MechanicalOscillator::from_quality(2.3e-12, 7.1e6, 1.03e9).unwrap();
        assert!((osc.quality() / 1.03e9 - 1.0).abs() < 1e-15);
        let zpf = (HBAR / (2.0 * osc.mass() * osc.frequency())).sqrt();
        assert_eq!(zpf, osc.zpf());
        assert!((osc.zpf_momentum() - HBAR / (2.0 * osc.zpf())).abs() < 1e-14 * osc.zpf_momentum());
    }

    #[test]
    fn rejects_nonphysical_oscillators() {
        assert!(MechanicalOscillator::new(0.0, 1.0, 1.0).is_err());
        assert!(MechanicalOscillator::new(1.0, -1.0, 1.0).is_err());
        assert!(MechanicalOscillator::new(1.0, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn cavity_linewidth_is_sum_of_ports() {
        let cav = OpticalCavity::from_linewidth(1.0e8, 0.95, -1.0e7).unwrap();
        assert_eq!(cav.kappa(), cav.kappa1() + cav.kappa2());
        assert!((cav.overcoupling() - 0.95).abs() < 1e-15);
        assert!(OpticalCavity::from_linewidth(1.0, 1.2, 0.0).is_err());
        assert!(OpticalCavity::new(0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn coupling_squares_to_g0_squared_times_photons() {
        let tone = DriveTone::new(758.0, 2.6e7, 0.0, ToneRole::Probe).unwrap();
        let g = tone.coupling();
        assert!((g * g / (758.0 * 758.0 * 2.6e7) - 1.0).abs() < 1e-15);
        let back = DriveTone::from_coupling(758.0, g, 0.0, ToneRole::Probe).unwrap();
        assert!((back.photons() / 2.6e7 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn bose_occupancy_matches_high_temperature_expansion() {
        let omega = 2.0 * PI * 1.135e6;
        let n = bose_occupancy(omega, 10.0);
        let x = HBAR * omega / (K_B * 10.0);
        // kT/ħΩ − 1/2 + x/12 expansion
        let series = 1.0 / x - 0.5 + x / 12.0;
        assert!((n / series - 1.0).abs() < 1e-12);
        assert!((n - 1.836e5).abs() < 1e3);
        assert_eq!(bose_occupancy(omega, 0.0), 0.0);
    }

    #[test]
    fn theta_normalization_is_pi_periodic() {
        for &t in &[-7.0, -PI, -1e-18, 0.0, 1.0, PI, 2.5 * PI, 100.0] {
            let n = normalize_theta(t);
            assert!((0.0..PI).contains(&n), "{t} -> {n}");
            assert!(((t - n) / PI - ((t - n) / PI).round()).abs() < 1e-9);
        }
    }

    #[test]
    fn detection_efficiency_bounds() {
        assert!(Detection::new(0.3, 0.0).is_err());
        assert!(Detection::new(0.3, 1.0001).is_err());
        assert!(Detection::new(0.3, 1.0).is_ok());
    }
}
