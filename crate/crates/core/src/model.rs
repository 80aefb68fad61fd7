//! Frequency-domain response functions and symmetrized noise spectral
//! densities of the linearized measurement.
//!
//! Conventions: Fourier transforms use `e^{iΩt}`, so susceptibilities have
//! their poles in the lower half plane; all spectra are double-sided and
//! symmetrized.

use crate::constants::HBAR;
use crate::error::{Error, Result};
use crate::optim;
use crate::params::{normalize_theta, MechanicalOscillator, OpticalCavity, SystemParams};
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::SQRT_2;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Mechanical susceptibility χ_m(Ω) = 1/(m(Ω_m² − Ω² − iΓ_mΩ)) in m/N.
pub fn mech_susceptibility(osc: &MechanicalOscillator, omega: f64) -> Complex64 {
    inverse_mech_susceptibility(osc, Complex64::new(omega, 0.0)).inv()
}

fn inverse_mech_susceptibility(osc: &MechanicalOscillator, omega: Complex64) -> Complex64 {
    let wm = osc.frequency();
    // factorized to keep Ω_m² − Ω² accurate close to resonance
    osc.mass() * ((wm - omega) * (wm + omega) - I * osc.damping() * omega)
}

/// Lorentzian cavity response [κ/2 − i(Δ + Ω)]⁻¹ for a given linewidth and detuning.
pub fn lorentzian(kappa: f64, detuning: f64, omega: f64) -> Complex64 {
    Complex64::new(0.5 * kappa, -(detuning + omega)).inv()
}

/// Cavity susceptibility χ_c(Ω) in s.
pub fn cavity_susceptibility(cav: &OpticalCavity, omega: f64) -> Complex64 {
    lorentzian(cav.kappa(), cav.detuning(), omega)
}

/// χ_eff⁻¹ analytically continued to complex Ω: the mechanical inverse
/// susceptibility plus one dynamical-backaction term per drive tone.
fn inverse_effective_complex(sys: &SystemParams, omega: Complex64) -> Complex64 {
    let osc = &sys.oscillator;
    let half_kappa = 0.5 * sys.cavity.kappa();
    let mut inv = inverse_mech_susceptibility(osc, omega);
    for tone in sys.tones() {
        let g = tone.coupling();
        if g == 0.0 {
            continue;
        }
        let d = tone.detuning();
        // χ_c(Ω) − χ_c(−Ω)* continued off the real axis
        let plus = (half_kappa - I * (d + omega)).inv();
        let minus_conj = (half_kappa + I * (d - omega)).inv();
        inv -= I * 2.0 * g * g * osc.mass() * osc.frequency() * (plus - minus_conj);
    }
    inv
}

fn inverse_effective_derivative(sys: &SystemParams, omega: Complex64) -> Complex64 {
    let osc = &sys.oscillator;
    let half_kappa = 0.5 * sys.cavity.kappa();
    let mut d_inv = osc.mass() * (-2.0 * omega - I * osc.damping());
    for tone in sys.tones() {
        let g = tone.coupling();
        let d = tone.detuning();
        let plus = (half_kappa - I * (d + omega)).inv();
        let minus_conj = (half_kappa + I * (d - omega)).inv();
        let bracket = I * (plus * plus - minus_conj * minus_conj);
        d_inv -= I * 2.0 * g * g * osc.mass() * osc.frequency() * bracket;
    }
    d_inv
}

/// Inverse effective susceptibility χ_eff⁻¹(Ω) in N/m.
pub fn inverse_effective_susceptibility(sys: &SystemParams, omega: f64) -> Complex64 {
    inverse_effective_complex(sys, Complex64::new(omega, 0.0))
}

/// Effective (dynamical-backaction modified) susceptibility χ_eff(Ω) in m/N.
///
/// Fails when χ_eff⁻¹ vanishes to within floating-point range, which
/// happens only when a pole sits on the real axis.
pub fn effective_susceptibility(sys: &SystemParams, omega: f64) -> Result<Complex64> {
    let inv = inverse_effective_susceptibility(sys, omega);
    let norm = inv.norm();
    if !norm.is_finite() || norm <= f64::MIN_POSITIVE {
        return Err(Error::Unstable(format!(
            "effective susceptibility diverges at omega = {omega} rad/s"
        )));
    }
    Ok(inv.inv())
}

/// Homodyne transduction f^θ(Ω) from displacement to the detected output
/// quadrature, in 1/(m·sqrt(s)).
pub fn transduction(sys: &SystemParams, theta: f64, omega: f64) -> Complex64 {
    SpectralPoint::optical(sys, omega).transduction(theta)
}

/// Imprecision (shot-noise) displacement spectrum in m²·s; `+∞` on blind quadratures.
pub fn imprecision_spectrum(sys: &SystemParams, theta: f64, omega: f64) -> f64 {
    SpectralPoint::optical(sys, omega).imprecision(theta)
}

/// Quantum backaction force spectrum in N²·s.
pub fn qba_force_spectrum(sys: &SystemParams, omega: f64) -> f64 {
    SpectralPoint::optical(sys, omega).qba_force
}

/// Thermal Langevin force spectrum m·Γ_m·ħΩ_m(2n_eff + 1) in N²·s.
pub fn thermal_force_spectrum(sys: &SystemParams) -> f64 {
    let osc = &sys.oscillator;
    osc.mass() * osc.damping() * HBAR * osc.frequency() * (2.0 * sys.bath.occupancy() + 1.0)
}

/// Imprecision–backaction cross spectrum S_xF in N·m·s.
pub fn correlation_spectrum(sys: &SystemParams, theta: f64, omega: f64) -> Result<Complex64> {
    SpectralPoint::optical(sys, omega)
        .correlation(theta)
        .ok_or(Error::BlindQuadrature { theta, omega })
}

/// Total measured displacement spectrum S_xx^meas in m²·s.
pub fn measured_displacement_spectrum(sys: &SystemParams, theta: f64, omega: f64) -> Result<f64> {
    Ok(SpectralPoint::new(sys, omega)?.total(theta))
}

/// S_xx^meas / S_xx^imp: the homodyne photocurrent spectrum in shot-noise units.
pub fn shot_normalized_spectrum(sys: &SystemParams, theta: f64, omega: f64) -> Result<f64> {
    SpectralPoint::new(sys, omega)?.shot_normalized(theta)
}

/// All θ-independent quantities at one frequency, so that many quadratures
/// can be evaluated cheaply.
#[derive(Debug, Clone, Copy)]
pub struct SpectralPoint {
    pub omega: f64,
    /// χ_c(Ω)
    chi_plus: Complex64,
    /// χ_c(−Ω)*
    chi_minus_conj: Complex64,
    /// χ_eff(Ω); zero when only optical quantities were requested
    pub chi_eff: Complex64,
    pub qba_force: f64,
    pub thermal_force: f64,
    zpf: f64,
    coupling: f64,
    kappa: f64,
    kappa2: f64,
    efficiency: f64,
}

impl SpectralPoint {
    pub fn new(sys: &SystemParams, omega: f64) -> Result<Self> {
        let mut p = Self::optical(sys, omega);
        p.chi_eff = effective_susceptibility(sys, omega)?;
        Ok(p)
    }

    fn optical(sys: &SystemParams, omega: f64) -> Self {
        let kappa = sys.cavity.kappa();
        let d = sys.cavity.detuning();
        let chi_plus = lorentzian(kappa, d, omega);
        let chi_minus_conj = lorentzian(kappa, d, -omega).conj();
        let zpf = sys.oscillator.zpf();
        let g = sys.coupling();
        let qba_force = HBAR * HBAR / (2.0 * zpf * zpf)
            * g
            * g
            * kappa
            * (chi_plus.norm_sqr() + chi_minus_conj.norm_sqr());
        Self {
            omega,
            chi_plus,
            chi_minus_conj,
            chi_eff: Complex64::new(0.0, 0.0),
            qba_force,
            thermal_force: thermal_force_spectrum(sys),
            zpf,
            coupling: g,
            kappa,
            kappa2: sys.cavity.kappa2(),
            efficiency: sys.efficiency(),
        }
    }

    /// χ_c(Ω)e^{iθ} − χ_c(−Ω)*e^{−iθ}
    fn difference(&self, theta: f64) -> Complex64 {
        let e = Complex64::from_polar(1.0, theta);
        self.chi_plus * e - self.chi_minus_conj * e.conj()
    }

    /// χ_c(Ω)e^{iθ} + χ_c(−Ω)*e^{−iθ}
    fn sum(&self, theta: f64) -> Complex64 {
        let e = Complex64::from_polar(1.0, theta);
        self.chi_plus * e + self.chi_minus_conj * e.conj()
    }

    pub fn transduction(&self, theta: f64) -> Complex64 {
        -I * (self.coupling / (SQRT_2 * self.zpf)) * self.kappa2.sqrt() * self.difference(theta)
    }

    pub fn imprecision(&self, theta: f64) -> f64 {
        let denom = self.coupling * self.coupling
            * self.efficiency
            * self.kappa
            * self.difference(theta).norm_sqr();
        if denom > 0.0 {
            self.zpf * self.zpf / denom
        } else {
            f64::INFINITY
        }
    }

    pub fn correlation(&self, theta: f64) -> Option<Complex64> {
        let den = self.difference(theta);
        if den.norm_sqr() == 0.0 {
            return None;
        }
        Some(-I * 0.5 * HBAR * self.sum(theta) / den)
    }

    pub fn components(&self, theta: f64) -> Components {
        Components {
            omega: self.omega,
            theta: normalize_theta(theta),
            chi_eff: self.chi_eff,
            imprecision: self.imprecision(theta),
            qba_force: self.qba_force,
            thermal_force: self.thermal_force,
            correlation: self.correlation(theta),
        }
    }

    pub fn total(&self, theta: f64) -> f64 {
        self.components(theta).total()
    }

    pub fn shot_normalized(&self, theta: f64) -> Result<f64> {
        let c = self.components(theta);
        if !c.imprecision.is_finite() {
            return Err(Error::BlindQuadrature {
                theta,
                omega: self.omega,
            });
        }
        Ok(c.total() / c.imprecision)
    }
}

/// Noise budget at one frequency and quadrature.
#[derive(Debug, Clone, Copy)]
pub struct Components {
    pub omega: f64,
    pub theta: f64,
    pub chi_eff: Complex64,
    /// S_xx^imp, m²·s
    pub imprecision: f64,
    /// S_FF^qba, N²·s
    pub qba_force: f64,
    /// S_FF^th, N²·s
    pub thermal_force: f64,
    /// S_xF, N·m·s; `None` on a blind quadrature
    pub correlation: Option<Complex64>,
}

impl Components {
    /// |χ_eff|²·S_FF^qba
    pub fn backaction(&self) -> f64 {
        self.chi_eff.norm_sqr() * self.qba_force
    }

    /// |χ_eff|²·S_FF^th
    pub fn thermal(&self) -> f64 {
        self.chi_eff.norm_sqr() * self.thermal_force
    }

    /// 2Re[χ_eff*·S_xF]
    pub fn correlation_term(&self) -> f64 {
        match self.correlation {
            Some(c) => 2.0 * (self.chi_eff.conj() * c).re,
            None => 0.0,
        }
    }

    pub fn total(&self) -> f64 {
        self.imprecision + self.backaction() + self.thermal() + self.correlation_term()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectralConvention {
    DoubleSidedSymmetrized,
}

/// A noise budget tabulated on a frequency grid.
#[derive(Debug, Clone)]
pub struct NoiseSpectrum {
    pub omega: Vec<f64>,
    pub theta: f64,
    pub imprecision: Vec<f64>,
    pub backaction: Vec<f64>,
    pub thermal: Vec<f64>,
    pub correlation: Vec<f64>,
    pub total: Vec<f64>,
    /// ħ|χ_eff|
    pub sql: Vec<f64>,
    pub convention: SpectralConvention,
}

impl NoiseSpectrum {
    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    pub fn shot_normalized(&self) -> Vec<f64> {
        self.total
            .iter()
            .zip(&self.imprecision)
            .map(|(t, i)| t / i)
            .collect()
    }

    pub fn sql_ratio(&self) -> Vec<f64> {
        self.total.iter().zip(&self.sql).map(|(t, s)| t / s).collect()
    }
}

pub(crate) fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid("grid", "frequency grid is empty"));
    }
    if grid.iter().any(|w| !w.is_finite()) {
        return Err(Error::invalid("grid", "frequency grid has non-finite entries"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("grid", "frequency grid must be strictly increasing"));
    }
    Ok(())
}

/// Tabulates the full noise budget at quadrature `theta` on `grid` (rad/s).
pub fn noise_spectrum(sys: &SystemParams, theta: f64, grid: &[f64]) -> Result<NoiseSpectrum> {
    validate_grid(grid)?;
    check_stability(sys)?;
    let n = grid.len();
    let mut out = NoiseSpectrum {
        omega: grid.to_vec(),
        theta: normalize_theta(theta),
        imprecision: Vec::with_capacity(n),
        backaction: Vec::with_capacity(n),
        thermal: Vec::with_capacity(n),
        correlation: Vec::with_capacity(n),
        total: Vec::with_capacity(n),
        sql: Vec::with_capacity(n),
        convention: SpectralConvention::DoubleSidedSymmetrized,
    };
    for &w in grid {
        let c = SpectralPoint::new(sys, w)?.components(theta);
        out.imprecision.push(c.imprecision);
        out.backaction.push(c.backaction());
        out.thermal.push(c.thermal());
        out.correlation.push(c.correlation_term());
        out.total.push(c.total());
        out.sql.push(HBAR * c.chi_eff.norm());
    }
    Ok(out)
}

/// Closed-form resonant bad-cavity (κ ≫ Ω, Δ = 0) approximations.
#[derive(Debug, Clone, Copy)]
pub struct BadCavityLimits {
    pub imprecision: f64,
    pub qba_force: f64,
    pub correlation: f64,
}

pub fn bad_cavity_limits(sys: &SystemParams, theta: f64) -> BadCavityLimits {
    let zpf = sys.oscillator.zpf();
    let g = sys.coupling();
    let kappa = sys.cavity.kappa();
    let s = theta.sin();
    BadCavityLimits {
        imprecision: zpf * zpf * kappa / (16.0 * g * g * sys.efficiency() * s * s),
        qba_force: HBAR * HBAR / (2.0 * zpf * zpf) * 8.0 * g * g / kappa,
        correlation: -0.5 * HBAR * theta.cos() / s,
    }
}

/// Drift matrix of the coupled cavity–mechanics dynamics in units of Ω_m,
/// with one cavity mode per drive tone.
///
/// State ordering: `(X₁, Y₁, …, X_k, Y_k, x/x_zpf, p/p_zpf)`.
pub fn dynamics_matrix(sys: &SystemParams) -> DMatrix<f64> {
    let wm = sys.oscillator.frequency();
    let tones: Vec<_> = sys.tones().collect();
    let n = 2 * tones.len() + 2;
    let (ix, ip) = (n - 2, n - 1);
    let k = 0.5 * sys.cavity.kappa() / wm;
    let mut a = DMatrix::zeros(n, n);
    for (t, tone) in tones.iter().enumerate() {
        let (x, y) = (2 * t, 2 * t + 1);
        let d = tone.detuning() / wm;
        let g = tone.coupling() / wm;
        a[(x, x)] = -k;
        a[(x, y)] = -d;
        a[(y, x)] = d;
        a[(y, y)] = -k;
        a[(y, ix)] = SQRT_2 * g;
        a[(ip, x)] = 2.0 * SQRT_2 * g;
    }
    a[(ix, ip)] = 1.0;
    a[(ip, ix)] = -1.0;
    a[(ip, ip)] = -sys.oscillator.damping() / wm;
    a
}

/// Complex mechanical pole Ω_p = Ω_pole − iΓ_eff/2 of χ_eff (rad/s).
#[derive(Debug, Clone, Copy)]
pub struct MechanicalPole {
    pub pole: Complex64,
}

impl MechanicalPole {
    pub fn frequency(&self) -> f64 {
        self.pole.re
    }

    /// Effective energy damping rate Γ_eff (rad/s).
    pub fn damping(&self) -> f64 {
        -2.0 * self.pole.im
    }
}

/// Checks that every eigenvalue of the coupled dynamics decays.
pub fn check_stability(sys: &SystemParams) -> Result<()> {
    mechanical_pole(sys).map(|_| ())
}

/// Locates the mechanical pole: eigen-decomposition of the coupled drift
/// matrix for stability and a starting point, then Newton refinement on
/// χ_eff⁻¹(Ω) = 0.
pub fn mechanical_pole(sys: &SystemParams) -> Result<MechanicalPole> {
    let wm = sys.oscillator.frequency();
    let eig = dynamics_matrix(sys).complex_eigenvalues();
    if let Some(bad) = eig.iter().find(|l| !(l.re < 0.0)) {
        return Err(Error::Unstable(format!(
            "eigenvalue {:.6e}{:+.6e}i (units of the mechanical frequency) does not decay",
            bad.re, bad.im
        )));
    }
    // λ = −iΩ_p: the positive-frequency pole pairs with the eigenvalue near −i
    let lambda = eig
        .iter()
        .min_by(|a, b| {
            let da = (*a + I).norm();
            let db = (*b + I).norm();
            da.total_cmp(&db)
        })
        .copied()
        .ok_or_else(|| Error::NonFinite("empty spectrum of the drift matrix".into()))?;
    let mut pole = I * lambda * wm;
    for _ in 0..20 {
        let f = inverse_effective_complex(sys, pole);
        let df = inverse_effective_derivative(sys, pole);
        let step = f / df;
        if !step.re.is_finite() || !step.im.is_finite() {
            break;
        }
        pole -= step;
        if step.norm() <= 1e-15 * wm {
            break;
        }
    }
    if !(pole.im < 0.0) {
        return Err(Error::Unstable(format!(
            "mechanical pole {pole} is not in the lower half plane"
        )));
    }
    Ok(MechanicalPole { pole })
}

/// Effective resonance: Ω_eff minimizing |χ_eff⁻¹| on the real axis, and
/// the effective damping Γ_eff of the mechanical pole.
#[derive(Debug, Clone, Copy)]
pub struct EffectiveResonance {
    pub frequency: f64,
    pub damping: f64,
}

pub fn effective_resonance(sys: &SystemParams) -> Result<EffectiveResonance> {
    let pole = mechanical_pole(sys)?;
    let wm = sys.oscillator.frequency();
    let half = 10.0 * pole.damping() + 1e-9 * wm;
    let (lo, hi) = (pole.frequency() - half, pole.frequency() + half);
    let (omega, _) = optim::grid_then_golden(
        |w| inverse_effective_susceptibility(sys, w).norm(),
        lo,
        hi,
        201,
        1e-13 * wm,
    );
    Ok(EffectiveResonance {
        frequency: omega,
        damping: pole.damping(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn mechanical_susceptibility_limits() {
        let osc = MechanicalOscillator::from_quality(2.3e-12, 7.13e6, 1.03e9).unwrap();
        let dc = mech_susceptibility(&osc, 0.0);
        assert_eq!(dc.im, 0.0);
        assert!(rel(dc.re, 1.0 / (osc.mass() * osc.frequency().powi(2))) < 1e-15);
        let res = mech_susceptibility(&osc, osc.frequency());
        assert!(res.re.abs() < 1e-12 * res.im.abs());
        assert!(rel(res.norm(), osc.quality() / (osc.mass() * osc.frequency().powi(2))) < 1e-12);
        let w = 0.7 * osc.frequency();
        let d = mech_susceptibility(&osc, w) - mech_susceptibility(&osc, -w).conj();
        assert!(d.norm() < 1e-15 * mech_susceptibility(&osc, w).norm());
    }

    #[test]
    fn cavity_susceptibility_forms_agree() {
        let kappa = 2.0 * PI * 16.2e6;
        let cav = OpticalCavity::from_linewidth(kappa, 0.95, 0.0).unwrap();
        assert!((cavity_susceptibility(&cav, 0.0) - Complex64::new(2.0 / kappa, 0.0)).norm() < 1e-24);
        let half = cavity_susceptibility(&cav, kappa / 2.0);
        assert!((half - Complex64::new(1.0, 1.0) / kappa).norm() < 1e-15 / kappa);
        let w = 2.0 * PI * 1.135e6;
        let mag = 2.0 / kappa / (1.0 + (2.0 * w / kappa).powi(2)).sqrt();
        assert!(rel(cavity_susceptibility(&cav, w).norm(), mag) < 1e-14);
    }

    #[test]
    fn decoupled_effective_susceptibility_is_mechanical() {
        let sys = presets::reference_operating_point().unwrap().with_probe_coupling(0.0).unwrap();
        for w in [0.0, 1e5, sys.oscillator.frequency(), 3e7] {
            let a = effective_susceptibility(&sys, w).unwrap();
            let b = mech_susceptibility(&sys.oscillator, w);
            assert!((a - b).norm() <= 1e-12 * b.norm());
        }
    }

    #[test]
    fn no_static_spring_on_resonant_drive() {
        let sys = presets::reference_operating_point()
            .unwrap()
            .with_probe_detuning(0.0)
            .unwrap();
        let a = effective_susceptibility(&sys, 0.0).unwrap();
        let b = mech_susceptibility(&sys.oscillator, 0.0);
        assert!((a - b).norm() <= 1e-12 * b.norm());
    }

    #[test]
    fn transduction_is_antiperiodic_in_theta() {
        let sys = presets::reference_operating_point().unwrap();
        let w = sys.oscillator.frequency();
        for theta in [0.1, 0.9, 2.0] {
            let a = transduction(&sys, theta, w);
            let b = transduction(&sys, theta + PI, w);
            assert!((a + b).norm() < 1e-12 * a.norm());
        }
        let res = sys.with_probe_detuning(0.0).unwrap();
        assert_eq!(transduction(&res, 0.0, 0.0).norm(), 0.0);
    }

    #[test]
    fn phase_quadrature_maximizes_bad_cavity_transduction() {
        let sys = presets::reference_operating_point()
            .unwrap()
            .with_probe_detuning(0.0)
            .unwrap();
        let w = 1e-3 * sys.cavity.kappa();
        let best = (0..1000)
            .map(|i| PI * i as f64 / 1000.0)
            .max_by(|a, b| {
                transduction(&sys, *a, w)
                    .norm()
                    .total_cmp(&transduction(&sys, *b, w).norm())
            })
            .unwrap();
        assert!((best - FRAC_PI_2).abs() < 2e-3);
    }

    #[test]
    fn imprecision_scales_inversely_with_efficiency() {
        let sys = presets::reference_operating_point().unwrap();
        let ideal = sys.with_efficiency(1.0).unwrap();
        let w = sys.oscillator.frequency();
        let r = imprecision_spectrum(&sys, 1.0, w) / imprecision_spectrum(&ideal, 1.0, w);
        assert!(rel(r, 1.0 / 0.77) < 1e-14);
    }

    #[test]
    fn blind_quadrature_gives_infinite_imprecision() {
        let sys = presets::reference_operating_point()
            .unwrap()
            .with_probe_detuning(0.0)
            .unwrap();
        assert!(imprecision_spectrum(&sys, 0.0, 0.0).is_infinite());
        assert!(correlation_spectrum(&sys, 0.0, 0.0).is_err());
        assert!(shot_normalized_spectrum(&sys, 0.0, 0.0).is_err());
    }

    #[test]
    fn pole_matches_dense_grid_minimum() {
        let sys = presets::reference_operating_point().unwrap();
        let res = effective_resonance(&sys).unwrap();
        // brute force: dense scan of |χ_eff⁻¹| around Ω_m
        let wm = sys.oscillator.frequency();
        let span = 2.0 * PI * 20e3;
        let n = 400_001;
        let mut best = (0.0, f64::INFINITY);
        for i in 0..n {
            let w = wm - span + 2.0 * span * i as f64 / (n - 1) as f64;
            let v = inverse_effective_susceptibility(&sys, w).norm();
            if v < best.1 {
                best = (w, v);
            }
        }
        let step = 2.0 * span / (n - 1) as f64;
        assert!((res.frequency - best.0).abs() <= step, "{} vs {}", res.frequency, best.0);
        assert!(res.damping > 0.0);
        // red detuning softens the spring and adds damping
        assert!(res.frequency < wm);
        assert!(res.damping > sys.oscillator.damping());
    }

    #[test]
    fn newton_pole_agrees_with_eigenvalue_at_desk_scale() {
        let sys = presets::desk_scale(17.3, 1e4).unwrap();
        let wm = sys.oscillator.frequency();
        let pole = mechanical_pole(&sys).unwrap();
        let eig = dynamics_matrix(&sys).complex_eigenvalues();
        let lambda = eig
            .iter()
            .min_by(|a, b| (*a + I).norm().total_cmp(&(*b + I).norm()))
            .unwrap();
        let from_eig = I * lambda * wm;
        assert!((from_eig - pole.pole).norm() < 1e-9 * wm);
    }

    #[test]
    fn blue_detuning_strong_drive_is_rejected() {
        let sys = presets::reference_operating_point().unwrap();
        let blue = sys
            .with_probe_detuning(sys.oscillator.frequency())
            .unwrap();
        let err = check_stability(&blue).unwrap_err();
        assert_eq!(err.kind(), crate::ErrorKind::Physics);
    }
}
