//! Standard quantum limit, variational readout and force-sensing figures of merit.

use crate::constants::HBAR;
use crate::error::{Error, Result};
use crate::model::{
    self, effective_resonance, mech_susceptibility, validate_grid, SpectralPoint,
};
use crate::optim;
use crate::params::{normalize_theta, MechanicalOscillator, SystemParams};
use std::f64::consts::{FRAC_PI_2, PI};

/// Number of coarse θ samples before golden-section refinement.
const THETA_GRID: usize = 256;
const THETA_TOL: f64 = 1e-6;

pub fn to_db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

pub fn from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Added displacement noise of an uncorrelated measurement with rate
/// `rate` (rad/s): imprecision x_zpf²/(4Γ) plus backaction |χ_m|²ħ²Γ/x_zpf².
pub fn added_noise_uncorrelated(osc: &MechanicalOscillator, rate: f64, omega: f64) -> f64 {
    let (imp, ba) = added_noise_parts(osc, rate, omega);
    imp + ba
}

/// `(imprecision, backaction)` parts of [`added_noise_uncorrelated`].
pub fn added_noise_parts(osc: &MechanicalOscillator, rate: f64, omega: f64) -> (f64, f64) {
    let zpf2 = osc.zpf() * osc.zpf();
    let chi2 = mech_susceptibility(osc, omega).norm_sqr();
    (zpf2 / (4.0 * rate), chi2 * HBAR * HBAR * rate / zpf2)
}

/// Measurement rate at which imprecision and backaction are equal,
/// x_zpf²/(2ħ|χ_m(Ω)|).
pub fn optimal_measurement_rate(osc: &MechanicalOscillator, omega: f64) -> f64 {
    osc.zpf() * osc.zpf() / (2.0 * HBAR * mech_susceptibility(osc, omega).norm())
}

/// Which susceptibility the SQL is referenced to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SusceptibilitySource {
    /// Bare mechanical χ_m.
    Bare,
    /// Dynamical-backaction modified χ_eff.
    Effective,
}

impl SusceptibilitySource {
    pub fn label(self) -> &'static str {
        match self {
            SusceptibilitySource::Bare => "bare",
            SusceptibilitySource::Effective => "effective",
        }
    }
}

/// ħ|χ(Ω)| at a single frequency.
pub fn sql_at(sys: &SystemParams, omega: f64, source: SusceptibilitySource) -> Result<f64> {
    let chi = match source {
        SusceptibilitySource::Bare => mech_susceptibility(&sys.oscillator, omega),
        SusceptibilitySource::Effective => model::effective_susceptibility(sys, omega)?,
    };
    Ok(HBAR * chi.norm())
}

#[derive(Debug, Clone)]
pub struct SqlCurve {
    pub omega: Vec<f64>,
    pub values: Vec<f64>,
    pub source: SusceptibilitySource,
}

pub fn sql_spectrum(
    sys: &SystemParams,
    grid: &[f64],
    source: SusceptibilitySource,
) -> Result<SqlCurve> {
    validate_grid(grid)?;
    if source == SusceptibilitySource::Effective {
        model::check_stability(sys)?;
    }
    let values = grid
        .iter()
        .map(|&w| sql_at(sys, w, source))
        .collect::<Result<Vec<_>>>()?;
    Ok(SqlCurve {
        omega: grid.to_vec(),
        values,
        source,
    })
}

fn minimize_over_theta(point: &SpectralPoint) -> (f64, f64) {
    // sample [0, π) and refine between the neighbours of the best sample,
    // letting the bracket wrap through 0 ≡ π
    let h = PI / THETA_GRID as f64;
    let mut best = (0.0, f64::INFINITY);
    for i in 0..THETA_GRID {
        let t = h * i as f64;
        let v = point.total(t);
        if v < best.1 {
            best = (t, v);
        }
    }
    let (t, v) = optim::golden_section(|t| point.total(t), best.0 - h, best.0 + h, THETA_TOL * 1e-3);
    if v <= best.1 {
        (normalize_theta(t), v)
    } else {
        best
    }
}

/// Quadrature minimizing the measured displacement noise at `omega`.
/// Returns `(θ_opt, S_min)`.
pub fn optimal_quadrature(sys: &SystemParams, omega: f64) -> Result<(f64, f64)> {
    let point = SpectralPoint::new(sys, omega)?;
    Ok(minimize_over_theta(&point))
}

/// Frequency-dependent optimal readout tabulated on a grid.
#[derive(Debug, Clone)]
pub struct VariationalPlan {
    pub omega: Vec<f64>,
    pub theta_opt: Vec<f64>,
    pub envelope: Vec<f64>,
    /// ħ|χ_eff| on the same grid
    pub sql: Vec<f64>,
}

impl VariationalPlan {
    pub fn ratio(&self) -> Vec<f64> {
        self.envelope.iter().zip(&self.sql).map(|(e, s)| e / s).collect()
    }

    pub fn ratio_db(&self) -> Vec<f64> {
        self.ratio().into_iter().map(to_db).collect()
    }
}

pub fn variational_envelope(sys: &SystemParams, grid: &[f64]) -> Result<VariationalPlan> {
    validate_grid(grid)?;
    model::check_stability(sys)?;
    let mut plan = VariationalPlan {
        omega: grid.to_vec(),
        theta_opt: Vec::with_capacity(grid.len()),
        envelope: Vec::with_capacity(grid.len()),
        sql: Vec::with_capacity(grid.len()),
    };
    for &w in grid {
        let point = SpectralPoint::new(sys, w)?;
        let (t, s) = minimize_over_theta(&point);
        plan.theta_opt.push(t);
        plan.envelope.push(s);
        plan.sql.push(HBAR * point.chi_eff.norm());
    }
    Ok(plan)
}

/// Readout strategy for sub-SQL searches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Readout {
    Fixed(f64),
    Variational,
}

/// S_xx^meas / (ħ|χ_eff|) at one frequency for the given readout.
pub fn sql_ratio_at(sys: &SystemParams, readout: Readout, omega: f64) -> Result<f64> {
    let point = SpectralPoint::new(sys, omega)?;
    let s = match readout {
        Readout::Fixed(theta) => point.total(theta),
        Readout::Variational => minimize_over_theta(&point).1,
    };
    Ok(s / (HBAR * point.chi_eff.norm()))
}

/// Linewidth scale of the backaction-broadened resonance:
/// Γ_eff + Γ_qba + γ.
pub fn broadened_linewidth(sys: &SystemParams) -> Result<f64> {
    let res = effective_resonance(sys)?;
    Ok(res.damping
        + backaction_rate(sys)
        + sys.bath.decoherence_rate(sys.oscillator.damping()))
}

/// Log-symmetric grid of `n` points around `center`, reaching `half_span`
/// on both sides, densest near the center.
pub fn log_symmetric_grid(center: f64, half_span: f64, n: usize) -> Vec<f64> {
    let side = (n / 2).max(2);
    let inner = half_span * 1e-4;
    let ratio = (half_span / inner).ln() / (side - 1) as f64;
    let offsets: Vec<f64> = (0..side).map(|k| inner * (ratio * k as f64).exp()).collect();
    let mut grid: Vec<f64> = offsets.iter().rev().map(|d| center - d).collect();
    grid.extend(offsets.iter().map(|d| center + d));
    grid
}

/// Frequency intervals `(Ω_lo, Ω_hi)` in which the measured noise lies
/// below the SQL referenced to χ_eff.
pub fn sub_sql_band(sys: &SystemParams, readout: Readout) -> Result<Vec<(f64, f64)>> {
    let res = effective_resonance(sys)?;
    let width = broadened_linewidth(sys)?;
    let grid = log_symmetric_grid(res.frequency, 5.0 * width, 2048);
    let log_ratio = |w: f64| -> f64 {
        sql_ratio_at(sys, readout, w).map(f64::ln).unwrap_or(f64::INFINITY)
    };
    let values: Vec<f64> = grid.iter().map(|&w| log_ratio(w)).collect();
    let tol = 1e-12 * res.frequency;
    let mut bands = Vec::new();
    let mut start: Option<f64> = if values[0] < 0.0 { Some(grid[0]) } else { None };
    for i in 1..grid.len() {
        let (below_prev, below) = (values[i - 1] < 0.0, values[i] < 0.0);
        if below_prev == below {
            continue;
        }
        let edge = optim::bisect(log_ratio, grid[i - 1], grid[i], values[i - 1], tol);
        if below {
            start = Some(edge);
        } else if let Some(lo) = start.take() {
            bands.push((lo, edge));
        }
    }
    if let Some(lo) = start {
        bands.push((lo, *grid.last().unwrap()));
    }
    Ok(bands)
}

/// Quantum backaction decoherence rate Γ_qba = 4g²/κ of the probe.
pub fn backaction_rate(sys: &SystemParams) -> f64 {
    let g = sys.coupling();
    4.0 * g * g / sys.cavity.kappa()
}

/// C_q = Γ_qba/γ with γ = n_eff·Γ_m.
pub fn quantum_cooperativity(sys: &SystemParams) -> Result<f64> {
    let gamma = sys.bath.decoherence_rate(sys.oscillator.damping());
    if gamma <= 0.0 {
        return Err(Error::UndefinedCooperativity);
    }
    Ok(backaction_rate(sys) / gamma)
}

/// Probe coupling g that yields quantum cooperativity `cq`.
pub fn coupling_for_cooperativity(cq: f64, kappa: f64, occupancy: f64, damping: f64) -> Result<f64> {
    if !(cq >= 0.0 && cq.is_finite()) {
        return Err(Error::invalid("cooperativity", format!("must be >= 0, got {cq}")));
    }
    if occupancy <= 0.0 || damping <= 0.0 {
        return Err(Error::UndefinedCooperativity);
    }
    Ok((cq * occupancy * damping * kappa / 4.0).sqrt())
}

/// Measured noise expressed as an equivalent force, S_xx^meas/|χ_eff|² (N²·s).
pub fn force_noise_spectrum(sys: &SystemParams, theta: f64, omega: f64) -> Result<f64> {
    let point = SpectralPoint::new(sys, omega)?;
    Ok(point.total(theta) / point.chi_eff.norm_sqr())
}

/// Force-sensing figures at one drive frequency and quadrature.
#[derive(Debug, Clone, Copy)]
pub struct SnrReport {
    pub theta: f64,
    pub omega: f64,
    /// Applied force spectral density F₀² (N²·s).
    pub force_psd: f64,
    /// |χ_eff|²F₀²: the signal in displacement units.
    pub signal: f64,
    /// η|f^θ|²·|χ_eff|²F₀²: the signal as it appears in the photocurrent
    /// (shot noise = 1/2).
    pub signal_raw: f64,
    /// S_xx^meas
    pub noise: f64,
    /// η|f^θ|²·S_xx^meas
    pub noise_raw: f64,
    /// Measured noise without the thermal force, S_xx^meas − |χ_eff|²S_FF^th.
    pub added: f64,
    /// Zero-point floor |χ_eff|²·mΓ_mħΩ_m.
    pub zero_point: f64,
    /// ħ|χ_eff|
    pub sql: f64,
    /// |χ_eff|²S_FF^th
    pub thermal: f64,
}

impl SnrReport {
    /// Signal-to-noise of this readout over that of a readout adding exactly
    /// the SQL, both with the zero-point floor included.
    pub fn relative_snr(&self) -> f64 {
        (self.sql + self.zero_point) / (self.added + self.zero_point)
    }

    /// Alternative normalization that keeps the full thermal noise in both
    /// floors.
    pub fn relative_snr_with_thermal(&self) -> f64 {
        (self.sql + self.thermal) / self.noise
    }

    /// Force signal recovered from the calibrated displacement signal.
    pub fn calibrated_force(&self, sys: &SystemParams) -> Result<f64> {
        let chi = model::effective_susceptibility(sys, self.omega)?;
        Ok(self.signal / chi.norm_sqr())
    }
}

pub fn snr_relative_to_sql(
    sys: &SystemParams,
    theta: f64,
    omega: f64,
    force_psd: f64,
) -> Result<SnrReport> {
    if !(force_psd > 0.0 && force_psd.is_finite()) {
        return Err(Error::invalid("force", format!("force PSD must be > 0, got {force_psd}")));
    }
    let point = SpectralPoint::new(sys, omega)?;
    let c = point.components(theta);
    let chi2 = c.chi_eff.norm_sqr();
    let osc = &sys.oscillator;
    let gain = sys.port_efficiency() * point.transduction(theta).norm_sqr();
    let signal = chi2 * force_psd;
    let noise = c.total();
    Ok(SnrReport {
        theta: normalize_theta(theta),
        omega,
        force_psd,
        signal,
        signal_raw: gain * signal,
        noise,
        noise_raw: gain * noise,
        added: noise - c.thermal(),
        zero_point: chi2 * osc.mass() * osc.damping() * HBAR * osc.frequency(),
        sql: HBAR * c.chi_eff.norm(),
        thermal: c.thermal(),
    })
}

/// Ratio S_xx^meas/S_SQL on a (θ, Ω) grid, row-major in θ.
#[derive(Debug, Clone)]
pub struct SqlRatioMap {
    pub theta: Vec<f64>,
    pub omega: Vec<f64>,
    pub ratio: Vec<f64>,
}

impl SqlRatioMap {
    pub fn get(&self, i_theta: usize, i_omega: usize) -> f64 {
        self.ratio[i_theta * self.omega.len() + i_omega]
    }

    pub fn sub_sql_cells(&self) -> usize {
        self.ratio.iter().filter(|&&r| r < 1.0).count()
    }
}

pub fn sql_ratio_map(sys: &SystemParams, thetas: &[f64], grid: &[f64]) -> Result<SqlRatioMap> {
    validate_grid(grid)?;
    model::check_stability(sys)?;
    let points = grid
        .iter()
        .map(|&w| SpectralPoint::new(sys, w))
        .collect::<Result<Vec<_>>>()?;
    let mut ratio = Vec::with_capacity(thetas.len() * grid.len());
    for &t in thetas {
        for p in &points {
            ratio.push(p.total(t) / (HBAR * p.chi_eff.norm()));
        }
    }
    Ok(SqlRatioMap {
        theta: thetas.to_vec(),
        omega: grid.to_vec(),
        ratio,
    })
}

/// Phase quadrature, the optimal readout absent correlations.
pub const PHASE_QUADRATURE: f64 = FRAC_PI_2;
