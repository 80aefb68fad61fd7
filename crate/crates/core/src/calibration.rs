//! Absolute displacement calibration referenced to quantum backaction.
//!
//! A phase-modulation tone of known depth near the mechanical frequency
//! fixes the volts-per-radian gain of each spectrum. In a reference
//! measurement where the mechanics sits at the backaction-limited occupancy
//! of an auxiliary cooling beam, the mechanical voltage variance then yields
//! the vacuum coupling g₀, and any later spectrum can be converted into
//! displacement units by comparing its tone height to the reference one.

use crate::constants::HBAR;
use crate::error::{Error, Result};
use crate::langevin::PsdEstimate;
use crate::params::MechanicalOscillator;

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be finite and > 0, got {v}")))
    }
}

/// Phase-modulation calibration tone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationTone {
    /// Ω_cal, rad/s
    pub frequency: f64,
    /// Modulation depth φ, rad
    pub depth: f64,
}

impl CalibrationTone {
    pub fn new(frequency: f64, depth: f64) -> Result<Self> {
        positive("tone frequency", frequency)?;
        positive("modulation depth", depth)?;
        Ok(Self { frequency, depth })
    }

    /// Equivalent phase variance φ²/2.
    pub fn phase_variance(&self) -> f64 {
        0.5 * self.depth * self.depth
    }
}

/// Auxiliary sideband-cooling beam.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuxiliaryCooling {
    /// κ_aux, rad/s
    pub linewidth: f64,
    /// Δ_aux, rad/s (negative = red)
    pub detuning: f64,
}

impl AuxiliaryCooling {
    pub fn new(linewidth: f64, detuning: f64) -> Result<Self> {
        positive("auxiliary linewidth", linewidth)?;
        if !(detuning < 0.0 && detuning.is_finite()) {
            return Err(Error::invalid(
                "auxiliary detuning",
                format!("cooling needs a red-detuned beam, got {detuning}"),
            ));
        }
        Ok(Self { linewidth, detuning })
    }

    /// Backaction-limited occupancy of sideband cooling,
    /// n_min = A⁺/(A⁻ − A⁺), with the anti-Stokes rate
    /// A⁻ ∝ [(κ/2)² + (Δ + Ω_m)²]⁻¹ and the Stokes rate
    /// A⁺ ∝ [(κ/2)² + (Δ − Ω_m)²]⁻¹.
    pub fn minimum_occupancy(&self, mech_frequency: f64) -> Result<f64> {
        minimum_occupancy(self.linewidth, self.detuning, mech_frequency)
    }
}

/// See [`AuxiliaryCooling::minimum_occupancy`]; accepts any detuning and
/// fails for heating configurations.
pub fn minimum_occupancy(linewidth: f64, detuning: f64, mech_frequency: f64) -> Result<f64> {
    let hk2 = 0.25 * linewidth * linewidth;
    let anti_stokes = 1.0 / (hk2 + (detuning + mech_frequency).powi(2));
    let stokes = 1.0 / (hk2 + (detuning - mech_frequency).powi(2));
    if anti_stokes <= stokes {
        return Err(Error::Heating {
            anti_stokes,
            stokes,
        });
    }
    Ok(stokes / (anti_stokes - stokes))
}

/// Voltage variances read off the reference (backaction-limited) and the
/// target spectra.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationRecord {
    pub tone: CalibrationTone,
    pub cooling: AuxiliaryCooling,
    /// Mechanical variance in the reference spectrum, V².
    pub mech_variance_ref: f64,
    /// Tone variance in the reference spectrum, V².
    pub cal_variance_ref: f64,
    /// Tone variance in the spectrum being converted, V².
    pub cal_variance_meas: f64,
}

impl CalibrationRecord {
    pub fn validate(&self) -> Result<()> {
        positive("reference mechanical variance", self.mech_variance_ref)?;
        positive("reference tone variance", self.cal_variance_ref)?;
        positive("measurement tone variance", self.cal_variance_meas)
    }

    /// Volts² per rad² in the reference measurement.
    pub fn transduction_factor(&self) -> Result<f64> {
        positive("reference tone variance", self.cal_variance_ref)?;
        positive("modulation depth", self.tone.depth)?;
        Ok(self.cal_variance_ref / self.tone.phase_variance())
    }

    /// Vacuum coupling g₀ (rad/s) from the reference measurement.
    pub fn extract_g0(&self, mech_frequency: f64) -> Result<f64> {
        self.validate()?;
        let n_min = self.cooling.minimum_occupancy(mech_frequency)?;
        g0_from_variances(
            self.mech_variance_ref,
            self.cal_variance_ref,
            &self.tone,
            mech_frequency,
            n_min,
        )
    }

    /// Displacement spectrum (m²·s) from a voltage spectrum (V²·s) through
    /// the extracted g₀.
    pub fn to_displacement_via_g0(
        &self,
        osc: &MechanicalOscillator,
        g0: f64,
        s_vv: &[f64],
    ) -> Result<Vec<f64>> {
        self.validate()?;
        positive("g0", g0)?;
        let wm = osc.frequency();
        let scale = osc.zpf().powi(2) * wm * wm * self.tone.phase_variance()
            / (g0 * g0 * self.cal_variance_meas);
        Ok(s_vv.iter().map(|s| scale * s).collect())
    }

    /// Same conversion with g₀ eliminated: only n_min and voltage ratios enter.
    pub fn to_displacement(&self, osc: &MechanicalOscillator, s_vv: &[f64]) -> Result<Vec<f64>> {
        self.validate()?;
        let n_min = self.cooling.minimum_occupancy(osc.frequency())?;
        let scale = osc.zpf().powi(2) * (2.0 * n_min + 1.0) / self.mech_variance_ref
            * (self.cal_variance_ref / self.cal_variance_meas);
        Ok(s_vv.iter().map(|s| scale * s).collect())
    }

    /// Ratio of the measured spectrum to the bare-oscillator SQL ħ|χ_m(Ω)|,
    /// independent of the mass.
    pub fn sql_ratio(&self, osc: &MechanicalOscillator, omega: &[f64], s_vv: &[f64]) -> Result<Vec<f64>> {
        self.validate()?;
        if omega.len() != s_vv.len() {
            return Err(Error::invalid("spectrum", "grid and values differ in length"));
        }
        let wm = osc.frequency();
        let gm = osc.damping();
        let n_min = self.cooling.minimum_occupancy(wm)?;
        let wc = self.tone.frequency;
        let prefactor = wm * (n_min + 0.5) / (self.mech_variance_ref * wc * wc)
            * (self.cal_variance_ref / self.cal_variance_meas);
        Ok(omega
            .iter()
            .zip(s_vv)
            .map(|(&w, &s)| {
                let detune = (wm - w) * (wm + w);
                prefactor * (detune * detune + gm * gm * w * w).sqrt() * s
            })
            .collect())
    }
}

/// g₀ = sqrt[(⟨δV²⟩_mech/⟨δV²⟩_cal)·(Ω_m²φ²/2)/(2(n + 1/2))].
pub fn g0_from_variances(
    mech_variance: f64,
    cal_variance: f64,
    tone: &CalibrationTone,
    mech_frequency: f64,
    occupancy: f64,
) -> Result<f64> {
    positive("mechanical variance", mech_variance)?;
    positive("tone variance", cal_variance)?;
    if !(occupancy >= 0.0) {
        return Err(Error::invalid("occupancy", format!("must be >= 0, got {occupancy}")));
    }
    let radicand = (mech_variance / cal_variance) * mech_frequency * mech_frequency
        * tone.phase_variance()
        / (2.0 * (occupancy + 0.5));
    debug_assert!(radicand > 0.0);
    Ok(radicand.sqrt())
}

/// One reference measurement of a sideband-cooling power series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoolingPoint {
    pub mech_variance: f64,
    pub cal_variance: f64,
    /// Occupancy at this power; the backaction limit n_min when `None`.
    pub occupancy: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct G0Estimate {
    pub g0: f64,
    /// Standard error of g₀ from the scatter of the individual points.
    pub sigma: f64,
    pub points: usize,
}

/// Combines a cooling-power series into one g₀ by least squares on ln g₀²,
/// which treats multiplicative variance noise evenly across powers.
pub fn fit_g0(
    points: &[CoolingPoint],
    tone: &CalibrationTone,
    cooling: &AuxiliaryCooling,
    mech_frequency: f64,
) -> Result<G0Estimate> {
    if points.is_empty() {
        return Err(Error::MissingInput("no cooling points".into()));
    }
    let n_min = cooling.minimum_occupancy(mech_frequency)?;
    let logs = points
        .iter()
        .map(|p| {
            let n = p.occupancy.unwrap_or(n_min);
            g0_from_variances(p.mech_variance, p.cal_variance, tone, mech_frequency, n)
                .map(|g| 2.0 * g.ln())
        })
        .collect::<Result<Vec<_>>>()?;
    let k = logs.len() as f64;
    let mean = logs.iter().sum::<f64>() / k;
    let g0 = (0.5 * mean).exp();
    let sigma = if logs.len() > 1 {
        let var = logs.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / (k - 1.0);
        // σ(ln g₀) = σ(ln g₀²)/2
        0.5 * (var / k).sqrt() * g0
    } else {
        f64::NAN
    };
    Ok(G0Estimate {
        g0,
        sigma,
        points: points.len(),
    })
}

/// Tone variance from a PSD: power in `Ω_cal ± half_width` minus the
/// local background, estimated as the median of the PSD in the flanking
/// regions of the same width on either side.
pub fn tone_variance_from_psd(psd: &PsdEstimate, tone_frequency: f64, half_width: f64) -> Result<f64> {
    positive("bin half-width", half_width)?;
    let (lo, hi) = (tone_frequency - half_width, tone_frequency + half_width);
    let nyquist = *psd.omega.last().unwrap_or(&0.0);
    if lo < 0.0 || hi > nyquist {
        return Err(Error::invalid("tone frequency", "tone band lies outside the PSD grid"));
    }
    let in_band: Vec<usize> = (0..psd.omega.len())
        .filter(|&k| psd.omega[k] >= lo && psd.omega[k] <= hi)
        .collect();
    let mut flank: Vec<f64> = psd
        .omega
        .iter()
        .zip(&psd.psd)
        .filter(|(w, _)| {
            let d = (**w - tone_frequency).abs();
            d > half_width && d <= 3.0 * half_width
        })
        .map(|(_, s)| *s)
        .collect();
    if in_band.is_empty() || flank.len() < 4 {
        return Err(Error::invalid("bin half-width", "too few PSD bins around the tone"));
    }
    flank.sort_by(f64::total_cmp);
    let background = flank[flank.len() / 2];
    let total = psd.band_power(lo, hi);
    let floor = background * 2.0 * in_band.len() as f64 * psd.bin_width() / crate::constants::TWO_PI;
    let excess = total - floor;
    // the band power of pure background fluctuates by ~floor/sqrt(bins·segments)
    let noise = floor / ((in_band.len() * psd.segments.max(1)) as f64).sqrt();
    if !(excess > 5.0 * noise) {
        return Err(Error::ToneNotFound {
            omega: tone_frequency,
        });
    }
    Ok(excess)
}

/// Noiseless forward model of the reference measurement, used to generate
/// synthetic records.
#[derive(Debug, Clone, Copy)]
pub struct ForwardModel {
    pub tone: CalibrationTone,
    pub cooling: AuxiliaryCooling,
    /// Volts² per rad² of phase in the reference measurement.
    pub gain_ref: f64,
    /// Volts² per rad² of phase in the target measurement.
    pub gain_meas: f64,
}

impl ForwardModel {
    /// Reference mechanical variance: the phase fluctuation imprinted by a
    /// frequency variance 2g₀²(n + 1/2), converted to volts.
    pub fn mech_variance(&self, g0: f64, mech_frequency: f64, occupancy: f64) -> f64 {
        self.gain_ref * 2.0 * g0 * g0 * (occupancy + 0.5) / (mech_frequency * mech_frequency)
    }

    pub fn record(&self, g0: f64, mech_frequency: f64) -> Result<CalibrationRecord> {
        let n_min = self.cooling.minimum_occupancy(mech_frequency)?;
        Ok(CalibrationRecord {
            tone: self.tone,
            cooling: self.cooling,
            mech_variance_ref: self.mech_variance(g0, mech_frequency, n_min),
            cal_variance_ref: self.gain_ref * self.tone.phase_variance(),
            cal_variance_meas: self.gain_meas * self.tone.phase_variance(),
        })
    }

    /// Voltage spectrum of the target measurement for a displacement
    /// spectrum `s_xx` (m²·s).
    pub fn voltage_spectrum(&self, osc: &MechanicalOscillator, g0: f64, s_xx: &[f64]) -> Vec<f64> {
        let wm = osc.frequency();
        let scale = self.gain_meas * g0 * g0 / (osc.zpf().powi(2) * wm * wm);
        s_xx.iter().map(|s| scale * s).collect()
    }
}

/// Bare SQL ħ|χ_m(Ω)| used as the reference of [`CalibrationRecord::sql_ratio`].
pub fn bare_sql(osc: &MechanicalOscillator, omega: f64) -> f64 {
    HBAR * crate::model::mech_susceptibility(osc, omega).norm()
}
