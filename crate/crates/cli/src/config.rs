//! Run configuration. All frequencies in the file are in Hz (not rad/s);
//! conversion to angular units happens here and nowhere else.

use crate::error::CliError;
use serde::Deserialize;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use subsql::constants::TWO_PI;
use subsql::limits::{self, coupling_for_cooperativity};
use subsql::{model, Detection, DriveTone, MechanicalOscillator, OpticalCavity, SystemParams, ThermalBath, ToneRole};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub schema_version: u32,
    pub oscillator: OscillatorSection,
    pub cavity: CavitySection,
    pub probe: ToneSection,
    pub auxiliary: Option<ToneSection>,
    pub bath: BathSection,
    pub detection: DetectionSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub heatmap: HeatmapSection,
    #[serde(default)]
    pub simulate: SimulateSection,
    pub calibrate: Option<CalibrateSection>,
    pub fit: Option<FitSection>,
    #[serde(default)]
    pub snr: SnrSection,
    /// Directory of the config file; relative paths resolve against it.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscillatorSection {
    pub mass_kg: f64,
    pub frequency_hz: f64,
    pub quality: Option<f64>,
    /// Energy damping rate Γ_m/2π.
    pub damping_hz: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavitySection {
    pub linewidth_hz: f64,
    /// κ₂/κ of the detected port.
    pub overcoupling: f64,
    pub detuning_hz: f64,
}

/// A drive tone. The coupling is given by exactly one of `photons`,
/// `coupling_hz` or `quantum_cooperativity`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToneSection {
    pub vacuum_coupling_hz: f64,
    pub photons: Option<f64>,
    pub coupling_hz: Option<f64>,
    pub quantum_cooperativity: Option<f64>,
    /// Only for the auxiliary tone; the probe follows the cavity detuning.
    pub detuning_hz: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathSection {
    pub temperature_k: Option<f64>,
    pub occupancy: Option<f64>,
    #[serde(default)]
    pub aux_occupancy: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionSection {
    pub theta_rad: f64,
    pub efficiency: f64,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    /// Logarithmic in the distance from the center on both sides.
    Log,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    /// Defaults to the effective mechanical resonance.
    pub center_hz: Option<f64>,
    /// Full width of the grid.
    pub span_hz: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            center_hz: None,
            span_hz: 40e3,
            points: 2001,
            spacing: Spacing::Linear,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HeatmapSection {
    pub theta_min_rad: f64,
    pub theta_max_rad: f64,
    pub theta_points: usize,
}

impl Default for HeatmapSection {
    fn default() -> Self {
        Self {
            theta_min_rad: 0.1 * PI,
            theta_max_rad: 0.9 * PI,
            theta_points: 81,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateSection {
    /// Sample period; one inverse mechanical angular frequency if absent.
    pub dt_s: Option<f64>,
    pub segment_length: usize,
    pub overlap: f64,
    pub segments: usize,
    /// Quadratures to synthesize; the detection angle if absent.
    pub thetas_rad: Option<Vec<f64>>,
    pub seed: u64,
    /// Optional time-series dump of the first quadrature.
    pub trace_path: Option<PathBuf>,
    pub trace_samples: usize,
}

impl Default for SimulateSection {
    fn default() -> Self {
        Self {
            dt_s: None,
            segment_length: 1 << 16,
            overlap: 0.5,
            segments: 100,
            thetas_rad: None,
            seed: 0,
            trace_path: None,
            trace_samples: 10_000,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrateSection {
    pub record: PathBuf,
    /// Voltage spectrum to convert (CSV with an `f_Hz` column).
    pub spectrum: Option<PathBuf>,
    #[serde(default = "default_voltage_column")]
    pub spectrum_column: String,
}

fn default_voltage_column() -> String {
    "S_VV".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSection {
    /// Displacement spectrum to fit (CSV with an `f_Hz` column).
    pub data: Option<PathBuf>,
    #[serde(default = "default_fit_column")]
    pub column: String,
    /// Keep only rows with this `theta_rad` value (long-format inputs).
    pub select_theta_rad: Option<f64>,
    pub f_min_hz: Option<f64>,
    pub f_max_hz: Option<f64>,
    /// Input values are single-sided and are halved before fitting.
    #[serde(default)]
    pub single_sided_input: bool,
    #[serde(default = "default_free")]
    pub free: Vec<String>,
    #[serde(default)]
    pub initial: InitialGuess,
    pub max_iterations: Option<usize>,
    pub efficiency: Option<EfficiencyFitSection>,
}

fn default_fit_column() -> String {
    "Sxx_total".into()
}

fn default_free() -> Vec<String> {
    vec!["g".into(), "theta".into(), "detuning".into()]
}

/// Starting values; the configured system supplies any that are missing.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialGuess {
    pub coupling_hz: Option<f64>,
    pub theta_rad: Option<f64>,
    pub detuning_hz: Option<f64>,
    pub efficiency: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EfficiencyFitSection {
    /// CSV with columns `theta_rad` and `S_imp`.
    pub data: PathBuf,
    pub analysis_frequency_hz: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SnrSection {
    /// Applied force PSD F₀² in N²/Hz.
    pub force_psd_n2_per_hz: f64,
    pub thetas_rad: Vec<f64>,
}

impl Default for SnrSection {
    fn default() -> Self {
        Self {
            force_psd_n2_per_hz: 1e-34,
            thetas_rad: vec![0.5 * PI, 0.8 * PI],
        }
    }
}

fn finite(name: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Config(format!("{name} must be finite, got {v}")))
    }
}

fn one_of(section: &str, fields: &[(&str, Option<f64>)]) -> Result<(usize, f64), CliError> {
    let given: Vec<(usize, f64)> = fields
        .iter()
        .enumerate()
        .filter_map(|(i, (_, v))| v.map(|v| (i, v)))
        .collect();
    match given.as_slice() {
        [one] => Ok(*one),
        _ => {
            let names: Vec<&str> = fields.iter().map(|(n, _)| *n).collect();
            Err(CliError::Config(format!(
                "[{section}] needs exactly one of {}",
                names.join(", ")
            )))
        }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg: Config = toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        // physical invariants are checked on load, not on first use
        cfg.system()?;
        Ok(cfg)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn system(&self) -> Result<SystemParams, CliError> {
        let o = &self.oscillator;
        let wm = TWO_PI * finite("oscillator.frequency_hz", o.frequency_hz)?;
        let (which, v) = one_of("oscillator", &[("quality", o.quality), ("damping_hz", o.damping_hz)])?;
        let oscillator = match which {
            0 => MechanicalOscillator::from_quality(o.mass_kg, wm, v)?,
            _ => MechanicalOscillator::new(o.mass_kg, wm, TWO_PI * v)?,
        };

        let c = &self.cavity;
        let detuning = TWO_PI * finite("cavity.detuning_hz", c.detuning_hz)?;
        let cavity = OpticalCavity::from_linewidth(TWO_PI * c.linewidth_hz, c.overcoupling, detuning)?;

        let b = &self.bath;
        let (which, v) = one_of("bath", &[("temperature_k", b.temperature_k), ("occupancy", b.occupancy)])?;
        let bath = match which {
            0 => ThermalBath::from_temperature(v, wm, b.aux_occupancy)?,
            _ => ThermalBath::from_occupancy(v, b.aux_occupancy)?,
        };

        if self.probe.detuning_hz.is_some() {
            return Err(CliError::Config(
                "[probe] takes its detuning from [cavity]; remove probe.detuning_hz".into(),
            ));
        }
        let probe = self.tone(&self.probe, detuning, ToneRole::Probe, &cavity, &bath, &oscillator)?;
        let auxiliary = match &self.auxiliary {
            Some(t) => {
                let d = t
                    .detuning_hz
                    .ok_or_else(|| CliError::Config("[auxiliary] needs detuning_hz".into()))?;
                Some(self.tone(t, TWO_PI * d, ToneRole::Auxiliary, &cavity, &bath, &oscillator)?)
            }
            None => None,
        };
        let detection = Detection::new(self.detection.theta_rad, self.detection.efficiency)?;
        Ok(SystemParams::new(oscillator, cavity, probe, auxiliary, bath, detection)?)
    }

    fn tone(
        &self,
        t: &ToneSection,
        detuning: f64,
        role: ToneRole,
        cavity: &OpticalCavity,
        bath: &ThermalBath,
        osc: &MechanicalOscillator,
    ) -> Result<DriveTone, CliError> {
        let section = match role {
            ToneRole::Probe => "probe",
            ToneRole::Auxiliary => "auxiliary",
        };
        let g0 = TWO_PI * t.vacuum_coupling_hz;
        let (which, v) = one_of(
            section,
            &[
                ("photons", t.photons),
                ("coupling_hz", t.coupling_hz),
                ("quantum_cooperativity", t.quantum_cooperativity),
            ],
        )?;
        Ok(match which {
            0 => DriveTone::new(g0, v, detuning, role)?,
            1 => DriveTone::from_coupling(g0, TWO_PI * v, detuning, role)?,
            _ => {
                let g = coupling_for_cooperativity(v, cavity.kappa(), bath.occupancy(), osc.damping())?;
                DriveTone::from_coupling(g0, g, detuning, role)?
            }
        })
    }

    /// Analysis grid in rad/s.
    pub fn grid(&self, sys: &SystemParams) -> Result<Vec<f64>, CliError> {
        let g = &self.grid;
        if g.points < 2 {
            return Err(CliError::Config("grid.points must be at least 2".into()));
        }
        if !(g.span_hz > 0.0 && g.span_hz.is_finite()) {
            return Err(CliError::Config("grid.span_hz must be finite and > 0".into()));
        }
        let center = self.grid_center(sys)?;
        let half = 0.5 * TWO_PI * g.span_hz;
        let grid: Vec<f64> = match g.spacing {
            Spacing::Linear => (0..g.points)
                .map(|k| center - half + 2.0 * half * k as f64 / (g.points - 1) as f64)
                .collect(),
            Spacing::Log => limits::log_symmetric_grid(center, half, g.points),
        };
        if grid[0] < 0.0 {
            return Err(CliError::Config("grid extends below zero frequency".into()));
        }
        Ok(grid)
    }

    pub fn grid_center(&self, sys: &SystemParams) -> Result<f64, CliError> {
        match self.grid.center_hz {
            Some(c) => Ok(TWO_PI * finite("grid.center_hz", c)?),
            None => Ok(model::effective_resonance(sys)?.frequency),
        }
    }
}
