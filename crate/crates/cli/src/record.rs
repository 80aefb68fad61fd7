//! Input files other than the run configuration: calibration records and
//! numeric CSV columns.

use crate::error::CliError;
use serde::Deserialize;
use std::path::Path;
use subsql::calibration::{AuxiliaryCooling, CalibrationRecord, CalibrationTone, CoolingPoint};
use subsql::constants::TWO_PI;

/// Calibration record file. Variances in V², frequencies in Hz, depth in rad.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordFile {
    pub schema_version: u32,
    pub tone: ToneEntry,
    pub auxiliary: AuxiliaryEntry,
    pub reference: ReferenceEntry,
    pub measurement: MeasurementEntry,
    #[serde(default)]
    pub cooling_points: Vec<CoolingEntry>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToneEntry {
    pub frequency_hz: f64,
    pub phase_depth_rad: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuxiliaryEntry {
    pub linewidth_hz: f64,
    pub detuning_hz: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceEntry {
    pub mech_variance_v2: f64,
    pub cal_variance_v2: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementEntry {
    pub cal_variance_v2: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoolingEntry {
    pub mech_variance_v2: f64,
    pub cal_variance_v2: f64,
    /// Occupancy at this power; the backaction limit when absent.
    pub occupancy: Option<f64>,
}

pub struct LoadedRecord {
    pub record: CalibrationRecord,
    pub cooling_points: Vec<CoolingPoint>,
}

pub fn load_record(path: &Path) -> Result<LoadedRecord, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let file: RecordFile =
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    if file.schema_version != crate::config::SCHEMA_VERSION {
        return Err(CliError::Config(format!(
            "{}: unsupported schema_version {}",
            path.display(),
            file.schema_version
        )));
    }
    let record = CalibrationRecord {
        tone: CalibrationTone::new(TWO_PI * file.tone.frequency_hz, file.tone.phase_depth_rad)?,
        cooling: AuxiliaryCooling::new(TWO_PI * file.auxiliary.linewidth_hz, TWO_PI * file.auxiliary.detuning_hz)?,
        mech_variance_ref: file.reference.mech_variance_v2,
        cal_variance_ref: file.reference.cal_variance_v2,
        cal_variance_meas: file.measurement.cal_variance_v2,
    };
    record.validate()?;
    let cooling_points = file
        .cooling_points
        .iter()
        .map(|c| CoolingPoint {
            mech_variance: c.mech_variance_v2,
            cal_variance: c.cal_variance_v2,
            occupancy: c.occupancy,
        })
        .collect();
    Ok(LoadedRecord {
        record,
        cooling_points,
    })
}

/// Numeric columns of a CSV file, by header name.
pub struct Columns {
    headers: Vec<String>,
    data: Vec<Vec<f64>>,
    source: String,
}

impl Columns {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let source = path.display().to_string();
        let mut reader = csv::Reader::from_path(path)
            .map_err(|e| CliError::Config(format!("cannot read {source}: {e}")))?;
        let headers: Vec<String> = reader
            .headers()
            .map_err(|e| CliError::Config(format!("{source}: {e}")))?
            .iter()
            .map(|h| h.trim().to_string())
            .collect();
        let mut data = vec![Vec::new(); headers.len()];
        for (line, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| CliError::Config(format!("{source}: {e}")))?;
            for (col, field) in data.iter_mut().zip(rec.iter()) {
                let v: f64 = field.trim().parse().map_err(|_| {
                    CliError::Config(format!("{source}: row {} has non-numeric value {field:?}", line + 2))
                })?;
                col.push(v);
            }
        }
        Ok(Self {
            headers,
            data,
            source,
        })
    }

    pub fn has(&self, name: &str) -> bool {
        self.headers.iter().any(|h| h == name)
    }

    pub fn get(&self, name: &str) -> Result<&[f64], CliError> {
        let i = self
            .headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Config(format!("{}: missing column {name:?}", self.source)))?;
        Ok(&self.data[i])
    }
}
