//! JSON persistence of calibration parameters.

use std::path::Path;

use accelcal::{AngleBounds, AxisAnglesD, CalibrationParamsD, FitReportD, Vec3d};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnglesRad {
    pub phi: f64,
    pub psi: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitMetadata {
    pub residual_rms: f64,
    pub pose_count: usize,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsFile {
    pub schema_version: u32,
    pub s: [f64; 3],
    pub b: [f64; 3],
    pub angles_rad: AnglesRad,
    pub g: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitMetadata>,
}

impl ParamsFile {
    pub fn new(params: &CalibrationParamsD, g: f64) -> Self {
        let [phi, psi, theta] = params.angles.to_array();
        Self {
            schema_version: SCHEMA_VERSION,
            s: params.shift.to_array(),
            b: params.scale.to_array(),
            angles_rad: AnglesRad { phi, psi, theta },
            g,
            fit: None,
        }
    }

    pub fn with_fit(mut self, report: &FitReportD, pose_count: usize) -> Self {
        self.fit = Some(FitMetadata {
            residual_rms: report.residual_rms,
            pose_count,
            iterations: report.iterations,
            converged: report.converged,
        });
        self
    }

    /// Angles are checked against `bounds`, normally the band the fit used.
    pub fn to_params(&self, bounds: &AngleBounds<f64>) -> CliResult<CalibrationParamsD> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Malformed(format!(
                "unsupported params schema version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let a = self.angles_rad;
        let angles =
            AxisAnglesD::within(a.phi, a.psi, a.theta, bounds).map_err(CliError::from_input)?;
        CalibrationParamsD::new(Vec3d::from_array(self.s), Vec3d::from_array(self.b), angles)
            .map_err(CliError::from_input)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("params serialise");
        s.push('\n');
        s
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Malformed(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Malformed(format!("{}: {e}", path.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> CalibrationParamsD {
        CalibrationParamsD::new(
            Vec3d::new(0.1, -0.2, 1.0 / 3.0),
            Vec3d::new(1.01, 0.99, 1.02),
            AxisAnglesD::new(1.53938, 1.60221, std::f64::consts::FRAC_PI_2 + 1e-17).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn json_round_trip_is_lossless() {
        let file = ParamsFile::new(&sample(), 9.80665);
        let back: ParamsFile = serde_json::from_str(&file.to_json()).unwrap();
        assert_eq!(back, file);
        assert_eq!(back.to_params(&AngleBounds::default()).unwrap(), sample());
        assert!(file.to_json().contains("0.3333333333333333"));
    }

    #[test]
    fn rejects_other_schema_versions() {
        let mut file = ParamsFile::new(&sample(), 9.80665);
        file.schema_version = 2;
        let err = file.to_params(&AngleBounds::default()).unwrap_err();
        assert!(matches!(err, CliError::Malformed(_)));
    }

    #[test]
    fn rejects_invalid_parameters() {
        let mut file = ParamsFile::new(&sample(), 9.80665);
        file.b[1] = 0.0;
        assert!(file.to_params(&AngleBounds::default()).is_err());
    }
}
