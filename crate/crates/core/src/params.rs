//! Calibration parameters and static-pose datasets.

use crate::error::{Error, Result};
use crate::geometry::AxisAngles;
use crate::linalg::Vec3;
use crate::scalar::Scalar;

/// Uncalibrated reading `(âx, ây, âz)` in sensor units.
pub type RawSample<T> = Vec3<T>;

/// Per-axis shift and scale plus inter-axis angles.
///
/// The per-axis model is `a_i = (â_i − s_i) / b_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationParams<T> {
    /// Shifts `s1, s2, s3`, raw units.
    pub shift: Vec3<T>,
    /// Scale coefficients `b1, b2, b3`, raw units per m/s².
    pub scale: Vec3<T>,
    pub angles: AxisAngles<T>,
}

impl<T: Scalar> CalibrationParams<T> {
    pub fn new(shift: Vec3<T>, scale: Vec3<T>, angles: AxisAngles<T>) -> Result<Self> {
        if !shift.is_finite() {
            return Err(Error::Parameter("shift is not finite".into()));
        }
        if !scale.is_finite() || scale.to_array().iter().any(|&b| b <= T::zero()) {
            return Err(Error::Parameter(format!(
                "scale coefficients must be positive, got {scale:?}"
            )));
        }
        Ok(Self {
            shift,
            scale,
            angles,
        })
    }

    /// Zero shift, unit scale, orthogonal axes.
    pub fn identity() -> Self {
        Self {
            shift: Vec3::zeros(),
            scale: Vec3::new(T::one(), T::one(), T::one()),
            angles: AxisAngles::orthogonal(),
        }
    }

    /// Applies the per-axis shift/scale model, yielding measured values in m/s².
    pub fn measured(&self, raw: RawSample<T>) -> Vec3<T> {
        (raw - self.shift).component_div(self.scale)
    }

    /// Inverse of [`measured`](Self::measured).
    pub fn raw_from_measured(&self, a: Vec3<T>) -> RawSample<T> {
        a.component_mul(self.scale) + self.shift
    }

    /// The nine parameters in the order `s1 s2 s3 b1 b2 b3 phi psi theta`.
    pub fn to_array(&self) -> [T; 9] {
        let [s1, s2, s3] = self.shift.to_array();
        let [b1, b2, b3] = self.scale.to_array();
        let [phi, psi, theta] = self.angles.to_array();
        [s1, s2, s3, b1, b2, b3, phi, psi, theta]
    }
}

/// Mean raw readings at distinct static orientations.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PoseDataset<T> {
    pub samples: Vec<RawSample<T>>,
    /// Number of raw readings averaged into each pose, when known.
    pub counts: Option<Vec<usize>>,
}

impl<T: Scalar> PoseDataset<T> {
    pub fn new(samples: Vec<RawSample<T>>) -> Result<Self> {
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::Input(format!("pose {i} has a non-finite component")));
        }
        Ok(Self {
            samples,
            counts: None,
        })
    }

    pub fn with_counts(samples: Vec<RawSample<T>>, counts: Vec<usize>) -> Result<Self> {
        if counts.len() != samples.len() {
            return Err(Error::Input(format!(
                "{} poses but {} sample counts",
                samples.len(),
                counts.len()
            )));
        }
        let mut ds = Self::new(samples)?;
        ds.counts = Some(counts);
        Ok(ds)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}
