//! Calibration of three-axis accelerometers with non-orthogonal sensing axes.
//!
//! The crate corrects constant bias, per-axis scale and axis misalignment,
//! producing accelerations in a true orthonormal frame, and quantifies the
//! error made by treating slightly skewed axes as orthogonal.
//!
//! All numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below name the double-precision instantiations used by the command-line
//! tool.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod error;
pub mod error_analysis;
pub mod geometry;
pub mod linalg;
pub mod params;
pub mod rng;
pub mod scalar;
pub mod synthetic;

pub use calibration::{fit, residuals, FitOptions, FitReport};
pub use error::{Error, Result};
pub use geometry::{
    affine_from_measured, correct_sample, gram_matrix, magnitude_nonorth, magnitude_nonorth_affine,
    magnitude_orth, orthonormalization_matrix, tbar_matrix, AngleBounds, AxisAngles,
    CorrectionTransform, GravityConstant,
};
pub use linalg::{Mat3, Vec3};
pub use params::{CalibrationParams, PoseDataset, RawSample};
pub use scalar::Scalar;

pub type Vec3d = Vec3<f64>;
pub type Vec3f = Vec3<f32>;
pub type Mat3d = Mat3<f64>;
pub type Mat3f = Mat3<f32>;
pub type AxisAnglesD = AxisAngles<f64>;
pub type AxisAnglesF = AxisAngles<f32>;
pub type CalibrationParamsD = CalibrationParams<f64>;
pub type CalibrationParamsF = CalibrationParams<f32>;
pub type PoseDatasetD = PoseDataset<f64>;
pub type FitOptionsD = FitOptions<f64>;
pub type FitReportD = FitReport<f64>;
pub type GravityD = GravityConstant<f64>;
