//! Closed-form geometry of a sensor whose three sensing axes are not mutually
//! orthogonal.
//!
//! The axes are unit vectors `e1, e2, e3` with pairwise angles
//! `phi = ∠(e1, e2)`, `psi = ∠(e1, e3)` and `theta = ∠(e2, e3)`. A sensor
//! reports the *measured* values `a_i = <a, e_i>`, which are not the
//! coordinates of `a` in the oblique basis. This module maps between the
//! measured values, the affine (oblique) coordinates and an orthonormal frame
//! `f1 = e1`, `f2` in the `e1 e2` plane.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::linalg::{Mat3, Vec3};
use crate::params::CalibrationParams;
use crate::scalar::Scalar;

/// Default allowed relative deviation of each inter-axis angle from 90°.
pub const DEFAULT_ANGLE_TOLERANCE: f64 = 0.02;

/// Largest accepted angle tolerance.
pub const MAX_ANGLE_TOLERANCE: f64 = 0.5;

/// Absolute slack (radians) on the angle bounds, so values rounded to a few
/// decimals at the edge of the band (e.g. 1.53938 at tol 0.02) are accepted.
pub const ANGLE_BOUND_SLACK: f64 = 1e-6;

/// Hard guard: `|sin phi|` below this is rejected.
pub const MIN_SIN_PHI: f64 = 0.9;

/// Hard guard: Gram determinant below this is rejected.
pub const MIN_GRAM_DETERMINANT: f64 = 1e-6;

/// Standard gravity in m/s².
pub const STANDARD_GRAVITY: f64 = 9.80665;

/// Symmetric band `[(π/2)(1 − tol), (π/2)(1 + tol)]` for each inter-axis angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleBounds<T> {
    tol: T,
}

impl<T: Scalar> AngleBounds<T> {
    pub fn new(tol: T) -> Result<Self> {
        if !tol.is_finite() || tol < T::zero() || tol > T::lit(MAX_ANGLE_TOLERANCE) {
            return Err(Error::Domain(format!(
                "angle tolerance {tol} outside [0, {MAX_ANGLE_TOLERANCE}]"
            )));
        }
        Ok(Self { tol })
    }

    pub fn tolerance(&self) -> T {
        self.tol
    }

    pub fn center(&self) -> T {
        T::FRAC_PI_2()
    }

    pub fn half_width(&self) -> T {
        T::FRAC_PI_2() * self.tol
    }

    /// Half-width including [`ANGLE_BOUND_SLACK`] (zero when the band is
    /// pinned), i.e. the extent accepted by [`contains`](Self::contains).
    pub fn accepted_half_width(&self) -> T {
        if self.tol == T::zero() {
            T::zero()
        } else {
            self.half_width() + T::lit(ANGLE_BOUND_SLACK)
        }
    }

    pub fn lower(&self) -> T {
        self.center() - self.half_width()
    }

    pub fn upper(&self) -> T {
        self.center() + self.half_width()
    }

    pub fn contains(&self, angle: T) -> bool {
        let slack = T::lit(ANGLE_BOUND_SLACK);
        angle >= self.lower() - slack && angle <= self.upper() + slack
    }
}

impl<T: Scalar> Default for AngleBounds<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(DEFAULT_ANGLE_TOLERANCE),
        }
    }
}

/// Inter-axis angles in radians.
///
/// Construction validates the angles against an [`AngleBounds`] band and the
/// hard non-degeneracy guards, so every geometric operation below receives a
/// Gram matrix that is positive definite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisAngles<T> {
    phi: T,
    psi: T,
    theta: T,
}

impl<T: Scalar> AxisAngles<T> {
    /// Angles checked against the default ±2% band.
    pub fn new(phi: T, psi: T, theta: T) -> Result<Self> {
        Self::within(phi, psi, theta, &AngleBounds::default())
    }

    pub fn within(phi: T, psi: T, theta: T, bounds: &AngleBounds<T>) -> Result<Self> {
        for (name, v) in [("phi", phi), ("psi", psi), ("theta", theta)] {
            if !v.is_finite() {
                return Err(Error::Domain(format!("{name} is not finite")));
            }
            if !bounds.contains(v) {
                return Err(Error::Domain(format!(
                    "{name} = {v} outside [{}, {}]",
                    bounds.lower(),
                    bounds.upper()
                )));
            }
        }
        let angles = Self { phi, psi, theta };
        if phi.sin().abs() < T::lit(MIN_SIN_PHI) {
            return Err(Error::Domain(format!("|sin phi| < {MIN_SIN_PHI}")));
        }
        let det = gram_determinant(&angles);
        if !(det >= T::lit(MIN_GRAM_DETERMINANT)) {
            return Err(Error::Domain(format!(
                "Gram determinant {det} below {MIN_GRAM_DETERMINANT}"
            )));
        }
        Ok(angles)
    }

    /// Exactly orthogonal axes.
    pub fn orthogonal() -> Self {
        let right = T::FRAC_PI_2();
        Self {
            phi: right,
            psi: right,
            theta: right,
        }
    }

    pub fn phi(&self) -> T {
        self.phi
    }

    pub fn psi(&self) -> T {
        self.psi
    }

    pub fn theta(&self) -> T {
        self.theta
    }

    pub fn to_array(&self) -> [T; 3] {
        [self.phi, self.psi, self.theta]
    }

    /// `(cos phi, cos psi, cos theta)`.
    pub fn cosines(&self) -> (T, T, T) {
        (self.phi.cos(), self.psi.cos(), self.theta.cos())
    }
}

/// Gravitational acceleration used as the static-pose reference, m/s².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GravityConstant<T>(T);

impl<T: Scalar> GravityConstant<T> {
    pub fn new(g: T) -> Result<Self> {
        if g.is_finite() && g > T::zero() {
            Ok(Self(g))
        } else {
            Err(Error::Domain(format!("gravity must be positive, got {g}")))
        }
    }

    pub fn value(&self) -> T {
        self.0
    }
}

impl<T: Scalar> Default for GravityConstant<T> {
    fn default() -> Self {
        Self(T::lit(STANDARD_GRAVITY))
    }
}

/// `1 − cos²φ − cos²ψ − cos²θ + 2 cosφ cosψ cosθ`, the determinant of the
/// Gram matrix.
pub fn gram_determinant<T: Scalar>(angles: &AxisAngles<T>) -> T {
    let (cp, cs, ct) = angles.cosines();
    T::one() - cp * cp - cs * cs - ct * ct + T::two() * cp * cs * ct
}

/// Matrix of pairwise inner products of the axis unit vectors.
pub fn gram_matrix<T: Scalar>(angles: &AxisAngles<T>) -> Mat3<T> {
    let (cp, cs, ct) = angles.cosines();
    let one = T::one();
    Mat3::from_rows([[one, cp, cs], [cp, one, ct], [cs, ct, one]])
}

/// Inverse of the Gram matrix in closed form.
pub fn tbar_matrix<T: Scalar>(angles: &AxisAngles<T>) -> Mat3<T> {
    let (cp, cs, ct) = angles.cosines();
    let (sp, ss, st) = (angles.phi.sin(), angles.psi.sin(), angles.theta.sin());
    let den = -T::one() + cp * cp + cs * cs + ct * ct - T::two() * cp * cs * ct;
    let xy = (cp - ct * cs) / den;
    let xz = (cs - cp * ct) / den;
    let yz = (ct - cp * cs) / den;
    Mat3::from_rows([
        [-(st * st) / den, xy, xz],
        [xy, -(ss * ss) / den, yz],
        [xz, yz, -(sp * sp) / den],
    ])
}

/// Affine coordinates of the acceleration whose measured values are `a`,
/// i.e. the solution of `G ā = a`.
pub fn affine_from_measured<T: Scalar>(a: Vec3<T>, angles: &AxisAngles<T>) -> Vec3<T> {
    tbar_matrix(angles).mul_vec(a)
}

/// Magnitude under the assumption of orthogonal axes.
pub fn magnitude_orth<T: Scalar>(a: Vec3<T>) -> T {
    a.norm()
}

/// Magnitude of the acceleration whose measured values are `a` on the oblique
/// axes, from the measured values directly.
pub fn magnitude_nonorth<T: Scalar>(a: Vec3<T>, angles: &AxisAngles<T>) -> Result<T> {
    let ratio = magnitude_nonorth_squared(a, angles);
    if ratio < T::zero() || ratio.is_nan() {
        return Err(Error::Domain(format!(
            "negative squared magnitude {ratio} for {a:?}"
        )));
    }
    Ok(ratio.sqrt())
}

/// Squared oblique-frame magnitude as the numerator/denominator ratio, without
/// the sign check.
pub(crate) fn magnitude_nonorth_squared<T: Scalar>(a: Vec3<T>, angles: &AxisAngles<T>) -> T {
    let two = T::two();
    let eight = T::lit(8.0);
    let (phi, psi, theta) = (angles.phi, angles.psi, angles.theta);
    let (cp, cs, ct) = angles.cosines();
    let (c2p, c2s, c2t) = ((two * phi).cos(), (two * psi).cos(), (two * theta).cos());
    let Vec3 { x, y, z } = a;

    let numerator = two * (-T::one() + c2t) * x * x
        + two * (-T::one() + c2s) * y * y
        + two * (-T::one() + c2p) * z * z
        + eight * (cp - cs * ct) * x * y
        + eight * (ct - cp * cs) * y * z
        + eight * (cs - cp * ct) * x * z;
    let denominator = two + two * c2p + two * c2s + two * c2t - eight * cp * cs * ct;
    numerator / denominator
}

/// Magnitude from affine coordinates: `sqrt(āᵀ G ā)`.
pub fn magnitude_nonorth_affine<T: Scalar>(abar: Vec3<T>, angles: &AxisAngles<T>) -> T {
    let (cp, cs, ct) = angles.cosines();
    let two = T::two();
    let Vec3 { x, y, z } = abar;
    let q = x * x + y * y + z * z + two * x * y * cp + two * x * z * cs + two * y * z * ct;
    // Positive semidefinite form; clamp rounding below zero.
    q.max(T::zero()).sqrt()
}

/// Upper-triangular matrix whose columns are `e1, e2, e3` expressed in the
/// orthonormal frame `f1 = e1`, `f2` in the `e1 e2` plane. Maps affine
/// coordinates to orthonormal coordinates; `Uᵀ U = G`.
pub fn orthonormalization_matrix<T: Scalar>(angles: &AxisAngles<T>) -> Mat3<T> {
    let (cp, cs, ct) = angles.cosines();
    let sp = angles.phi.sin();
    let det = gram_determinant(angles);
    let zero = T::zero();
    Mat3::from_rows([
        [T::one(), cp, cs],
        [zero, sp, (ct - cp * cs) / sp],
        [zero, zero, det.sqrt() / sp],
    ])
}

/// Affine raw-to-orthonormal map `x ↦ M x − c` for one parameter set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrectionTransform<T> {
    pub matrix: Mat3<T>,
    pub offset: Vec3<T>,
}

impl<T: Scalar> CorrectionTransform<T> {
    /// `M = U T̄ T`, `c = U T̄ s` with `T = diag(1/b)` and `s = shift / b`.
    pub fn new(params: &CalibrationParams<T>) -> Self {
        let chain = orthonormalization_matrix(&params.angles).mul_mat(&tbar_matrix(&params.angles));
        let inv_scale = params.scale.recip();
        let matrix = chain.mul_mat(&Mat3::diagonal(inv_scale));
        let offset = chain.mul_vec(params.shift.component_mul(inv_scale));
        Self { matrix, offset }
    }

    pub fn apply(&self, raw: Vec3<T>) -> Vec3<T> {
        self.matrix.mul_vec(raw) - self.offset
    }
}

/// Acceleration in the orthonormal frame for one raw reading.
pub fn correct_sample<T: Scalar>(raw: Vec3<T>, params: &CalibrationParams<T>) -> Vec3<T> {
    CorrectionTransform::new(params).apply(raw)
}

/// Right angle in `f64`, for callers that need a literal.
pub const RIGHT_ANGLE: f64 = FRAC_PI_2;
