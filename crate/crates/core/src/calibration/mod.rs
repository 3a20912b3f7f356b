//! Nine-parameter static calibration.
//!
//! At rest the sensor measures gravity only, so for every pose the oblique
//! frame magnitude of the shift/scale corrected reading must equal `g`. The
//! shifts, scale coefficients and inter-axis angles are estimated by
//! minimising the sum of squared gravity-magnitude residuals.
//!
//! The solver works in transformed coordinates: shifts as-is, `ln b` for the
//! scale coefficients, and `t` with `angle = π/2 + w sin t` for each angle,
//! where `w` is the half-width of the allowed band. Every iterate therefore
//! satisfies `b > 0` and the angle bounds.

mod dense;
mod lm;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{
    magnitude_nonorth, AngleBounds, AxisAngles, GravityConstant, DEFAULT_ANGLE_TOLERANCE,
};
use crate::linalg::Vec3;
use crate::rng::CounterRng;
use crate::scalar::Scalar;

pub use crate::params::{CalibrationParams, PoseDataset, RawSample};

use dense::Square;
use lm::{LmOutcome, LmSettings};

/// Fewest poses accepted by [`fit`]: one per unknown.
pub const MIN_POSES: usize = 9;

/// Cosine below which two raw readings count as near-antipodal when
/// initialising the shifts.
const ANTIPODAL_COSINE: f64 = -0.9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions<T> {
    pub max_iterations: usize,
    /// Bound on both the step ∞-norm (transformed space) and the gradient ∞-norm.
    pub tolerance: T,
    /// Extra jittered starts in addition to the deterministic one.
    pub restarts: usize,
    pub seed: u64,
    pub angle_tolerance: T,
    /// Largest accepted Jacobian condition number at the initial point.
    pub condition_threshold: T,
    /// Relative central-difference step.
    pub fd_step: T,
}

impl<T: Scalar> Default for FitOptions<T> {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            tolerance: T::lit(1e-10),
            restarts: 0,
            seed: 42,
            angle_tolerance: T::lit(DEFAULT_ANGLE_TOLERANCE),
            condition_threshold: T::lit(1e8),
            fd_step: T::lit(1e-6),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport<T> {
    pub params: CalibrationParams<T>,
    /// Root mean square of [`residuals`](Self::residuals), m/s².
    pub residual_rms: T,
    pub iterations: usize,
    pub converged: bool,
    /// Gravity-magnitude residual per pose, m/s².
    pub residuals: Vec<T>,
    /// Sum of squared residuals after each accepted step of the winning start.
    pub cost_history: Vec<T>,
    /// Index of the start that produced the result (0 = deterministic start).
    pub restart: usize,
    /// Jacobian condition estimate at the deterministic start.
    pub condition: T,
}

/// Gravity-magnitude residual for each pose: `|a|_nonorth − g`.
pub fn residuals<T: Scalar>(
    dataset: &PoseDataset<T>,
    params: &CalibrationParams<T>,
    g: GravityConstant<T>,
) -> Result<Vec<T>> {
    if dataset.is_empty() {
        return Err(Error::Input("dataset has no poses".into()));
    }
    let params = CalibrationParams::new(params.shift, params.scale, params.angles)?;
    dataset
        .samples
        .iter()
        .map(|&raw| Ok(magnitude_nonorth(params.measured(raw), &params.angles)? - g.value()))
        .collect()
}

/// Maps between calibration parameters and the solver's coordinates.
#[derive(Debug, Clone, Copy)]
struct Transform<T> {
    bounds: AngleBounds<T>,
}

impl<T: Scalar> Transform<T> {
    fn angles_pinned(&self) -> bool {
        self.bounds.accepted_half_width() == T::zero()
    }

    fn free(&self) -> Vec<usize> {
        let n = if self.angles_pinned() { 6 } else { 9 };
        (0..n).collect()
    }

    fn decode(&self, x: &[T]) -> Option<CalibrationParams<T>> {
        let (c, w) = (self.bounds.center(), self.bounds.accepted_half_width());
        let angle = |t: T| c + w * t.sin();
        let angles =
            AxisAngles::within(angle(x[6]), angle(x[7]), angle(x[8]), &self.bounds).ok()?;
        let scale = Vec3::new(x[3].exp(), x[4].exp(), x[5].exp());
        CalibrationParams::new(Vec3::new(x[0], x[1], x[2]), scale, angles).ok()
    }

    fn encode(&self, p: &CalibrationParams<T>) -> Vec<T> {
        let (c, w) = (self.bounds.center(), self.bounds.accepted_half_width());
        let t = |a: T| {
            if w == T::zero() {
                T::zero()
            } else {
                ((a - c) / w).max(-T::one()).min(T::one()).asin()
            }
        };
        let [s1, s2, s3] = p.shift.to_array();
        let [b1, b2, b3] = p.scale.to_array();
        let [phi, psi, theta] = p.angles.to_array();
        vec![
            s1,
            s2,
            s3,
            b1.ln(),
            b2.ln(),
            b3.ln(),
            t(phi),
            t(psi),
            t(theta),
        ]
    }
}

/// Deterministic starting point: shifts at the per-axis midpoint of the raw
/// extremes when the poses include a near-antipodal pair (zero otherwise),
/// a common scale `max ‖â − s‖ / g`, and right angles.
pub fn initial_params<T: Scalar>(
    dataset: &PoseDataset<T>,
    g: GravityConstant<T>,
) -> CalibrationParams<T> {
    let samples = &dataset.samples;
    let shift = if has_antipodal_pair(samples) {
        let lo = samples
            .iter()
            .fold(Vec3::from_array([T::infinity(); 3]), |m, s| {
                Vec3::new(m.x.min(s.x), m.y.min(s.y), m.z.min(s.z))
            });
        let hi = samples
            .iter()
            .fold(Vec3::from_array([T::neg_infinity(); 3]), |m, s| {
                Vec3::new(m.x.max(s.x), m.y.max(s.y), m.z.max(s.z))
            });
        (lo + hi).scale(T::lit(0.5))
    } else {
        Vec3::zeros()
    };
    let reach = samples
        .iter()
        .fold(T::zero(), |m, &s| m.max((s - shift).norm()));
    let b = if reach > T::zero() {
        reach / g.value()
    } else {
        T::one()
    };
    CalibrationParams {
        shift,
        scale: Vec3::new(b, b, b),
        angles: AxisAngles::orthogonal(),
    }
}

fn has_antipodal_pair<T: Scalar>(samples: &[Vec3<T>]) -> bool {
    let limit = T::lit(ANTIPODAL_COSINE);
    samples.iter().enumerate().any(|(i, &u)| {
        samples[i + 1..].iter().any(|&v| {
            let denom = u.norm() * v.norm();
            denom > T::zero() && u.dot(v) / denom < limit
        })
    })
}

/// Least-squares estimate of all nine calibration parameters.
///
/// Fails with [`Error::Input`] on fewer than [`MIN_POSES`] poses and with
/// [`Error::IllPosed`] when the Jacobian at the deterministic start is too
/// badly conditioned to identify every parameter. Hitting the iteration cap
/// is not an error: the best parameters are returned with `converged = false`.
pub fn fit<T: Scalar>(
    dataset: &PoseDataset<T>,
    g: GravityConstant<T>,
    options: &FitOptions<T>,
) -> Result<FitReport<T>> {
    if dataset.len() < MIN_POSES {
        return Err(Error::Input(format!(
            "{} poses given, at least {MIN_POSES} required",
            dataset.len()
        )));
    }
    let transform = Transform {
        bounds: AngleBounds::new(options.angle_tolerance)?,
    };
    let free = transform.free();
    let objective = |x: &[T]| -> Option<Vec<T>> {
        let params = transform.decode(x)?;
        let r = residuals(dataset, &params, g).ok()?;
        r.iter().all(|v| v.is_finite()).then_some(r)
    };

    let x0 = transform.encode(&initial_params(dataset, g));
    let jac = lm::jacobian(&objective, &x0, &free, options.fd_step)
        .ok_or_else(|| Error::IllPosed("residuals undefined at the initial point".into()))?;
    let condition = condition_number(&Square::gram_of_rows(&jac, free.len()));
    if !(condition <= options.condition_threshold) {
        return Err(Error::IllPosed(format!(
            "Jacobian condition estimate {condition} exceeds {}; poses do not span enough orientations",
            options.condition_threshold
        )));
    }

    let settings = LmSettings {
        max_iterations: options.max_iterations,
        step_tolerance: options.tolerance,
        gradient_tolerance: options.tolerance,
        fd_step: options.fd_step,
    };
    let starts: Vec<Vec<T>> = (0..=options.restarts)
        .map(|k| {
            if k == 0 {
                x0.clone()
            } else {
                jitter(&x0, &free, options.seed, k)
            }
        })
        .collect();
    let outcomes: Vec<Option<LmOutcome<T>>> = starts
        .into_par_iter()
        .map(|start| lm::minimize(&objective, start, &free, &settings))
        .collect();

    // lowest cost wins; ties go to the lowest restart index
    let mut best: Option<(usize, LmOutcome<T>, T)> = None;
    for (k, out) in outcomes.into_iter().enumerate() {
        let Some(out) = out else { continue };
        let cost = *out
            .cost_history
            .last()
            .expect("history starts with the initial cost");
        if best.as_ref().is_none_or(|(_, _, c)| cost < *c) {
            best = Some((k, out, cost));
        }
    }
    let (restart, out, _) =
        best.ok_or_else(|| Error::IllPosed("no start produced a finite objective".into()))?;

    let params = transform.decode(&out.x).expect("accepted iterates decode");
    let n = T::from_count(out.residuals.len());
    let residual_rms = (out.residuals.iter().fold(T::zero(), |acc, &r| acc + r * r) / n).sqrt();
    Ok(FitReport {
        params,
        residual_rms,
        iterations: out.iterations,
        converged: out.converged,
        residuals: out.residuals,
        cost_history: out.cost_history,
        restart,
        condition,
    })
}

fn condition_number<T: Scalar>(normal: &Square<T>) -> T {
    let eig = normal.symmetric_eigenvalues();
    let (lo, hi) = (eig[0], eig[eig.len() - 1]);
    if lo <= T::zero() {
        T::infinity()
    } else {
        (hi / lo).sqrt()
    }
}

/// Perturbed start `k` for multi-start runs.
fn jitter<T: Scalar>(x0: &[T], free: &[usize], seed: u64, k: usize) -> Vec<T> {
    let rng = CounterRng::new(seed, k as u64);
    let mut x = x0.to_vec();
    let b_mean = (x0[3].exp() + x0[4].exp() + x0[5].exp()) / T::lit(3.0);
    for &j in free {
        let u = T::lit(2.0 * rng.uniform_at(j as u64) - 1.0);
        let amplitude = match j {
            0..=2 => T::lit(0.5) * b_mean,
            3..=5 => T::lit(0.05),
            _ => T::lit(0.5),
        };
        x[j] = x[j] + amplitude * u;
    }
    x
}
