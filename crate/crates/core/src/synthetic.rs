//! Synthetic static-pose readings from known calibration parameters.

use crate::error::{Error, Result};
use crate::geometry::{gram_matrix, orthonormalization_matrix, GravityConstant};
use crate::linalg::Vec3;
use crate::params::{CalibrationParams, PoseDataset};
use crate::rng::CounterRng;
use crate::scalar::Scalar;

const UNIT_NORM_TOLERANCE: f64 = 1e-12;

/// Ground truth for generating a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct TruthScenario<T> {
    pub params: CalibrationParams<T>,
    pub gravity: GravityConstant<T>,
    /// Gravity direction in the orthonormal frame, one per pose.
    pub directions: Vec<Vec3<T>>,
    /// Standard deviation of additive noise on each raw component, raw units.
    pub noise_std: T,
    pub seed: u64,
}

impl<T: Scalar> TruthScenario<T> {
    pub fn noiseless(params: CalibrationParams<T>, directions: Vec<Vec3<T>>) -> Self {
        Self {
            params,
            gravity: GravityConstant::default(),
            directions,
            noise_std: T::zero(),
            seed: 0,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.noise_std >= T::zero()) || !self.noise_std.is_finite() {
            return Err(Error::Input(format!(
                "noise std {} must be >= 0",
                self.noise_std
            )));
        }
        for (i, d) in self.directions.iter().enumerate() {
            if !d.is_finite() || (d.norm() - T::one()).abs() > T::lit(UNIT_NORM_TOLERANCE) {
                return Err(Error::Input(format!(
                    "pose direction {i} is not a unit vector"
                )));
            }
        }
        // re-run parameter validation in case the fields were assembled by hand
        CalibrationParams::new(self.params.shift, self.params.scale, self.params.angles)?;
        Ok(())
    }
}

/// Raw readings for every pose of `scenario`.
///
/// Inverts the correction pipeline: orthonormal acceleration `g d` → affine
/// coordinates (back substitution) → measured values (`G ā`) → raw values
/// (`b a + s`), then adds seeded Gaussian noise. Pose `i` draws its noise from
/// stream `i`, so poses are independent of generation order.
pub fn generate<T: Scalar>(scenario: &TruthScenario<T>) -> Result<PoseDataset<T>> {
    scenario.validate()?;
    let params = &scenario.params;
    let upper = orthonormalization_matrix(&params.angles);
    let gram = gram_matrix(&params.angles);
    let g = scenario.gravity.value();

    let samples = scenario
        .directions
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            let orth = d.scale(g);
            let affine = upper
                .solve_upper(orth)
                .ok_or_else(|| Error::Parameter("singular orthonormalization matrix".into()))?;
            let measured = gram.mul_vec(affine);
            let mut raw = params.raw_from_measured(measured);
            if scenario.noise_std > T::zero() {
                let rng = CounterRng::new(scenario.seed, i as u64);
                let noise = Vec3::new(
                    T::lit(rng.normal_at(0)),
                    T::lit(rng.normal_at(1)),
                    T::lit(rng.normal_at(2)),
                );
                raw += noise.scale(scenario.noise_std);
            }
            Ok(raw)
        })
        .collect::<Result<Vec<_>>>()?;
    PoseDataset::new(samples)
}

/// `n` near-uniform unit vectors on a spherical Fibonacci lattice.
pub fn fibonacci_directions<T: Scalar>(n: usize) -> Vec<Vec3<T>> {
    let golden_angle = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2 * i + 1) as f64 / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let lon = golden_angle * i as f64;
            let v = Vec3::new(r * lon.cos(), r * lon.sin(), z);
            // renormalise to keep the unit-norm invariant tight
            v.scale(1.0 / v.norm()).cast::<T>()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{correct_sample, magnitude_nonorth, AxisAngles, STANDARD_GRAVITY};

    fn reference_params() -> CalibrationParams<f64> {
        CalibrationParams::new(
            Vec3::new(0.1, -0.2, 0.05),
            Vec3::new(1.01, 0.99, 1.02),
            AxisAngles::new(1.53938, 1.60221, 1.60221).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn identity_params_reproduce_gravity_along_z() {
        let sc = TruthScenario::noiseless(
            CalibrationParams::identity(),
            vec![Vec3::new(0.0, 0.0, 1.0)],
        );
        let ds = generate(&sc).unwrap();
        assert!(ds.samples[0].max_abs_diff(Vec3::new(0.0, 0.0, STANDARD_GRAVITY)) < 1e-15);
    }

    #[test]
    fn noiseless_round_trip_through_correction() {
        let dirs = fibonacci_directions(24);
        let sc = TruthScenario::noiseless(reference_params(), dirs.clone());
        let ds = generate(&sc).unwrap();
        for (raw, d) in ds.samples.iter().zip(&dirs) {
            let corrected = correct_sample(*raw, &sc.params);
            assert!(corrected.max_abs_diff(d.scale(STANDARD_GRAVITY)) < 1e-10);
            let m = magnitude_nonorth(sc.params.measured(*raw), &sc.params.angles).unwrap();
            assert!((m - STANDARD_GRAVITY).abs() < 1e-10);
        }
    }

    #[test]
    fn same_seed_same_dataset() {
        let mut sc = TruthScenario::noiseless(reference_params(), fibonacci_directions(12));
        sc.noise_std = 0.1;
        sc.seed = 5;
        let a = generate(&sc).unwrap();
        let b = generate(&sc).unwrap();
        assert_eq!(a, b);
        sc.seed = 6;
        assert_ne!(a, generate(&sc).unwrap());
    }

    #[test]
    fn rejects_bad_scenarios() {
        let mut sc = TruthScenario::noiseless(reference_params(), vec![Vec3::new(0.0, 0.0, 2.0)]);
        assert!(generate(&sc).is_err());
        sc.directions = vec![Vec3::new(0.0, 0.0, 1.0)];
        sc.noise_std = -1.0;
        assert!(generate(&sc).is_err());
        sc.noise_std = 0.0;
        sc.params.scale = Vec3::new(1.0, 0.0, 1.0);
        assert!(matches!(generate(&sc), Err(Error::Parameter(_))));
    }

    #[test]
    fn fibonacci_lattice_properties() {
        let one = fibonacci_directions::<f64>(1);
        assert_eq!(one.len(), 1);
        assert!((one[0].norm() - 1.0).abs() < 1e-12);

        let dirs = fibonacci_directions::<f64>(24);
        assert!(dirs.iter().all(|d| (d.norm() - 1.0).abs() < 1e-12));
        let mut min_angle = f64::INFINITY;
        for i in 0..dirs.len() {
            for j in i + 1..dirs.len() {
                let c = dirs[i].dot(dirs[j]).clamp(-1.0, 1.0);
                min_angle = min_angle.min(c.acos());
            }
        }
        assert!(min_angle.to_degrees() > 20.0, "{}", min_angle.to_degrees());
    }
}
