//! Checks against independently computed values: hand-written linear algebra,
//! extended-precision references, and brute-force sweeps.

#![allow(clippy::needless_range_loop, clippy::excessive_precision)]

use accelcal::error_analysis::{
    abs_error, domain_cloud, histogram, rel_error, solve_problem1, solve_problem2, Comparison,
    HistogramSpec, SamplingSpec, SearchOptions,
};
use accelcal::synthetic::{fibonacci_directions, generate, TruthScenario};
use accelcal::{
    affine_from_measured, correct_sample, gram_matrix, magnitude_nonorth, magnitude_nonorth_affine,
    orthonormalization_matrix, tbar_matrix, AngleBounds, AxisAngles, CalibrationParams,
    GravityConstant, Vec3,
};

fn gauss_solve(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> [f64; 3] {
    for k in 0..3 {
        let p = (k..3)
            .max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))
            .unwrap();
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..3 {
            let f = a[i][k] / a[k][k];
            for j in k..3 {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = [0.0; 3];
    for i in (0..3).rev() {
        x[i] = (b[i] - (i + 1..3).map(|j| a[i][j] * x[j]).sum::<f64>()) / a[i][i];
    }
    x
}

fn cofactor_inverse(m: [[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let c = |i: usize, j: usize| {
        let r: Vec<usize> = (0..3).filter(|&k| k != i).collect();
        let s: Vec<usize> = (0..3).filter(|&k| k != j).collect();
        let minor = m[r[0]][s[0]] * m[r[1]][s[1]] - m[r[0]][s[1]] * m[r[1]][s[0]];
        if (i + j).is_multiple_of(2) {
            minor
        } else {
            -minor
        }
    };
    let det: f64 = (0..3).map(|j| m[0][j] * c(0, j)).sum();
    let mut inv = [[0.0; 3]; 3];
    for (i, row) in inv.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = c(j, i) / det;
        }
    }
    inv
}

#[test]
fn affine_coordinates_match_elimination_and_extended_precision() {
    let angles = AxisAngles::new(1.55, 1.58, 1.60).unwrap();
    let a = Vec3::new(1.0, 2.0, 3.0);
    let got = affine_from_measured(a, &angles);
    let by_elimination = gauss_solve(gram_matrix(&angles).m, a.to_array());
    // 30-digit reference
    let reference = [
        0.985222732642074202,
        2.06913997145044956,
        3.06948543879014017,
    ];
    for i in 0..3 {
        assert!((got[i] - by_elimination[i]).abs() < 1e-13);
        assert!((got[i] - reference[i]).abs() < 1e-13, "{got:?}");
    }
}

#[test]
fn tbar_matches_cofactor_inverse() {
    let angles = AxisAngles::new(1.53938, 1.60221, 1.60221).unwrap();
    let expected = cofactor_inverse(gram_matrix(&angles).m);
    let got = tbar_matrix(&angles);
    for (i, row) in expected.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            assert!((got.m[i][j] - v).abs() < 1e-14);
        }
    }
}

#[test]
fn correction_matches_stepwise_composition() {
    let params = CalibrationParams::new(
        Vec3::new(0.3, -0.1, 0.25),
        Vec3::new(1.05, 0.97, 1.01),
        AxisAngles::new(1.56, 1.59, 1.545).unwrap(),
    )
    .unwrap();
    let raw = Vec3::new(3.2, -7.4, 5.9);
    let measured = [
        (raw.x - params.shift.x) / params.scale.x,
        (raw.y - params.shift.y) / params.scale.y,
        (raw.z - params.shift.z) / params.scale.z,
    ];
    let abar = gauss_solve(gram_matrix(&params.angles).m, measured);
    let u = orthonormalization_matrix(&params.angles).m;
    let expected: Vec<f64> = (0..3)
        .map(|i| (0..3).map(|j| u[i][j] * abar[j]).sum())
        .collect();
    let got = correct_sample(raw, &params);
    for i in 0..3 {
        assert!((got[i] - expected[i]).abs() < 1e-12);
    }
}

#[test]
fn synthetic_poses_correct_back_to_gravity() {
    let params = CalibrationParams::new(
        Vec3::new(0.1, -0.2, 0.05),
        Vec3::new(1.01, 0.99, 1.02),
        AxisAngles::new(1.53938, 1.60221, 1.60221).unwrap(),
    )
    .unwrap();
    let dirs = fibonacci_directions(30);
    let ds = generate(&TruthScenario::noiseless(params, dirs.clone())).unwrap();
    let g = GravityConstant::<f64>::default().value();
    for (raw, d) in ds.samples.iter().zip(&dirs) {
        assert!(correct_sample(*raw, &params).max_abs_diff(d.scale(g)) < 1e-10);
    }
}

#[test]
fn magnitude_paths_agree_on_validation_grid() {
    let bounds = AngleBounds::<f64>::default();
    let (lo, c, hi) = (bounds.lower(), bounds.center(), bounds.upper());
    let mut angle_sets = vec![AxisAngles::new(c, c, c).unwrap()];
    for p in [lo, hi] {
        for q in [lo, hi] {
            for r in [lo, hi] {
                angle_sets.push(AxisAngles::new(p, q, r).unwrap());
            }
        }
    }
    let n = 50;
    let coord = |i: usize| -20.0 + 40.0 * i as f64 / (n - 1) as f64;
    let mut worst = 0.0f64;
    for angles in &angle_sets {
        let t = tbar_matrix(angles);
        let u = orthonormalization_matrix(angles);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let a = Vec3::new(coord(i), coord(j), coord(k));
                    let closed = magnitude_nonorth(a, angles).unwrap();
                    let affine = magnitude_nonorth_affine(t * a, angles);
                    let pipeline = (u * t * a).norm();
                    let scale = closed.max(1e-300);
                    worst = worst
                        .max((closed - affine).abs() / scale)
                        .max((closed - pipeline).abs() / scale);
                }
            }
        }
    }
    assert!(worst < 1e-10, "worst relative disagreement {worst:e}");
}

#[test]
fn problem1_maximiser_lies_on_the_gravity_surface() {
    let opts = SearchOptions {
        grid_points: 11,
        refine_top: 4,
        max_simplex_evaluations: 5_000,
    };
    let g = GravityConstant::<f64>::default();
    let r = solve_problem1(g, 0.02, &opts).unwrap();
    let m = magnitude_nonorth(r.argmax, &r.angles).unwrap();
    assert!((m - g.value()).abs() < 1e-9 * g.value());
    assert!((r.max_value - abs_error(r.argmax, &r.angles).unwrap()).abs() < 1e-15);
    assert!((r.max_value - 0.3130303).abs() < 1e-5, "{}", r.max_value);
}

#[test]
fn problems_are_zero_for_pinned_right_angles() {
    let opts = SearchOptions {
        grid_points: 5,
        refine_top: 2,
        max_simplex_evaluations: 500,
    };
    let p1 = solve_problem1(GravityConstant::default(), 0.0, &opts).unwrap();
    let p2 = solve_problem2(40.0, 0.0, &opts).unwrap();
    assert!(p1.max_value < 1e-12);
    assert!(p2.max_value < 1e-12);
}

#[test]
fn problem2_matches_brute_force_over_the_box_surface() {
    // dense sweep of the surface at the band corner found by the solver
    let opts = SearchOptions {
        grid_points: 9,
        refine_top: 4,
        max_simplex_evaluations: 5_000,
    };
    let r = solve_problem2(20.0, 0.02, &opts).unwrap();
    let n = 201;
    let mut best = 0.0f64;
    for face in 0..3 {
        for i in 0..n {
            for j in 0..n {
                let u = -20.0 + 40.0 * i as f64 / (n - 1) as f64;
                let v = -20.0 + 40.0 * j as f64 / (n - 1) as f64;
                let mut p = [20.0; 3];
                p[(face + 1) % 3] = u;
                p[(face + 2) % 3] = v;
                let a = Vec3::from_array(p);
                best = best.max(rel_error(a, &r.angles).unwrap());
            }
        }
    }
    assert!(
        r.max_value >= best - 1e-12,
        "solver {} {:?} {:?} vs sweep {best}",
        r.max_value,
        r.argmax,
        r.angles
    );
    assert!(
        r.max_value - best < 1e-4,
        "solver {} vs sweep {best}",
        r.max_value
    );
}

#[test]
fn histogram_is_reproducible_and_shows_the_edge_near_1_6_percent() {
    let spec = HistogramSpec {
        sampling: SamplingSpec::reference(200_000),
        bins: 60,
        range_max: Some(0.035),
    };
    let a = histogram(&spec).unwrap();
    let b = histogram(&spec).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.counts.iter().sum::<usize>() + a.overflow, a.kept);
    // the density peaks just below 1.6 % and falls off sharply right after
    let peak = (0..a.counts.len()).max_by_key(|&i| a.counts[i]).unwrap();
    let peak_centre = 0.5 * (a.edges[peak] + a.edges[peak + 1]);
    assert!(
        (0.014..0.016).contains(&peak_centre),
        "peak at {peak_centre}"
    );
    assert!(a.counts[peak + 2] * 5 < a.counts[peak]);
}

#[test]
fn domain_cloud_partitions_the_samples() {
    let spec = SamplingSpec::reference(20_000);
    let low = domain_cloud(0.01, Comparison::AtMost, &spec, None).unwrap();
    let high = domain_cloud(0.01, Comparison::AtLeast, &spec, None).unwrap();
    let exact = low
        .points
        .iter()
        .chain(&high.points)
        .filter(|p| p.1 == 0.01)
        .count();
    assert_eq!(low.matched + high.matched - exact, low.kept);
    assert!(low.points.iter().all(|p| p.1 <= 0.01));
    let thinned = domain_cloud(0.01, Comparison::AtLeast, &spec, Some(100)).unwrap();
    assert!(thinned.points.len() <= 100 && !thinned.points.is_empty());
    assert_eq!(thinned.matched, high.matched);
}
