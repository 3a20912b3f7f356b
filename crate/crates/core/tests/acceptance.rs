//! Acceptance criteria. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use accelcal::calibration::{fit, FitOptions};
use accelcal::error_analysis::{
    abs_error, histogram, solve_problem1, solve_problem2, HistogramSpec, SamplingSpec,
    SearchOptions,
};
use accelcal::geometry::{
    affine_from_measured, correct_sample, gram_matrix, magnitude_nonorth, magnitude_nonorth_affine,
    orthonormalization_matrix, tbar_matrix, AngleBounds, AxisAngles, GravityConstant,
    STANDARD_GRAVITY,
};
use accelcal::rng::CounterRng;
use accelcal::synthetic::{fibonacci_directions, generate, TruthScenario};
use accelcal::{CalibrationParams, Mat3, Vec3};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn g() -> GravityConstant<f64> {
    GravityConstant::default()
}

fn reference_truth() -> CalibrationParams<f64> {
    CalibrationParams::new(
        Vec3::new(0.1, -0.2, 0.05),
        Vec3::new(1.01, 0.99, 1.02),
        AxisAngles::new(1.53938, 1.60221, 1.60221).unwrap(),
    )
    .unwrap()
}

fn problem1_reproduction() -> Outcome {
    let start = Instant::now();
    let r = solve_problem1(g(), 0.02, &SearchOptions::default()).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let constraint = magnitude_nonorth(r.argmax, &r.angles).unwrap();
    let constraint_rel = (constraint - STANDARD_GRAVITY).abs() / STANDARD_GRAVITY;
    let value_ok = (r.max_value - 0.3130299).abs() <= 1e-3;
    let pass = value_ok && constraint_rel <= 1e-9 && secs < 10.0;
    outcome(
        pass,
        format!(
            "max err = {:.7} m/s² (target 0.3130299 ± 1e-3), |a|_nonorth rel dev = {constraint_rel:.1e}, \
             argmax = ({:.5}, {:.5}, {:.5}), angles = {:?}, {:.2} s",
            r.max_value, r.argmax.x, r.argmax.y, r.argmax.z, r.angles.to_array(), secs
        ),
    )
}

fn optimum_point() -> Outcome {
    let v = 5.48114_f64;
    let angles = AxisAngles::new(1.60221, 1.60221, 1.60221).unwrap();
    let e = abs_error(Vec3::new(v, v, v), &angles).unwrap();
    outcome(
        (e - 0.3130299).abs() <= 2e-4,
        format!("abs_error = {e:.7} (target 0.3130299 ± 2e-4)"),
    )
}

fn problem2_reproduction() -> Outcome {
    let opts = SearchOptions::default();
    let runs: Vec<f64> = [4.0, 8.0, 16.0]
        .iter()
        .map(|k| {
            solve_problem2(k * STANDARD_GRAVITY, 0.02, &opts)
                .unwrap()
                .max_value
        })
        .collect();
    let spread = runs.iter().cloned().fold(f64::MIN, f64::max)
        - runs.iter().cloned().fold(f64::MAX, f64::min);
    let pass = runs.iter().all(|r| (r * 100.0 - 3.192).abs() <= 0.01) && spread <= 1e-9;
    outcome(
        pass,
        format!(
            "4g/8g/16g = {:.5}% / {:.5}% / {:.5}% (target 3.192 ± 0.01 pp), spread = {spread:.1e}",
            runs[0] * 100.0,
            runs[1] * 100.0,
            runs[2] * 100.0
        ),
    )
}

fn cross_consistency() -> Outcome {
    let opts = SearchOptions::default();
    let p1 = solve_problem1(g(), 0.02, &opts).unwrap().max_value;
    let p2 = solve_problem2(16.0 * STANDARD_GRAVITY, 0.02, &opts)
        .unwrap()
        .max_value;
    let rel = (p1 - STANDARD_GRAVITY * p2).abs() / p1;
    outcome(
        rel <= 1e-4,
        format!(
            "P1 = {p1:.9}, g·P2 = {:.9}, rel diff = {rel:.1e}",
            STANDARD_GRAVITY * p2
        ),
    )
}

fn formula_equivalence() -> Outcome {
    let rng = CounterRng::new(2024, 1);
    let bounds = AngleBounds::<f64>::default();
    let (lo, hi) = (bounds.lower(), bounds.upper());
    let mut worst_mag = 0.0f64;
    let mut worst_inverse = 0.0f64;
    let mut worst_gram = 0.0f64;
    for i in 0..10_000u64 {
        let c = 6 * i;
        let a = Vec3::new(
            rng.uniform_range_at(c, -50.0, 50.0),
            rng.uniform_range_at(c + 1, -50.0, 50.0),
            rng.uniform_range_at(c + 2, -50.0, 50.0),
        );
        let angles = AxisAngles::new(
            rng.uniform_range_at(c + 3, lo, hi),
            rng.uniform_range_at(c + 4, lo, hi),
            rng.uniform_range_at(c + 5, lo, hi),
        )
        .unwrap();
        let closed = magnitude_nonorth(a, &angles).unwrap();
        let affine = magnitude_nonorth_affine(affine_from_measured(a, &angles), &angles);
        let u = orthonormalization_matrix(&angles);
        let t = tbar_matrix(&angles);
        let pipeline = (u * t * a).norm();
        let rel = |x: f64, y: f64| (x - y).abs() / x.abs().max(y.abs()).max(f64::MIN_POSITIVE);
        worst_mag = worst_mag
            .max(rel(closed, affine))
            .max(rel(closed, pipeline))
            .max(rel(affine, pipeline));
        let gm = gram_matrix(&angles);
        worst_inverse = worst_inverse.max((gm * t).max_abs_diff(&Mat3::identity()));
        worst_gram = worst_gram.max((u.transpose() * u).max_abs_diff(&gm));
    }
    outcome(
        worst_mag <= 1e-10 && worst_inverse <= 1e-12 && worst_gram <= 1e-12,
        format!(
            "10000 draws: magnitude paths rel {worst_mag:.1e} (≤1e-10), G·T̄−I {worst_inverse:.1e} (≤1e-12), \
             UᵀU−G {worst_gram:.1e} (≤1e-12)"
        ),
    )
}

fn round_trip_calibration() -> Outcome {
    let truth = reference_truth();
    let dirs = fibonacci_directions(24);
    let ds = generate(&TruthScenario::noiseless(truth, dirs.clone())).unwrap();
    let report = fit(&ds, g(), &FitOptions::default()).unwrap();
    let noiseless_err = report
        .params
        .to_array()
        .iter()
        .zip(truth.to_array())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    let sigma = 0.01 * STANDARD_GRAVITY;
    let trials = 20;
    let mut rms_ok = 0;
    let mut angles_ok = 0;
    let mut both_ok = 0;
    let mut worst_angle = 0.0f64;
    for seed in 0..trials {
        let mut sc = TruthScenario::noiseless(truth, dirs.clone());
        sc.noise_std = sigma;
        sc.seed = seed;
        let ds = generate(&sc).unwrap();
        let r = fit(&ds, g(), &FitOptions::default()).unwrap();
        let angle_err = r
            .params
            .angles
            .to_array()
            .iter()
            .zip(truth.angles.to_array())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        worst_angle = worst_angle.max(angle_err);
        let rms_pass = r.residual_rms <= 1.5 * sigma;
        let angle_pass = angle_err < 5e-3;
        rms_ok += rms_pass as usize;
        angles_ok += angle_pass as usize;
        both_ok += (rms_pass && angle_pass) as usize;
    }
    let needed = (0.95 * trials as f64).ceil() as usize;
    outcome(
        report.converged && noiseless_err < 1e-6 && both_ok >= needed,
        format!(
            "noiseless max |Δp| = {noiseless_err:.1e} (<1e-6); noisy σ=0.01g: RMS ok {rms_ok}/{trials}, \
             angles < 5e-3 rad {angles_ok}/{trials}, both {both_ok}/{trials} (need {needed}), worst angle err {worst_angle:.2e}"
        ),
    )
}

fn degeneracy() -> Outcome {
    let ortho = AxisAngles::<f64>::orthogonal();
    let id = Mat3::identity();
    let matrices = [
        gram_matrix(&ortho),
        tbar_matrix(&ortho),
        orthonormalization_matrix(&ortho),
    ];
    let worst_matrix = matrices
        .iter()
        .map(|m| m.max_abs_diff(&id))
        .fold(0.0, f64::max);

    let mut params = reference_truth();
    params.angles = ortho;
    let rng = CounterRng::new(77, 0);
    let mut worst_correct = 0.0f64;
    let mut worst_err = 0.0f64;
    for i in 0..1_000u64 {
        let raw = Vec3::new(
            rng.uniform_range_at(3 * i, -40.0, 40.0),
            rng.uniform_range_at(3 * i + 1, -40.0, 40.0),
            rng.uniform_range_at(3 * i + 2, -40.0, 40.0),
        );
        let calibrated = params.measured(raw);
        worst_correct = worst_correct.max(correct_sample(raw, &params).max_abs_diff(calibrated));
        worst_err = worst_err.max(abs_error(raw, &ortho).unwrap());
    }
    outcome(
        worst_matrix <= 1e-12 && worst_correct <= 1e-12 && worst_err <= 1e-12,
        format!(
            "matrices vs I {worst_matrix:.1e}, correct_sample vs calibrated {worst_correct:.1e}, abs_error {worst_err:.1e}"
        ),
    )
}

fn histogram_jump() -> Outcome {
    let spec = HistogramSpec {
        sampling: SamplingSpec::reference(1_000_000),
        bins: 60,
        range_max: Some(0.035),
    };
    let h = histogram(&spec).unwrap();
    let centre = |i: usize| 0.5 * (h.edges[i] + h.edges[i + 1]);
    let bins = 0..h.counts.len();
    let gap_min = bins
        .clone()
        .filter(|&i| (0.0145..=0.0155).contains(&centre(i)))
        .map(|i| h.counts[i])
        .min()
        .unwrap();
    let left_peak = bins
        .clone()
        .filter(|&i| centre(i) < 0.0145)
        .map(|i| h.counts[i])
        .max()
        .unwrap();
    let right_peak = bins
        .filter(|&i| centre(i) > 0.0155)
        .map(|i| h.counts[i])
        .max()
        .unwrap();
    let pass =
        (gap_min as f64) < 0.25 * left_peak as f64 && (gap_min as f64) < 0.25 * right_peak as f64;
    outcome(
        pass,
        format!(
            "min count in [1.45%, 1.55%] = {gap_min}, left peak = {left_peak}, right peak = {right_peak} \
             (need min < 25% of each peak)"
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("problem 1 reproduction", problem1_reproduction),
        ("optimum-point check", optimum_point),
        ("problem 2 reproduction", problem2_reproduction),
        ("cross-consistency P1 = g·P2", cross_consistency),
        ("formula-equivalence suite", formula_equivalence),
        ("round-trip calibration", round_trip_calibration),
        ("degeneracy suite", degeneracy),
        ("histogram jump", histogram_jump),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let o = check();
        failed += !o.pass as usize;
        println!(
            "[{}] {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
