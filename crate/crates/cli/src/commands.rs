use accelcal::calibration::MIN_POSES;
use accelcal::error_analysis::{
    domain_cloud, histogram, solve_problem1, solve_problem2, Comparison, ErrorProblemResult,
    HistogramSpec, SamplingSpec, SearchOptions, REFERENCE_ANGLES,
};
use accelcal::synthetic::{fibonacci_directions, generate, TruthScenario};
use accelcal::{
    fit, AngleBounds, AxisAnglesD, CalibrationParamsD, CorrectionTransform, FitOptionsD, GravityD,
    PoseDatasetD, Vec3d,
};
use serde_json::json;

use crate::error::{CliError, CliResult};
use crate::io::{csv_failure, read_samples, samples_to_csv, write_atomic, Sink};
use crate::params_file::ParamsFile;
use crate::{
    Analyze, CalibrateArgs, Cli, Command, CorrectArgs, DomainsArgs, Format, Global, HistogramArgs,
    SamplingArgs, SearchArgs, Side, SimulateArgs,
};

pub fn parse_triple(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected three comma-separated numbers, got {s:?}"));
    }
    let mut out = [0.0; 3];
    for (slot, p) in out.iter_mut().zip(parts) {
        *slot = p
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| format!("{p:?} is not a finite number"))?;
    }
    Ok(out)
}

pub fn parse_angles(s: &str) -> Result<[f64; 3], String> {
    if s.eq_ignore_ascii_case("orthogonal") {
        Ok([std::f64::consts::FRAC_PI_2; 3])
    } else {
        parse_triple(s)
    }
}

pub fn run(cli: &Cli) -> CliResult<()> {
    let g = &cli.global;
    match &cli.command {
        Command::Calibrate(args) => calibrate(g, args),
        Command::Correct(args) => correct(g, args),
        Command::Analyze(Analyze::MaxError(args)) => max_error(g, args),
        Command::Analyze(Analyze::RelativeError(args)) => {
            relative_error(g, &args.search, args.box_g)
        }
        Command::Histogram(args) => cmd_histogram(g, args),
        Command::Domains(args) => domains(g, args),
        Command::Simulate(args) => simulate(g, args),
    }
}

fn gravity(g: &Global) -> CliResult<GravityD> {
    GravityD::new(g.g).map_err(CliError::from_flags)
}

fn bounds(g: &Global) -> CliResult<AngleBounds<f64>> {
    AngleBounds::new(g.angle_tol).map_err(CliError::from_flags)
}

fn angles_from(a: [f64; 3], g: &Global) -> CliResult<AxisAnglesD> {
    AxisAnglesD::within(a[0], a[1], a[2], &bounds(g)?).map_err(CliError::from_flags)
}

fn json_line(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serialises");
    s.push('\n');
    s
}

fn fmt3(v: [f64; 3]) -> String {
    format!("{}, {}, {}", v[0], v[1], v[2])
}

fn calibrate(g: &Global, args: &CalibrateArgs) -> CliResult<()> {
    let out = g.output.as_deref().ok_or_else(|| {
        CliError::Usage("calibrate needs --output PATH for the params file".into())
    })?;
    let gravity = gravity(g)?;
    bounds(g)?;
    if args.tolerance.is_nan() || args.tolerance <= 0.0 {
        return Err(CliError::Usage("--tolerance must be positive".into()));
    }
    let rows = read_samples(&args.poses)?;
    match rows.len() {
        0 => {
            return Err(CliError::Malformed(format!(
                "{}: no pose rows",
                args.poses.display()
            )))
        }
        n if n < MIN_POSES => {
            return Err(CliError::Usage(format!(
                "{n} poses given, at least {MIN_POSES} required"
            )));
        }
        _ => {}
    }
    let dataset = PoseDatasetD::new(rows).map_err(CliError::from_input)?;
    let options = FitOptionsD {
        max_iterations: args.max_iterations,
        tolerance: args.tolerance,
        restarts: args.restarts,
        seed: g.seed,
        angle_tolerance: g.angle_tol,
        ..FitOptionsD::default()
    };
    let report = fit(&dataset, gravity, &options).map_err(CliError::from_input)?;
    let file = ParamsFile::new(&report.params, gravity.value()).with_fit(&report, dataset.len());
    write_atomic(out, file.to_json().as_bytes())?;

    let text = match g.format {
        Format::Json => json_line(&json!({
            "params": file,
            "condition": report.condition,
            "restart": report.restart,
            "output": out.display().to_string(),
        })),
        Format::Text => {
            let p = &report.params;
            format!(
                "poses: {}\nconverged: {} after {} iterations\nresidual rms: {} m/s²\ns: {}\nb: {}\n\
                 angles (rad): {}\nparams written to {}\n",
                dataset.len(),
                report.converged,
                report.iterations,
                report.residual_rms,
                fmt3(p.shift.to_array()),
                fmt3(p.scale.to_array()),
                fmt3(p.angles.to_array()),
                out.display()
            )
        }
    };
    Sink::Stdout.write(text.as_bytes())?;
    if report.converged {
        Ok(())
    } else {
        Err(CliError::NotConverged(format!(
            "stopped after {} iterations; best parameters written to {}",
            report.iterations,
            out.display()
        )))
    }
}

fn correct(g: &Global, args: &CorrectArgs) -> CliResult<()> {
    let params = ParamsFile::read(&args.params)?.to_params(&bounds(g)?)?;
    let transform = CorrectionTransform::new(&params);
    let rows = read_samples(&args.recording)?;
    let corrected: Vec<Vec3d> = rows.iter().map(|&r| transform.apply(r)).collect();
    Sink::from_option(g.output.as_deref()).write(&samples_to_csv(&corrected)?)
}

fn search_options(args: &SearchArgs) -> CliResult<SearchOptions> {
    if args.grid_points < 2 || args.refine_top == 0 {
        return Err(CliError::Usage(
            "--grid-points must be ≥ 2 and --refine-top ≥ 1".into(),
        ));
    }
    Ok(SearchOptions {
        grid_points: args.grid_points,
        refine_top: args.refine_top,
        ..SearchOptions::default()
    })
}

fn report_problem(
    g: &Global,
    name: &str,
    r: &ErrorProblemResult<f64>,
    text_value: String,
) -> CliResult<()> {
    let [phi, psi, theta] = r.angles.to_array();
    let text = match g.format {
        Format::Json => json_line(&json!({
            "problem": name,
            "max_value": r.max_value,
            "argmax": r.argmax.to_array(),
            "angles_rad": {"phi": phi, "psi": psi, "theta": theta},
            "evaluations": r.evaluations,
        })),
        Format::Text => format!(
            "{text_value}\nargmax: {}\nangles (rad): {}\nevaluations: {}\n",
            fmt3(r.argmax.to_array()),
            fmt3(r.angles.to_array()),
            r.evaluations
        ),
    };
    Sink::from_option(g.output.as_deref()).write(text.as_bytes())
}

fn max_error(g: &Global, args: &SearchArgs) -> CliResult<()> {
    let r = solve_problem1(gravity(g)?, g.angle_tol, &search_options(args)?)
        .map_err(CliError::from_flags)?;
    report_problem(
        g,
        "max-error",
        &r,
        format!("max absolute error: {} m/s²", r.max_value),
    )
}

fn relative_error(g: &Global, args: &SearchArgs, box_g: f64) -> CliResult<()> {
    let h = box_g * gravity(g)?.value();
    let r = solve_problem2(h, g.angle_tol, &search_options(args)?).map_err(CliError::from_flags)?;
    report_problem(
        g,
        "relative-error",
        &r,
        format!(
            "max relative error: {} ({}%)",
            r.max_value,
            r.max_value * 100.0
        ),
    )
}

fn sampling(g: &Global, args: &SamplingArgs) -> CliResult<SamplingSpec<f64>> {
    Ok(SamplingSpec {
        angles: angles_from(args.angles.unwrap_or(REFERENCE_ANGLES), g)?,
        half_width: args.half_width,
        samples: args.samples,
        seed: g.seed,
    })
}

/// Prints a run summary to standard output when the CSV went to a file.
fn summary(g: &Global, value: serde_json::Value, text: String) -> CliResult<()> {
    if g.output.is_none() {
        return Ok(());
    }
    let out = match g.format {
        Format::Json => json_line(&value),
        Format::Text => text,
    };
    Sink::Stdout.write(out.as_bytes())
}

fn cmd_histogram(g: &Global, args: &HistogramArgs) -> CliResult<()> {
    let spec = HistogramSpec {
        sampling: sampling(g, &args.sampling)?,
        bins: args.bins,
        range_max: args.range_max,
    };
    let h = histogram(&spec).map_err(CliError::from_flags)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["bin_low", "bin_high", "count"])
        .map_err(csv_failure)?;
    for (i, c) in h.counts.iter().enumerate() {
        w.write_record([
            h.edges[i].to_string(),
            h.edges[i + 1].to_string(),
            c.to_string(),
        ])
        .map_err(csv_failure)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Malformed(e.to_string()))?;
    Sink::from_option(g.output.as_deref()).write(&bytes)?;
    summary(
        g,
        json!({"bins": h.counts.len(), "kept": h.kept, "discarded": h.discarded, "overflow": h.overflow}),
        format!(
            "{} bins, {} samples kept, {} discarded, {} above range\n",
            h.counts.len(),
            h.kept,
            h.discarded,
            h.overflow
        ),
    )
}

fn domains(g: &Global, args: &DomainsArgs) -> CliResult<()> {
    let comparison = match args.side {
        Side::Le => Comparison::AtMost,
        Side::Ge => Comparison::AtLeast,
    };
    let spec = sampling(g, &args.sampling)?;
    let cloud = domain_cloud(args.threshold, comparison, &spec, args.max_points)
        .map_err(CliError::from_flags)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["x", "y", "z", "rel_error"])
        .map_err(csv_failure)?;
    for (p, e) in &cloud.points {
        w.write_record([
            p.x.to_string(),
            p.y.to_string(),
            p.z.to_string(),
            e.to_string(),
        ])
        .map_err(csv_failure)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Malformed(e.to_string()))?;
    Sink::from_option(g.output.as_deref()).write(&bytes)?;
    summary(
        g,
        json!({"matched": cloud.matched, "written": cloud.points.len(), "kept": cloud.kept}),
        format!(
            "{} of {} samples matched, {} written\n",
            cloud.matched,
            cloud.kept,
            cloud.points.len()
        ),
    )
}

fn simulate(g: &Global, args: &SimulateArgs) -> CliResult<()> {
    if args.poses == 0 {
        return Err(CliError::Usage("--poses must be at least 1".into()));
    }
    let gravity = gravity(g)?;
    let params = CalibrationParamsD::new(
        Vec3d::from_array(args.shift),
        Vec3d::from_array(args.scale),
        angles_from(args.angles, g)?,
    )
    .map_err(CliError::from_flags)?;
    let scenario = TruthScenario {
        params,
        gravity,
        directions: fibonacci_directions(args.poses),
        noise_std: args.noise,
        seed: g.seed,
    };
    let dataset = generate(&scenario).map_err(CliError::from_flags)?;
    if let Some(path) = &args.truth {
        write_atomic(
            path,
            ParamsFile::new(&params, gravity.value())
                .to_json()
                .as_bytes(),
        )?;
    }
    Sink::from_option(g.output.as_deref()).write(&samples_to_csv(&dataset.samples)?)
}
