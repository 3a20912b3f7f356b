//! `accelcal`: calibrate accelerometers with non-orthogonal axes, correct
//! recordings, and analyse the error of ignoring axis misalignment.
//!
//! Raw pose and recording files are in sensor units; corrected output and
//! error magnitudes are in m/s².

mod commands;
mod error;
mod io;
mod params_file;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "accelcal",
    version,
    about = "Accelerometer calibration with non-orthogonal axes"
)]
#[command(
    after_help = "Raw files are CSV with header ax,ay,az in sensor units; corrected output is in m/s².\n\
Exit codes: 0 success, 1 usage, 2 malformed input, 3 ill-posed dataset, 4 fit did not converge."
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Gravitational acceleration, m/s²
    #[arg(long = "g", global = true, default_value_t = accelcal::geometry::STANDARD_GRAVITY)]
    pub g: f64,

    /// Allowed relative deviation of each axis angle from π/2
    #[arg(long, global = true, default_value_t = accelcal::geometry::DEFAULT_ANGLE_TOLERANCE)]
    pub angle_tol: f64,

    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,

    /// Destination of the command's main output (standard output if omitted)
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit calibration parameters to static poses (writes the params file to --output)
    Calibrate(CalibrateArgs),
    /// Convert a raw recording to orthonormal accelerations, m/s²
    Correct(CorrectArgs),
    /// Worst-case error of treating the axes as orthogonal
    #[command(subcommand)]
    Analyze(Analyze),
    /// Histogram of the relative error over a sampled cube (CSV bin_low,bin_high,count)
    Histogram(HistogramArgs),
    /// Sampled points on one side of a relative-error threshold (CSV x,y,z,rel_error)
    Domains(DomainsArgs),
    /// Synthetic pose readings from known parameters
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// Pose file, CSV with header ax,ay,az
    pub poses: PathBuf,

    #[arg(long, default_value_t = 200)]
    pub max_iterations: usize,

    /// Stop when the step or gradient ∞-norm falls below this
    #[arg(long, default_value_t = 1e-10)]
    pub tolerance: f64,

    /// Jittered extra starts drawn from --seed
    #[arg(long, default_value_t = 0)]
    pub restarts: usize,
}

#[derive(Debug, Args)]
pub struct CorrectArgs {
    /// Params file written by `calibrate`
    #[arg(long)]
    pub params: PathBuf,

    /// Raw recording, CSV with header ax,ay,az
    pub recording: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Analyze {
    /// Largest absolute error, m/s², over accelerations of magnitude g
    MaxError(SearchArgs),
    /// Largest relative error over a box of accelerations
    RelativeError(RelativeArgs),
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// Grid points per search dimension
    #[arg(long, default_value_t = 25)]
    pub grid_points: usize,

    /// Best grid cells refined by the simplex method
    #[arg(long, default_value_t = 10)]
    pub refine_top: usize,
}

#[derive(Debug, Args)]
pub struct RelativeArgs {
    #[command(flatten)]
    pub search: SearchArgs,

    /// Half-width of the acceleration box, in units of g
    #[arg(long = "box", default_value_t = 16.0)]
    pub box_g: f64,
}

#[derive(Debug, Args)]
pub struct SamplingArgs {
    /// Axis angles phi,psi,theta in radians, or `orthogonal`
    #[arg(long, value_parser = commands::parse_angles, allow_hyphen_values = true)]
    pub angles: Option<[f64; 3]>,

    /// Half-width of the sampled cube
    #[arg(long, default_value_t = accelcal::error_analysis::DEFAULT_HALF_WIDTH)]
    pub half_width: f64,

    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,
}

#[derive(Debug, Args)]
pub struct HistogramArgs {
    #[command(flatten)]
    pub sampling: SamplingArgs,

    #[arg(long, default_value_t = 60)]
    pub bins: usize,

    /// Upper edge of the last bin (defaults to the largest observed error)
    #[arg(long)]
    pub range_max: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Side {
    /// rel_error ≤ threshold
    Le,
    /// rel_error ≥ threshold
    Ge,
}

#[derive(Debug, Args)]
pub struct DomainsArgs {
    #[command(flatten)]
    pub sampling: SamplingArgs,

    /// Relative-error threshold, e.g. 0.014 for 1.4 %
    #[arg(long)]
    pub threshold: f64,

    #[arg(long, value_enum)]
    pub side: Side,

    /// Thin the cloud to at most this many points
    #[arg(long)]
    pub max_points: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 24)]
    pub poses: usize,

    /// Standard deviation of additive noise per raw component, sensor units
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,

    /// Bias s1,s2,s3 in sensor units
    #[arg(long, value_parser = commands::parse_triple, allow_hyphen_values = true, default_value = "0.1,-0.2,0.05")]
    pub shift: [f64; 3],

    /// Scale b1,b2,b3
    #[arg(long, value_parser = commands::parse_triple, default_value = "1.01,0.99,1.02")]
    pub scale: [f64; 3],

    /// Axis angles phi,psi,theta in radians, or `orthogonal`
    #[arg(long, value_parser = commands::parse_angles, default_value = "1.53938,1.60221,1.60221")]
    pub angles: [f64; 3],

    /// Also write the true parameters as a params file
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let label = match e {
                CliError::Usage(_) => "usage error",
                CliError::Malformed(_) => "malformed input",
                CliError::IllPosed(_) => "ill-posed dataset",
                CliError::NotConverged(_) => "not converged",
            };
            eprintln!("accelcal: {label}: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn command_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn global_flags_after_subcommand() {
        let cli = Cli::try_parse_from([
            "accelcal",
            "analyze",
            "max-error",
            "--angle-tol",
            "0.01",
            "--format",
            "json",
        ])
        .unwrap();
        assert_eq!(cli.global.angle_tol, 0.01);
        assert_eq!(cli.global.format, Format::Json);
    }

    #[test]
    fn negative_triples_parse() {
        let cli = Cli::try_parse_from(["accelcal", "simulate", "--shift", "-1,-2,-3"]).unwrap();
        let Command::Simulate(args) = cli.command else {
            panic!()
        };
        assert_eq!(args.shift, [-1.0, -2.0, -3.0]);
    }
}
