//! `emcm`: command-line front end of the bearing model.
//!
//! Every command loads a machine configuration (the built-in reference
//! machine unless `--config` is given), runs, and only then writes its CSV
//! tables and `summary.json` into `--out`. A failed run writes nothing.
//!
//! Exit codes: 0 success, 1 usage or I/O, 2 schema violation, 3 contact,
//! 4 amplifier limit, 5 numerical failure.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use amb_emcm::EmcmError;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Parser)]
#[command(name = "emcm", version, about = "Equivalent magnetic circuit model of a combination 5-DOF magnetic bearing")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Serialize)]
pub struct GlobalArgs {
    /// Machine configuration file (TOML). Defaults to the reference machine.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", default_value = "emcm-out")]
    #[serde(skip)]
    pub out: PathBuf,
    /// Gauss-Legendre order per direction for sector poles.
    #[arg(long, global = true, value_name = "N")]
    pub quad_order: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one pose and excitation: fluxes.csv, wrench.csv.
    Solve(SolveArgs),
    /// Wrench along one pose coordinate or command: sweep.csv.
    Sweep(SweepArgs),
    /// Current and position stiffness of all five axes: stiffness.csv.
    Stiffness(StiffnessArgs),
    /// Relative change of one wrench component over a two-axis grid: coupling.csv.
    Coupling(CouplingArgs),
    /// Bias flux densities against PM ring thickness: pm_study.csv.
    PmStudy(PmStudyArgs),
    /// Fit pole sizes and PM strength to the design targets: calibration.csv, calibrated.toml.
    Calibrate(CalibrateArgs),
    /// Virtual stiffness measurement: rig.csv, stiffness.csv.
    Measure(MeasureArgs),
    /// Print the configuration schema.
    PrintSchema,
}

/// Pose in mm and degrees.
#[derive(Debug, Clone, Copy, Args, Serialize)]
pub struct PoseArgs {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true, value_name = "MM")]
    pub x: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true, value_name = "MM")]
    pub y: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true, value_name = "MM")]
    pub z: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true, value_name = "DEG")]
    pub theta_x: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true, value_name = "DEG")]
    pub theta_y: f64,
}

/// Control commands: axial coil current in A, the others in ampere-turns.
#[derive(Debug, Clone, Copy, Args, Serialize)]
pub struct ExcitationArgs {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true, value_name = "A")]
    pub i_axial: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true, value_name = "AT")]
    pub tilt_x: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true, value_name = "AT")]
    pub tilt_y: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true, value_name = "AT")]
    pub radial_x: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true, value_name = "AT")]
    pub radial_y: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct SolveArgs {
    #[command(flatten)]
    pub pose: PoseArgs,
    #[command(flatten)]
    pub excitation: ExcitationArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    /// x, y, z, theta_x, theta_y, i_axial, tilt_x, tilt_y, radial_x or radial_y.
    #[arg(long)]
    pub axis: String,
    /// Range start in mm, deg or AT. Defaults to the axis's usual range.
    #[arg(long, allow_negative_numbers = true)]
    pub min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub max: Option<f64>,
    #[arg(long, default_value_t = 21)]
    pub samples: usize,
    #[command(flatten)]
    pub pose: PoseArgs,
    #[command(flatten)]
    pub excitation: ExcitationArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct StiffnessArgs {
    /// Sweep samples per regression.
    #[arg(long, default_value_t = 11)]
    pub samples: usize,
    /// Also list central-difference values at the centre.
    #[arg(long)]
    pub fd: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaselineArg {
    /// Both axes at zero.
    Origin,
    /// Same first-axis value, second axis at zero.
    FirstAxis,
}

#[derive(Debug, Args, Serialize)]
pub struct CouplingArgs {
    /// Pose coordinate or command name, as for `sweep`.
    #[arg(long)]
    pub first: String,
    #[arg(long)]
    pub second: String,
    #[arg(long, allow_negative_numbers = true)]
    pub first_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub first_max: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub second_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub second_max: Option<f64>,
    /// Grid points per axis.
    #[arg(long, default_value_t = 9)]
    pub samples: usize,
    /// fx_n, fy_n, fz_n, mx_nm or my_nm.
    #[arg(long, default_value = "fz_n")]
    pub component: String,
    #[arg(long, value_enum, default_value_t = BaselineArg::Origin)]
    pub baseline: BaselineArg,
}

#[derive(Debug, Args, Serialize)]
pub struct PmStudyArgs {
    /// Upper ring thickness range, mm. Defaults to 0.5 to 1.5 times the configured value.
    #[arg(long)]
    pub upper_min: Option<f64>,
    #[arg(long)]
    pub upper_max: Option<f64>,
    #[arg(long)]
    pub lower_min: Option<f64>,
    #[arg(long)]
    pub lower_max: Option<f64>,
    #[arg(long, default_value_t = 5)]
    pub samples: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct CalibrateArgs {
    /// Lift target in N. Defaults to the flywheel weight.
    #[arg(long)]
    pub weight: Option<f64>,
    /// Axial pole bias flux density, T.
    #[arg(long, default_value_t = 0.8)]
    pub axial_b: f64,
    /// Radial pole bias flux density, T.
    #[arg(long, default_value_t = 0.55)]
    pub radial_b: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    /// Hold the position, record force against current.
    Current,
    /// Displace the rotor, separate the current term with the measured K_i.
    Position,
}

#[derive(Debug, Args, Serialize)]
pub struct MeasureArgs {
    /// x, y, z, theta_x or theta_y.
    #[arg(long)]
    pub axis: String,
    #[arg(long, value_enum, default_value_t = ModeArg::Current)]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 50)]
    pub probes: usize,
    /// Probe range: force (N, N·m) in current mode, displacement (mm, deg)
    /// in position mode. Defaults to the axis's linear range.
    #[arg(long, allow_negative_numbers = true)]
    pub min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub max: Option<f64>,
    /// Channel noise, percent of full scale.
    #[arg(long, default_value_t = 0.0, value_name = "PCT")]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Position-run controller gain, A/m or A/rad.
    #[arg(long, default_value_t = 0.0)]
    pub gain: f64,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read config {}: {source}", path.display())]
    ConfigRead { path: PathBuf, source: std::io::Error },
    #[error("cannot write {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Model(#[from] EmcmError),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } => 1,
            CliError::ConfigRead { .. } => 2,
            CliError::Model(e) => match e.root() {
                EmcmError::Schema { .. } => 2,
                EmcmError::Contact { .. } | EmcmError::NonPositiveGap { .. } => 3,
                EmcmError::AmplifierLimit { .. } => 4,
                EmcmError::InvalidInput(_) => 1,
                _ => 5,
            },
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("emcm: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
