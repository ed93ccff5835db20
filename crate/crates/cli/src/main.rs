//! Command-line front end: number detection, support recovery, phase-diagram
//! sweeps, lower-bound witnesses, and resolution-limit bound evaluation.
//!
//! Exit codes: 0 success, 1 usage error, 2 numerical failure.

use std::fs::File;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use pointres::detection::{detect_2d, detect_3d, sweep_detect_1d, DetectionResult};
use pointres::geometry::UnitVector;
use pointres::harness::{
    phase_diagram, witness, write_records_csv, PhaseGrid, TrialMode,
};
use pointres::model::{
    bounds, DiscreteMeasure, Measurement, MeasurementOracle, RecordedSamples,
};
use pointres::pencil::matrix_pencil;
use pointres::recovery::{recover_2d, recover_3d, RecoveryResult};
use pointres::spectral::sample_line;
use pointres::Error;

#[derive(Parser)]
#[command(
    name = "pointres",
    about = "Point-source number detection and support recovery from band-limited Fourier data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Detect the number of sources by sweeping singular-value thresholds.
    Detect(DetectArgs),
    /// Recover source locations (and amplitudes in 2D/3D).
    Recover(RecoverArgs),
    /// Run a Monte-Carlo phase-diagram sweep and write the records as CSV.
    Phase(PhaseArgs),
    /// Build a worst-case witness pair below the resolution limit.
    Witness(WitnessArgs),
    /// Evaluate the resolution-limit bound formulas.
    Bounds(BoundsArgs),
}

#[derive(Args)]
struct InputArgs {
    /// JSON measure file; a synthetic noisy oracle is built from it.
    #[arg(long, conflicts_with = "samples")]
    measure: Option<PathBuf>,
    /// CSV of recorded samples (omega_1..omega_k,re,im); replayed verbatim.
    #[arg(long)]
    samples: Option<PathBuf>,
    /// Noise level sigma.
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    /// Cutoff frequency Omega.
    #[arg(long, default_value_t = 1.0)]
    omega: f64,
    /// Seed for the synthetic noise field.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl InputArgs {
    fn load(&self, dim: usize) -> Result<Box<dyn Measurement>, CliError> {
        if let Some(path) = &self.samples {
            let recorded = RecordedSamples::from_csv_reader(File::open(path)?, self.omega)?;
            if recorded.dimension() != dim {
                return Err(CliError::Usage(format!(
                    "sample file has dimension {}, expected {dim}",
                    recorded.dimension()
                )));
            }
            return Ok(Box::new(recorded));
        }
        if let Some(path) = &self.measure {
            let measure = DiscreteMeasure::from_json_reader(File::open(path)?)?;
            if measure.dimension() != dim {
                return Err(CliError::Usage(format!(
                    "measure file has dimension {}, expected {dim}",
                    measure.dimension()
                )));
            }
            let oracle = MeasurementOracle::new(measure, self.omega, self.sigma, self.seed)?;
            return Ok(Box::new(oracle));
        }
        Err(CliError::Usage(
            "either --measure or --samples is required".into(),
        ))
    }
}

#[derive(Args)]
struct DetectArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Ambient dimension.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    dim: u8,
    /// Projection family size for 2D/3D sweeps.
    #[arg(long, default_value_t = 12)]
    n_dirs: usize,
    /// Maximum Hankel order for the sweep.
    #[arg(long, default_value_t = 5)]
    smax: usize,
}

#[derive(Args)]
struct RecoverArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Ambient dimension.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    dim: u8,
    /// Source count.
    #[arg(long)]
    n: usize,
    /// Hankel order (1D) or per-line sweep cap (2D/3D).
    #[arg(long)]
    s: usize,
    /// Projection family size for 2D; outer plane-grid count for 3D.
    #[arg(long, default_value_t = 12)]
    n_dirs: usize,
    /// In-plane family size for 3D.
    #[arg(long, default_value_t = 12)]
    inner_dirs: usize,
    /// Write the JSON result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, ValueEnum)]
enum ModeArg {
    Number,
    Support,
}

impl From<ModeArg> for TrialMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Number => TrialMode::Number,
            ModeArg::Support => TrialMode::Support,
        }
    }
}

#[derive(Args)]
struct PhaseArgs {
    #[arg(long, value_enum)]
    mode: ModeArg,
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    dim: u8,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    omega: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Trials per grid cell.
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 0.3)]
    srf_min: f64,
    #[arg(long, default_value_t = 1.2)]
    srf_max: f64,
    #[arg(long, default_value_t = 10)]
    srf_steps: usize,
    #[arg(long, default_value_t = 1.0)]
    snr_min: f64,
    #[arg(long, default_value_t = 12.0)]
    snr_max: f64,
    #[arg(long, default_value_t = 12)]
    snr_steps: usize,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct WitnessArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    sigma: f64,
    #[arg(long, default_value_t = 1.0)]
    mmin: f64,
    #[arg(long, default_value_t = 1.0)]
    omega: f64,
    #[arg(long, value_enum)]
    mode: ModeArg,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    n: usize,
    /// Dimension (or dimension of the spanning subspace for number bounds).
    #[arg(long, default_value_t = 1)]
    dim: usize,
    #[arg(long, default_value_t = 1.0)]
    omega: f64,
    #[arg(long)]
    sigma: f64,
    #[arg(long, default_value_t = 1.0)]
    mmin: f64,
}

enum CliError {
    Usage(String),
    Numerical(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_)
            | Error::DimensionMismatch { .. }
            | Error::Io(_)
            | Error::Json(_)
            | Error::Csv(_) => CliError::Usage(e.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are successes, anything else is usage
            let benign = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return if benign {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Detect(args) => cmd_detect(args),
        Command::Recover(args) => cmd_recover(args),
        Command::Phase(args) => cmd_phase(args),
        Command::Witness(args) => cmd_witness(args),
        Command::Bounds(args) => cmd_bounds(args),
    }
}

fn detection_json(result: &DetectionResult) -> serde_json::Value {
    json!({
        "count": result.count,
        "per_direction": result.per_direction.iter().map(|d| json!({
            "direction": d.direction.coords().iter().copied().collect::<Vec<f64>>(),
            "count": d.count,
            "order": d.order,
            "singular_values": d.singular_values,
        })).collect::<Vec<_>>(),
    })
}

fn cmd_detect(args: DetectArgs) -> Result<(), CliError> {
    let dim = args.dim as usize;
    let oracle = args.input.load(dim)?;
    let value = match dim {
        1 => {
            let count = sweep_detect_1d(oracle.as_ref(), args.input.sigma, args.smax)?;
            json!({ "count": count })
        }
        2 => detection_json(&detect_2d(
            oracle.as_ref(),
            args.input.sigma,
            args.n_dirs,
            args.smax,
        )?),
        _ => detection_json(&detect_3d(
            oracle.as_ref(),
            args.input.sigma,
            args.n_dirs,
            args.smax,
        )?),
    };
    println!("{}", serde_json::to_string_pretty(&value).unwrap());
    Ok(())
}

fn recovery_json(result: &RecoveryResult) -> serde_json::Value {
    let vec_of = |u: &UnitVector| u.coords().iter().copied().collect::<Vec<f64>>();
    json!({
        "locations": result.locations.iter()
            .map(|l| l.iter().copied().collect::<Vec<f64>>())
            .collect::<Vec<_>>(),
        "amplitudes": result.amplitudes.iter()
            .map(|a| json!({ "re": a.re, "im": a.im }))
            .collect::<Vec<_>>(),
        "residual": result.residual,
        "v1": vec_of(&result.direction_1),
        "v2": vec_of(&result.direction_2),
    })
}

fn cmd_recover(args: RecoverArgs) -> Result<(), CliError> {
    let dim = args.dim as usize;
    let oracle = args.input.load(dim)?;
    let value = match dim {
        1 => {
            let samples = sample_line(oracle.as_ref(), &UnitVector::axis_1d(), args.s)?;
            let result = matrix_pencil(&samples, args.n)?;
            json!({ "locations": result.locations })
        }
        2 => recovery_json(&recover_2d(
            oracle.as_ref(),
            args.n,
            args.input.sigma,
            args.n_dirs,
            args.s,
        )?),
        _ => recovery_json(&recover_3d(
            oracle.as_ref(),
            args.n,
            args.input.sigma,
            args.n_dirs,
            args.inner_dirs,
            args.s,
        )?),
    };
    let text = serde_json::to_string_pretty(&value).unwrap();
    match &args.out {
        Some(path) => std::fs::write(path, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(())
}

fn cmd_phase(args: PhaseArgs) -> Result<(), CliError> {
    let grid = PhaseGrid {
        log10_srf_min: args.srf_min,
        log10_srf_max: args.srf_max,
        srf_steps: args.srf_steps,
        log10_inv_sigma_min: args.snr_min,
        log10_inv_sigma_max: args.snr_max,
        sigma_steps: args.snr_steps,
        trials_per_cell: args.trials,
    };
    let diagram = phase_diagram(
        &grid,
        args.mode.into(),
        args.dim as usize,
        args.n,
        args.omega,
        args.seed,
    )?;
    write_records_csv(File::create(&args.out)?, &diagram.records)?;
    println!("{}", serde_json::to_string_pretty(&diagram.fit).unwrap());
    Ok(())
}

fn cmd_witness(args: WitnessArgs) -> Result<(), CliError> {
    let pair = witness(args.n, args.sigma, args.mmin, args.omega, args.mode.into())?;
    println!("{}", serde_json::to_string_pretty(&pair).unwrap());
    Ok(())
}

fn cmd_bounds(args: BoundsArgs) -> Result<(), CliError> {
    let report = bounds(args.n, args.dim, args.omega, args.sigma, args.mmin)?;
    println!("{}", serde_json::to_string_pretty(&report).unwrap());
    Ok(())
}
