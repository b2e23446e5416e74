//! Command-line front end.
//!
//! Exit codes: 0 success, 1 a verification suite found violations,
//! 2 usage, domain or I/O error, 3 numeric failure.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::ratedistortion::{self, SourceSpec};
use crate::realization;
use crate::record;
use crate::verify::{self, VerificationReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFICATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "qrd", version, about = "Qubit rate-distortion curves, verification suites and stream simulation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sweep a curve and write one row per grid point.
    Curve {
        #[arg(value_enum)]
        which: CurveKind,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run a verification suite, or all of them.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Simulate ancilla measurements on a stream of source qubits.
    Simulate {
        /// Angle between the two diagonal elements, in (0, pi/2).
        #[arg(long, allow_negative_numbers = true)]
        delta: f64,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CurveKind {
    /// Entropy-distortion lower bound, columns theta,d,S.
    S1,
    /// Rate-distortion curve.
    R1,
    /// Optimal angle alpha against delta.
    Alpha,
    /// Classical side-information rate.
    Classical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Lemma1,
    Lemma2,
    Theorem1,
    Perturbation,
    Search,
    Blocks,
    Isotropic,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Lemma1 => "lemma1",
            Suite::Lemma2 => "lemma2",
            Suite::Theorem1 => "theorem1",
            Suite::Perturbation => "perturbation",
            Suite::Search => "search",
            Suite::Blocks => "blocks",
            Suite::Isotropic => "isotropic",
            Suite::All => "all",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Text,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Probability of |0> in the source, in [0.5, 1).
    #[arg(long, default_value_t = 0.5)]
    pub p0: f64,
    /// Number of grid points.
    #[arg(long, default_value_t = 101)]
    pub points: usize,
    /// Bracket width for the angle solver.
    #[arg(long, default_value_t = ratedistortion::DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Trials per verification suite.
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    /// Samples in a simulated stream.
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: u64,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

/// Validated settings shared by every command.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub src: SourceSpec,
    pub points: usize,
    pub tol: f64,
    pub seed: u64,
    pub trials: u64,
    pub samples: u64,
    pub output_path: Option<PathBuf>,
    pub format: Format,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io { path: PathBuf, message: String },
    Library(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } => EXIT_USAGE,
            CliError::Library(Error::Domain(_)) => EXIT_USAGE,
            CliError::Library(_) => EXIT_NUMERIC,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Io { path, message } => write!(f, "cannot write {}: {message}", path.display()),
            CliError::Library(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Library(e)
    }
}

impl RunConfig {
    pub fn from_args(args: &CommonArgs, allowed: &[Format], default: Format) -> Result<Self, CliError> {
        let format = args.format.unwrap_or(default);
        if !allowed.contains(&format) {
            return Err(CliError::Usage(format!("format {format:?} is not available for this command")));
        }
        if args.points < 2 {
            return Err(CliError::Usage(format!("--points must be at least 2, got {}", args.points)));
        }
        if !(args.tol > 0.0 && args.tol <= 1e-3) {
            return Err(CliError::Usage(format!("--tol must lie in (0, 1e-3], got {}", args.tol)));
        }
        if args.trials < 1 {
            return Err(CliError::Usage("--trials must be at least 1".into()));
        }
        Ok(Self {
            src: SourceSpec::new(args.p0)?,
            points: args.points,
            tol: args.tol,
            seed: args.seed,
            trials: args.trials,
            samples: args.samples,
            output_path: args.out.clone(),
            format,
        })
    }

    fn emit(&self, text: &str) -> Result<(), CliError> {
        match &self.output_path {
            Some(path) => fs::write(path, text).map_err(|e| CliError::Io { path: path.clone(), message: e.to_string() }),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(text.as_bytes())
                    .map_err(|e| CliError::Io { path: PathBuf::from("<stdout>"), message: e.to_string() })
            }
        }
    }
}

pub fn run_curve(cfg: &RunConfig, which: CurveKind) -> Result<(), CliError> {
    let text = match which {
        CurveKind::S1 => {
            let rows = ratedistortion::s1_curve(&cfg.src, cfg.points)?;
            match cfg.format {
                Format::Json => record::s1_json(&rows)?,
                _ => record::s1_csv(&rows),
            }
        }
        CurveKind::R1 | CurveKind::Alpha | CurveKind::Classical => {
            let points = ratedistortion::sweep_curve_tol(&cfg.src, cfg.points, cfg.tol)?;
            match cfg.format {
                Format::Json => record::to_json(&points)?,
                _ => record::curve_csv(&points),
            }
        }
    };
    cfg.emit(&text)
}

/// Runs the suite and returns whether every report passed.
pub fn run_verify(cfg: &RunConfig, suite: Suite) -> Result<bool, CliError> {
    let reports: Vec<VerificationReport> = verify::run_named(suite.name(), &cfg.src, cfg.trials, cfg.seed)?;
    let text = match cfg.format {
        Format::Json => record::to_json(&reports)?,
        _ => reports.iter().map(VerificationReport::to_text).collect::<Vec<_>>().join("\n"),
    };
    cfg.emit(&text)?;
    Ok(reports.iter().all(|r| r.passed))
}

pub fn run_simulate(cfg: &RunConfig, delta: f64) -> Result<(), CliError> {
    let circ = realization::build_circuit(delta, &cfg.src)?;
    let result = realization::simulate_stream(&circ, &cfg.src, cfg.samples, cfg.seed)?;
    let text = match cfg.format {
        Format::Json => record::to_json(&result)?,
        _ => result.to_text(),
    };
    cfg.emit(&text)
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Curve { which, common } => {
            let cfg = RunConfig::from_args(&common, &[Format::Csv, Format::Json], Format::Csv)?;
            run_curve(&cfg, which)?;
            Ok(EXIT_OK)
        }
        Command::Verify { suite, common } => {
            let cfg = RunConfig::from_args(&common, &[Format::Text, Format::Json], Format::Text)?;
            Ok(if run_verify(&cfg, suite)? { EXIT_OK } else { EXIT_VERIFICATION })
        }
        Command::Simulate { delta, common } => {
            let cfg = RunConfig::from_args(&common, &[Format::Text, Format::Json], Format::Text)?;
            run_simulate(&cfg, delta)?;
            Ok(EXIT_OK)
        }
    }
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("qrd: {e}");
            e.exit_code()
        }
    }
}
