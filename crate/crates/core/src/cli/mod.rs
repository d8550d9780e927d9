//! The `soliton-lab` command line.
//!
//! Exit codes: 0 success, 1 verification gate failed, 2 usage or parameter
//! error, 3 numeric failure (step underflow or step limit without blow-up),
//! 4 I/O failure.

mod commands;
mod config;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::flat::CoefficientConvention;

pub use config::parse_config_text;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Gate(String),
    #[error("{0}")]
    Numeric(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Gate(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) | Error::Csv(_) | Error::Json(_) | Error::Profile(_) => {
                CliError::Io(e.to_string())
            }
            _ => CliError::Usage(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "soliton-lab",
    version,
    about = "Numerical laboratory for cohomogeneity-one gradient Ricci solitons",
    allow_negative_numbers = true
)]
pub struct RunConfig {
    /// Flat `key = value` file; flags given on the command line win.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate the flat-fiber soliton system.
    IntegrateFlat(IntegrateFlatArgs),
    /// Integrate the warped-product system over an Einstein fiber.
    IntegrateWarped(IntegrateWarpedArgs),
    /// Closed-form steady solution from the Riccati reduction.
    ClosedForm(ClosedFormArgs),
    /// Random steady or non-steady initial states and their blow-up times.
    ScanBlowup(ScanBlowupArgs),
    /// Series-started Bryant soliton.
    Bryant(BryantArgs),
    /// Hamilton and elliptic identity monitors on a stored profile.
    Verify(VerifyArgs),
    /// Isometry-dimension bounds and verdicts.
    Dims(DimsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConventionArg {
    Corrected,
    AsPrinted,
}

impl From<ConventionArg> for CoefficientConvention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Corrected => CoefficientConvention::Corrected,
            ConventionArg::AsPrinted => CoefficientConvention::AsPrinted,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

/// `a:b`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Span(pub f64, pub f64);

fn parse_span(s: &str) -> Result<Span, String> {
    let (a, b) = s.split_once(':').ok_or("expected START:END")?;
    let a: f64 = a.trim().parse().map_err(|e| format!("start: {e}"))?;
    let b: f64 = b.trim().parse().map_err(|e| format!("end: {e}"))?;
    if !(a.is_finite() && b.is_finite()) || a == b {
        return Err("span ends must be finite and distinct".into());
    }
    Ok(Span(a, b))
}

/// `a:b:N`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec(pub f64, pub f64, pub usize);

fn parse_grid(s: &str) -> Result<GridSpec, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err("expected START:END:POINTS".into());
    }
    let a: f64 = parts[0].trim().parse().map_err(|e| format!("start: {e}"))?;
    let b: f64 = parts[1].trim().parse().map_err(|e| format!("end: {e}"))?;
    let m: usize = parts[2].trim().parse().map_err(|e| format!("points: {e}"))?;
    if !(a.is_finite() && b.is_finite()) || a >= b || m < 2 {
        return Err("grid needs finite START < END and at least 2 points".into());
    }
    Ok(GridSpec(a, b, m))
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        let GridSpec(a, b, m) = *self;
        (0..m)
            .map(|i| {
                if i + 1 == m {
                    b
                } else {
                    a + (b - a) * i as f64 / (m - 1) as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    #[arg(long, default_value_t = 1e-12)]
    pub rtol: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub atol: f64,
    /// Blow-up is declared once max |state| exceeds this value.
    #[arg(long, default_value_t = 1e8)]
    pub blowup_threshold: f64,
    /// Output spacing; without it every accepted step is written.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Attempted steps (accepted plus rejected) before giving up.
    #[arg(long, default_value_t = 1_000_000)]
    pub max_steps: usize,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// State samples as CSV.
    #[arg(long, value_name = "PATH")]
    pub out_csv: Option<PathBuf>,
    /// JSON summary; printed to stdout when absent.
    #[arg(long, value_name = "PATH")]
    pub out_json: Option<PathBuf>,
    /// Reconstructed profile, written as BASE.csv and BASE.json.
    #[arg(long, value_name = "BASE")]
    pub profile_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct IntegrateFlatArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0.0)]
    pub lambda: f64,
    #[arg(long)]
    pub u0: f64,
    /// Fiber log-derivatives u1..u(n-1), comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub u: Vec<f64>,
    /// START:END; integration runs from START towards END.
    #[arg(long, value_parser = parse_span, allow_hyphen_values = true)]
    pub span: Span,
    #[arg(long, value_enum, default_value = "corrected")]
    pub convention: ConventionArg,
    /// Initial warping factors h(START), comma separated (default all 1).
    #[arg(long, value_delimiter = ',')]
    pub h0: Vec<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub f0: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct IntegrateWarpedArgs {
    #[arg(long)]
    pub n: usize,
    /// Einstein constant of the fiber, Ric = mu g.
    #[arg(long)]
    pub mu: f64,
    #[arg(long, default_value_t = 0.0)]
    pub lambda: f64,
    /// Warping function F(START).
    #[arg(long)]
    pub warp: f64,
    /// w = F'/F at START.
    #[arg(long)]
    pub w: f64,
    #[arg(long)]
    pub u0: f64,
    #[arg(long, value_parser = parse_span, allow_hyphen_values = true)]
    pub span: Span,
    #[arg(long, default_value_t = 0.0)]
    pub f0: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ClosedFormArgs {
    #[arg(long)]
    pub u0: f64,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub u: Vec<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub t0: f64,
    /// START:END:POINTS for residuals and profile output; defaults to an
    /// interior window of the domain.
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
    pub grid: Option<GridSpec>,
    /// Use the literal C<0 formula instead of the fitted branch.
    #[arg(long)]
    pub paper_verbatim: bool,
    #[arg(long, value_name = "BASE")]
    pub profile_out: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub out_json: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ScanBlowupArgs {
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.0)]
    pub lambda: f64,
    /// Initial components are drawn uniformly from [-range, range].
    #[arg(long, default_value_t = 1.0)]
    pub range: f64,
    /// Each sample is integrated over [-span, span] from t = 0.
    #[arg(long, default_value_t = 1e3)]
    pub span: f64,
    #[arg(long, value_enum, default_value = "corrected")]
    pub convention: ConventionArg,
    #[arg(long, default_value_t = 1e8)]
    pub blowup_threshold: f64,
    #[arg(long, value_name = "PATH")]
    pub out_json: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BryantArgs {
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    /// Series start parameter.
    #[arg(long, default_value_t = 1e-3)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 50.0)]
    pub t_end: f64,
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub rtol: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub atol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Profile base path (BASE.csv + BASE.json).
    #[arg(long, value_name = "BASE")]
    pub profile: PathBuf,
    /// Largest accepted Hamilton drift or elliptic residual.
    #[arg(long, default_value_t = 1e-6)]
    pub gate: f64,
    #[arg(long, value_name = "PATH")]
    pub out_json: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct DimsArgs {
    /// Manifold dimension.
    #[arg(required_unless_present = "table", conflicts_with = "table")]
    pub n: Option<u64>,
    /// Isometry algebra dimension.
    #[arg(required_unless_present = "table", conflicts_with = "table")]
    pub d: Option<u64>,
    /// Print bounds for n = 3..=N instead of a single verdict.
    #[arg(long, value_name = "N")]
    pub table: Option<u64>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

/// Whether `key` is a long flag of subcommand `sub`, and if it takes a value.
fn flag_kind(sub: &str, key: &str) -> Option<bool> {
    let cmd = RunConfig::command();
    let kind = cmd
        .find_subcommand(sub)?
        .get_arguments()
        .find(|a| a.get_long() == Some(key) && key != "config")
        .map(|a| a.get_action().takes_values());
    kind
}

/// Parses `args` (including the program name), merging a `--config` file.
pub fn parse_config<I, T>(args: I) -> Result<RunConfig, ParseOutcome>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let merged = config::merge_config(args, flag_kind).map_err(ParseOutcome::Error)?;
    RunConfig::try_parse_from(merged).map_err(|e| match e.kind() {
        clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
            ParseOutcome::Info(e.to_string())
        }
        _ => ParseOutcome::Error(CliError::Usage(e.to_string())),
    })
}

/// A parse that produced no runnable configuration.
#[derive(Debug)]
pub enum ParseOutcome {
    /// Help or version text; exit 0.
    Info(String),
    Error(CliError),
}

/// Executes a parsed configuration; JSON for stdout is returned, not printed.
pub fn run(config: &RunConfig) -> Result<Option<String>, CliError> {
    match &config.command {
        Command::IntegrateFlat(a) => commands::integrate_flat(a),
        Command::IntegrateWarped(a) => commands::integrate_warped(a),
        Command::ClosedForm(a) => commands::closed_form(a),
        Command::ScanBlowup(a) => commands::scan_blowup(a),
        Command::Bryant(a) => commands::bryant(a),
        Command::Verify(a) => commands::verify(a),
        Command::Dims(a) => commands::dims(a),
    }
}

/// Full entry point: parse, run, print, and return the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let config = match parse_config(args) {
        Ok(c) => c,
        Err(ParseOutcome::Info(text)) => {
            print!("{text}");
            return 0;
        }
        Err(ParseOutcome::Error(e)) => {
            eprintln!("error: {}", e.to_string().trim_start_matches("error: "));
            return e.exit_code();
        }
    };
    match run(&config) {
        Ok(stdout) => {
            if let Some(text) = stdout {
                print!("{text}");
            }
            0
        }
        Err(CliError::Gate(report)) => {
            print!("{report}");
            eprintln!("error: verification gate failed");
            1
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
