mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pullback_core::Error;

#[derive(Parser)]
#[command(name = "pullback-lab", version, about = "Numerical experiments with Thurston pullback maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ramification portraits
    #[command(subcommand)]
    Portrait(PortraitCmd),
    /// The moduli-space endomorphism G_f
    #[command(subcommand)]
    Gf(GfCmd),
    /// Postcritically finite certification
    #[command(subcommand)]
    Pcf(PcfCmd),
    /// The cubic family through 3z^2/(2z^3+1)
    #[command(subcommand)]
    Cubic(CubicCmd),
    /// Decomposition certificates f = g o s
    #[command(subcommand)]
    Constsigma(ConstsigmaCmd),
    /// Basin images
    #[command(subcommand)]
    Render(RenderCmd),
}

#[derive(Subcommand)]
pub enum PortraitCmd {
    /// Parse and validate a portrait file
    Validate { portrait: PathBuf },
}

#[derive(Subcommand)]
pub enum GfCmd {
    /// Evaluate G_f at a point
    Eval(GfEvalArgs),
    /// Check that det Jac G_f / J is constant
    JacCheck(JacCheckArgs),
    /// Newton search for fixed points of g_f
    FixedPoints(FixedPointArgs),
}

#[derive(Args)]
pub struct GfEvalArgs {
    pub portrait: PathBuf,
    /// Coordinates a_1..a_{n+1} as "re,im" separated by ';' or spaces
    #[arg(long, allow_hyphen_values = true)]
    pub point: String,
    /// Also print the Jacobian matrix, row-major
    #[arg(long)]
    pub jacobian: bool,
}

#[derive(Args)]
pub struct JacCheckArgs {
    pub portrait: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub rng_seed: u64,
    /// Allowed relative spread of the ratio
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
}

#[derive(Args)]
pub struct FixedPointArgs {
    pub portrait: PathBuf,
    #[arg(long, default_value_t = 200)]
    pub seeds: usize,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(long, default_value_t = 0)]
    pub rng_seed: u64,
}

#[derive(Subcommand)]
pub enum PcfCmd {
    /// Certify that a polynomial realises a portrait
    Certify {
        portrait: PathBuf,
        /// Ascending coefficients, "re,im" separated by ';' or spaces
        #[arg(long, allow_hyphen_values = true)]
        poly: String,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
}

#[derive(Subcommand)]
pub enum CubicCmd {
    /// Check the critical-point structure and the moduli diagram on sampled parameters
    Verify {
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        rng_seed: u64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Fit the local degree of y -> x at the basepoint
    LocalDegree {
        #[arg(long, default_value_t = 1e-3)]
        radius: f64,
    },
}

#[derive(Subcommand)]
pub enum ConstsigmaCmd {
    /// Check the hypotheses for a decomposition instance
    Check {
        /// quartic | family:<n> | skinny:<n>,<k>
        #[arg(long, conflicts_with = "custom", required_unless_present = "custom")]
        example: Option<String>,
        /// TOML file with [s], [g] coefficient strings and the list a
        #[arg(long)]
        custom: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
}

#[derive(Subcommand)]
pub enum RenderCmd {
    /// Label pixels by attracting cycle and optionally write a PPM image
    Julia(RenderArgs),
}

#[derive(Args)]
pub struct RenderArgs {
    /// preset:fig1|fig3|fig4 or custom:<file>
    #[arg(long)]
    pub map: String,
    #[arg(long, default_value = "512x512")]
    pub size: String,
    /// cx,cy,width (defaults to the preset viewport)
    #[arg(long, allow_hyphen_values = true)]
    pub viewport: Option<String>,
    #[arg(long, default_value_t = 500)]
    pub max_iter: usize,
    /// Chordal capture radius
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 8)]
    pub max_period: usize,
    /// Draw pixels captured after more than N iterations in black
    #[arg(long)]
    pub slow_threshold: Option<u32>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A command failure: bad input (exit 2) or a failed computation (exit 1).
pub enum Failure {
    Input(String),
    Compute(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NonConvergence { .. }
            | Error::NumericalDegeneracy(_)
            | Error::CorruptFixedPoint { .. }
            | Error::BranchLost { .. } => Failure::Compute(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var("PULLBACKLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .map_err(|_| format!("PULLBACKLAB_THREADS must be a non-negative integer, got `{value}`"))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    let result = match cli.command {
        Command::Portrait(c) => commands::portrait(c),
        Command::Gf(c) => commands::gf(c),
        Command::Pcf(c) => commands::pcf(c),
        Command::Cubic(c) => commands::cubic(c),
        Command::Constsigma(c) => commands::constsigma(c),
        Command::Render(c) => commands::render(c),
    };
    match result {
        Ok(report) => {
            print!("{}", report.render());
            ExitCode::from(if report.passed() { 0 } else { 1 })
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
