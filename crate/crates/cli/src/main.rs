//! Command-line front end of the `schwarzlab` library.
//!
//! Exit codes: 0 pass, 1 check failure, 2 usage or parse error,
//! 3 inconclusive.

mod commands;
mod output;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use schwarzlab::verdict::Verdict;
use schwarzlab::Error;

use settings::{CommonArgs, RunConfig};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Lib(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 2,
            CliError::Lib(e) => match e {
                Error::Parse { .. }
                | Error::InvalidArgument(_)
                | Error::InvalidDomain(_)
                | Error::InvalidMeasure(_)
                | Error::Io(_) => 2,
                Error::SearchFailed(_) => 1,
                Error::NonConvergence { .. }
                | Error::Resolution(_)
                | Error::Divergent(_)
                | Error::InsufficientSamples { .. } => 3,
                _ => 1,
            },
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Io(m) => write!(f, "io: {m}"),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "schwarzlab", version, about = "Schwarz-integral representability laboratory")]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

/// Where the analytic function comes from.
#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct Source {
    /// Measure description file
    #[arg(long)]
    pub measure: Option<PathBuf>,
    /// Catalog entry name
    #[arg(long)]
    pub catalog: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Boundary samples and disc values of the Schwarz integral of a measure
    Transform {
        #[arg(long)]
        measure: PathBuf,
        /// Comma-separated radii of the disc grid
        #[arg(long, default_value = "0.25,0.5,0.75,0.9")]
        radii: String,
        /// Angles per disc-grid circle
        #[arg(long, default_value_t = 64)]
        angles: usize,
    },
    /// Distribution function m_f(t) with weak-L1 and tail summaries
    Distribution {
        #[command(flatten)]
        source: Source,
    },
    /// Logarithmic determinant profile, I_f and the inequality chain
    Logdet {
        #[command(flatten)]
        source: Source,
        /// Relative slack of the inequality chain
        #[arg(long, default_value_t = 0.05)]
        slack: f64,
    },
    /// Kernel identity sweeps
    Identities(commands::IdentityArgs),
    /// Walk-on-spheres harmonic measure ω(t) of {|z| ≥ t} on the slits
    Wos {
        #[arg(long)]
        domain: PathBuf,
        /// Comma-separated thresholds t
        #[arg(long, required = true)]
        t: String,
        /// Start point as `x,y`
        #[arg(long, default_value = "0,0")]
        z0: String,
        /// Also report the harmonic measure of the sub-segment `c,d` of slit 0
        #[arg(long)]
        segment: Option<String>,
    },
    /// Radius selection for the slit construction
    Construct {
        #[arg(long, default_value_t = 3)]
        generations: usize,
        #[arg(long)]
        cap: Option<f64>,
        /// Walks per batch in the candidate test
        #[arg(long)]
        batch: Option<u64>,
        /// Confidence multiplier of the upper bound
        #[arg(long)]
        sigmas: Option<f64>,
    },
    /// Full condition report on a catalog entry, a measure file or the whole catalog
    Verify {
        #[arg(long, conflicts_with_all = ["measure", "all"])]
        catalog: Option<String>,
        #[arg(long, conflicts_with = "all")]
        measure: Option<PathBuf>,
        #[arg(long)]
        all: bool,
    },
    /// Heavy-tail step-function counterexample
    Counterexample {
        #[arg(long, default_value_t = 8)]
        depth: usize,
        /// Comma-separated exponents for the partial sums
        #[arg(long, default_value = "0.1,0.3,0.5,1,2")]
        p: String,
    },
}

fn run(cli: Cli) -> Result<Verdict, CliError> {
    let cfg = RunConfig::resolve(&cli.common)?;
    match cli.command {
        Command::Transform { measure, radii, angles } => commands::transform(&cfg, &measure, &radii, angles),
        Command::Distribution { source } => commands::distribution(&cfg, &source),
        Command::Logdet { source, slack } => commands::logdet(&cfg, &source, slack),
        Command::Identities(args) => commands::identities(&cfg, &args),
        Command::Wos { domain, t, z0, segment } => commands::wos(&cfg, &domain, &t, &z0, segment.as_deref()),
        Command::Construct { generations, cap, batch, sigmas } => {
            commands::construct(&cfg, generations, cap, batch, sigmas)
        }
        Command::Verify { catalog, measure, all } => {
            commands::verify(&cfg, catalog.as_deref(), measure.as_deref(), all)
        }
        Command::Counterexample { depth, p } => commands::counterexample(&cfg, depth, &p),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(v) => {
            println!("{}", v.as_str());
            ExitCode::from(match v {
                Verdict::Pass => 0,
                Verdict::Fail => 1,
                Verdict::Inconclusive => 3,
            })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
