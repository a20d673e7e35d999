//! `supershift-lab`: runs evolution, supershift, verification and kernel
//! audit experiments from a TOML config or inline flags.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod output;
pub mod run;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::{ExperimentConfig, ExperimentKind, Overrides};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] supershift_core::Error),
}

/// Exit status: 0 success, 1 invalid input or runtime error, 2 a check failed.
pub mod exit {
    pub const OK: i32 = 0;
    pub const ERROR: i32 = 1;
    pub const CHECK_FAILED: i32 = 2;
}

#[derive(Debug, Parser)]
#[command(name = "supershift-lab", version, about = "Schrödinger evolution of supershift initial data")]
pub struct Cli {
    /// Repeat for more detail (info, debug, trace).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ψ(t,x) on a grid: CSV, gnuplot table and manifest.
    Evolve(CommonArgs),
    /// Distances between evolved F_n and the evolved target wave.
    Supershift(SupershiftArgs),
    /// PDE residual, small-time limit, closed-form and quadrature checks.
    Verify(CommonArgs),
    /// Sampled audit of the kernel hypotheses.
    GreensAudit(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// TOML experiment config; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// e.g. free, electric:c=1, harmonic:omega=1, poschl-teller:l=2
    #[arg(long)]
    pub potential: Option<String>,
    /// e.g. plane:k=3, const:re=1, cos:k=1, superosc:n=20,k=3
    #[arg(long)]
    pub initial: Option<String>,
    /// Time grid start:stop:count.
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<String>,
    /// Space grid start:stop:count.
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<String>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub angle: Option<f64>,
    #[arg(long)]
    pub max_panels: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output file stem.
    #[arg(long)]
    pub prefix: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct SupershiftArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Target frequency κ.
    #[arg(long = "k", allow_hyphen_values = true)]
    pub kappa: Option<f64>,
    /// Sequence orders, comma separated.
    #[arg(long = "n", value_delimiter = ',')]
    pub ns: Option<Vec<u32>>,
    /// Weight C of the initial-data metric.
    #[arg(long)]
    pub metric_c: Option<f64>,
}

impl CommonArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            config: self.config.clone(),
            potential: self.potential.clone(),
            initial: self.initial.clone(),
            t: self.t.clone(),
            x: self.x.clone(),
            tol: self.tol,
            angle: self.angle,
            max_panels: self.max_panels,
            out: self.out.clone(),
            prefix: self.prefix.clone(),
            ..Default::default()
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("SUPERSHIFT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("SUPERSHIFT_THREADS must be a positive integer, got `{raw}`")))?;
    // a pool built earlier in this process is kept
    if rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
        log::debug!("global thread pool already initialised");
    }
    Ok(())
}

/// Resolves the config and runs one experiment.
pub fn execute(command: &Command) -> Result<run::RunSummary, CliError> {
    configure_threads()?;
    let (kind, overrides) = match command {
        Command::Evolve(a) => (ExperimentKind::Evolve, a.overrides()),
        Command::Verify(a) => (ExperimentKind::Verify, a.overrides()),
        Command::GreensAudit(a) => (ExperimentKind::GreensAudit, a.overrides()),
        Command::Supershift(a) => (
            ExperimentKind::Supershift,
            Overrides {
                kappa: a.kappa,
                ns: a.ns.clone(),
                metric_c: a.metric_c,
                ..a.common.overrides()
            },
        ),
    };
    let cfg = ExperimentConfig::resolve(kind, &overrides)?;
    log::info!("running {} for {}", kind.name(), cfg.potential.potential()?.label());
    match kind {
        ExperimentKind::Evolve => run::evolve(&cfg),
        ExperimentKind::Supershift => run::supershift(&cfg),
        ExperimentKind::Verify => run::verify(&cfg),
        ExperimentKind::GreensAudit => run::greens_audit(&cfg),
    }
}

/// Parses `args`, runs and returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::ERROR } else { exit::OK };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    match execute(&cli.command) {
        Ok(summary) => {
            for p in &summary.outputs {
                println!("wrote {}", p.display());
            }
            if summary.pass {
                println!("{}", summary.message);
                exit::OK
            } else {
                eprintln!("check failed: {}", summary.message);
                exit::CHECK_FAILED
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit::ERROR
        }
    }
}
