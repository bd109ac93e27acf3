//! Command-line runner for the volume-product verifiers.
//!
//! Exit status: 0 when every emitted report passed, 1 when any failed,
//! 2 on configuration errors.

mod config;
mod tasks;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{FileConfig, RunOpts, Settings};
use tasks::{CliError, GenerateOpts, VerifyKind};

#[derive(Parser)]
#[command(
    name = "santalo",
    version,
    about = "Numerical checks of volume-product inequalities for log-concave densities and star bodies"
)]
struct Cli {
    /// JSON file with run defaults; flags override it field by field.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verifier over the given instances.
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// Apply a transform to each instance and write the result.
    #[command(subcommand)]
    Transform(TransformCmd),
    /// Search for a distinguished point of an instance.
    #[command(subcommand)]
    Search(SearchCmd),
    /// Write seeded random instances to files.
    Generate(GenerateOpts),
    /// Emit plot-ready CSV for a parameter sweep.
    PlotData(PlotOpts),
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// Centered product bound for a density.
    Functional(RunOpts),
    /// Volume product of a star body, by the direct and functional routes.
    Star(RunOpts),
    /// Split bound at a prescribed mass fraction.
    Split(RunOpts),
    /// Split bound on a median hyperplane.
    Median(RunOpts),
    /// Half-line pair bound on the nonnegative axis.
    Lemma(RunOpts),
    /// Tilted-product identity for a constructed dual pair.
    Shift(RunOpts),
}

#[derive(Subcommand)]
enum TransformCmd {
    /// Polar (log-conjugate) transform of each density instance.
    Polar(RunOpts),
}

#[derive(Subcommand)]
enum SearchCmd {
    /// Translation minimizing the product of mass and polar mass.
    #[command(name = "santalo-point")]
    SantaloPoint(RunOpts),
}

#[derive(Args)]
struct PlotOpts {
    /// Quantity to sweep: `lambda` or `resolution`.
    #[arg(long)]
    sweep: String,
    #[command(flatten)]
    run: RunOpts,
}

fn init_threads() {
    if let Ok(text) = std::env::var("SANTALO_THREADS") {
        if let Ok(n) = text.trim().parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let resolve = |opts: &RunOpts| Settings::resolve(opts, &file);
    match &cli.command {
        Command::Verify(cmd) => {
            let (kind, opts) = match cmd {
                VerifyCmd::Functional(o) => (VerifyKind::Functional, o),
                VerifyCmd::Star(o) => (VerifyKind::Star, o),
                VerifyCmd::Split(o) => (VerifyKind::Split, o),
                VerifyCmd::Median(o) => (VerifyKind::Median, o),
                VerifyCmd::Lemma(o) => (VerifyKind::Lemma, o),
                VerifyCmd::Shift(o) => (VerifyKind::Shift, o),
            };
            tasks::run_verify(kind, &resolve(opts)?)
        }
        Command::Transform(TransformCmd::Polar(opts)) => tasks::run_transform(&resolve(opts)?),
        Command::Search(SearchCmd::SantaloPoint(opts)) => tasks::run_search(&resolve(opts)?),
        Command::Generate(opts) => tasks::run_generate(opts),
        Command::PlotData(opts) => tasks::run_plot(&opts.sweep, &resolve(&opts.run)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_threads();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
