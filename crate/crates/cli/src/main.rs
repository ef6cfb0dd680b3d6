use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use phasegate_cli::commands::{cmd_pipeline, cmd_reconstruct, cmd_report, cmd_simulate, COUNTS_FILE};
use phasegate_cli::{Emit, Result, RunConfig};

#[derive(Parser)]
#[command(name = "phasegate", version, about = "Feed-forward phase gate: simulation and process tomography")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate coincidence counts and write counts.csv
    Simulate(Common),
    /// Reconstruct Choi and output-state matrices from a count CSV
    Reconstruct {
        #[command(flatten)]
        common: Common,
        /// Count table to read (defaults to <out>/counts.csv)
        #[arg(long)]
        counts: Option<PathBuf>,
    },
    /// Score reconstructed matrices and print the fidelity tables
    Report(Common),
    /// Simulate, reconstruct and report in one run
    Pipeline(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    no_feed_forward: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated subset of counts,choi,states,report
    #[arg(long)]
    emit: Option<String>,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = Some(seed);
        }
        if self.no_feed_forward {
            cfg.feed_forward = false;
        }
        if let Some(out) = &self.out {
            cfg.output_dir = out.clone();
        }
        if let Some(list) = &self.emit {
            cfg.emit = Emit::parse_list(list)?;
        }
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(common) => {
            let path = cmd_simulate(&common.resolve()?)?;
            println!("wrote {}", path.display());
        }
        Command::Reconstruct { common, counts } => {
            let cfg = common.resolve()?;
            let counts = counts.unwrap_or_else(|| cfg.output_dir.join(COUNTS_FILE));
            let results = cmd_reconstruct(&cfg, &counts)?;
            for r in &results {
                println!(
                    "phi = {:.6}  iterations = {}  log-likelihood = {:.6e}",
                    r.phase.radians(),
                    r.process.iterations,
                    r.process.log_likelihood
                );
            }
        }
        Command::Report(common) => {
            let cfg = common.resolve()?;
            let report = cmd_report(&cfg.output_dir)?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            print!("{}", report.to_text());
        }
        Command::Pipeline(common) => {
            let out = cmd_pipeline(&common.resolve()?)?;
            print!("{}", out.report.to_text());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
