//! Experiment harness around the `macrodim` library: configuration,
//! subcommands and artifact files.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use clap::{Parser, Subcommand};

use config::{ExperimentConfig, Overrides};
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "macrodim", version, about = "Stochastic graph grammars and the scaling dimension")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Overrides,
}

#[derive(Clone, Copy, Debug, Subcommand)]
pub enum Command {
    /// Run replicas and write event logs and a summary.
    Simulate,
    /// Ball-growth profiles and fitted dimension of generated graphs.
    Dimension,
    /// Anchor-cluster size distribution and tail fit per horizon.
    Clusters,
    /// Per-event change of sampled distances.
    Distortion,
    /// Locality, degree bound and reversibility of the grammar.
    Verify,
    /// Cycle test of a rate chain or of the grammar's state chain.
    Reversibility,
    /// Dimension invariance under the dynamics, with side reports.
    Experiment,
}

pub fn execute(command: Command, cfg: &ExperimentConfig) -> Result<commands::Outcome, CliError> {
    if cfg.threads > 0 {
        // Fails harmlessly if the pool already exists.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build_global();
    }
    match command {
        Command::Simulate => commands::cmd_simulate(cfg),
        Command::Dimension => commands::cmd_dimension(cfg),
        Command::Clusters => commands::cmd_clusters(cfg),
        Command::Distortion => commands::cmd_distortion(cfg),
        Command::Verify => commands::cmd_verify(cfg),
        Command::Reversibility => commands::cmd_reversibility(cfg),
        Command::Experiment => commands::cmd_experiment(cfg),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = ExperimentConfig::load(&cli.flags).and_then(|cfg| execute(cli.command, &cfg));
    match result {
        Ok(outcome) => {
            for p in &outcome.written {
                println!("wrote {}", p.display());
            }
            println!("{}", outcome.message);
            if outcome.passed {
                0
            } else {
                eprintln!("error: check failed: {}", outcome.message);
                2
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
