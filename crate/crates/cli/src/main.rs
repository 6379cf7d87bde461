use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use velatt::harness::{self, ScenarioConfig, SEED_ENV};
use velatt::Error;

/// Benchmark harness for velocity-aided tilt and attitude observers.
#[derive(Parser, Debug)]
#[command(name = "velatt", version, about)]
struct Cli {
    /// Overrides the noise seed of the loaded scenario.
    #[arg(long, global = true, env = SEED_ENV)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the ground truth and measurement stream of a scenario.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the estimator bank; writes the run record, report and a plotting script.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rank estimators across one or more saved reports.
    Compare {
        #[arg(required = true)]
        reports: Vec<PathBuf>,
    },
    /// Run the stability property suite on the configured gains.
    StabilityCheck {
        #[arg(long)]
        config: PathBuf,
    },
}

const EXIT_CONFIG: u8 = 1;
const EXIT_SUITE: u8 = 2;

fn load(path: &PathBuf, seed: Option<u64>) -> Result<ScenarioConfig, Error> {
    let mut cfg = ScenarioConfig::load(path)?;
    if let Some(seed) = seed {
        cfg.set_seed(seed);
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Simulate { config, out } => {
            let cfg = load(&config, cli.seed)?;
            let path = harness::cmd_simulate(&cfg, &out)?;
            println!("wrote {}", path.display());
        }
        Command::Run { config, out } => {
            let cfg = load(&config, cli.seed)?;
            let report = harness::cmd_run(&cfg, &out)?;
            print!("{}", report.to_table());
            println!("wrote {}", out.display());
        }
        Command::Compare { reports } => {
            let ranked = harness::cmd_compare(&reports)?;
            print!("{}", harness::ranking_table(&ranked));
        }
        Command::StabilityCheck { config } => {
            let cfg = load(&config, cli.seed)?;
            let report = harness::stability_check(&cfg)?;
            print!("{}", report.to_table());
            if !report.passed() {
                eprintln!("stability suite failed");
                return Ok(EXIT_SUITE);
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    // clap exits with 2 on usage errors, which is reserved for suite failures here.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}
