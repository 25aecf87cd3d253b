use std::path::PathBuf;
use std::process::ExitCode;

use brt_cli::{execute, RunOptions, Task};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "brt", version, about = "Broken ray transform experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Scenario file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides the scenario's `output`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; outputs do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Overrides the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, short, global = true)]
    verbose: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Trace one broken ray or star orbit.
    Trace,
    /// Broken ray transform along random lines, checked against the unfolded Radon transform.
    Forward,
    /// Assemble a sinogram from broken ray measurements.
    Sinogram,
    /// Reconstruct a cone phantom by filtered backprojection or CGLS.
    Reconstruct,
    /// Invert periodic broken ray data on the cube.
    PeriodicCube,
    /// Invert periodic broken ray data on the spherical octant.
    Octant,
    /// Verify a tube, disk or cylinder null space construction.
    NullCheck,
    /// Probe injectivity of the attenuated cylinder transform.
    AttProbe,
    /// Run the task named in the scenario.
    Run,
}

impl Command {
    fn task(self) -> Option<Task> {
        Some(match self {
            Command::Trace => Task::Trace,
            Command::Forward => Task::Forward,
            Command::Sinogram => Task::Sinogram,
            Command::Reconstruct => Task::Reconstruct,
            Command::PeriodicCube => Task::PeriodicCube,
            Command::Octant => Task::Octant,
            Command::NullCheck => Task::NullCheck,
            Command::AttProbe => Task::AttProbe,
            Command::Run => return None,
        })
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new()
        .filter_level(if cli.verbose {
            log::LevelFilter::Info
        } else {
            log::LevelFilter::Warn
        })
        .format_timestamp(None)
        .init();
    let Some(config) = cli.config else {
        eprintln!("error: --config is required");
        return ExitCode::from(2);
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: cannot start thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    let opts = RunOptions {
        seed: cli.seed,
        out: cli.out,
    };
    match execute(cli.command.task(), &config, &opts) {
        Ok(outcome) => {
            println!(
                "{} {}: {}",
                outcome.task.name(),
                outcome.out_dir.display(),
                if outcome.pass { "pass" } else { "FAIL" }
            );
            ExitCode::from(if outcome.pass { 0 } else { 3 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
