//! Scenario runner: reads a scenario file, runs one task of the broken ray
//! toolkit and writes its artifacts.

pub mod artifacts;
pub mod config;
pub mod tasks;

use std::path::{Path, PathBuf};

pub use artifacts::Artifacts;
pub use config::{Scenario, Task};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("computation failed: {0}")]
    Compute(#[from] brt_core::Error),
    #[error("io error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Compute(_) | CliError::Io(_) => 1,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub task: Task,
    pub out_dir: PathBuf,
    pub pass: bool,
    pub metrics: serde_json::Value,
}

/// Loads `config`, runs `task` (or the scenario's own task when `None`) and
/// writes the artifacts. Nothing is written unless the computation succeeds.
pub fn execute(task: Option<Task>, config: &Path, opts: &RunOptions) -> Result<Outcome, CliError> {
    let mut scenario = Scenario::load(config)?;
    if let Some(seed) = opts.seed {
        scenario.seed = seed;
    }
    let task = match (task, scenario.task) {
        (Some(t), Some(s)) if t != s => {
            return Err(CliError::Config(format!(
                "scenario {:?} is a {} scenario, not {}",
                scenario.name,
                s.name(),
                t.name()
            )))
        }
        (Some(t), _) | (None, Some(t)) => t,
        (None, None) => {
            return Err(CliError::Config(
                "scenario has no `task`; use a task subcommand".into(),
            ))
        }
    };
    log::info!(
        "running {} scenario {:?} with seed {}",
        task.name(),
        scenario.name,
        scenario.seed
    );
    let artifacts = tasks::run(&scenario, task)?;
    let out_dir = opts
        .out
        .clone()
        .or_else(|| scenario.output.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(&scenario.name));
    artifacts.write(&out_dir)?;
    log::info!(
        "wrote {} files to {}",
        artifacts.files.len() + 1,
        out_dir.display()
    );
    Ok(Outcome {
        task,
        out_dir,
        pass: artifacts.pass,
        metrics: artifacts.metrics,
    })
}
