use std::fs;
use std::path::Path;

use serde_json::{Map, Value};

use crate::CliError;

/// Files produced by a task, held in memory until the task has succeeded.
#[derive(Debug, Clone, Default)]
pub struct Artifacts {
    pub files: Vec<(String, Vec<u8>)>,
    pub metrics: Value,
    pub pass: bool,
}

impl Artifacts {
    pub fn new() -> Self {
        Self {
            files: Vec::new(),
            metrics: Value::Object(Map::new()),
            pass: true,
        }
    }

    pub fn add(&mut self, name: &str, bytes: impl Into<Vec<u8>>) {
        self.files.push((name.to_string(), bytes.into()));
    }

    pub fn metric(&mut self, key: &str, v: impl Into<Value>) {
        if let Value::Object(m) = &mut self.metrics {
            m.insert(key.to_string(), v.into());
        }
    }

    /// Records `value` and fails the run when it exceeds `limit`.
    pub fn check_below(&mut self, key: &str, value: f64, limit: Option<f64>) {
        self.metric(key, value);
        if let Some(limit) = limit {
            let ok = value < limit;
            self.metric(&format!("{key}_threshold"), limit);
            if !ok {
                log::warn!("{key} = {value:e} is not below {limit:e}");
            }
            self.pass &= ok;
        }
    }

    /// Writes every file and then `metrics.json`. Each file goes through a
    /// temporary name so an interrupted write leaves no truncated artifact.
    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        fs::create_dir_all(dir)?;
        let mut metrics = self.metrics.clone();
        if let Value::Object(m) = &mut metrics {
            m.insert("pass".into(), Value::Bool(self.pass));
        }
        let json =
            serde_json::to_string_pretty(&metrics).map_err(|e| CliError::Io(e.to_string()))? + "\n";
        for (name, bytes) in self
            .files
            .iter()
            .map(|(n, b)| (n.as_str(), b.as_slice()))
            .chain([("metrics.json", json.as_bytes())])
        {
            let tmp = dir.join(format!(".{name}.partial"));
            fs::write(&tmp, bytes)?;
            fs::rename(&tmp, dir.join(name))?;
        }
        Ok(())
    }
}
