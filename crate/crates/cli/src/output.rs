use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::Settings;
use crate::CliError;

/// Machine-readable failure description.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorRecord {
    pub kind: &'static str,
    pub exit_code: i32,
    pub message: String,
}

impl From<&CliError> for ErrorRecord {
    fn from(e: &CliError) -> Self {
        Self {
            kind: e.kind(),
            exit_code: e.exit_code(),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    subcommand: &'a str,
    status: &'static str,
    seed: Option<u64>,
    settings: Option<&'a Settings>,
    outputs: &'a [String],
    error: Option<ErrorRecord>,
}

/// Files of one run. Everything except `timing.json` is a pure function of
/// the settings.
#[derive(Debug)]
pub struct Artifacts {
    dir: PathBuf,
    written: Vec<String>,
}

impl Artifacts {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        if !self.written.iter().any(|w| w == name) {
            self.written.push(name.to_string());
        }
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = rcx_core::io::to_json(value)?;
        text.push('\n');
        self.write(name, &text)
    }

    pub fn finish(
        mut self,
        subcommand: &str,
        settings: Option<&Settings>,
        error: Option<&CliError>,
        seconds: f64,
    ) -> Result<(), CliError> {
        let outputs = self.written.clone();
        let manifest = Manifest {
            tool: "rcx",
            version: env!("CARGO_PKG_VERSION"),
            subcommand,
            status: if error.is_some() { "error" } else { "ok" },
            seed: settings.map(|s| s.seed),
            settings,
            outputs: &outputs,
            error: error.map(ErrorRecord::from),
        };
        self.write_json("manifest.json", &manifest)?;
        self.write_json("timing.json", &serde_json::json!({ "wall_seconds": seconds }))
    }
}
