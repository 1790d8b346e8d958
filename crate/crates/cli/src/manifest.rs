use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::CliError;

/// Written next to every output file as `<out>.manifest.json`.
#[derive(Debug, Serialize)]
pub struct RunManifest<'a, C: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: &'static str,
    pub inputs: Vec<&'a Path>,
    pub seed: Option<u64>,
    pub output: &'a Path,
    pub config: &'a C,
    /// Not part of the reproducible output.
    pub created_unix: u64,
}

impl<'a, C: Serialize> RunManifest<'a, C> {
    pub fn new(subcommand: &'static str, output: &'a Path, config: &'a C) -> Self {
        Self {
            tool: "ldsim",
            version: env!("CARGO_PKG_VERSION"),
            subcommand,
            inputs: Vec::new(),
            seed: None,
            output,
            config,
            created_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        }
    }

    pub fn input(mut self, path: &'a Path) -> Self {
        self.inputs.push(path);
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }
}

pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

/// Writes `body` to `out` (plus its manifest) or to stdout when `out` is `None`.
pub fn emit<'a, C: Serialize + 'a>(
    out: Option<&'a Path>,
    body: &str,
    manifest: impl FnOnce(&'a Path) -> RunManifest<'a, C>,
) -> Result<(), CliError> {
    match out {
        None => {
            print!("{body}");
            Ok(())
        }
        Some(path) => {
            std::fs::write(path, body).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            let text = serde_json::to_string_pretty(&manifest(path)).expect("manifest serializes");
            let side = manifest_path(path);
            std::fs::write(&side, text + "\n").map_err(|e| CliError::Input(format!("{}: {e}", side.display())))
        }
    }
}
