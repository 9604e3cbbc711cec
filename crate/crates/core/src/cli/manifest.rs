use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Everything needed to regenerate a set of CSV outputs.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunManifest {
    pub command: String,
    /// Arguments after the program name, as passed.
    pub args: Vec<String>,
    pub parameters: serde_json::Value,
    pub version: String,
    pub outputs: Vec<PathBuf>,
    pub wall_clock_seconds: f64,
}

impl RunManifest {
    /// `out.csv` → `out.manifest.json`.
    pub fn path_for(csv: &Path) -> PathBuf {
        csv.with_extension("manifest.json")
    }

    pub fn write_next_to_outputs(&self) -> Result<Vec<PathBuf>> {
        let text = serde_json::to_string_pretty(self)?;
        let mut written = Vec::new();
        for out in self.outputs.iter().filter(|p| p.extension().is_some_and(|e| e == "csv")) {
            let path = Self::path_for(out);
            std::fs::write(&path, &text)?;
            written.push(path);
        }
        Ok(written)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}
