//! Output directory handling and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use qnn_ihhl::fixtures::sha256_hex;
use serde::Serialize;
use serde_json::{json, Value};

use crate::Format;

#[derive(Debug, Serialize)]
pub struct Artifact {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: Option<String>,
    pub out_dir: String,
    pub seed: u64,
    pub timestamp_unix_s: u64,
    pub artifacts: Vec<Artifact>,
    pub units: Value,
    pub summary: Value,
}

pub struct OutDir {
    dir: PathBuf,
    format: Format,
    artifacts: Vec<Artifact>,
}

impl OutDir {
    pub fn create(dir: &Path, format: Format) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self { dir: dir.to_path_buf(), format, artifacts: Vec::new() })
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.artifacts.push(Artifact { file: name.to_string(), sha256: sha256_hex(bytes) });
        Ok(())
    }

    pub fn write_json<S: Serialize>(&mut self, name: &str, value: &S) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write_bytes(name, text.as_bytes())
    }

    /// Writes a table as `<stem>.csv` or `<stem>.json` depending on `--format`.
    pub fn write_table<R: Serialize>(&mut self, stem: &str, csv: String, rows: &[R]) -> Result<()> {
        match self.format {
            Format::Csv => self.write_bytes(&format!("{stem}.csv"), csv.as_bytes()),
            Format::Json => self.write_json(&format!("{stem}.json"), &rows),
        }
    }

    pub fn finish(self, command: &str, config: Option<&Path>, seed: u64, summary: Value) -> Result<()> {
        let manifest = RunManifest {
            command: command.to_string(),
            config: config.map(|p| p.display().to_string()),
            out_dir: self.dir.display().to_string(),
            seed,
            timestamp_unix_s: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
            artifacts: self.artifacts,
            units: units(),
            summary,
        };
        let text = serde_json::to_string_pretty(&manifest)? + "\n";
        let path = self.dir.join("manifest.json");
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}

/// Units of the unsuffixed numeric columns and keys used in the outputs.
pub fn units() -> Value {
    json!({
        "energy": "MeV",
        "re_E": "MeV",
        "im_E": "MeV",
        "gamma_deg": "degrees",
        "gamma_opt_deg": "degrees",
        "rate": "MeV per radian",
        "residual": "MeV",
        "widths": "fm",
        "range_fm": "fm",
        "depth_mev": "MeV",
        "kinetic_scale": "MeV fm^2",
        "coulomb_strength": "MeV fm",
        "params": "radians",
        "eta": "dimensionless",
        "grad_norm": "MeV per radian"
    })
}
