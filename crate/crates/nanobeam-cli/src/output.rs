//! Deterministic CSV and JSON writers.
//!
//! Every file starts with a header block naming the code version, the config
//! hash, and the master seed; re-running with the same inputs reproduces each
//! file byte for byte. Numbers are written in scientific notation with eight
//! significant digits and '.' as the decimal separator.

use std::fs;
use std::path::PathBuf;

use serde_json::Value;

use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone)]
pub struct Writer {
    pub out_dir: PathBuf,
    pub config_hash: String,
    pub seed: u64,
    pub write_csv: bool,
    pub write_json: bool,
}

impl Writer {
    pub fn new(
        out_dir: &str,
        config_hash: &str,
        seed: u64,
        write_csv: bool,
        write_json: bool,
    ) -> Result<Self, CliError> {
        fs::create_dir_all(out_dir)?;
        Ok(Self {
            out_dir: PathBuf::from(out_dir),
            config_hash: config_hash.to_string(),
            seed,
            write_csv,
            write_json,
        })
    }

    fn header(&self) -> String {
        format!(
            "# nanobeam {VERSION}\n# config_hash {}\n# seed {}\n",
            self.config_hash, self.seed
        )
    }

    /// Writes `<name>.csv` with the standard header block.
    pub fn csv(
        &self,
        name: &str,
        columns: &[&str],
        rows: &[Vec<String>],
    ) -> Result<Option<PathBuf>, CliError> {
        if !self.write_csv {
            return Ok(None);
        }
        let mut text = self.header();
        text.push_str(&columns.join(","));
        text.push('\n');
        for row in rows {
            debug_assert_eq!(row.len(), columns.len());
            text.push_str(&row.join(","));
            text.push('\n');
        }
        let path = self.out_dir.join(format!("{name}.csv"));
        fs::write(&path, text)?;
        Ok(Some(path))
    }

    /// Writes `<name>.json` wrapping `data` with the standard meta fields.
    pub fn json(&self, name: &str, data: Value) -> Result<Option<PathBuf>, CliError> {
        if !self.write_json {
            return Ok(None);
        }
        let doc = serde_json::json!({
            "meta": {
                "version": VERSION,
                "config_hash": self.config_hash,
                "seed": self.seed,
            },
            "data": data,
        });
        let mut text = serde_json::to_string_pretty(&doc)
            .map_err(|e| CliError::Config(format!("serialization failed: {e}")))?;
        text.push('\n');
        let path = self.out_dir.join(format!("{name}.json"));
        fs::write(&path, text)?;
        Ok(Some(path))
    }
}

/// Eight significant digits, scientific, stable across runs.
pub fn sci8(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x == 0.0 {
        return "0.0000000e0".to_string(); // collapses -0.0 as well
    }
    format!("{x:.7e}")
}

/// Compact energy tag for file names, e.g. `1e-7` or `-2.12e-7`.
pub fn energy_tag(e: f64) -> String {
    format!("{e:e}")
}

pub fn file_stem(prefix: &str, case_name: &str, energy: Option<f64>) -> String {
    match energy {
        Some(e) => format!("{prefix}_case{case_name}_{}", energy_tag(e)),
        None => format!("{prefix}_case{case_name}"),
    }
}

