use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::jcora::Solution;

use super::sweep::{ResultRow, ResultsTable, SweepSpec};

pub const RESULTS_FILE: &str = "results.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const CONSTRAINTS_FILE: &str = "constraints.csv";
pub const METADATA_FILE: &str = "metadata.json";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Metadata {
    pub package: String,
    pub version: String,
    pub spec: SweepSpec,
    pub rows: usize,
    pub failures: Vec<(String, String, u64, String)>,
}

fn csv_err(e: csv::Error) -> ModelError {
    ModelError::Io(std::io::Error::other(e))
}

fn write_csv<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for it in items {
        w.serialize(it).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the per-row CSV plus the summary, constraint detail and metadata
/// sidecar into `dir`. Returns the path of the per-row CSV.
pub fn emit_results(table: &ResultsTable, spec: &SweepSpec, dir: &Path) -> Result<PathBuf> {
    if table.rows.is_empty() {
        return Err(ModelError::Config("nothing to emit: empty results table".into()));
    }
    fs::create_dir_all(dir)?;
    let results = dir.join(RESULTS_FILE);
    write_csv(&results, &table.rows)?;
    write_csv(&dir.join(SUMMARY_FILE), &table.aggregates)?;
    write_csv(&dir.join(CONSTRAINTS_FILE), &table.constraints)?;
    let meta = Metadata {
        package: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        spec: spec.clone(),
        rows: table.rows.len(),
        failures: table.failures.clone(),
    };
    let json = serde_json::to_string_pretty(&meta).map_err(|e| ModelError::Parse(e.to_string()))?;
    fs::write(dir.join(METADATA_FILE), json)?;
    Ok(results)
}

pub fn read_results(path: &Path) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    r.deserialize().map(|row| row.map_err(csv_err)).collect()
}

/// A solved scenario as written by the CLI.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionFile {
    pub seed: u64,
    pub algorithm: String,
    pub solution: Solution,
}

impl SolutionFile {
    pub fn write(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self).map_err(|e| ModelError::Parse(e.to_string()))?;
        fs::write(path, json)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        serde_json::from_str(&fs::read_to_string(path)?).map_err(|e| ModelError::Parse(e.to_string()))
    }
}
