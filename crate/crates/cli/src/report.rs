//! Gates, report files and the manifest.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GateStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, Serialize)]
pub struct Gate {
    pub name: String,
    pub status: GateStatus,
    pub value: Option<f64>,
    pub threshold: Option<f64>,
    pub detail: Option<String>,
}

impl Gate {
    /// Passes when `value <= threshold`; NaN fails.
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        let status = if value <= threshold { GateStatus::Pass } else { GateStatus::Fail };
        Self { name: name.into(), status, value: Some(value), threshold: Some(threshold), detail: None }
    }

    pub fn flag(name: impl Into<String>, ok: bool, detail: impl Into<String>) -> Self {
        let status = if ok { GateStatus::Pass } else { GateStatus::Fail };
        Self { name: name.into(), status, value: None, threshold: None, detail: Some(detail.into()) }
    }

    pub fn failed(name: impl Into<String>, detail: impl Into<String>) -> Self {
        Self::flag(name, false, detail)
    }

    pub fn skipped(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Self { name: name.into(), status: GateStatus::Skipped, value: None, threshold: None, detail: Some(reason.into()) }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone)]
pub struct Artifact {
    /// File name relative to the output directory.
    pub name: String,
    pub format: Format,
    pub body: String,
}

impl Artifact {
    pub fn json<T: Serialize>(name: impl Into<String>, value: &T) -> Self {
        let mut body = serde_json::to_string_pretty(value).expect("report values serialize");
        body.push('\n');
        Self { name: name.into(), format: Format::Json, body }
    }

    pub fn csv(name: impl Into<String>, body: String) -> Self {
        Self { name: name.into(), format: Format::Csv, body }
    }
}

/// CSV with a header row; every float is written with 17 significant digits.
pub fn csv_table(header: &[&str], rows: &[Vec<CsvCell>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            match cell {
                CsvCell::Int(v) => write!(out, "{v}").expect("string write"),
                CsvCell::Float(v) => write!(out, "{v:.16e}").expect("string write"),
            }
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Copy)]
pub enum CsvCell {
    Int(i64),
    Float(f64),
}

impl From<f64> for CsvCell {
    fn from(v: f64) -> Self {
        CsvCell::Float(v)
    }
}

impl From<usize> for CsvCell {
    fn from(v: usize) -> Self {
        CsvCell::Int(v as i64)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FileRecord {
    pub path: String,
    pub format: Format,
    pub bytes: usize,
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        write!(s, "{b:02x}").expect("string write");
        s
    })
}

/// Writes the artifacts of one format (or all, with `None`) into `dir`, in the given order.
pub fn emit_report(dir: &Path, artifacts: &[Artifact], format: Option<Format>) -> Result<Vec<FileRecord>, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Output(format!("{}: {e}", dir.display())))?;
    let mut records = Vec::new();
    for a in artifacts.iter().filter(|a| format.is_none_or(|f| f == a.format)) {
        let path = dir.join(&a.name);
        std::fs::write(&path, a.body.as_bytes()).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
        records.push(FileRecord {
            path: a.name.clone(),
            format: a.format,
            bytes: a.body.len(),
            sha256: sha256_hex(a.body.as_bytes()),
        });
    }
    Ok(records)
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub name: String,
    pub task: &'static str,
    pub seed: Option<u64>,
    pub status: GateStatus,
    pub gates: Vec<Gate>,
    pub files: Vec<FileRecord>,
}

impl Manifest {
    pub fn passed(&self) -> bool {
        self.status == GateStatus::Pass
    }
}

/// Overall status: fail if any gate failed, otherwise pass.
pub fn overall(gates: &[Gate]) -> GateStatus {
    if gates.iter().any(|g| g.status == GateStatus::Fail) { GateStatus::Fail } else { GateStatus::Pass }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_uses_seventeen_digits() {
        let s = csv_table(&["nu", "norm"], &[vec![1usize.into(), 0.1f64.into()]]);
        assert_eq!(s, "nu,norm\n1,1.0000000000000001e-1\n");
    }

    #[test]
    fn sha_of_empty_input() {
        assert_eq!(sha256_hex(b""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }

    #[test]
    fn nan_gate_fails() {
        assert_eq!(Gate::at_most("x", f64::NAN, 1.0).status, GateStatus::Fail);
        assert_eq!(overall(&[Gate::skipped("a", "r"), Gate::at_most("b", 0.5, 1.0)]), GateStatus::Pass);
    }
}
