use std::collections::BTreeMap;
use std::path::Path;

use isoasym::fields::{ResidualReport, Tolerance};
use isoasym::{Error, ErrorKind};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::verify::Convergence;

pub const EXIT_OK: i32 = 0;
pub const EXIT_TOLERANCE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

pub fn exit_code(kind: ErrorKind) -> i32 {
    match kind {
        ErrorKind::Input => EXIT_INPUT,
        ErrorKind::Numerical => EXIT_NUMERICAL,
        ErrorKind::Tolerance => EXIT_TOLERANCE,
    }
}

pub fn status(code: i32) -> &'static str {
    match code {
        EXIT_OK => "ok",
        EXIT_TOLERANCE => "tolerance_failure",
        EXIT_INPUT => "input_error",
        _ => "numerical_failure",
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> std::io::Result<String> {
    Ok(sha256_hex(&std::fs::read(path)?))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub core_version: String,
    /// SHA-256 of the canonical effective configuration.
    pub config_sha256: String,
    /// SHA-256 of every input file, by path.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub inputs: BTreeMap<String, String>,
}

impl Provenance {
    pub fn new(config_sha256: String) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            core_version: isoasym::VERSION.to_string(),
            config_sha256,
            inputs: BTreeMap::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyInfo {
    pub name: String,
    pub params: BTreeMap<String, f64>,
    pub notes: BTreeMap<String, String>,
    pub dualized: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Reported but not part of the exit status.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub informational: bool,
    /// Equations above tolerance.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<String>,
    pub report: ResidualReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Holonomy {
    pub name: String,
    /// Opposite corners `[i0, j0, i1, j1]` of the loop.
    pub rectangle: [usize; 4],
    pub defect: f64,
    pub threshold: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub provenance: Provenance,
    pub config: serde_json::Value,
    pub status: String,
    pub exit_code: i32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyInfo>,
    pub checks: Vec<Check>,
    pub holonomy: Vec<Holonomy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convergence: Option<Convergence>,
    /// Written files relative to the output directory, in creation order.
    pub outputs: Vec<String>,
}

impl RunReport {
    pub fn new(command: &str, provenance: Provenance, config: serde_json::Value) -> Self {
        Self {
            command: command.to_string(),
            provenance,
            config,
            status: status(EXIT_OK).to_string(),
            exit_code: EXIT_OK,
            error: None,
            family: None,
            checks: Vec::new(),
            holonomy: Vec::new(),
            convergence: None,
            outputs: Vec::new(),
        }
    }

    pub fn check(&mut self, name: &str, report: ResidualReport, tol: Tolerance) -> bool {
        let failures = report.failures(tol);
        let passed = failures.is_empty();
        self.checks.push(Check { name: name.to_string(), passed, informational: false, failures, report });
        passed
    }

    pub fn inform(&mut self, name: &str, report: ResidualReport, tol: Tolerance) {
        self.check(name, report, tol);
        if let Some(c) = self.checks.last_mut() {
            c.informational = true;
        }
    }

    pub fn find(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed || c.informational) && self.holonomy.iter().all(|h| h.passed)
    }

    /// Sets status and exit code: the error's class if there is one, otherwise
    /// tolerance failure when any check failed.
    pub fn finish(&mut self, error: Option<&Error>) {
        let code = match error {
            Some(e) => {
                self.error = Some(e.to_string());
                exit_code(e.kind())
            }
            None if self.all_passed() => EXIT_OK,
            None => EXIT_TOLERANCE,
        };
        self.exit_code = code;
        self.status = status(code).to_string();
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}
