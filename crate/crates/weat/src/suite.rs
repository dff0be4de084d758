//! Suites on disk: a directory of test documents (`*.json` / `*.jsonl`), read
//! in file-name order, or in the order given by an optional `manifest.json`:
//!
//! ```json
//! {"name": "turkish-sample", "tests": ["weat6.jsonl", "weat6_sent.jsonl"], "provenance": {"source": "..."}}
//! ```

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::Value;
use weat_core::testspec::{self, BiasTest, Diagnostic, Severity, TestSuite};

use crate::testfile::{parse_test, TestFileError};

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, thiserror::Error)]
pub enum SuiteError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{}: malformed manifest: {message}", path.display())]
    Manifest { path: PathBuf, message: String },
    #[error("suite has {} error(s):\n{}", .0.len(), .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<FileDiagnostic>),
}

#[derive(Deserialize)]
struct ManifestDoc {
    #[serde(default)]
    name: Option<String>,
    tests: Vec<String>,
    #[serde(default)]
    provenance: BTreeMap<String, Value>,
}

#[derive(Debug, Clone)]
pub struct SuiteFile {
    pub path: PathBuf,
    pub test: BiasTest,
}

/// A diagnostic tied to the files it concerns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileDiagnostic {
    pub severity: Severity,
    pub files: Vec<PathBuf>,
    pub message: String,
}

impl FileDiagnostic {
    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for FileDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.severity)?;
        for (i, p) in self.files.iter().enumerate() {
            let sep = if i + 1 == self.files.len() { ": " } else { ", " };
            write!(f, "{}{sep}", p.display())?;
        }
        f.write_str(&self.message)
    }
}

/// Everything read from a suite directory, including documents that failed to
/// parse.
#[derive(Debug, Default)]
pub struct LoadedSuite {
    pub name: String,
    pub provenance: BTreeMap<String, String>,
    pub files: Vec<SuiteFile>,
    pub failures: Vec<(PathBuf, TestFileError)>,
}

impl LoadedSuite {
    /// Parse failures, per-test validation, duplicate ids, and an empty suite.
    pub fn diagnostics(&self) -> Vec<FileDiagnostic> {
        let mut out: Vec<FileDiagnostic> = self
            .failures
            .iter()
            .map(|(path, err)| FileDiagnostic {
                severity: Severity::Error,
                files: vec![path.clone()],
                message: err.to_string(),
            })
            .collect();
        if self.files.is_empty() && self.failures.is_empty() {
            out.push(FileDiagnostic {
                severity: Severity::Error,
                files: Vec::new(),
                message: "no tests found".into(),
            });
        }
        let mut by_id: HashMap<&str, Vec<PathBuf>> = HashMap::new();
        for f in &self.files {
            by_id.entry(&f.test.id).or_default().push(f.path.clone());
        }
        let mut reported = std::collections::HashSet::new();
        for f in &self.files {
            let id = f.test.id.as_str();
            if by_id[id].len() > 1 && reported.insert(id) {
                out.push(FileDiagnostic {
                    severity: Severity::Error,
                    files: by_id[id].clone(),
                    message: format!("duplicate test id {id:?}"),
                });
            }
            out.extend(testspec::validate(&f.test).into_iter().map(|d: Diagnostic| FileDiagnostic {
                severity: d.severity,
                files: vec![f.path.clone()],
                message: format!("[{}] {}", d.test_id, d.message),
            }));
        }
        out
    }

    /// The suite, provided no document failed to parse and ids are unique.
    /// Warnings do not block; an empty suite is allowed.
    pub fn into_suite(self) -> Result<TestSuite, SuiteError> {
        let blocking: Vec<FileDiagnostic> = self
            .diagnostics()
            .into_iter()
            .filter(|d| d.is_error() && d.message != "no tests found")
            .collect();
        if !blocking.is_empty() {
            return Err(SuiteError::Invalid(blocking));
        }
        let mut suite = TestSuite::new(self.name, self.files.into_iter().map(|f| f.test).collect())
            .expect("duplicate ids are reported above");
        suite.provenance = self.provenance;
        Ok(suite)
    }
}

fn is_test_document(path: &Path) -> bool {
    let ext = path.extension().and_then(|e| e.to_str());
    path.file_name().and_then(|n| n.to_str()) != Some(MANIFEST)
        && matches!(ext, Some("json" | "jsonl"))
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> SuiteError + '_ {
    move |source| SuiteError::Io {
        path: path.to_owned(),
        source,
    }
}

pub fn load_suite(dir: impl AsRef<Path>) -> Result<LoadedSuite, SuiteError> {
    let dir = dir.as_ref();
    let manifest_path = dir.join(MANIFEST);
    let mut loaded = LoadedSuite {
        name: dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default(),
        ..Default::default()
    };

    let paths: Vec<PathBuf> = if manifest_path.is_file() {
        let bytes = fs::read(&manifest_path).map_err(io_err(&manifest_path))?;
        let manifest: ManifestDoc = serde_json::from_slice(&bytes).map_err(|e| SuiteError::Manifest {
            path: manifest_path.clone(),
            message: e.to_string(),
        })?;
        if let Some(name) = manifest.name {
            loaded.name = name;
        }
        loaded.provenance = manifest
            .provenance
            .into_iter()
            .map(|(k, v)| match v {
                Value::String(s) => (k, s),
                other => (k, other.to_string()),
            })
            .collect();
        manifest.tests.iter().map(|t| dir.join(t)).collect()
    } else {
        let mut paths = Vec::new();
        for entry in fs::read_dir(dir).map_err(io_err(dir))? {
            let path = entry.map_err(io_err(dir))?.path();
            if path.is_file() && is_test_document(&path) {
                paths.push(path);
            }
        }
        paths.sort();
        paths
    };

    for path in paths {
        let bytes = fs::read(&path).map_err(io_err(&path))?;
        let stem = path.file_stem().and_then(|s| s.to_str()).map(str::to_owned);
        match parse_test(&bytes, stem.as_deref()) {
            Ok(test) => loaded.files.push(SuiteFile { path, test }),
            Err(err) => loaded.failures.push((path, err)),
        }
    }
    Ok(loaded)
}
