//! Dataset-scale orchestration on top of `strata`: every subcommand returns a
//! JSON summary and a partial-failure flag; `main` maps those to stdout and
//! the exit code.

use std::fmt;
use std::path::Path;

use anyhow::Context;
use serde::Serialize;

pub mod cmd;
pub mod manifest;

pub use manifest::{DatasetManifest, Record, Split, MANIFEST_VERSION};

/// Exit code for a fully successful run.
pub const EXIT_OK: i32 = 0;
/// Some items failed; the rest were written.
pub const EXIT_PARTIAL: i32 = 1;
/// Bad flags, config or inputs; nothing was done.
pub const EXIT_USAGE: i32 = 2;

/// An invocation the command refused before doing any work.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage<T>(msg: impl Into<String>) -> anyhow::Result<T> {
    Err(UsageError(msg.into()).into())
}

/// Result of a subcommand.
#[derive(Debug)]
pub struct Outcome {
    /// Canonical JSON summary.
    pub json: Vec<u8>,
    pub partial: bool,
}

impl Outcome {
    pub fn new<T: Serialize>(summary: &T, partial: bool) -> anyhow::Result<Self> {
        Ok(Outcome {
            json: strata::canonical::to_canonical_json(summary)?,
            partial,
        })
    }

    pub fn exit_code(&self) -> i32 {
        if self.partial {
            EXIT_PARTIAL
        } else {
            EXIT_OK
        }
    }
}

/// Exit code for an error that escaped a command.
pub fn error_exit_code(err: &anyhow::Error) -> i32 {
    if err.downcast_ref::<UsageError>().is_some() {
        EXIT_USAGE
    } else {
        EXIT_PARTIAL
    }
}

pub(crate) fn read_file(path: &Path) -> anyhow::Result<Vec<u8>> {
    std::fs::read(path).with_context(|| format!("reading {}", path.display()))
}

pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Files in `dir` with extension `ext`, sorted by name.
pub(crate) fn list_files(dir: &Path, ext: &str) -> anyhow::Result<Vec<std::path::PathBuf>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).with_context(|| format!("listing {}", dir.display()))? {
        let path = entry?.path();
        let hidden = path.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.starts_with('.'));
        if path.is_file() && !hidden && path.extension().and_then(|e| e.to_str()) == Some(ext) {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}
