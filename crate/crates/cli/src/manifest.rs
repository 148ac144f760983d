use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};
use strata::canonical::to_canonical_json;
use strata::fsutil::write_atomic;
use strata::scenegen::GeneratorConfig;

pub const MANIFEST_VERSION: u32 = 1;
pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
}

/// One scene and its artifacts. Paths are relative to the manifest directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Record {
    pub id: String,
    pub seed: u64,
    pub split: Split,
    pub scene: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rgb: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ldgt: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotations: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tuples: Option<String>,
    /// Last failure of a command on this record.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub version: u32,
    pub generator_hash: String,
    pub generator: GeneratorConfig,
    pub base_seed: u64,
    pub val_fraction: f64,
    pub records: Vec<Record>,
}

/// Number of validation records out of `n`.
pub fn val_count(n: usize, val_fraction: f64) -> usize {
    ((n as f64) * val_fraction).round() as usize
}

/// Split of record `i` of `n`: the last `val_count` records are validation.
pub fn split_of(i: usize, n: usize, val_fraction: f64) -> Split {
    if i >= n - val_count(n, val_fraction) {
        Split::Val
    } else {
        Split::Train
    }
}

impl DatasetManifest {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let bytes = std::fs::read(path).with_context(|| format!("reading manifest {}", path.display()))?;
        let m: DatasetManifest =
            serde_json::from_slice(&bytes).with_context(|| format!("parsing manifest {}", path.display()))?;
        if m.version != MANIFEST_VERSION {
            anyhow::bail!("manifest version {} is not supported", m.version);
        }
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> anyhow::Result<()> {
        write_atomic(path, &to_canonical_json(self)?).with_context(|| format!("writing {}", path.display()))
    }

    /// Directory that record paths are relative to.
    pub fn root(path: &Path) -> PathBuf {
        path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new(".")).to_path_buf()
    }

    pub fn split_sizes(&self) -> (usize, usize) {
        let val = self.records.iter().filter(|r| r.split == Split::Val).count();
        (self.records.len() - val, val)
    }

    /// Problems found: duplicate ids, missing files, split sizes that
    /// disagree with `val_fraction`.
    pub fn validate(&self, root: &Path) -> Vec<String> {
        let mut issues = Vec::new();
        let mut seen = BTreeSet::new();
        for r in &self.records {
            if !seen.insert(r.id.as_str()) {
                issues.push(format!("{}: duplicate scene id", r.id));
            }
            let paths = [Some(&r.scene), r.rgb.as_ref(), r.ldgt.as_ref(), r.annotations.as_ref(), r.tuples.as_ref()];
            for p in paths.into_iter().flatten() {
                if !root.join(p).is_file() {
                    issues.push(format!("{}: missing file {p}", r.id));
                }
            }
        }
        let (_, val) = self.split_sizes();
        let want = val_count(self.records.len(), self.val_fraction);
        if val != want {
            issues.push(format!(
                "{val} validation records, but val_fraction {} of {} asks for {want}",
                self.val_fraction,
                self.records.len()
            ));
        }
        issues
    }
}
