use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use rayon::prelude::*;
use serde::Serialize;
use strata::annotations::{
    parse_annotations, sample_from_layers, sample_tuples, serialize_tuples_jsonl, validate, RelativeTuple,
    Subset, TupleCounts, TupleKind,
};
use strata::fsutil::write_atomic;
use strata::render::read_ldgt;

use crate::manifest::DatasetManifest;
use crate::{list_files, read_file, usage, Outcome, UsageError};

// Per-image averages of the published annotation totals (1.7M pairs, 4.2M
// triplets, 4.2M quadruplets over 1,500 images).
const DEFAULT_PAIRS: u64 = 1_133;
const DEFAULT_TRIPLETS: u64 = 2_800;
const DEFAULT_QUADRUPLETS: u64 = 2_800;

#[derive(Debug, Clone, Args)]
pub struct SampleArgs {
    /// Directory of annotation set JSON files.
    #[arg(long, conflicts_with = "manifest", required_unless_present = "manifest")]
    pub annotations: Option<PathBuf>,
    /// Sample from the rendered ground truth of every record instead.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Output directory for `<image_id>.jsonl`; defaults to the manifest
    /// directory in manifest mode.
    #[arg(long, required_unless_present = "manifest")]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_PAIRS)]
    pub pairs: u64,
    #[arg(long, default_value_t = DEFAULT_TRIPLETS)]
    pub triplets: u64,
    #[arg(long, default_value_t = DEFAULT_QUADRUPLETS)]
    pub quadruplets: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Serialize)]
struct Invalid {
    file: String,
    errors: Vec<String>,
}

#[derive(Debug, Default, Serialize)]
struct Summary {
    images: usize,
    totals: BTreeMap<TupleKind, u64>,
    subsets: BTreeMap<TupleKind, BTreeMap<Subset, u64>>,
    /// Images that had fewer chains of a kind than requested.
    exhausted: BTreeMap<TupleKind, Vec<String>>,
    invalid: Vec<Invalid>,
}

impl Summary {
    fn new() -> Self {
        let mut s = Summary::default();
        for k in TupleKind::ALL {
            s.totals.insert(k, 0);
            s.subsets.insert(k, BTreeMap::new());
        }
        s
    }

    fn add(&mut self, tuples: &[RelativeTuple]) {
        self.images += 1;
        for t in tuples {
            let kind = t.kind();
            *self.totals.entry(kind).or_default() += 1;
            for tag in t.tags() {
                *self.subsets.entry(kind).or_default().entry(tag).or_default() += 1;
            }
        }
    }
}

enum Sampled {
    Ok { id: String, tuples: Vec<RelativeTuple>, exhausted: Vec<TupleKind> },
    Invalid(Invalid),
}

fn write_tuples(path: &std::path::Path, tuples: &[RelativeTuple]) -> anyhow::Result<()> {
    write_atomic(path, serialize_tuples_jsonl(tuples)?.as_bytes()).with_context(|| format!("writing {}", path.display()))
}

pub fn run(args: &SampleArgs) -> anyhow::Result<Outcome> {
    let counts = TupleCounts::new(args.pairs, args.triplets, args.quadruplets);
    match &args.manifest {
        Some(m) => run_manifest(args, m, counts),
        None => run_annotations(args, counts),
    }
}

fn run_annotations(args: &SampleArgs, counts: TupleCounts) -> anyhow::Result<Outcome> {
    let dir = args.annotations.as_ref().expect("clap requires --annotations");
    let out = args.out.as_ref().expect("clap requires --out");
    if !dir.is_dir() {
        return usage(format!("{} is not a directory", dir.display()));
    }
    if let Err(e) = std::fs::create_dir_all(out) {
        return usage(format!("cannot create {}: {e}", out.display()));
    }
    let files = list_files(dir, "json")?;
    let sampled: Vec<Sampled> = files
        .par_iter()
        .map(|path| {
            let invalid = |errors: Vec<String>| Sampled::Invalid(Invalid { file: path.display().to_string(), errors });
            let set = match read_file(path).and_then(|b| Ok(parse_annotations(&b)?)) {
                Ok(s) => s,
                Err(e) => return invalid(vec![format!("{e:#}")]),
            };
            let violations = validate(&set);
            if !violations.is_empty() {
                return invalid(violations.iter().map(|v| v.to_string()).collect());
            }
            let s = sample_tuples(&set, counts, args.seed);
            Sampled::Ok { id: set.image_id, tuples: s.tuples, exhausted: s.exhausted }
        })
        .collect();

    let mut summary = Summary::new();
    let mut seen = BTreeSet::new();
    for (s, path) in sampled.into_iter().zip(&files) {
        match s {
            Sampled::Invalid(i) => {
                log::warn!("skipping {}: {}", i.file, i.errors.join("; "));
                summary.invalid.push(i);
            }
            Sampled::Ok { id, tuples, exhausted } => {
                if !seen.insert(id.clone()) || id.is_empty() || id.contains(['/', '\\']) {
                    summary.invalid.push(Invalid {
                        file: path.display().to_string(),
                        errors: vec![format!("image_id {id:?} is empty, unsafe as a file name, or already used")],
                    });
                    continue;
                }
                write_tuples(&out.join(format!("{id}.jsonl")), &tuples)?;
                for k in exhausted {
                    summary.exhausted.entry(k).or_default().push(id.clone());
                }
                summary.add(&tuples);
            }
        }
    }
    let partial = !summary.invalid.is_empty();
    Outcome::new(&summary, partial)
}

fn run_manifest(args: &SampleArgs, path: &std::path::Path, counts: TupleCounts) -> anyhow::Result<Outcome> {
    let mut manifest = DatasetManifest::load(path).map_err(|e| UsageError(format!("{e:#}")))?;
    let root = DatasetManifest::root(path);
    let out = args.out.clone().unwrap_or_else(|| root.clone());
    if let Err(e) = std::fs::create_dir_all(&out) {
        return usage(format!("cannot create {}: {e}", out.display()));
    }
    let results: Vec<anyhow::Result<Vec<RelativeTuple>>> = manifest
        .records
        .par_iter()
        .map(|rec| {
            let ldgt = rec.ldgt.as_ref().with_context(|| format!("{}: not rendered", rec.id))?;
            let (gt, _) = read_ldgt(&root.join(ldgt))?;
            let tuples = sample_from_layers(&gt, &rec.id, counts, args.seed);
            write_tuples(&out.join(format!("{}.jsonl", rec.id)), &tuples)?;
            Ok(tuples)
        })
        .collect();
    let mut summary = Summary::new();
    for (rec, r) in manifest.records.iter_mut().zip(results) {
        match r {
            Ok(tuples) => {
                for k in TupleKind::ALL {
                    if (tuples.iter().filter(|t| t.kind() == k).count() as u64) < counts.get(k) {
                        summary.exhausted.entry(k).or_default().push(rec.id.clone());
                    }
                }
                summary.add(&tuples);
                rec.tuples = relative_to(&root, &out.join(format!("{}.jsonl", rec.id)));
            }
            Err(e) => {
                log::warn!("skipping {}: {e:#}", rec.id);
                summary.invalid.push(Invalid { file: rec.id.clone(), errors: vec![format!("{e:#}")] });
            }
        }
    }
    manifest.save(path)?;
    let partial = !summary.invalid.is_empty();
    Outcome::new(&summary, partial)
}

/// `path` relative to `root` when it lies below it, else absolute.
fn relative_to(root: &std::path::Path, path: &std::path::Path) -> Option<String> {
    let p = path.strip_prefix(root).map(|p| p.to_path_buf()).or_else(|_| std::path::absolute(path));
    p.ok().map(|p| p.display().to_string())
}
