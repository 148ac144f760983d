use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::Args;
use strata::annotations::{parse_tuples_jsonl, RelativeTuple};
use strata::fsutil::write_atomic;
use strata::metrics::{
    evaluate, AlignmentMode, EvalImage, EvalOptions, LayerStrategy, MaskKind, PredictionSource, CLIP_RANGE,
};
use strata::render::{decode_ldgt, LayeredDepthMap, TransMask};

use crate::manifest::DatasetManifest;
use crate::{list_files, read_file, sha256_hex, usage, Outcome, UsageError};

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    /// Directory of `<image_id>.ldgt` predictions; one-layer files are
    /// single-layer predictions.
    #[arg(long)]
    pub pred: PathBuf,
    /// Ground truth: a dataset manifest, or a directory of `<image_id>.ldgt`.
    #[arg(long)]
    pub gt: PathBuf,
    /// Directory of `<image_id>.jsonl` tuples; overrides manifest tuples.
    #[arg(long)]
    pub tuples: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', value_parser = parse_name::<MaskKind>)]
    pub mask: Vec<MaskKind>,
    #[arg(long, value_delimiter = ',', value_parser = parse_name::<LayerStrategy>)]
    pub strategy: Vec<LayerStrategy>,
    #[arg(long, value_delimiter = ',', value_parser = parse_name::<AlignmentMode>)]
    pub alignment: Vec<AlignmentMode>,
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], default_values_t = [CLIP_RANGE.0, CLIP_RANGE.1])]
    pub clip: Vec<f64>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses a snake_case enum name through its serde form.
pub fn parse_name<T: serde::de::DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|e| e.to_string())
}

struct Entry {
    id: String,
    gt: PathBuf,
    tuples: Option<PathBuf>,
}

struct Loaded {
    id: String,
    gt: LayeredDepthMap,
    trans: TransMask,
    pred: PredictionSource,
    tuples: Vec<RelativeTuple>,
}

fn gt_entries(gt: &Path) -> anyhow::Result<(Vec<Entry>, Vec<String>)> {
    if gt.is_dir() {
        let entries = list_files(gt, "ldgt")?
            .into_iter()
            .filter_map(|p| {
                let id = p.file_stem()?.to_str()?.to_string();
                Some(Entry { id, gt: p, tuples: None })
            })
            .collect();
        return Ok((entries, Vec::new()));
    }
    let manifest = DatasetManifest::load(gt).map_err(|e| UsageError(format!("{e:#}")))?;
    let root = DatasetManifest::root(gt);
    let mut entries = Vec::new();
    let mut errors = Vec::new();
    for r in manifest.records {
        match r.ldgt {
            Some(l) => entries.push(Entry {
                id: r.id,
                gt: root.join(l),
                tuples: r.tuples.map(|t| root.join(t)),
            }),
            None => errors.push(format!("image {:?}: ground truth not rendered", r.id)),
        }
    }
    Ok((entries, errors))
}

fn load(e: &Entry, pred_dir: &Path, tuples_dir: Option<&Path>, files: &mut BTreeMap<String, String>) -> anyhow::Result<Loaded> {
    let mut read = |p: &Path| -> anyhow::Result<Vec<u8>> {
        let b = read_file(p)?;
        files.insert(p.display().to_string(), sha256_hex(&b));
        Ok(b)
    };
    let (gt, trans) = decode_ldgt(&read(&e.gt)?).with_context(|| format!("decoding {}", e.gt.display()))?;
    let trans = trans.with_context(|| format!("{} carries no transmissive mask", e.gt.display()))?;
    let pred_path = pred_dir.join(format!("{}.ldgt", e.id));
    if !pred_path.is_file() {
        anyhow::bail!("missing prediction {}", pred_path.display());
    }
    let (pred, _) = decode_ldgt(&read(&pred_path)?).with_context(|| format!("decoding {}", pred_path.display()))?;
    let tuple_path = match tuples_dir {
        Some(d) => Some(d.join(format!("{}.jsonl", e.id))).filter(|p| p.is_file()),
        None => e.tuples.clone(),
    };
    let tuples = match tuple_path {
        Some(p) => {
            let text = String::from_utf8(read(&p)?).with_context(|| format!("{} is not UTF-8", p.display()))?;
            parse_tuples_jsonl(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => Vec::new(),
    };
    if let Some(t) = tuples.iter().find(|t| t.image_id != e.id) {
        anyhow::bail!("tuple for image {:?} in the file of {:?}", t.image_id, e.id);
    }
    Ok(Loaded {
        id: e.id.clone(),
        gt,
        trans,
        pred: PredictionSource::from_layers(pred),
        tuples,
    })
}

pub fn run(args: &EvalArgs) -> anyhow::Result<Outcome> {
    let opts = EvalOptions {
        alignments: if args.alignment.is_empty() { AlignmentMode::ALL.to_vec() } else { args.alignment.clone() },
        strategies: if args.strategy.is_empty() { LayerStrategy::ALL.to_vec() } else { args.strategy.clone() },
        masks: if args.mask.is_empty() { MaskKind::ALL.to_vec() } else { args.mask.clone() },
        clip: (args.clip[0], args.clip[1]),
    };
    if let Err(e) = opts.validate() {
        return usage(e.to_string());
    }
    if !args.pred.is_dir() {
        return usage(format!("{} is not a directory", args.pred.display()));
    }
    if !args.gt.exists() {
        return usage(format!("{} does not exist", args.gt.display()));
    }
    let (entries, mut errors) = gt_entries(&args.gt)?;
    let ids: BTreeSet<&str> = entries.iter().map(|e| e.id.as_str()).collect();
    for p in list_files(&args.pred, "ldgt")? {
        let stem = p.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
        if !ids.contains(stem) {
            errors.push(format!("prediction {:?} has no ground truth", stem));
        }
    }

    let mut files = BTreeMap::new();
    let mut loaded = Vec::new();
    let mut unevaluated = errors.len();
    for e in &entries {
        match load(e, &args.pred, args.tuples.as_deref(), &mut files) {
            Ok(l) => loaded.push(l),
            Err(err) => {
                log::warn!("{}: {err:#}", e.id);
                errors.push(format!("image {:?}: {err:#}", e.id));
                unevaluated += 1;
            }
        }
    }
    let images: Vec<EvalImage> = loaded
        .iter()
        .map(|l| EvalImage { id: &l.id, gt: &l.gt, trans: &l.trans, pred: &l.pred, tuples: &l.tuples })
        .collect();
    let mut report = evaluate(&images, &opts);
    unevaluated += report.images.iter().filter(|r| !r.evaluated).count();
    errors.append(&mut report.errors);
    errors.sort();
    report.errors = errors;
    report.provenance.files = files;

    let outcome = Outcome::new(&report, unevaluated > 0)?;
    if let Some(out) = &args.out {
        write_atomic(out, &outcome.json).with_context(|| format!("writing {}", out.display()))?;
    }
    Ok(outcome)
}
