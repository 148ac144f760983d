use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::Args;
use rayon::prelude::*;
use serde::Serialize;
use strata::fsutil::write_atomic;
use strata::scenegen::{generate_scene, parse_scene, serialize_scene, GeneratorConfig};

use crate::manifest::{split_of, DatasetManifest, Record, MANIFEST_NAME, MANIFEST_VERSION};
use crate::{read_file, usage, Outcome};

/// Validation share of the published dataset split (500 of 15,300 images).
pub const DEFAULT_VAL_FRACTION: f64 = 500.0 / 15_300.0;

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    /// Output directory for scene files and the manifest.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub count: usize,
    /// Seed of the first scene; scene `i` uses `seed + i`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Generator config JSON; missing fields take defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub width: Option<u32>,
    #[arg(long)]
    pub height: Option<u32>,
    #[arg(long, default_value_t = DEFAULT_VAL_FRACTION)]
    pub val_fraction: f64,
    /// Keep scene files that already exist and parse.
    #[arg(long)]
    pub resume: bool,
}

#[derive(Debug, Serialize)]
struct Summary {
    manifest: String,
    generated: usize,
    skipped: usize,
    train: usize,
    val: usize,
    failed: Vec<String>,
}

pub fn load_config(path: Option<&Path>, width: Option<u32>, height: Option<u32>) -> anyhow::Result<GeneratorConfig> {
    let mut cfg = match path {
        Some(p) => match GeneratorConfig::from_json(&read_file(p).map_err(|e| crate::UsageError(format!("{e:#}")))?) {
            Ok(c) => c,
            Err(e) => return usage(format!("invalid generator config {}: {e}", p.display())),
        },
        None => GeneratorConfig::default(),
    };
    cfg.width = width.unwrap_or(cfg.width);
    cfg.height = height.unwrap_or(cfg.height);
    if let Err(e) = cfg.validate() {
        return usage(format!("invalid generator config: {e}"));
    }
    Ok(cfg)
}

pub fn scene_id(i: usize) -> String {
    format!("scene_{i}")
}

pub fn run(args: &GenerateArgs) -> anyhow::Result<Outcome> {
    let cfg = load_config(args.config.as_deref(), args.width, args.height)?;
    if !(0.0..=1.0).contains(&args.val_fraction) {
        return usage(format!("--val-fraction {} must lie in [0, 1]", args.val_fraction));
    }
    if args.seed.checked_add(args.count as u64).is_none() {
        return usage("seed range overflows u64");
    }
    if let Err(e) = std::fs::create_dir_all(&args.out) {
        return usage(format!("cannot create {}: {e}", args.out.display()));
    }
    let manifest_path = args.out.join(MANIFEST_NAME);
    let previous = if args.resume && manifest_path.is_file() {
        let m = DatasetManifest::load(&manifest_path)?;
        if m.generator_hash != cfg.hash() {
            return usage("generator config differs from the one in the existing manifest");
        }
        Some(m)
    } else {
        None
    };

    let results: Vec<(Record, bool)> = (0..args.count)
        .into_par_iter()
        .map(|i| {
            let id = scene_id(i);
            let seed = args.seed + i as u64;
            let scene = format!("{id}.json");
            let path = args.out.join(&scene);
            let mut rec = previous
                .as_ref()
                .and_then(|m| m.records.iter().find(|r| r.id == id && r.seed == seed).cloned())
                .unwrap_or(Record {
                    id: id.clone(),
                    seed,
                    split: split_of(i, args.count, args.val_fraction),
                    scene: scene.clone(),
                    rgb: None,
                    ldgt: None,
                    annotations: None,
                    tuples: None,
                    error: None,
                });
            rec.split = split_of(i, args.count, args.val_fraction);
            if args.resume && std::fs::read(&path).ok().is_some_and(|b| parse_scene(&b).is_ok()) {
                return (rec, false);
            }
            let written = generate_scene(&cfg, seed)
                .map_err(anyhow::Error::from)
                .and_then(|s| write_atomic(&path, &serialize_scene(&s)).with_context(|| format!("writing {}", path.display())));
            rec.error = written.err().map(|e| {
                log::error!("{id}: {e:#}");
                format!("generate: {e:#}")
            });
            (rec, true)
        })
        .collect();

    let generated = results.iter().filter(|(_, g)| *g).count();
    let records: Vec<Record> = results.into_iter().map(|(r, _)| r).collect();
    let failed: Vec<String> = records.iter().filter(|r| r.error.is_some()).map(|r| r.id.clone()).collect();
    let manifest = DatasetManifest {
        version: MANIFEST_VERSION,
        generator_hash: cfg.hash(),
        generator: cfg,
        base_seed: args.seed,
        val_fraction: args.val_fraction,
        records,
    };
    manifest.save(&manifest_path)?;
    let (train, val) = manifest.split_sizes();
    log::info!("generated {generated} scenes, {} failed", failed.len());
    let summary = Summary {
        manifest: manifest_path.display().to_string(),
        generated,
        skipped: args.count - generated,
        train,
        val,
        failed,
    };
    Outcome::new(&summary, !summary.failed.is_empty())
}
