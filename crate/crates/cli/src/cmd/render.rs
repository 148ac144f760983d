use std::path::{Path, PathBuf};

use clap::Args;
use rayon::prelude::*;
use serde::Serialize;
use strata::render::{read_ldgt, render_layers, render_rgb, save_png, write_ldgt, RenderConfig, RenderScene};
use strata::rng::DetRng;
use strata::scenegen::parse_scene;

use crate::manifest::{DatasetManifest, Record};
use crate::{read_file, usage, Outcome, UsageError};

#[derive(Debug, Clone, Args)]
pub struct RenderArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Render config JSON; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Defaults to the resolution stored in each scene camera.
    #[arg(long)]
    pub width: Option<u32>,
    #[arg(long)]
    pub height: Option<u32>,
    #[arg(long)]
    pub spp: Option<u32>,
    #[arg(long)]
    pub max_layers: Option<u32>,
    #[arg(long)]
    pub max_bounce: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Skip records whose PNG and LDGT already exist and decode.
    #[arg(long)]
    pub resume: bool,
}

#[derive(Debug, Serialize)]
struct Summary {
    rendered: usize,
    skipped: usize,
    failed: Vec<String>,
}

/// Base config plus whether the resolution was fixed by the user.
fn load_config(args: &RenderArgs) -> anyhow::Result<(RenderConfig, bool)> {
    let (mut cfg, mut fixed) = match &args.config {
        Some(p) => {
            let bytes = read_file(p).map_err(|e| UsageError(format!("{e:#}")))?;
            let cfg: RenderConfig = match serde_json::from_slice(&bytes) {
                Ok(c) => c,
                Err(e) => return usage(format!("invalid render config {}: {e}", p.display())),
            };
            let v: serde_json::Value = serde_json::from_slice(&bytes)?;
            (cfg, v.get("width").is_some() || v.get("height").is_some())
        }
        None => (RenderConfig::default(), false),
    };
    if let Some(w) = args.width {
        cfg.width = w;
        fixed = true;
    }
    if let Some(h) = args.height {
        cfg.height = h;
        fixed = true;
    }
    cfg.spp = args.spp.unwrap_or(cfg.spp);
    cfg.max_layers = args.max_layers.unwrap_or(cfg.max_layers);
    cfg.max_bounce = args.max_bounce.unwrap_or(cfg.max_bounce);
    cfg.seed = args.seed.unwrap_or(cfg.seed);
    if let Err(e) = cfg.validate() {
        return usage(format!("invalid render config: {e}"));
    }
    Ok((cfg, fixed))
}

fn outputs_ok(root: &Path, rec: &Record) -> bool {
    let (Some(rgb), Some(ldgt)) = (&rec.rgb, &rec.ldgt) else {
        return false;
    };
    root.join(rgb).is_file() && read_ldgt(&root.join(ldgt)).is_ok()
}

fn render_one(root: &Path, rec: &Record, base: &RenderConfig, fixed: bool) -> anyhow::Result<(String, String)> {
    let spec = parse_scene(&read_file(&root.join(&rec.scene))?)?;
    let mut cfg = base.clone();
    if !fixed {
        cfg.width = spec.camera.width;
        cfg.height = spec.camera.height;
    }
    // Each scene gets its own noise stream.
    cfg.seed = DetRng::derive(base.seed, &format!("render/{}", rec.id)).next_u64();
    let scene = RenderScene::new(&spec);
    let (rgb, ldgt) = (format!("{}.png", rec.id), format!("{}.ldgt", rec.id));
    let (map, mask) = render_layers(&scene, &cfg);
    write_ldgt(&map, Some(&mask), &root.join(&ldgt))?;
    save_png(&render_rgb(&scene, &cfg), &root.join(&rgb))?;
    Ok((rgb, ldgt))
}

pub fn run(args: &RenderArgs) -> anyhow::Result<Outcome> {
    let (cfg, fixed) = load_config(args)?;
    let mut manifest = DatasetManifest::load(&args.manifest).map_err(|e| UsageError(format!("{e:#}")))?;
    let root = DatasetManifest::root(&args.manifest);

    let results: Vec<(Record, bool)> = manifest
        .records
        .par_iter()
        .map(|rec| {
            let mut rec = rec.clone();
            if args.resume && outputs_ok(&root, &rec) {
                return (rec, false);
            }
            match render_one(&root, &rec, &cfg, fixed) {
                Ok((rgb, ldgt)) => {
                    log::info!("rendered {}", rec.id);
                    rec.rgb = Some(rgb);
                    rec.ldgt = Some(ldgt);
                    rec.error = None;
                }
                Err(e) => {
                    log::error!("{}: {e:#}", rec.id);
                    rec.rgb = None;
                    rec.ldgt = None;
                    rec.error = Some(format!("render: {e:#}"));
                }
            }
            (rec, true)
        })
        .collect();

    let rendered = results.iter().filter(|(r, done)| *done && r.error.is_none()).count();
    let skipped = results.iter().filter(|(_, done)| !done).count();
    manifest.records = results.into_iter().map(|(r, _)| r).collect();
    manifest.save(&args.manifest)?;
    let failed: Vec<String> = manifest.records.iter().filter(|r| r.error.is_some()).map(|r| r.id.clone()).collect();
    let summary = Summary { rendered, skipped, failed };
    Outcome::new(&summary, !summary.failed.is_empty())
}
