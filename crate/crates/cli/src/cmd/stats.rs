use std::path::PathBuf;

use clap::Args;
use rayon::prelude::*;
use serde::Serialize;
use strata::render::read_ldgt;

use crate::manifest::DatasetManifest;
use crate::{usage, Outcome, UsageError};

#[derive(Debug, Clone, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub manifest: PathBuf,
}

#[derive(Debug, Serialize)]
struct Stats {
    images: usize,
    train: usize,
    val: usize,
    rendered: usize,
    pixels: u64,
    /// Mean over rendered images of the transmissive-pixel fraction.
    transparent_fraction: f64,
    /// Pixels by number of recorded layers; index is the layer count.
    layer_histogram: Vec<u64>,
    mean_layers: f64,
    issues: Vec<String>,
}

struct ImageStats {
    pixels: u64,
    trans: u64,
    histogram: Vec<u64>,
}

pub fn run(args: &StatsArgs) -> anyhow::Result<Outcome> {
    if !args.manifest.is_file() {
        return usage(format!("{} is not a file", args.manifest.display()));
    }
    let manifest = DatasetManifest::load(&args.manifest).map_err(|e| UsageError(format!("{e:#}")))?;
    let root = DatasetManifest::root(&args.manifest);
    let mut issues = manifest.validate(&root);

    let per_image: Vec<Result<ImageStats, String>> = manifest
        .records
        .par_iter()
        .map(|r| {
            let ldgt = r.ldgt.as_ref().ok_or_else(|| format!("{}: not rendered", r.id))?;
            let (map, mask) = read_ldgt(&root.join(ldgt)).map_err(|e| format!("{}: {e}", r.id))?;
            let mut histogram = vec![0u64; map.max_layers() as usize + 1];
            for i in 0..map.pixel_count() {
                histogram[map.count_at(i)] += 1;
            }
            let trans = mask.map_or(0, |m| m.as_slice().iter().filter(|t| **t).count() as u64);
            Ok(ImageStats { pixels: map.pixel_count() as u64, trans, histogram })
        })
        .collect();

    let mut layer_histogram: Vec<u64> = Vec::new();
    let (mut rendered, mut pixels, mut frac_sum) = (0usize, 0u64, 0.0f64);
    for s in per_image {
        match s {
            Ok(s) => {
                rendered += 1;
                pixels += s.pixels;
                if s.pixels > 0 {
                    frac_sum += s.trans as f64 / s.pixels as f64;
                }
                if layer_histogram.len() < s.histogram.len() {
                    layer_histogram.resize(s.histogram.len(), 0);
                }
                for (h, c) in layer_histogram.iter_mut().zip(&s.histogram) {
                    *h += c;
                }
            }
            Err(e) => issues.push(e),
        }
    }
    let layer_sum: u64 = layer_histogram.iter().enumerate().map(|(n, c)| n as u64 * c).sum();
    let (train, val) = manifest.split_sizes();
    let stats = Stats {
        images: manifest.records.len(),
        train,
        val,
        rendered,
        pixels,
        transparent_fraction: if rendered > 0 { frac_sum / rendered as f64 } else { 0.0 },
        layer_histogram,
        mean_layers: if pixels > 0 { layer_sum as f64 / pixels as f64 } else { 0.0 },
        issues,
    };
    Outcome::new(&stats, !stats.issues.is_empty())
}
