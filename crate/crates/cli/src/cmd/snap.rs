use std::path::{Path, PathBuf};

use clap::Args;
use rayon::prelude::*;
use serde::Serialize;
use strata::metrics::snap_layers;
use strata::render::{read_ldgt, write_ldgt};

use crate::{list_files, usage, Outcome};

#[derive(Debug, Clone, Args)]
pub struct SnapArgs {
    /// An LDGT file, or a directory of them.
    #[arg(long)]
    pub input: PathBuf,
    /// Output file, or directory when `--input` is one.
    #[arg(long)]
    pub output: PathBuf,
    /// Layers per pixel after snapping.
    #[arg(long)]
    pub layers: u32,
}

#[derive(Debug, Serialize)]
struct Summary {
    layers: u32,
    written: usize,
    failed: Vec<String>,
}

fn snap_file(input: &Path, output: &Path, layers: u32) -> anyhow::Result<()> {
    let (map, mask) = read_ldgt(input)?;
    write_ldgt(&snap_layers(&map, layers), mask.as_ref(), output)?;
    Ok(())
}

pub fn run(args: &SnapArgs) -> anyhow::Result<Outcome> {
    if !(1..=255).contains(&args.layers) {
        return usage("--layers must be in 1..=255");
    }
    let jobs: Vec<(PathBuf, PathBuf)> = if args.input.is_dir() {
        if let Err(e) = std::fs::create_dir_all(&args.output) {
            return usage(format!("cannot create {}: {e}", args.output.display()));
        }
        list_files(&args.input, "ldgt")?
            .into_iter()
            .map(|p| {
                let out = args.output.join(p.file_name().expect("listed files have names"));
                (p, out)
            })
            .collect()
    } else if args.input.is_file() {
        vec![(args.input.clone(), args.output.clone())]
    } else {
        return usage(format!("{} does not exist", args.input.display()));
    };
    let failed: Vec<String> = jobs
        .par_iter()
        .filter_map(|(i, o)| {
            snap_file(i, o, args.layers).err().map(|e| {
                log::error!("{}: {e:#}", i.display());
                format!("{}: {e:#}", i.display())
            })
        })
        .collect();
    let summary = Summary { layers: args.layers, written: jobs.len() - failed.len(), failed };
    Outcome::new(&summary, !summary.failed.is_empty())
}
