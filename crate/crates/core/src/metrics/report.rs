use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::depth::{align_in, depth_sums_in};
use super::{
    select_reference, AlignmentMode, DepthStats, DepthSums, LayerStrategy,
    MaskKind, MetricsError, PredictionSource, Tally, TupleAccuracy, CLIP_RANGE,
};
use crate::annotations::{RelativeTuple, Subset, TupleKind};
use crate::render::{LayeredDepthMap, TransMask};

pub type DepthGrid<T> = BTreeMap<MaskKind, BTreeMap<LayerStrategy, BTreeMap<AlignmentMode, T>>>;

/// One image's inputs.
#[derive(Debug, Clone, Copy)]
pub struct EvalImage<'a> {
    pub id: &'a str,
    pub gt: &'a LayeredDepthMap,
    pub trans: &'a TransMask,
    pub pred: &'a PredictionSource,
    pub tuples: &'a [RelativeTuple],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalOptions {
    pub alignments: Vec<AlignmentMode>,
    pub strategies: Vec<LayerStrategy>,
    pub masks: Vec<MaskKind>,
    pub clip: (f64, f64),
}

impl EvalOptions {
    pub fn validate(&self) -> Result<(), MetricsError> {
        let (lo, hi) = self.clip;
        if !(lo > 0.0 && lo < hi && hi.is_finite()) {
            return Err(MetricsError::Domain(format!("clip range ({lo}, {hi}) must satisfy 0 < lo < hi")));
        }
        if self.alignments.is_empty() || self.strategies.is_empty() || self.masks.is_empty() {
            return Err(MetricsError::Domain("at least one alignment, strategy and mask are required".into()));
        }
        Ok(())
    }
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            alignments: AlignmentMode::ALL.to_vec(),
            strategies: LayerStrategy::ALL.to_vec(),
            masks: MaskKind::ALL.to_vec(),
            clip: CLIP_RANGE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthCell {
    pub abs_rel: Option<f64>,
    pub rms: Option<f64>,
    pub delta1: Option<f64>,
    pub delta2: Option<f64>,
    pub pixels: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl DepthCell {
    fn from_result(r: Result<DepthStats, MetricsError>) -> Self {
        match r {
            Ok(s) => DepthCell {
                abs_rel: Some(s.abs_rel),
                rms: Some(s.rms),
                delta1: Some(s.delta1),
                delta2: Some(s.delta2),
                pixels: s.pixels,
                error: None,
            },
            Err(e) => DepthCell {
                abs_rel: None,
                rms: None,
                delta1: None,
                delta2: None,
                pixels: 0,
                error: Some(e.to_string()),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TupleCell {
    pub correct: u64,
    pub evaluated: u64,
    pub accuracy: Option<f64>,
}

pub type TupleTable = BTreeMap<TupleKind, BTreeMap<Subset, TupleCell>>;

fn tuple_table(acc: &TupleAccuracy) -> TupleTable {
    acc.table
        .iter()
        .map(|(k, row)| {
            let row = row
                .iter()
                .map(|(s, t)| {
                    let cell = TupleCell {
                        correct: t.correct,
                        evaluated: t.evaluated,
                        accuracy: t.accuracy(),
                    };
                    (*s, cell)
                })
                .collect();
            (*k, row)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageReport {
    pub id: String,
    pub depth: DepthGrid<DepthCell>,
    pub tuples: TupleTable,
    pub tuples_skipped: u64,
    /// False when the image could not be scored at all.
    pub evaluated: bool,
    pub errors: Vec<String>,
    #[serde(skip)]
    sums: DepthGrid<Option<DepthSums>>,
    #[serde(skip)]
    accuracy: Option<TupleAccuracy>,
}

impl ImageReport {
    pub fn cell(&self, mask: MaskKind, strategy: LayerStrategy, mode: AlignmentMode) -> &DepthCell {
        &self.depth[&mask][&strategy][&mode]
    }

    pub fn tally(&self, kind: TupleKind, subset: Subset) -> Tally {
        let c = self.tuples[&kind][&subset];
        Tally {
            correct: c.correct,
            evaluated: c.evaluated,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub clip: [f64; 2],
    pub images: usize,
    /// Input file name to SHA-256, filled in by the caller.
    pub files: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Pixel-pooled metrics over all images.
    pub depth: DepthGrid<DepthCell>,
    pub tuples: TupleTable,
    pub tuples_skipped: u64,
    pub errors: Vec<String>,
    pub images: Vec<ImageReport>,
    pub provenance: Provenance,
}

impl EvalReport {
    pub fn cell(&self, mask: MaskKind, strategy: LayerStrategy, mode: AlignmentMode) -> &DepthCell {
        &self.depth[&mask][&strategy][&mode]
    }

    pub fn accuracy(&self, kind: TupleKind, subset: Subset) -> Option<f64> {
        self.tuples[&kind][&subset].accuracy
    }
}

fn failed_image(img: &EvalImage, message: String, opts: &EvalOptions) -> ImageReport {
    let mut depth = DepthGrid::new();
    let mut sums = DepthGrid::new();
    for &mask in &opts.masks {
        for &s in &opts.strategies {
            for &a in &opts.alignments {
                let cell = DepthCell::from_result(Err(MetricsError::Dimensions(message.clone())));
                depth.entry(mask).or_default().entry(s).or_default().insert(a, cell);
                sums.entry(mask).or_default().entry(s).or_default().insert(a, None);
            }
        }
    }
    ImageReport {
        id: img.id.into(),
        depth,
        tuples: tuple_table(&TupleAccuracy::empty()),
        tuples_skipped: 0,
        evaluated: false,
        errors: vec![format!("image {:?}: {message}", img.id)],
        sums,
        accuracy: None,
    }
}

/// Every metric for one image.
pub fn evaluate_image(img: &EvalImage, opts: &EvalOptions) -> ImageReport {
    let (w, h) = (img.gt.width(), img.gt.height());
    if (img.pred.width(), img.pred.height()) != (w, h) || (img.trans.width(), img.trans.height()) != (w, h) {
        let msg = format!(
            "prediction {}x{} and mask {}x{} must match ground truth {w}x{h}",
            img.pred.width(),
            img.pred.height(),
            img.trans.width(),
            img.trans.height()
        );
        return failed_image(img, msg, opts);
    }
    let n = img.gt.pixel_count();
    let mut depth = DepthGrid::new();
    let mut sums = DepthGrid::new();
    let mut errors = Vec::new();
    for &strategy in &opts.strategies {
        let pred: Vec<f64> = (0..n)
            .map(|i| img.pred.for_strategy(i, strategy).unwrap_or(f64::NAN))
            .collect();
        let reference = select_reference(img.gt, &pred, strategy);
        for &mask_kind in &opts.masks {
            let mask: Vec<bool> = (0..n)
                .map(|i| {
                    reference[i].is_finite()
                        && pred[i].is_finite()
                        && (mask_kind == MaskKind::All || img.trans.as_slice()[i])
                })
                .collect();
            for &mode in &opts.alignments {
                let result = align_in(&pred, &reference, &mask, mode, opts.clip)
                    .and_then(|aligned| depth_sums_in(&aligned, &reference, &mask, opts.clip));
                let (cell, s) = match result {
                    Ok(s) => (DepthCell::from_result(s.finish()), Some(s)),
                    Err(e) => {
                        errors.push(format!(
                            "image {:?} {mask_kind:?}/{strategy:?}/{mode:?}: {e}",
                            img.id
                        ));
                        (DepthCell::from_result(Err(e)), None)
                    }
                };
                depth.entry(mask_kind).or_default().entry(strategy).or_default().insert(mode, cell);
                sums.entry(mask_kind).or_default().entry(strategy).or_default().insert(mode, s);
            }
        }
    }
    let acc = super::tuple_accuracy(img.pred, img.tuples);
    errors.extend(acc.errors.iter().cloned());
    ImageReport {
        id: img.id.into(),
        depth,
        tuples: tuple_table(&acc),
        tuples_skipped: acc.skipped,
        evaluated: true,
        errors,
        sums,
        accuracy: Some(acc),
    }
}

/// Evaluates images in parallel and pools them in image-id order. Failed
/// cells are listed in `errors` and left out of the pooled sums.
pub fn evaluate(images: &[EvalImage], opts: &EvalOptions) -> EvalReport {
    let mut reports: Vec<ImageReport> = images.par_iter().map(|img| evaluate_image(img, opts)).collect();
    reports.sort_by(|a, b| a.id.cmp(&b.id));

    let mut pooled: DepthGrid<DepthSums> = DepthGrid::new();
    let mut acc = TupleAccuracy::empty();
    let mut errors = Vec::new();
    for r in &reports {
        for (mask, by_strategy) in &r.sums {
            for (strategy, by_mode) in by_strategy {
                for (mode, s) in by_mode {
                    let slot = pooled
                        .entry(*mask)
                        .or_default()
                        .entry(*strategy)
                        .or_default()
                        .entry(*mode)
                        .or_default();
                    if let Some(s) = s {
                        slot.merge(s);
                    }
                }
            }
        }
        if let Some(a) = &r.accuracy {
            let TupleAccuracy { table, skipped, .. } = a;
            acc.merge(&TupleAccuracy {
                table: table.clone(),
                skipped: *skipped,
                errors: Vec::new(),
            });
        }
        errors.extend(r.errors.iter().cloned());
    }
    let depth = pooled
        .into_iter()
        .map(|(m, by_s)| {
            let by_s = by_s
                .into_iter()
                .map(|(s, by_a)| {
                    let by_a = by_a
                        .into_iter()
                        .map(|(a, sums)| (a, DepthCell::from_result(sums.finish())))
                        .collect();
                    (s, by_a)
                })
                .collect();
            (m, by_s)
        })
        .collect();
    EvalReport {
        depth,
        tuples: tuple_table(&acc),
        tuples_skipped: acc.skipped,
        errors,
        provenance: Provenance {
            clip: [opts.clip.0, opts.clip.1],
            images: reports.len(),
            files: BTreeMap::new(),
        },
        images: reports,
    }
}
