use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::PredictionSource;
use crate::annotations::{AnnotatedPoint, RelativeTuple, Subset, TupleKind, MAX_LAYER_ID};

/// Pixel index for a real-valued point: nearest pixel, ties to even, with
/// pixel centers at integer coordinates. `None` outside `[0, W) × [0, H)`.
pub fn pixel_of(p: &AnnotatedPoint, width: u32, height: u32) -> Option<usize> {
    let inside = |v: f64, n: u32| v.is_finite() && v >= 0.0 && v < n as f64;
    if !inside(p.x, width) || !inside(p.y, height) {
        return None;
    }
    let px = (p.x.round_ties_even() as u32).min(width - 1);
    let py = (p.y.round_ties_even() as u32).min(height - 1);
    Some(py as usize * width as usize + px as usize)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub correct: u64,
    pub evaluated: u64,
}

impl Tally {
    pub fn accuracy(&self) -> Option<f64> {
        (self.evaluated > 0).then(|| self.correct as f64 / self.evaluated as f64)
    }

    pub fn merge(&mut self, o: &Tally) {
        self.correct += o.correct;
        self.evaluated += o.evaluated;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TupleAccuracy {
    /// Every kind × {All, Mixed, Layer-1..7}, plus deeper layers when present.
    pub table: BTreeMap<TupleKind, BTreeMap<Subset, Tally>>,
    /// Tuples not evaluable by a single-layer prediction.
    pub skipped: u64,
    pub errors: Vec<String>,
}

impl TupleAccuracy {
    pub fn empty() -> Self {
        let subsets: BTreeMap<Subset, Tally> = [Subset::All, Subset::Mixed]
            .into_iter()
            .chain((1..=MAX_LAYER_ID).map(Subset::Layer))
            .map(|s| (s, Tally::default()))
            .collect();
        TupleAccuracy {
            table: TupleKind::ALL.iter().map(|&k| (k, subsets.clone())).collect(),
            skipped: 0,
            errors: Vec::new(),
        }
    }

    pub fn get(&self, kind: TupleKind, subset: Subset) -> Tally {
        self.table[&kind].get(&subset).copied().unwrap_or_default()
    }

    pub fn merge(&mut self, o: &TupleAccuracy) {
        for (kind, subsets) in &o.table {
            let row = self.table.entry(*kind).or_default();
            for (s, t) in subsets {
                row.entry(*s).or_default().merge(t);
            }
        }
        self.skipped += o.skipped;
        self.errors.extend(o.errors.iter().cloned());
    }
}

/// Scores each tuple: correct iff predicted depths strictly increase along
/// it. A missing prediction at any point makes the tuple incorrect. Single
/// layer predictions only score tuples whose points are all on layer 1.
pub fn tuple_accuracy(pred: &PredictionSource, tuples: &[RelativeTuple]) -> TupleAccuracy {
    let mut acc = TupleAccuracy::empty();
    let (w, h) = (pred.width(), pred.height());
    'tuples: for (n, t) in tuples.iter().enumerate() {
        if pred.is_single() && t.points.iter().any(|p| p.layer != 1) {
            acc.skipped += 1;
            continue;
        }
        let mut depths = Vec::with_capacity(t.points.len());
        for p in &t.points {
            let Some(i) = pixel_of(p, w, h) else {
                acc.errors.push(format!(
                    "tuple {n} of {:?}: point {p} outside the {w}x{h} prediction",
                    t.image_id
                ));
                continue 'tuples;
            };
            depths.push(pred.at(i, p.layer));
        }
        let correct = depths
            .windows(2)
            .all(|d| matches!((d[0], d[1]), (Some(a), Some(b)) if a < b));
        let row = acc.table.entry(t.kind()).or_default();
        for tag in t.tags() {
            let tally = row.entry(tag).or_default();
            tally.evaluated += 1;
            tally.correct += correct as u64;
        }
    }
    acc
}
