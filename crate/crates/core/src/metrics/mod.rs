//! Evaluation protocol: ordinal tuple accuracy and numeric depth metrics.
//!
//! Depth metrics are computed per image and summed as counts and sums, so
//! pooling over a dataset does not depend on evaluation order.

mod depth;
mod report;
mod tuples;

use serde::{Deserialize, Serialize};

use crate::render::LayeredDepthMap;

pub use depth::{
    align, align_in, clip_depth, clip_to, depth_metrics, depth_sums, depth_sums_in, select_reference,
    silog_loss, snap_layers, DepthStats, DepthSums,
};
pub use report::{
    evaluate, evaluate_image, DepthCell, DepthGrid, EvalImage, EvalOptions, EvalReport, ImageReport, Provenance,
    TupleCell, TupleTable,
};
pub use tuples::{pixel_of, tuple_accuracy, Tally, TupleAccuracy};

/// Clipping range applied to predictions and references before metrics.
pub const CLIP_RANGE: (f64, f64) = (0.001, 30.0);
/// Default weight of the squared-mean term in [`silog_loss`].
pub const SILOG_LAMBDA: f64 = 0.85;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("mask selects no pixels")]
    EmptyMask,
    #[error("alignment is degenerate: {0}")]
    AlignmentDegenerate(String),
    #[error("value outside the domain: {0}")]
    Domain(String),
    #[error("dimension mismatch: {0}")]
    Dimensions(String),
}

/// A depth model's output.
#[derive(Debug, Clone, PartialEq)]
pub enum PredictionSource {
    /// One depth per pixel, row-major; NaN where undefined.
    SingleLayer {
        width: u32,
        height: u32,
        depth: Vec<f32>,
    },
    /// Looked up by (pixel, layer id).
    MultiLayer(LayeredDepthMap),
}

impl PredictionSource {
    pub fn single(width: u32, height: u32, depth: Vec<f32>) -> Self {
        assert_eq!(depth.len(), width as usize * height as usize, "depth buffer size");
        PredictionSource::SingleLayer {
            width,
            height,
            depth,
        }
    }

    /// Single-layer when the map holds at most one layer per pixel by
    /// construction (`max_layers == 1`), multi-layer otherwise.
    pub fn from_layers(map: LayeredDepthMap) -> Self {
        if map.max_layers() == 1 {
            let depth = map.layer_image(1);
            PredictionSource::single(map.width(), map.height(), depth)
        } else {
            PredictionSource::MultiLayer(map)
        }
    }

    pub fn width(&self) -> u32 {
        match self {
            PredictionSource::SingleLayer { width, .. } => *width,
            PredictionSource::MultiLayer(m) => m.width(),
        }
    }

    pub fn height(&self) -> u32 {
        match self {
            PredictionSource::SingleLayer { height, .. } => *height,
            PredictionSource::MultiLayer(m) => m.height(),
        }
    }

    pub fn is_single(&self) -> bool {
        matches!(self, PredictionSource::SingleLayer { .. })
    }

    /// Predicted depth at pixel `i`, layer `layer` (1-based). Single-layer
    /// predictions only answer for layer 1.
    pub fn at(&self, i: usize, layer: u32) -> Option<f64> {
        let v = match self {
            PredictionSource::SingleLayer { depth, .. } => (layer == 1).then(|| depth[i])?,
            PredictionSource::MultiLayer(m) => m.layer_at(i, layer)?,
        };
        v.is_finite().then_some(v as f64)
    }

    /// The single value compared against a reference under `strategy`.
    fn for_strategy(&self, i: usize, strategy: LayerStrategy) -> Option<f64> {
        let v = match (self, strategy) {
            (PredictionSource::SingleLayer { depth, .. }, _) => depth[i],
            (PredictionSource::MultiLayer(m), LayerStrategy::Last) => m.last_at(i)?,
            (PredictionSource::MultiLayer(m), _) => m.first_at(i)?,
        };
        v.is_finite().then_some(v as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlignmentMode {
    /// No alignment.
    Metric,
    /// Least-squares scale and shift in depth.
    AffineDepth,
    /// Least-squares scale and shift in inverse depth.
    Disparity,
    /// Median-ratio scale, then median shift.
    ScaleThenShift,
}

impl AlignmentMode {
    pub const ALL: [AlignmentMode; 4] = [
        AlignmentMode::Metric,
        AlignmentMode::AffineDepth,
        AlignmentMode::Disparity,
        AlignmentMode::ScaleThenShift,
    ];
}

/// Which ground-truth layer a single predicted depth is compared with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerStrategy {
    First,
    /// Final recorded layer, the last visible surface.
    Last,
    /// Per pixel, the layer closest to the prediction.
    Adapted,
}

impl LayerStrategy {
    pub const ALL: [LayerStrategy; 3] = [LayerStrategy::First, LayerStrategy::Last, LayerStrategy::Adapted];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaskKind {
    All,
    /// Pixels whose first surface is transmissive.
    Trans,
}

impl MaskKind {
    pub const ALL: [MaskKind; 2] = [MaskKind::All, MaskKind::Trans];
}
