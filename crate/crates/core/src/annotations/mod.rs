//! Human relative-depth annotations and the tuples sampled from them.
//!
//! An [`AnnotationSet`] holds monotonic depth lines and reference groups for
//! one image. Together they induce a strict partial order on points
//! ([`PartialOrder`]); relative-depth tuples are chains in that order.

mod io;
mod order;
mod sample;
mod validate;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use io::{
    parse_annotations, parse_tuples_jsonl, serialize_annotations, serialize_tuples_jsonl,
    ANNOTATION_SET_SCHEMA,
};
pub use order::PartialOrder;
pub use sample::{sample_from_layers, sample_tuples, Sampled, TupleCounts};
pub use validate::{validate, Violation};

/// Highest layer id an annotator may assign.
pub const MAX_LAYER_ID: u32 = 7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnotatedPoint {
    pub x: f64,
    pub y: f64,
    pub layer: u32,
}

impl AnnotatedPoint {
    pub fn new(x: f64, y: f64, layer: u32) -> Self {
        AnnotatedPoint { x, y, layer }
    }

    /// Identity used to merge points shared between annotations. Exact
    /// coordinates, with -0 folded into +0.
    pub(crate) fn key(&self) -> (u64, u64, u32) {
        ((self.x + 0.0).to_bits(), (self.y + 0.0).to_bits(), self.layer)
    }
}

impl fmt::Display for AnnotatedPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}) layer {}", self.x, self.y, self.layer)
    }
}

/// Points drawn in order of strictly increasing depth, with optional points
/// known to lie in front of or behind the whole line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonotonicLine {
    pub id: String,
    pub points: Vec<AnnotatedPoint>,
    #[serde(default)]
    pub front: Vec<AnnotatedPoint>,
    #[serde(default)]
    pub behind: Vec<AnnotatedPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceGroup {
    pub id: String,
    #[serde(rename = "ref")]
    pub reference: AnnotatedPoint,
    #[serde(default)]
    pub front: Vec<AnnotatedPoint>,
    #[serde(default)]
    pub behind: Vec<AnnotatedPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnotationSet {
    pub image_id: String,
    pub width: u32,
    pub height: u32,
    #[serde(default)]
    pub lines: Vec<MonotonicLine>,
    #[serde(default)]
    pub groups: Vec<ReferenceGroup>,
}

impl AnnotationSet {
    pub fn new(image_id: impl Into<String>, width: u32, height: u32) -> Self {
        AnnotationSet {
            image_id: image_id.into(),
            width,
            height,
            lines: Vec::new(),
            groups: Vec::new(),
        }
    }

    pub fn point_count(&self) -> usize {
        self.lines
            .iter()
            .map(|l| l.points.len() + l.front.len() + l.behind.len())
            .chain(self.groups.iter().map(|g| 1 + g.front.len() + g.behind.len()))
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TupleKind {
    Pair,
    Triplet,
    Quadruplet,
}

impl TupleKind {
    pub const ALL: [TupleKind; 3] = [TupleKind::Pair, TupleKind::Triplet, TupleKind::Quadruplet];

    pub fn len(self) -> usize {
        match self {
            TupleKind::Pair => 2,
            TupleKind::Triplet => 3,
            TupleKind::Quadruplet => 4,
        }
    }

    pub fn from_len(n: usize) -> Option<Self> {
        match n {
            2 => Some(TupleKind::Pair),
            3 => Some(TupleKind::Triplet),
            4 => Some(TupleKind::Quadruplet),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TupleKind::Pair => "pair",
            TupleKind::Triplet => "triplet",
            TupleKind::Quadruplet => "quadruplet",
        }
    }
}

/// Evaluation subset a tuple belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Subset {
    All,
    Mixed,
    Layer(u32),
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subset::All => f.write_str("All"),
            Subset::Mixed => f.write_str("Mixed"),
            Subset::Layer(i) => write!(f, "Layer-{i}"),
        }
    }
}

impl std::str::FromStr for Subset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "All" => Ok(Subset::All),
            "Mixed" => Ok(Subset::Mixed),
            _ => s
                .strip_prefix("Layer-")
                .and_then(|n| n.parse().ok())
                .filter(|&n| n >= 1)
                .map(Subset::Layer)
                .ok_or_else(|| format!("unknown subset tag {s:?}")),
        }
    }
}

impl Serialize for Subset {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Subset {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `All` plus exactly one of `Mixed` or `Layer-i`.
pub fn classify_subsets(points: &[AnnotatedPoint]) -> Vec<Subset> {
    let first = points.first().map(|p| p.layer);
    match first {
        Some(l) if points.iter().all(|p| p.layer == l) => vec![Subset::All, Subset::Layer(l)],
        Some(_) => vec![Subset::All, Subset::Mixed],
        None => vec![Subset::All],
    }
}

/// Where a tuple came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TupleSource {
    /// Annotation id, or several joined by `+` for chains through shared points.
    pub annotation: String,
    /// `line`, `group`, `closure` or `ground_truth`.
    pub derivation: String,
}

/// Points ordered by strictly increasing depth.
#[derive(Debug, Clone, PartialEq)]
pub struct RelativeTuple {
    pub image_id: String,
    pub points: Vec<AnnotatedPoint>,
    pub source: Option<TupleSource>,
}

impl RelativeTuple {
    pub fn new(image_id: impl Into<String>, points: Vec<AnnotatedPoint>) -> Self {
        RelativeTuple {
            image_id: image_id.into(),
            points,
            source: None,
        }
    }

    pub fn kind(&self) -> TupleKind {
        TupleKind::from_len(self.points.len()).expect("tuples hold 2 to 4 points")
    }

    pub fn tags(&self) -> Vec<Subset> {
        classify_subsets(&self.points)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum AnnotationError {
    #[error("{path}: {message} (line {line}, column {column})")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("tuple line {line}: {message}")]
    Tuple { line: usize, message: String },
    #[error("serialization failed: {0}")]
    Serialize(#[from] serde_json::Error),
}
