use serde::{Deserialize, Serialize};

use super::{
    AnnotatedPoint, AnnotationError, AnnotationSet, RelativeTuple, Subset, TupleKind, TupleSource,
};
use crate::canonical::{to_canonical_json, to_canonical_line};

fn parse_error(e: serde_path_to_error::Error<serde_json::Error>) -> AnnotationError {
    let path = e.path().to_string();
    let inner = e.into_inner();
    AnnotationError::Parse {
        path,
        line: inner.line(),
        column: inner.column(),
        message: inner.to_string(),
    }
}

/// JSON Schema of the annotation set file, shared with annotation tools.
pub const ANNOTATION_SET_SCHEMA: &str = include_str!("../../schema/annotation_set.schema.json");

pub fn serialize_annotations(set: &AnnotationSet) -> Result<Vec<u8>, AnnotationError> {
    Ok(to_canonical_json(set)?)
}

/// Parses the shared annotation schema. Structure only; see
/// [`validate`](super::validate) for the semantic rules.
pub fn parse_annotations(bytes: &[u8]) -> Result<AnnotationSet, AnnotationError> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    serde_path_to_error::deserialize(de).map_err(parse_error)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TupleLine {
    image_id: String,
    kind: String,
    points: Vec<AnnotatedPoint>,
    #[serde(default)]
    tags: Option<Vec<Subset>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    source: Option<TupleSource>,
}

/// One canonical JSON object per line, newline terminated.
pub fn serialize_tuples_jsonl(tuples: &[RelativeTuple]) -> Result<String, AnnotationError> {
    let mut out = String::new();
    for t in tuples {
        let line = TupleLine {
            image_id: t.image_id.clone(),
            kind: t.kind().name().into(),
            points: t.points.clone(),
            tags: Some(t.tags()),
            source: t.source.clone(),
        };
        out.push_str(&to_canonical_line(&line)?);
        out.push('\n');
    }
    Ok(out)
}

/// Parses tuple JSON-Lines. Blank lines are skipped. Tags, when present, must
/// agree with the ones computed from the points.
pub fn parse_tuples_jsonl(text: &str) -> Result<Vec<RelativeTuple>, AnnotationError> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fail = |message: String| AnnotationError::Tuple {
            line: line_no,
            message,
        };
        let de = &mut serde_json::Deserializer::from_str(raw);
        let parsed: TupleLine = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            fail(format!("{path}: {}", e.into_inner()))
        })?;
        let Some(kind) = TupleKind::from_len(parsed.points.len()) else {
            return Err(fail(format!(
                "unknown kind: tuple has {} points",
                parsed.points.len()
            )));
        };
        if parsed.kind != kind.name() {
            let known = TupleKind::ALL.iter().any(|k| k.name() == parsed.kind);
            return Err(fail(if known {
                format!(
                    "kind {:?} does not match {} points",
                    parsed.kind,
                    parsed.points.len()
                )
            } else {
                format!("unknown kind {:?}", parsed.kind)
            }));
        }
        let tuple = RelativeTuple {
            image_id: parsed.image_id,
            points: parsed.points,
            source: parsed.source,
        };
        if let Some(tags) = parsed.tags {
            let mut given = tags;
            given.sort();
            if given != tuple.tags() {
                return Err(fail(format!(
                    "tags {:?} disagree with point layers",
                    given.iter().map(ToString::to_string).collect::<Vec<_>>()
                )));
            }
        }
        out.push(tuple);
    }
    Ok(out)
}
