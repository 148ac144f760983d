use std::collections::HashSet;
use std::fmt;

use super::{AnnotatedPoint, AnnotationSet, PartialOrder, MAX_LAYER_ID};

/// One broken rule, naming the entity it applies to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub entity: String,
    pub rule: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.entity, self.rule)
    }
}

struct Checker<'a> {
    set: &'a AnnotationSet,
    out: Vec<Violation>,
}

impl Checker<'_> {
    fn push(&mut self, entity: &str, rule: impl Into<String>) {
        self.out.push(Violation {
            entity: entity.into(),
            rule: rule.into(),
        });
    }

    fn point(&mut self, entity: &str, p: &AnnotatedPoint) {
        let (w, h) = (self.set.width as f64, self.set.height as f64);
        if !(p.x.is_finite() && p.y.is_finite()) {
            self.push(entity, format!("point {p} has non-finite coordinates"));
        } else if !(0.0..w).contains(&p.x) || !(0.0..h).contains(&p.y) {
            self.push(
                entity,
                format!("point {p} lies outside the {}x{} image", self.set.width, self.set.height),
            );
        }
        if !(1..=MAX_LAYER_ID).contains(&p.layer) {
            self.push(entity, format!("point {p} has layer outside 1..={MAX_LAYER_ID}"));
        }
    }

    fn distinct<'p>(&mut self, entity: &str, points: impl Iterator<Item = &'p AnnotatedPoint>) {
        let mut seen = HashSet::new();
        for p in points {
            if !seen.insert(p.key()) {
                self.push(entity, format!("point {p} appears more than once"));
            }
        }
    }
}

/// Every violated invariant of `set`; empty when the set is well formed.
pub fn validate(set: &AnnotationSet) -> Vec<Violation> {
    let mut c = Checker {
        set,
        out: Vec::new(),
    };
    if set.image_id.is_empty() {
        c.push("set", "image_id must not be empty");
    }
    if set.width == 0 || set.height == 0 {
        c.push("set", "image dimensions must be positive");
    }
    let mut ids = HashSet::new();
    for line in &set.lines {
        let entity = format!("line {:?}", line.id);
        if !ids.insert(line.id.as_str()) {
            c.push(&entity, "duplicate id");
        }
        if line.points.len() < 2 {
            c.push(&entity, "line requires ≥2 points");
        }
        for p in line.points.iter().chain(&line.front).chain(&line.behind) {
            c.point(&entity, p);
        }
        c.distinct(&entity, line.points.iter().chain(&line.front).chain(&line.behind));
    }
    for group in &set.groups {
        let entity = format!("group {:?}", group.id);
        if !ids.insert(group.id.as_str()) {
            c.push(&entity, "duplicate id");
        }
        if group.front.is_empty() && group.behind.is_empty() {
            c.push(&entity, "group requires at least one front or behind point");
        }
        for p in std::iter::once(&group.reference).chain(&group.front).chain(&group.behind) {
            c.point(&entity, p);
        }
        c.distinct(
            &entity,
            std::iter::once(&group.reference).chain(&group.front).chain(&group.behind),
        );
    }
    if let Some(p) = PartialOrder::new(set).cycle_witness() {
        c.push("set", format!("depth relations are cyclic through point {p}"));
    }
    c.out
}
