use std::collections::BTreeSet;

use strata::annotations::{ANNOTATION_SET_SCHEMA, 
    classify_subsets, parse_annotations, parse_tuples_jsonl, sample_from_layers, sample_tuples,
    serialize_annotations, serialize_tuples_jsonl, validate, AnnotatedPoint, AnnotationError,
    AnnotationSet, MonotonicLine, PartialOrder, ReferenceGroup, RelativeTuple, Subset, TupleCounts,
    TupleKind,
};
use strata::render::LayeredDepthMap;
use strata::rng::DetRng;

fn p(x: f64, y: f64, layer: u32) -> AnnotatedPoint {
    AnnotatedPoint::new(x, y, layer)
}

fn line(id: &str, points: Vec<AnnotatedPoint>) -> MonotonicLine {
    MonotonicLine {
        id: id.into(),
        points,
        front: vec![],
        behind: vec![],
    }
}

fn set_with(lines: Vec<MonotonicLine>, groups: Vec<ReferenceGroup>) -> AnnotationSet {
    AnnotationSet {
        lines,
        groups,
        ..AnnotationSet::new("img", 100, 80)
    }
}

fn four_point_line() -> AnnotationSet {
    set_with(
        vec![line(
            "l",
            vec![p(1.0, 1.0, 1), p(2.0, 2.0, 1), p(3.0, 3.0, 1), p(4.0, 4.0, 2)],
        )],
        vec![],
    )
}

#[test]
fn well_formed_set_has_no_violations() {
    let s = set_with(vec![line("a", vec![p(0.0, 0.0, 1), p(99.5, 79.5, 7)])], vec![]);
    assert!(validate(&s).is_empty());
}

#[test]
fn violations_name_entity_and_rule() {
    let s = set_with(vec![line("short", vec![p(1.0, 1.0, 1)])], vec![]);
    let v = validate(&s);
    assert_eq!(v.len(), 1);
    assert_eq!(v[0].to_string(), "line \"short\": line requires ≥2 points");

    let s = set_with(vec![line("edge", vec![p(100.0, 1.0, 1), p(2.0, 2.0, 1)])], vec![]);
    let v = validate(&s);
    assert_eq!(v.len(), 1);
    assert!(v[0].rule.contains("outside the 100x80 image"), "{}", v[0]);

    let s = set_with(vec![line("deep", vec![p(1.0, 1.0, 8), p(2.0, 2.0, 0)])], vec![]);
    assert_eq!(validate(&s).len(), 2);

    let s = set_with(
        vec![line("x", vec![p(1.0, 1.0, 1), p(2.0, 2.0, 1)])],
        vec![ReferenceGroup {
            id: "x".into(),
            reference: p(5.0, 5.0, 1),
            front: vec![],
            behind: vec![],
        }],
    );
    let rules: Vec<String> = validate(&s).iter().map(|v| v.rule.clone()).collect();
    assert!(rules.contains(&"duplicate id".to_string()));
    assert!(rules.iter().any(|r| r.contains("at least one front or behind")));

    let s = set_with(
        vec![],
        vec![ReferenceGroup {
            id: "g".into(),
            reference: p(5.0, 5.0, 1),
            front: vec![p(5.0, 5.0, 1)],
            behind: vec![],
        }],
    );
    assert!(validate(&s).iter().any(|v| v.rule.contains("appears more than once")));
}

#[test]
fn contradictory_annotations_are_cyclic() {
    let (a, b) = (p(1.0, 1.0, 1), p(2.0, 2.0, 1));
    let s = set_with(vec![line("ab", vec![a, b]), line("ba", vec![b, a])], vec![]);
    let v = validate(&s);
    assert!(v.iter().any(|v| v.entity == "set" && v.rule.contains("cyclic")), "{v:?}");
}

#[test]
fn line_relations_are_transitive() {
    let s = set_with(vec![line("l", vec![p(1.0, 1.0, 1), p(2.0, 1.0, 1), p(3.0, 1.0, 1)])], vec![]);
    let order = PartialOrder::new(&s);
    let rel: BTreeSet<(u64, u64)> = order
        .relations()
        .iter()
        .map(|(a, b)| (a.x as u64, b.x as u64))
        .collect();
    assert_eq!(rel, BTreeSet::from([(1, 2), (1, 3), (2, 3)]));
}

#[test]
fn group_relations_skip_same_side_pairs() {
    let (f1, f2, r, b) = (p(1.0, 1.0, 1), p(2.0, 1.0, 1), p(3.0, 1.0, 2), p(4.0, 1.0, 3));
    let s = set_with(
        vec![],
        vec![ReferenceGroup {
            id: "g".into(),
            reference: r,
            front: vec![f1, f2],
            behind: vec![b],
        }],
    );
    let order = PartialOrder::new(&s);
    assert_eq!(order.relation_count(), 5);
    let rel = order.relations();
    assert!(!rel.contains(&(f1, f2)) && !rel.contains(&(f2, f1)));
    assert!(rel.contains(&(f1, b)) && rel.contains(&(f2, b)));
}

#[test]
fn line_front_and_behind_points() {
    let mut l = line("l", vec![p(10.0, 10.0, 1), p(20.0, 10.0, 1)]);
    l.front = vec![p(1.0, 1.0, 1), p(2.0, 2.0, 1)];
    l.behind = vec![p(50.0, 50.0, 2)];
    let order = PartialOrder::new(&set_with(vec![l], vec![]));
    // front×line 4, line 1, line×behind 2, front×behind 2.
    assert_eq!(order.relation_count(), 9);
    assert_eq!(order.chain_count(4), 2);
}

#[test]
fn separate_lines_stay_unrelated() {
    let s = set_with(
        vec![
            line("a", vec![p(1.0, 1.0, 1), p(2.0, 2.0, 1)]),
            line("b", vec![p(3.0, 3.0, 1), p(4.0, 4.0, 1)]),
        ],
        vec![],
    );
    assert_eq!(PartialOrder::new(&s).relation_count(), 2);
}

#[test]
fn shared_points_link_annotations() {
    let (a, b, c) = (p(1.0, 1.0, 1), p(2.0, 2.0, 1), p(3.0, 3.0, 1));
    let s = set_with(vec![line("first", vec![a, b]), line("second", vec![b, c])], vec![]);
    let order = PartialOrder::new(&s);
    assert_eq!(order.relation_count(), 3);
    let got = sample_tuples(&s, TupleCounts::new(0, 1, 0), 0);
    assert_eq!(got.tuples.len(), 1);
    assert_eq!(got.tuples[0].points, vec![a, b, c]);
    let src = got.tuples[0].source.clone().unwrap();
    assert_eq!((src.annotation.as_str(), src.derivation.as_str()), ("first+second", "closure"));
}

#[test]
fn four_point_line_counts() {
    let s = four_point_line();
    let order = PartialOrder::new(&s);
    assert_eq!(
        [order.chain_count(2), order.chain_count(3), order.chain_count(4)],
        [6, 4, 1]
    );
    let got = sample_tuples(&s, TupleCounts::new(6, 4, 10), 3);
    assert_eq!(got.tuples.len(), 11);
    assert_eq!(got.exhausted, vec![TupleKind::Quadruplet]);
    assert_eq!(got.available[&TupleKind::Pair], 6);
    let pairs: BTreeSet<Vec<u64>> = got
        .tuples
        .iter()
        .filter(|t| t.kind() == TupleKind::Pair)
        .map(|t| t.points.iter().map(|q| q.x as u64).collect())
        .collect();
    assert_eq!(pairs.len(), 6);
    let quad = got.tuples.last().unwrap();
    assert_eq!(quad.points, s.lines[0].points);
    assert_eq!(quad.source.as_ref().unwrap().derivation, "line");
}

#[test]
fn two_point_line_gives_its_pair() {
    let s = set_with(vec![line("l", vec![p(5.0, 5.0, 1), p(6.0, 6.0, 1)])], vec![]);
    let got = sample_tuples(&s, TupleCounts::new(1, 0, 0), 99);
    assert_eq!(got.tuples.len(), 1);
    assert_eq!(got.tuples[0].points, s.lines[0].points);
    assert!(got.exhausted.is_empty());
}

#[test]
fn sampling_is_deterministic_and_uniform() {
    let s = four_point_line();
    let a = sample_tuples(&s, TupleCounts::new(3, 2, 1), 7);
    assert_eq!(a, sample_tuples(&s, TupleCounts::new(3, 2, 1), 7));
    let mut hist = std::collections::HashMap::new();
    let n = 6000;
    for seed in 0..n {
        let t = sample_tuples(&s, TupleCounts::new(1, 0, 0), seed);
        *hist.entry(t.tuples[0].points.clone().iter().map(|q| q.x as u64).collect::<Vec<_>>()).or_insert(0) += 1;
    }
    assert_eq!(hist.len(), 6);
    for (_, c) in hist {
        let share = c as f64 / n as f64;
        assert!((share - 1.0 / 6.0).abs() < 0.02, "share {share}");
    }
}

/// Independent reading of the annotation semantics: stated relations, then
/// reachability by relaxation to a fixed point.
fn brute_relations(set: &AnnotationSet) -> Vec<(AnnotatedPoint, AnnotatedPoint)> {
    let mut rel = Vec::new();
    for l in &set.lines {
        for i in 0..l.points.len() {
            for j in i + 1..l.points.len() {
                rel.push((l.points[i], l.points[j]));
            }
            for f in &l.front {
                rel.push((*f, l.points[i]));
            }
            for b in &l.behind {
                rel.push((l.points[i], *b));
            }
        }
    }
    for g in &set.groups {
        for f in &g.front {
            rel.push((*f, g.reference));
        }
        for b in &g.behind {
            rel.push((g.reference, *b));
        }
    }
    loop {
        let mut grown = false;
        for i in 0..rel.len() {
            for j in 0..rel.len() {
                if rel[i].1 == rel[j].0 {
                    let r = (rel[i].0, rel[j].1);
                    if !rel.contains(&r) {
                        rel.push(r);
                        grown = true;
                    }
                }
            }
        }
        if !grown {
            return rel;
        }
    }
}

fn brute_chains(set: &AnnotationSet, k: usize) -> BTreeSet<Vec<(u64, u64, u32)>> {
    let rel = brute_relations(set);
    let mut pts: Vec<AnnotatedPoint> = Vec::new();
    for (a, b) in &rel {
        for q in [a, b] {
            if !pts.contains(q) {
                pts.push(*q);
            }
        }
    }
    let mut out = BTreeSet::new();
    let mut stack: Vec<Vec<AnnotatedPoint>> = pts.iter().map(|q| vec![*q]).collect();
    while let Some(c) = stack.pop() {
        if c.len() == k {
            out.insert(c.iter().map(|q| (q.x.to_bits(), q.y.to_bits(), q.layer)).collect());
            continue;
        }
        let last = *c.last().unwrap();
        for q in &pts {
            if rel.contains(&(last, *q)) {
                let mut next = c.clone();
                next.push(*q);
                stack.push(next);
            }
        }
    }
    out
}

pub fn random_small_set(rng: &mut DetRng, id: usize) -> AnnotationSet {
    let pool: Vec<AnnotatedPoint> = (0..7)
        .map(|i| p(3.0 * i as f64 + 0.5, 2.0 * i as f64, 1 + (i % 3) as u32))
        .collect();
    loop {
        let mut s = AnnotationSet::new(format!("rand{id}"), 64, 48);
        let budget = rng.int_in(2, 8) as usize;
        while s.point_count() < budget {
            let room = budget - s.point_count();
            let draw = |n: usize, rng: &mut DetRng| {
                let mut v: Vec<AnnotatedPoint> = Vec::new();
                while v.len() < n {
                    let q = *rng.pick(&pool);
                    if !v.contains(&q) {
                        v.push(q);
                    }
                }
                v
            };
            if room >= 2 && rng.bernoulli(0.6) {
                let n = rng.int_in(2, room.min(5) as u32) as usize;
                let mut all = draw(n, rng);
                let n_line = rng.int_in(2, n as u32) as usize;
                let rest = all.split_off(n_line);
                let split = rng.below(rest.len() as u64 + 1) as usize;
                s.lines.push(MonotonicLine {
                    id: format!("l{}", s.lines.len()),
                    points: all,
                    front: rest[..split].to_vec(),
                    behind: rest[split..].to_vec(),
                });
            } else if room >= 2 {
                let n = rng.int_in(2, room.min(4) as u32) as usize;
                let all = draw(n, rng);
                let split = 1 + rng.below(n as u64) as usize;
                s.groups.push(ReferenceGroup {
                    id: format!("g{}", s.groups.len()),
                    reference: all[0],
                    front: all[1..split].to_vec(),
                    behind: all[split..].to_vec(),
                });
                if s.groups.last().unwrap().front.is_empty() && s.groups.last().unwrap().behind.is_empty() {
                    s.groups.pop();
                }
            } else {
                break;
            }
        }
        let nonempty = !(s.lines.is_empty() && s.groups.is_empty());
        if nonempty && s.point_count() <= 8 && validate(&s).is_empty() {
            return s;
        }
    }
}

#[test]
fn sampler_matches_brute_force_on_small_sets() {
    let mut rng = DetRng::new(2024);
    let mut linked = 0;
    for id in 0..200 {
        let s = random_small_set(&mut rng, id);
        let order = PartialOrder::new(&s);
        linked += (s.lines.len() + s.groups.len() > 1) as usize;
        for kind in TupleKind::ALL {
            let k = kind.len();
            let want = brute_chains(&s, k);
            assert_eq!(order.chain_count(k), want.len() as u128, "set {id} k={k}: {s:?}");
            let sampled = sample_tuples(&s, TupleCounts::new(1000, 1000, 1000), id as u64);
            let got: BTreeSet<Vec<(u64, u64, u32)>> = sampled
                .tuples
                .iter()
                .filter(|t| t.kind() == kind)
                .map(|t| t.points.iter().map(|q| (q.x.to_bits(), q.y.to_bits(), q.layer)).collect())
                .collect();
            assert_eq!(got, want, "set {id} k={k}");
        }
    }
    assert!(linked > 50, "generator should produce multi-annotation sets");
}

#[test]
fn sampled_tuples_are_chains() {
    let mut rng = DetRng::new(5);
    for id in 0..50 {
        let s = random_small_set(&mut rng, id);
        let rel = brute_relations(&s);
        for t in sample_tuples(&s, TupleCounts::new(3, 3, 3), 1).tuples {
            for w in t.points.windows(2) {
                assert!(rel.contains(&(w[0], w[1])));
            }
        }
    }
}

#[test]
fn subset_tags() {
    assert_eq!(classify_subsets(&[p(0.0, 0.0, 1), p(1.0, 0.0, 1)]), [Subset::All, Subset::Layer(1)]);
    assert_eq!(
        classify_subsets(&[p(0.0, 0.0, 1), p(1.0, 0.0, 3), p(2.0, 0.0, 3)]),
        [Subset::All, Subset::Mixed]
    );
    let quad: Vec<_> = (0..4).map(|i| p(i as f64, 0.0, 3)).collect();
    assert_eq!(classify_subsets(&quad), [Subset::All, Subset::Layer(3)]);
    for s in [Subset::All, Subset::Mixed, Subset::Layer(7)] {
        assert_eq!(s.to_string().parse::<Subset>().unwrap(), s);
    }
    assert!("Layer-0".parse::<Subset>().is_err());
}

#[test]
fn annotation_json_round_trip() {
    let mut rng = DetRng::new(77);
    for id in 0..50 {
        let mut s = random_small_set(&mut rng, id);
        if let Some(l) = s.lines.first_mut() {
            l.points[0].x = rng.range(0.0, 63.9);
        }
        let bytes = serialize_annotations(&s).unwrap();
        let back = parse_annotations(&bytes).unwrap();
        assert_eq!(back, s);
        assert_eq!(serialize_annotations(&back).unwrap(), bytes);
    }
}

#[test]
fn annotation_parse_errors_carry_paths() {
    let text = br#"{"image_id": "a", "width": 4, "height": 4,
        "lines": [{"id": "l", "points": [{"x": 1, "y": 1, "layer": 1}, {"x": "one", "y": 1, "layer": 1}]}]}"#;
    match parse_annotations(text) {
        Err(AnnotationError::Parse { path, line, .. }) => {
            assert_eq!(path, "lines[0].points[1].x");
            assert_eq!(line, 2);
        }
        other => panic!("expected parse error, got {other:?}"),
    }
}

#[test]
fn tuple_jsonl_round_trip_and_errors() {
    let s = four_point_line();
    let tuples = sample_tuples(&s, TupleCounts::new(6, 4, 1), 0).tuples;
    let text = serialize_tuples_jsonl(&tuples).unwrap();
    assert_eq!(text.lines().count(), 11);
    assert_eq!(parse_tuples_jsonl(&text).unwrap(), tuples);
    let first = text.lines().next().unwrap();
    assert!(first.starts_with("{\"image_id\":\"img\",\"kind\":\"pair\",\"points\":[{\"layer\":1,"));
    assert!(first.contains("\"tags\":[\"All\",\"Layer-1\"]"));

    let five = r#"{"image_id":"a","kind":"quintuplet","points":[{"x":0,"y":0,"layer":1},{"x":1,"y":0,"layer":1},{"x":2,"y":0,"layer":1},{"x":3,"y":0,"layer":1},{"x":4,"y":0,"layer":1}]}"#;
    let err = parse_tuples_jsonl(five).unwrap_err().to_string();
    assert!(err.contains("unknown kind"), "{err}");
    let mismatch = r#"{"image_id":"a","kind":"triplet","points":[{"x":0,"y":0,"layer":1},{"x":1,"y":0,"layer":1}]}"#;
    assert!(parse_tuples_jsonl(mismatch).unwrap_err().to_string().contains("does not match"));
    let tags = r#"{"image_id":"a","kind":"pair","points":[{"x":0,"y":0,"layer":1},{"x":1,"y":0,"layer":2}],"tags":["All","Layer-1"]}"#;
    let err = parse_tuples_jsonl(&format!("\n{tags}")).unwrap_err();
    assert!(matches!(err, AnnotationError::Tuple { line: 2, .. }), "{err}");
}

#[test]
fn ui_export_fixture_parses_and_validates() {
    let bytes = std::fs::read(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/ui_export.json")).unwrap();
    let s = parse_annotations(&bytes).unwrap();
    assert_eq!(s.image_id, "kitchen_0042");
    assert!(validate(&s).is_empty(), "{:?}", validate(&s));
    let order = PartialOrder::new(&s);
    // Line: 3 internal + 3 front + 3 behind + 1 front-behind. Group: 1 + 2 + 2.
    assert_eq!(order.relation_count(), 15);
    let got = sample_tuples(&s, TupleCounts::new(100, 100, 100), 1);
    // front, three line points and behind form a 5-chain: C(5,4) quadruplets.
    assert_eq!(got.available[&TupleKind::Quadruplet], 5);
    assert_eq!(got.exhausted.len(), 3);
    assert!(got.tuples.iter().any(|t| t.tags().contains(&Subset::Mixed)));
}

#[test]
fn ground_truth_tuples_follow_depth() {
    let mut gt = LayeredDepthMap::new(8, 6, 8);
    let mut rng = DetRng::new(1);
    for i in 0..48 {
        let n = rng.below(4) as usize;
        let d: Vec<f32> = (0..n).map(|_| rng.range(0.5, 10.0) as f32).collect();
        gt.set_index(i, &d);
    }
    let tuples = sample_from_layers(&gt, "gt", TupleCounts::new(50, 30, 20), 4);
    assert_eq!(tuples.len(), 100);
    for t in &tuples {
        let depths: Vec<f32> = t
            .points
            .iter()
            .map(|q| gt.layer_at(gt.index(q.x as u32, q.y as u32), q.layer).unwrap())
            .collect();
        assert!(depths.windows(2).all(|w| w[0] < w[1]), "{depths:?}");
    }
    assert_eq!(tuples, sample_from_layers(&gt, "gt", TupleCounts::new(50, 30, 20), 4));
    let _: &RelativeTuple = &tuples[0];
}

fn schema() -> jsonschema::Validator {
    let schema: serde_json::Value = serde_json::from_str(ANNOTATION_SET_SCHEMA).unwrap();
    jsonschema::validator_for(&schema).unwrap()
}

#[test]
fn schema_accepts_exports_and_serialized_sets() {
    let v = schema();
    let fixture: serde_json::Value = serde_json::from_str(include_str!("fixtures/ui_export.json")).unwrap();
    assert!(v.is_valid(&fixture));
    let mut rng = DetRng::new(77);
    for id in 0..50 {
        let set = random_small_set(&mut rng, id);
        let json: serde_json::Value = serde_json::from_slice(&serialize_annotations(&set).unwrap()).unwrap();
        assert!(v.is_valid(&json), "{json}");
    }
}

#[test]
fn schema_rejects_what_parse_or_validate_rejects() {
    let v = schema();
    let base: serde_json::Value = serde_json::from_str(include_str!("fixtures/ui_export.json")).unwrap();
    let edits: [(&str, fn(&mut serde_json::Value)); 6] = [
        ("unknown field", |j| j["colour"] = "red".into()),
        ("layer 0", |j| j["lines"][0]["points"][0]["layer"] = 0.into()),
        ("layer 8", |j| j["groups"][0]["ref"]["layer"] = 8.into()),
        ("one-point line", |j| {
            j["lines"][0]["points"].as_array_mut().unwrap().truncate(1)
        }),
        ("missing ref", |j| {
            j["groups"][0].as_object_mut().unwrap().remove("ref");
        }),
        ("empty group", |j| {
            j["groups"][0]["front"] = serde_json::json!([]);
            j["groups"][0]["behind"] = serde_json::json!([]);
        }),
    ];
    for (name, edit) in edits {
        let mut j = base.clone();
        edit(&mut j);
        assert!(!v.is_valid(&j), "{name}");
        let bytes = serde_json::to_vec(&j).unwrap();
        let rejected = match parse_annotations(&bytes) {
            Err(_) => true,
            Ok(set) => !validate(&set).is_empty(),
        };
        assert!(rejected, "{name} passes the library checks");
    }
}
