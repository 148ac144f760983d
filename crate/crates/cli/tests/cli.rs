use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;
use strata::annotations::{parse_tuples_jsonl, AnnotatedPoint, AnnotationSet, MonotonicLine, serialize_annotations};
use strata::render::{read_ldgt, render_layers, write_ldgt, LayeredDepthMap, RenderConfig, RenderScene, TransMask};
use strata::scenegen::{fixtures, parse_scene, serialize_scene};
use strata_cli::{DatasetManifest, Record, Split, MANIFEST_VERSION};

fn strata(args: &[&str]) -> (i32, Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_strata"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs");
    let json = if out.stdout.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
    };
    (out.status.code().expect("exited"), json)
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn small_dataset(dir: &Path, count: &str, seed: &str) -> (i32, Value) {
    strata(&["generate", "--out", p(dir), "--count", count, "--seed", seed, "--width", "48", "--height", "36"])
}

#[test]
fn generate_writes_scenes_for_consecutive_seeds() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("ds");
    let (code, summary) = small_dataset(&out, "3", "7");
    assert_eq!(code, 0, "{summary}");
    assert_eq!(summary["generated"], 3);
    let manifest = DatasetManifest::load(&out.join("manifest.json")).unwrap();
    assert_eq!(manifest.records.iter().map(|r| r.seed).collect::<Vec<_>>(), [7, 8, 9]);
    for (i, r) in manifest.records.iter().enumerate() {
        assert_eq!(r.scene, format!("scene_{i}.json"));
        let scene = parse_scene(&std::fs::read(out.join(&r.scene)).unwrap()).unwrap();
        assert_eq!(scene.provenance.unwrap().seed, r.seed);
    }
    assert!(manifest.validate(&out).is_empty());

    let snapshot = |d: &Path| -> Vec<(String, Vec<u8>)> {
        let mut v: Vec<_> = std::fs::read_dir(d)
            .unwrap()
            .map(|e| e.unwrap().path())
            .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
            .collect();
        v.sort();
        v
    };
    let before = snapshot(&out);
    assert_eq!(small_dataset(&out, "3", "7").0, 0);
    assert_eq!(snapshot(&out), before);

    std::fs::remove_file(out.join("scene_1.json")).unwrap();
    let (code, summary) = strata(&[
        "generate", "--out", p(&out), "--count", "3", "--seed", "7", "--width", "48", "--height", "36", "--resume",
    ]);
    assert_eq!(code, 0);
    assert_eq!((summary["generated"].as_u64(), summary["skipped"].as_u64()), (Some(1), Some(2)));
    assert_eq!(snapshot(&out), before);
}

#[test]
fn invalid_generator_config_writes_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("gen.json");
    std::fs::write(&cfg, br#"{"room_widht": [4, 8]}"#).unwrap();
    let out = tmp.path().join("ds");
    let (code, _) = strata(&["generate", "--out", p(&out), "--count", "2", "--config", p(&cfg)]);
    assert_eq!(code, 2);
    assert!(!out.exists());
    std::fs::write(&cfg, br#"{"p_transparent": 1.5}"#).unwrap();
    assert_eq!(strata(&["generate", "--out", p(&out), "--count", "2", "--config", p(&cfg)]).0, 2);
    assert!(!out.exists());
    assert_eq!(strata(&["generate", "--count", "2"]).0, 2);
    assert_eq!(strata(&["--workers", "0", "stats", "--manifest", "x"]).0, 2);
}

#[test]
fn render_outputs_are_reproducible_and_failures_isolated() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("ds");
    assert_eq!(small_dataset(&out, "2", "0").0, 0);
    let m = out.join("manifest.json");
    let (code, summary) = strata(&["render", "--manifest", p(&m), "--width", "64", "--height", "64", "--spp", "1"]);
    assert_eq!(code, 0, "{summary}");
    assert_eq!(summary["rendered"], 2);
    let manifest = DatasetManifest::load(&m).unwrap();
    let files: Vec<PathBuf> = manifest
        .records
        .iter()
        .flat_map(|r| [out.join(r.rgb.as_ref().unwrap()), out.join(r.ldgt.as_ref().unwrap())])
        .collect();
    assert_eq!(files.len(), 4);
    let (map, mask) = read_ldgt(&files[1]).unwrap();
    assert_eq!((map.width(), map.height()), (64, 64));
    assert!(mask.is_some());
    let bytes: Vec<Vec<u8>> = files.iter().map(|f| std::fs::read(f).unwrap()).collect();

    let (code, _) = strata(&["--workers", "2", "render", "--manifest", p(&m), "--width", "64", "--height", "64", "--spp", "1"]);
    assert_eq!(code, 0);
    assert_eq!(files.iter().map(|f| std::fs::read(f).unwrap()).collect::<Vec<_>>(), bytes);

    std::fs::write(out.join("scene_0.json"), b"{ not json").unwrap();
    let (code, summary) = strata(&["render", "--manifest", p(&m), "--width", "64", "--height", "64", "--spp", "1"]);
    assert_eq!(code, 1);
    assert_eq!(summary["failed"], serde_json::json!(["scene_0"]));
    assert_eq!(summary["rendered"], 1);
    let manifest = DatasetManifest::load(&m).unwrap();
    assert!(manifest.records[0].error.as_ref().unwrap().starts_with("render:"));
    assert!(manifest.records[0].ldgt.is_none());
    assert!(manifest.records[1].error.is_none());
    // No temporary files are left behind.
    assert!(std::fs::read_dir(&out).unwrap().all(|e| !e.unwrap().file_name().to_string_lossy().starts_with('.')));
}

#[test]
fn invalid_render_config_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("ds");
    assert_eq!(small_dataset(&out, "1", "0").0, 0);
    let m = out.join("manifest.json");
    assert_eq!(strata(&["render", "--manifest", p(&m), "--spp", "0"]).0, 2);
    let cfg = tmp.path().join("r.json");
    std::fs::write(&cfg, br#"{"samples": 3}"#).unwrap();
    assert_eq!(strata(&["render", "--manifest", p(&m), "--config", p(&cfg)]).0, 2);
    assert!(DatasetManifest::load(&m).unwrap().records[0].ldgt.is_none());
}

fn four_point_line(id: &str) -> AnnotationSet {
    let mut set = AnnotationSet::new(id, 100, 100);
    set.lines.push(MonotonicLine {
        id: "l0".into(),
        points: (0..4).map(|i| AnnotatedPoint::new(10.0 + 20.0 * i as f64, 50.0, 1)).collect(),
        front: vec![],
        behind: vec![],
    });
    set
}

#[test]
fn sample_emits_every_chain_of_a_line() {
    let tmp = tempfile::tempdir().unwrap();
    let ann = tmp.path().join("ann");
    std::fs::create_dir(&ann).unwrap();
    std::fs::write(ann.join("line.json"), serialize_annotations(&four_point_line("img0")).unwrap()).unwrap();
    let out = tmp.path().join("tuples");
    let args = ["sample", "--annotations", p(&ann), "--out", p(&out), "--pairs", "6", "--triplets", "4", "--quadruplets", "1"];
    let (code, summary) = strata(&args);
    assert_eq!(code, 0, "{summary}");
    assert_eq!(summary["totals"], serde_json::json!({"pair": 6, "triplet": 4, "quadruplet": 1}));
    assert_eq!(summary["subsets"]["pair"]["Layer-1"], 6);
    let text = std::fs::read_to_string(out.join("img0.jsonl")).unwrap();
    let tuples = parse_tuples_jsonl(&text).unwrap();
    // Independent enumeration: index subsets of the 4 line points, in order.
    let mut want = Vec::new();
    for k in 2..=4usize {
        for mask in 0u32..16 {
            if mask.count_ones() as usize == k {
                want.push((0..4).filter(|i| mask & (1 << i) != 0).map(|i| 10.0 + 20.0 * i as f64).collect::<Vec<_>>());
            }
        }
    }
    let mut got: Vec<Vec<f64>> = tuples.iter().map(|t| t.points.iter().map(|p| p.x).collect()).collect();
    want.sort_by(|a, b| a.partial_cmp(b).unwrap());
    got.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert_eq!(got, want);

    assert_eq!(strata(&args).0, 0);
    assert_eq!(std::fs::read_to_string(out.join("img0.jsonl")).unwrap(), text);

    // Asking for more than exists reports exhaustion but still succeeds.
    let (code, summary) = strata(&["sample", "--annotations", p(&ann), "--out", p(&out), "--pairs", "9"]);
    assert_eq!(code, 0);
    assert_eq!(summary["exhausted"]["pair"], serde_json::json!(["img0"]));
}

#[test]
fn sample_skips_invalid_files_and_handles_empty_dirs() {
    let tmp = tempfile::tempdir().unwrap();
    let ann = tmp.path().join("ann");
    std::fs::create_dir(&ann).unwrap();
    let out = tmp.path().join("t");
    let (code, summary) = strata(&["sample", "--annotations", p(&ann), "--out", p(&out)]);
    assert_eq!(code, 0);
    assert_eq!(summary["images"], 0);
    assert_eq!(summary["totals"]["pair"], 0);

    std::fs::write(ann.join("a.json"), serialize_annotations(&four_point_line("a")).unwrap()).unwrap();
    let mut bad = four_point_line("b");
    bad.lines[0].points.truncate(1);
    std::fs::write(ann.join("b.json"), serialize_annotations(&bad).unwrap()).unwrap();
    std::fs::write(ann.join("c.json"), b"[1, 2").unwrap();
    let (code, summary) = strata(&["sample", "--annotations", p(&ann), "--out", p(&out), "--pairs", "2"]);
    assert_eq!(code, 1);
    assert_eq!(summary["images"], 1);
    let invalid = summary["invalid"].as_array().unwrap();
    assert_eq!(invalid.len(), 2);
    assert!(invalid[0]["errors"][0].as_str().unwrap().contains("line requires"));
    assert!(out.join("a.jsonl").is_file() && !out.join("b.jsonl").exists());
}

#[test]
fn ui_export_samples_cleanly() {
    let tmp = tempfile::tempdir().unwrap();
    let ann = tmp.path().join("ann");
    std::fs::create_dir(&ann).unwrap();
    let fixture = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/ui_export.json");
    std::fs::copy(fixture, ann.join("ui.json")).unwrap();
    let out = tmp.path().join("t");
    let (code, summary) = strata(&["sample", "--annotations", p(&ann), "--out", p(&out), "--seed", "3"]);
    assert_eq!(code, 0, "{summary}");
    assert_eq!(summary["totals"]["quadruplet"], 5);
    assert_eq!(summary["totals"]["pair"], 15);
}

/// A directory holding one LDGT file per image.
fn ldgt_dir(dir: &Path, items: &[(&str, &LayeredDepthMap, &TransMask)]) {
    std::fs::create_dir_all(dir).unwrap();
    for (id, map, mask) in items {
        write_ldgt(map, Some(mask), &dir.join(format!("{id}.ldgt"))).unwrap();
    }
}

fn slab_gt() -> (LayeredDepthMap, TransMask) {
    render_layers(&RenderScene::new(&fixtures::slab_scene(0.5, 32, 32)), &RenderConfig::new(32, 32))
}

#[test]
fn eval_against_itself_is_perfect() {
    let tmp = tempfile::tempdir().unwrap();
    let ds = tmp.path().join("ds");
    assert_eq!(small_dataset(&ds, "2", "4").0, 0);
    let m = ds.join("manifest.json");
    assert_eq!(strata(&["render", "--manifest", p(&m), "--spp", "1"]).0, 0);
    let (code, s) = strata(&["sample", "--manifest", p(&m), "--pairs", "300", "--triplets", "100", "--quadruplets", "100"]);
    assert_eq!(code, 0, "{s}");
    assert_eq!(s["totals"]["pair"], 600);

    let (code, report) = strata(&["eval", "--pred", p(&ds), "--gt", p(&m)]);
    assert_eq!(code, 0, "{report}");
    for kind in ["pair", "triplet", "quadruplet"] {
        assert_eq!(report["tuples"][kind]["All"]["accuracy"], 1.0);
    }
    let cell = &report["depth"]["all"]["adapted"]["affine_depth"];
    assert_eq!((cell["abs_rel"].as_f64(), cell["delta1"].as_f64()), (Some(0.0), Some(1.0)));
    assert_eq!(report["provenance"]["clip"], serde_json::json!([0.001, 30.0]));
    // Predictions and ground truth are the same two files, plus two tuple files.
    assert_eq!(report["provenance"]["files"].as_object().unwrap().len(), 4);

    // The same with an explicit directory of ground truth and a report file.
    let file = tmp.path().join("report.json");
    let args = ["eval", "--pred", p(&ds), "--gt", p(&ds), "--tuples", p(&ds), "--out", p(&file)];
    let (code, by_dir) = strata(&args);
    assert_eq!(code, 0);
    assert_eq!(by_dir["tuples"], report["tuples"]);
    assert_eq!(serde_json::from_slice::<Value>(&std::fs::read(&file).unwrap()).unwrap(), by_dir);
}

#[test]
fn eval_strategies_on_the_slab() {
    let tmp = tempfile::tempdir().unwrap();
    let (gt, trans) = slab_gt();
    let mut constant = LayeredDepthMap::new(32, 32, 1);
    for i in 0..constant.pixel_count() {
        constant.set_index(i, &[3.0]);
    }
    ldgt_dir(&tmp.path().join("gt"), &[("slab", &gt, &trans)]);
    ldgt_dir(&tmp.path().join("pred"), &[("slab", &constant, &trans)]);
    let (code, r) = strata(&[
        "eval", "--pred", p(&tmp.path().join("pred")), "--gt", p(&tmp.path().join("gt")),
        "--strategy", "adapted,first", "--alignment", "metric", "--mask", "trans",
    ]);
    assert_eq!(code, 0, "{r}");
    let abs_rel = |s: &str| r["depth"]["trans"][s]["metric"]["abs_rel"].as_f64().unwrap();
    // Slab pixels: layers [1.0, 1.2, 3.0]; adapted picks 3.0 exactly, first is off by 2/1.
    assert_eq!(abs_rel("adapted"), 0.0);
    assert!((abs_rel("first") - 2.0).abs() < 1e-6);
    assert!(r["depth"]["trans"].get("last").is_none());
    assert!(r["depth"].get("all").is_none());
}

#[test]
fn eval_reports_missing_predictions() {
    let tmp = tempfile::tempdir().unwrap();
    let (gt, trans) = slab_gt();
    ldgt_dir(&tmp.path().join("gt"), &[("a", &gt, &trans), ("b", &gt, &trans)]);
    ldgt_dir(&tmp.path().join("pred"), &[("a", &gt, &trans), ("z", &gt, &trans)]);
    let (code, r) = strata(&["eval", "--pred", p(&tmp.path().join("pred")), "--gt", p(&tmp.path().join("gt")), "--clip", "0.01", "20"]);
    assert_eq!(code, 1);
    let errors: Vec<&str> = r["errors"].as_array().unwrap().iter().map(|e| e.as_str().unwrap()).collect();
    assert!(errors.iter().any(|e| e.contains("\"b\"") && e.contains("missing prediction")), "{errors:?}");
    assert!(errors.iter().any(|e| e.contains("\"z\" has no ground truth")), "{errors:?}");
    assert_eq!(r["provenance"]["clip"], serde_json::json!([0.01, 20.0]));
    assert_eq!(r["images"].as_array().unwrap().len(), 1);
    assert_eq!(strata(&["eval", "--pred", p(tmp.path()), "--gt", p(tmp.path()), "--clip", "5", "1"]).0, 2);
    assert_eq!(strata(&["eval", "--pred", p(tmp.path()), "--gt", p(tmp.path()), "--strategy", "middle"]).0, 2);
}

fn fixture_manifest(dir: &Path, items: &[(&str, &LayeredDepthMap, &TransMask)]) -> PathBuf {
    let mut records = Vec::new();
    for (id, map, mask) in items {
        let scene = format!("{id}.json");
        std::fs::write(dir.join(&scene), serialize_scene(&fixtures::wall_scene(3.0, 4, 4))).unwrap();
        write_ldgt(map, Some(mask), &dir.join(format!("{id}.ldgt"))).unwrap();
        records.push(Record {
            id: id.to_string(),
            seed: 0,
            split: Split::Train,
            scene,
            rgb: None,
            ldgt: Some(format!("{id}.ldgt")),
            annotations: None,
            tuples: None,
            error: None,
        });
    }
    let m = DatasetManifest {
        version: MANIFEST_VERSION,
        generator_hash: String::new(),
        generator: Default::default(),
        base_seed: 0,
        val_fraction: 0.0,
        records,
    };
    let path = dir.join("manifest.json");
    m.save(&path).unwrap();
    path
}

#[test]
fn stats_on_fixture_datasets() {
    let tmp = tempfile::tempdir().unwrap();
    let empty = fixture_manifest(tmp.path(), &[]);
    let (code, s) = strata(&["stats", "--manifest", p(&empty)]);
    assert_eq!(code, 0);
    assert_eq!((s["images"].as_u64(), s["transparent_fraction"].as_f64()), (Some(0), Some(0.0)));
    assert_eq!(s["layer_histogram"], serde_json::json!([]));

    let dir = tmp.path().join("opaque");
    std::fs::create_dir(&dir).unwrap();
    let wall = render_layers(&RenderScene::new(&fixtures::wall_scene(3.0, 16, 16)), &RenderConfig::new(16, 16));
    let m = fixture_manifest(&dir, &[("w", &wall.0, &wall.1)]);
    let (code, s) = strata(&["stats", "--manifest", p(&m)]);
    assert_eq!(code, 0, "{s}");
    assert_eq!(s["transparent_fraction"], 0.0);
    let hist: Vec<u64> = serde_json::from_value(s["layer_histogram"].clone()).unwrap();
    assert_eq!(hist.iter().skip(2).sum::<u64>(), 0);
    assert_eq!(hist[1], 256);

    let dir = tmp.path().join("slab");
    std::fs::create_dir(&dir).unwrap();
    let (gt, trans) = slab_gt();
    let slab_pixels = trans.as_slice().iter().filter(|t| **t).count() as u64;
    let m = fixture_manifest(&dir, &[("s", &gt, &trans)]);
    let (_, s) = strata(&["stats", "--manifest", p(&m)]);
    let hist: Vec<u64> = serde_json::from_value(s["layer_histogram"].clone()).unwrap();
    assert!(slab_pixels > 0);
    assert_eq!(hist[3], slab_pixels);
    assert_eq!(hist[1], 1024 - slab_pixels);
    assert!((s["transparent_fraction"].as_f64().unwrap() - slab_pixels as f64 / 1024.0).abs() < 1e-12);

    std::fs::remove_file(dir.join("s.ldgt")).unwrap();
    let (code, s) = strata(&["stats", "--manifest", p(&m)]);
    assert_eq!(code, 1);
    assert!(s["issues"][0].as_str().unwrap().contains("missing file s.ldgt"));
}

#[test]
fn snap_files_and_directories() {
    let tmp = tempfile::tempdir().unwrap();
    let (gt, trans) = slab_gt();
    let dir = tmp.path().join("in");
    ldgt_dir(&dir, &[("a", &gt, &trans), ("b", &gt, &trans)]);
    let out = tmp.path().join("out");
    let (code, s) = strata(&["snap", "--input", p(&dir), "--output", p(&out), "--layers", "5"]);
    assert_eq!(code, 0, "{s}");
    assert_eq!(s["written"], 2);
    let (snapped, mask) = read_ldgt(&out.join("a.ldgt")).unwrap();
    assert_eq!(mask.as_ref(), Some(&trans));
    let centre = (16 * 32 + 16) as usize;
    assert_eq!(snapped.layers_at(centre), [1.0, 1.2, 3.0, 3.0, 3.0]);

    let again = tmp.path().join("again.ldgt");
    let (code, _) = strata(&["snap", "--input", p(&out.join("a.ldgt")), "--output", p(&again), "--layers", "5"]);
    assert_eq!(code, 0);
    assert_eq!(std::fs::read(&again).unwrap(), std::fs::read(out.join("a.ldgt")).unwrap());
    assert_eq!(strata(&["snap", "--input", p(&again), "--output", p(&again), "--layers", "0"]).0, 2);
}
