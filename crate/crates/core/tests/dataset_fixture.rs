use std::collections::BTreeMap;
use std::io::Write;

use belief_tamp::sim::{aggregate_annotations, score_annotation, AnnotationEntry, PlacementDataset};

fn fixture() -> PlacementDataset {
    PlacementDataset::from_jsonl(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/multiport_hub.jsonl")).unwrap()
}

#[test]
fn multiport_hub_scores() {
    let data = fixture();
    assert_eq!(data.entries.len(), 1);
    let entry = &data.entries[0];
    assert_eq!(entry.num_surfaces(), 15);
    let scores = score_annotation(entry, entry.num_surfaces()).unwrap();
    let expected: BTreeMap<String, i64> = [
        ("carpet", 15),
        ("fridge", 14),
        ("table", 13),
        ("counter", 12),
        ("sink", 11),
        ("chest", -15),
        ("cooktop", -14),
        ("microwave", -13),
        ("dishwasher", -12),
        ("stove", -11),
    ]
    .into_iter()
    .map(|(s, v)| (s.to_string(), v))
    .collect();
    assert_eq!(scores, expected);
}

#[test]
fn fixture_aggregates_with_implausible_surfaces_removed() {
    let data = fixture();
    let agg = data.aggregated("multiport hub", "kitchen").unwrap();
    assert_eq!(agg.probabilities.len(), 10);
    assert!(!agg.probabilities.contains_key("oven"));
    let best = agg.probabilities.iter().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
    assert_eq!(best, "carpet");
    assert_eq!(agg.probabilities["chest"], 0.0);
    let total: f64 = agg.probabilities.values().sum();
    assert!((total - 1.0).abs() < 1e-9);
}

fn entry(annotator: u32, implausible: bool) -> AnnotationEntry {
    AnnotationEntry {
        object: "mug".into(),
        room: "kitchen".into(),
        correct: if implausible { vec!["counter".into()] } else { vec!["counter".into(), "x".into()] },
        incorrect: vec!["stove".into()],
        implausible: if implausible { vec!["x".into()] } else { vec![] },
        annotator,
    }
}

#[test]
fn majority_implausible_surface_is_dropped() {
    let six: Vec<_> = (0..10).map(|a| entry(a, a < 6)).collect();
    assert!(!aggregate_annotations(&six).unwrap().probabilities.contains_key("x"));
    let five: Vec<_> = (0..10).map(|a| entry(a, a < 5)).collect();
    assert!(aggregate_annotations(&five).unwrap().probabilities.contains_key("x"));
}

#[test]
fn jsonl_round_trip_and_bad_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rows.jsonl");
    let mut f = std::fs::File::create(&path).unwrap();
    for a in 0..3 {
        writeln!(f, "{}", serde_json::to_string(&entry(a, false)).unwrap()).unwrap();
    }
    drop(f);
    let data = PlacementDataset::from_jsonl(&path).unwrap();
    assert_eq!(data.entries.len(), 3);
    assert_eq!(data.aggregated("mug", "kitchen").unwrap().annotators, 3);

    std::fs::write(&path, "{\"object\": 1}\n").unwrap();
    let err = PlacementDataset::from_jsonl(&path).unwrap_err();
    assert!(err.to_string().contains("line 1"), "{err}");
}
