//! End-to-end runs over generated cohorts on disk.

use std::path::Path;

use wilt_core::forest::{predict, ForestModel, ForestParams};
use wilt_core::metrics::METRIC_NAMES;
use wilt_core::pipeline::record::{Genotype, Treatment};
use wilt_core::pipeline::report::labeled_samples;
use wilt_core::pipeline::table::{read_metrics, write_metrics};
use wilt_core::pipeline::{run_analyze, run_forest, Manifest, PlantRecord};
use wilt_core::synth::{generate, SynthGroup, SynthParams};

fn params(count: usize, views: usize) -> SynthParams {
    let g = |genotype, treatment, severity| SynthGroup {
        genotype,
        treatment,
        count,
        severity,
    };
    SynthParams {
        seed: 21,
        views,
        groups: vec![
            g(Genotype::HA, Treatment::Inoculated, (0.0, 0.3)),
            g(Genotype::WV, Treatment::Inoculated, (0.6, 1.0)),
        ],
        ..SynthParams::default()
    }
}

fn table(records: &[PlantRecord]) -> String {
    let mut buf = Vec::new();
    write_metrics(records, &mut buf).unwrap();
    String::from_utf8(buf).unwrap()
}

#[test]
fn four_plant_cohort_matches_ground_truth() {
    let dir = tempfile::tempdir().unwrap();
    let out = generate(&params(2, 8), dir.path()).unwrap();
    let manifest = Manifest::load(&out.manifest_path).unwrap();
    let outcome = run_analyze(&manifest, Some(1)).unwrap();
    assert_eq!(outcome.failed_views, 0);
    let res = 0.052;
    for r in &outcome.records {
        for (&dpi, day) in &r.days {
            let truths: Vec<&Vec<f64>> = out
                .truth
                .views
                .iter()
                .filter(|v| v.plant_id == r.plant_id && v.dpi == dpi)
                .map(|v| &v.metrics)
                .collect();
            assert_eq!(truths.len(), 8);
            let got = day.metrics.as_ref().unwrap().values();
            for (i, name) in METRIC_NAMES.iter().enumerate() {
                let want = truths.iter().map(|t| t[i]).sum::<f64>() / 8.0;
                let tol = match *name {
                    "plant_area" | "hull_area" => 1e-9 * want.abs(),
                    _ => res,
                };
                let g = got[i].unwrap();
                assert!((g - want).abs() <= tol + 1e-12, "{} dpi {dpi} {name}: {g} vs {want}", r.plant_id);
            }
        }
    }
}

#[test]
fn one_unreadable_view_only_touches_its_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = generate(&params(1, 8), dir.path()).unwrap();
    let manifest = Manifest::load(&out.manifest_path).unwrap();
    let before = table(&run_analyze(&manifest, Some(1)).unwrap().records);

    let victim = &manifest.plants[0].sessions[2].views[5].image_path;
    std::fs::write(victim, b"not a png").unwrap();
    let outcome = run_analyze(&manifest, Some(1)).unwrap();
    assert_eq!(outcome.failed_views, 1);
    let plant = &manifest.plants[0];
    let day = &outcome.records.iter().find(|r| r.plant_id == plant.plant_id).unwrap().days[&plant.sessions[2].dpi];
    assert_eq!((day.views_ok, day.views_total), (7, 8));
    assert_eq!(day.failures[0].view, 5);

    let after = table(&outcome.records);
    let key = format!("{},", plant.plant_id);
    let dpi_field = format!(",{},", plant.sessions[2].dpi);
    let mut changed = 0;
    for (a, b) in before.lines().zip(after.lines()) {
        if a != b {
            changed += 1;
            assert!(a.starts_with(&key) && a.contains(&dpi_field), "unexpected change: {a}");
        }
    }
    assert_eq!(changed, 1);
}

#[test]
fn empty_manifest_gives_header_only_table() {
    let m = Manifest::from_json(r#"{"plants": []}"#, Path::new("m.json")).unwrap();
    let outcome = run_analyze(&m, None).unwrap();
    let text = table(&outcome.records);
    assert_eq!(text.lines().count(), 2);
    assert!(read_metrics(&text).unwrap().is_empty());
}

#[test]
fn analysis_is_independent_of_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let out = generate(&params(2, 2), dir.path()).unwrap();
    let manifest = Manifest::load(&out.manifest_path).unwrap();
    let one = table(&run_analyze(&manifest, Some(1)).unwrap().records);
    let four = table(&run_analyze(&manifest, Some(4)).unwrap().records);
    assert_eq!(one, four);
    assert_eq!(table(&read_metrics(&one).unwrap()), one);
}

#[test]
fn saved_model_predicts_like_the_trained_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = generate(&params(5, 1), dir.path()).unwrap();
    let manifest = Manifest::load(&out.manifest_path).unwrap();
    let records = run_analyze(&manifest, None).unwrap().records;
    let fp = ForestParams {
        n_trees: 50,
        ..ForestParams::default()
    };
    let outcome = run_forest(&records, &manifest, &fp, 4).unwrap();
    let json = outcome.model.to_json().unwrap();
    let loaded = ForestModel::from_json(&json).unwrap();
    assert_eq!(loaded, outcome.model);
    for s in labeled_samples(&records, &manifest).unwrap() {
        assert_eq!(predict(&loaded, &s.features).unwrap(), predict(&outcome.model, &s.features).unwrap());
    }
    let mut stale: serde_json::Value = serde_json::from_str(&json).unwrap();
    stale["version"] = serde_json::json!(99);
    assert!(ForestModel::from_json(&stale.to_string()).is_err());
}
