//! Acceptance harness. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. Runs without the libtest harness so the lines
//! always reach the terminal.

use std::path::Path;
use std::process::Command;
use std::sync::OnceLock;
use std::time::Instant;

use nalgebra::{DMatrix, Matrix3};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF, StudentsT};

use wilt_core::forest::{ForestParams, Label, LabeledSample};
use wilt_core::geometry::convex_hull;
use wilt_core::metrics::{MetricParams, QuotaBasis, ViewMetrics, METRIC_NAMES};
use wilt_core::pipeline::analyze::{analyze_image, clear_fiducial};
use wilt_core::pipeline::report::{feature_names, labeled_samples, train_and_evaluate, DEFAULT_PAIRS};
use wilt_core::pipeline::{run_stats, GroupLabel, Manifest, PlantRecord};
use wilt_core::raster::{
    apply_color_transform, estimate_color_transform, pixel_resolution, sample_fiducial, Mask, Raster, RgbImage,
};
use wilt_core::segmentation::{dilate, erode, morph_close, morph_open, segment_plant, SegmentationParams, SquareElement};
use wilt_core::stats::{bd_timeseries, bhattacharyya_distance, kruskal_wallis, welch_t_test};
use wilt_core::synth::truth::ground_truth;
use wilt_core::synth::{
    analyze_cohort, max_droop, render_view, sample_distortion, silhouette, PlantGeometry, RenderSettings,
    SynthParams, ViewScene, POT_TOP,
};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn cohort() -> &'static (Manifest, Vec<PlantRecord>) {
    static COHORT: OnceLock<(Manifest, Vec<PlantRecord>)> = OnceLock::new();
    COHORT.get_or_init(|| analyze_cohort(&SynthParams::default()).expect("default cohort"))
}

fn random_scene(rng: &mut ChaCha8Rng, seed: u64) -> (PlantGeometry, ViewScene) {
    let g = PlantGeometry::sample(rng);
    let settings = RenderSettings {
        droop: rng.random_range(0..=max_droop(&g, 8)),
        browning: rng.random_range(0.0..1.0),
        noise: 3,
        distortion: sample_distortion(rng),
        seed,
    };
    let view = rng.random_range(0..8);
    let scene = render_view(&g, view, &settings);
    (g, scene)
}

fn correct(scene: &ViewScene) -> RgbImage {
    let samples = sample_fiducial(&scene.observed, &scene.fiducial).unwrap();
    let t = estimate_color_transform(&samples, &scene.fiducial.reference_colors).unwrap();
    apply_color_transform(&scene.observed, &t)
}

fn analyze(scene: &ViewScene, basis: QuotaBasis) -> ViewMetrics {
    let params = MetricParams {
        pot_top_row: Some(POT_TOP),
        quota_basis: basis,
    };
    analyze_image(
        &scene.observed,
        Some(&scene.shapes.stem),
        &scene.fiducial,
        &SegmentationParams::default(),
        &params,
    )
    .unwrap()
}

// 1 -------------------------------------------------------------------------

fn color_transform_recovery() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst_entry = 0.0f64;
    for _ in 0..100 {
        let (c_image, m) = loop {
            let c: Vec<[f64; 3]> = (0..9)
                .map(|_| std::array::from_fn(|_| rng.random_range(0.0..255.0)))
                .collect();
            let m: [[f64; 3]; 3] = std::array::from_fn(|i| {
                std::array::from_fn(|j| rng.random_range(-0.3..0.3) + if i == j { 1.0 } else { 0.0 })
            });
            let cm = DMatrix::from_fn(9, 3, |r, k| c[r][k]);
            let sv = cm.singular_values();
            let det = Matrix3::from_fn(|i, j| m[i][j]).determinant();
            if sv.min() > 1e-3 * sv.max() && det.abs() > 0.05 {
                break (c, m);
            }
        };
        let c_real: Vec<[f64; 3]> = c_image
            .iter()
            .map(|p| std::array::from_fn(|j| (0..3).map(|k| p[k] * m[k][j]).sum()))
            .collect();
        let t = estimate_color_transform(&c_image, &c_real).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                worst_entry = worst_entry.max((t.matrix[i][j] - m[i][j]).abs());
            }
        }
    }
    let mut worst_mae = 0.0f64;
    for seed in 0..100 {
        let (_, scene) = random_scene(&mut rng, seed);
        let corrected = correct(&scene);
        let n = corrected.data().len() as f64;
        for c in 0..3 {
            let sum: f64 = corrected
                .data()
                .iter()
                .zip(scene.true_image.data())
                .map(|(a, b)| (f64::from(a[c]) - f64::from(b[c])).abs())
                .sum();
            worst_mae = worst_mae.max(sum / n);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        worst_entry < 1e-9 && worst_mae < 1.0 && secs < 5.0,
        format!("max |T-M| = {worst_entry:.2e} (< 1e-9), worst channel MAE = {worst_mae:.3} (< 1.0), {secs:.2} s (< 5 s)"),
    )
}

// 2 -------------------------------------------------------------------------

/// Set-theoretic erosion / dilation by a `side × side` square; everything
/// outside the image is background.
fn oracle_morph(m: &Mask, side: usize, erode: bool) -> Mask {
    let r = (side / 2) as i64;
    let (w, h) = m.dims();
    Raster::from_fn(w, h, |x, y| {
        let hits = (-r..=r)
            .flat_map(|dy| (-r..=r).map(move |dx| (dx, dy)))
            .filter(|&(dx, dy)| {
                let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                (0..w as i64).contains(&nx) && (0..h as i64).contains(&ny) && m.get(nx as usize, ny as usize)
            })
            .count();
        if erode {
            hits == side * side
        } else {
            hits > 0
        }
    })
    .unwrap()
}

fn segmentation_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst_iou = 1.0f64;
    for seed in 0..60 {
        let (_, scene) = random_scene(&mut rng, seed);
        let mut mask = segment_plant(&correct(&scene), &SegmentationParams::default()).unwrap().mask;
        clear_fiducial(&mut mask, &scene.fiducial);
        worst_iou = worst_iou.min(mask.iou(&silhouette(&scene.shapes.raw)).unwrap());
    }
    let mut mismatches = 0;
    for _ in 0..1000 {
        let density = rng.random_range(0.1..0.9);
        let m = Raster::from_fn(16, 16, |_, _| rng.random_bool(density)).unwrap();
        let side = [1, 3, 5, 7][rng.random_range(0..4)];
        let se = SquareElement::new(side).unwrap();
        let (e, d) = (oracle_morph(&m, side, true), oracle_morph(&m, side, false));
        let open = oracle_morph(&e, side, false);
        let close = oracle_morph(&d, side, true);
        let ok = erode(&m, se) == e && dilate(&m, se) == d && morph_open(&m, se) == open && morph_close(&m, se) == close;
        mismatches += usize::from(!ok);
    }
    verdict(
        worst_iou >= 0.99 && mismatches == 0,
        format!("min IoU over 60 scenes = {worst_iou:.5} (>= 0.99), morphology mismatches = {mismatches}/1000"),
    )
}

// 3 -------------------------------------------------------------------------

fn metric_exactness() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut worst_len_px = 0.0f64;
    let mut worst_field = "none above 0";
    let mut area_exact = true;
    for seed in 0..60 {
        let (_, scene) = random_scene(&mut rng, seed);
        let res = pixel_resolution(&scene.fiducial).unwrap().cm_per_pixel();
        let sil = silhouette(&scene.shapes.raw);
        for basis in [QuotaBasis::Full, QuotaBasis::Half] {
            let got = analyze(&scene, basis).metrics.values();
            let want = ground_truth(&sil, &scene.shapes.stem, &scene.true_image, POT_TOP, res, basis)
                .unwrap()
                .values();
            area_exact &= got[0] == Some(want[0]);
            for (i, name) in METRIC_NAMES.iter().enumerate() {
                if matches!(*name, "plant_area" | "hull_area") {
                    continue;
                }
                let err = (got[i].unwrap() - want[i]).abs() / res;
                if err > worst_len_px {
                    worst_len_px = err;
                    worst_field = name;
                }
            }
        }
    }
    let mut rect_ok = true;
    let res = pixel_resolution(&wilt_core::synth::fiducial_observation()).unwrap();
    for _ in 0..200 {
        let (w, h) = (rng.random_range(2..40usize), rng.random_range(2..40usize));
        let (x0, y0) = (rng.random_range(0..10usize), rng.random_range(0..10usize));
        let m = Raster::from_fn(60, 60, |x, y| (x0..x0 + w).contains(&x) && (y0..y0 + h).contains(&y)).unwrap();
        rect_ok &= convex_hull(&m, &res).unwrap().area_px == ((w - 1) * (h - 1)) as f64;
    }
    verdict(
        worst_len_px <= 1.0 && area_exact && rect_ok,
        format!(
            "worst length error = {worst_len_px:.3} px ({worst_field}) (<= 1 px), plant_area exact = {area_exact}, rectangle hull (w-1)(h-1) exact = {rect_ok}"
        ),
    )
}

// 4 -------------------------------------------------------------------------

fn droop_monotonicity() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut violations = Vec::new();
    let mut trajectories = 0;
    for plant in 0..6 {
        let g = PlantGeometry::sample(&mut rng);
        assert!(max_droop(&g, 8) >= 9);
        let distortion = sample_distortion(&mut rng);
        for view in [0, 3, 6] {
            for basis in [QuotaBasis::Full, QuotaBasis::Half] {
                trajectories += 1;
                let steps: Vec<ViewMetrics> = (0..10)
                    .map(|droop| {
                        let s = RenderSettings {
                            droop,
                            browning: 0.0,
                            noise: 3,
                            distortion,
                            seed: droop as u64,
                        };
                        analyze(&render_view(&g, view, &s), basis)
                    })
                    .collect();
                let tag = format!("plant {plant} view {view} {basis:?}");
                let m: Vec<_> = steps.iter().map(|s| &s.metrics).collect();
                if m.iter().any(|x| x.plant_area != m[0].plant_area) {
                    violations.push(format!("{tag}: area not constant"));
                }
                for k in 1..m.len() {
                    if m[k].h90 > m[k - 1].h90 || m[k].cm_height > m[k - 1].cm_height {
                        violations.push(format!("{tag}: increase at step {k}"));
                    }
                }
                for x in &m {
                    if !(x.h33 <= x.h66 && x.h66 <= x.h90) {
                        violations.push(format!("{tag}: h33 <= h66 <= h90 broken"));
                    }
                }
            }
        }
    }
    verdict(
        violations.is_empty(),
        format!(
            "{trajectories} ten-step trajectories, violations: {}",
            if violations.is_empty() { "none".to_string() } else { violations.join("; ") }
        ),
    )
}

// 5 -------------------------------------------------------------------------

fn median(v: &[f64]) -> f64 {
    let mut v = v.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn bhattacharyya_criterion() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut self_nonzero = 0;
    for _ in 0..1000 {
        let n = rng.random_range(1..=256);
        let w: Vec<f64> = (0..n)
            .map(|_| if rng.random_bool(0.3) { 0.0 } else { rng.random_range(0.0..1000.0) })
            .chain(std::iter::once(1.0))
            .collect();
        let total: f64 = w.iter().sum();
        let p: Vec<f64> = w.iter().map(|v| v / total).collect();
        self_nonzero += usize::from(bhattacharyya_distance(&p, &p).unwrap() != 0.0);
    }
    let example = bhattacharyya_distance(&[0.5, 0.5], &[0.9, 0.1]).unwrap();

    let (_, records) = cohort();
    let bd = bd_timeseries(records, -1).unwrap();
    let wv = bd.by_dpi(GroupLabel::ALL[1], -1);
    let medians: Vec<f64> = wv.values().map(|v| median(v)).collect();
    let means: Vec<f64> = wv.values().map(|v| v.iter().sum::<f64>() / v.len() as f64).collect();
    let increasing = |s: &[f64]| s.windows(2).all(|w| w[0] < w[1]);
    let ha = bd.kruskal_across_dpi(GroupLabel::ALL[0], -1).unwrap();
    let wv_kw = bd.kruskal_across_dpi(GroupLabel::ALL[1], -1).unwrap();
    verdict(
        self_nonzero == 0
            && (example - 0.111572).abs() < 1e-5
            && increasing(&medians)
            && increasing(&means)
            && ha.p_value > 0.05,
        format!(
            "BD(p,p) != 0 in {self_nonzero}/1000; [0.5,0.5] vs [0.9,0.1] = {example:.6}; inoc WV BD at dpi {:?}: \
             medians {medians:.3?}, means {means:.3?} (strictly increasing); KW p: inoc HA = {:.3} (> 0.05), inoc WV = {:.2e}",
            wv.keys().collect::<Vec<_>>(),
            ha.p_value,
            wv_kw.p_value
        ),
    )
}

// 6 -------------------------------------------------------------------------

fn welch_oracle(a: &[f64], b: &[f64]) -> (f64, f64, f64) {
    let stats = |x: &[f64]| {
        let n = x.len() as f64;
        let m = x.iter().sum::<f64>() / n;
        (n, m, x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0))
    };
    let ((na, ma, va), (nb, mb, vb)) = (stats(a), stats(b));
    let se2 = va / na + vb / nb;
    let t = (ma - mb) / se2.sqrt();
    let df = se2 * se2 / ((va / na).powi(2) / (na - 1.0) + (vb / nb).powi(2) / (nb - 1.0));
    let p = 2.0 * StudentsT::new(0.0, 1.0, df).unwrap().cdf(-t.abs());
    (t, df, p)
}

/// Mid-ranks by direct counting, tie-corrected H, chi-squared tail.
fn kruskal_oracle(groups: &[Vec<f64>]) -> (f64, f64) {
    let all: Vec<f64> = groups.iter().flatten().copied().collect();
    let n = all.len() as f64;
    let rank = |v: f64| {
        let below = all.iter().filter(|&&x| x < v).count() as f64;
        let equal = all.iter().filter(|&&x| x == v).count() as f64;
        below + (equal + 1.0) / 2.0
    };
    let mut h = 0.0;
    for g in groups {
        let r: f64 = g.iter().map(|&v| rank(v)).sum();
        h += r * r / g.len() as f64;
    }
    h = 12.0 / (n * (n + 1.0)) * h - 3.0 * (n + 1.0);
    let mut seen: Vec<f64> = Vec::new();
    let mut ties = 0.0;
    for &v in &all {
        if !seen.contains(&v) {
            seen.push(v);
            let t = all.iter().filter(|&&x| x == v).count() as f64;
            ties += t * t * t - t;
        }
    }
    h /= 1.0 - ties / (n * n * n - n);
    let p = 1.0 - ChiSquared::new(groups.len() as f64 - 1.0).unwrap().cdf(h);
    (h, p)
}

fn statistical_tests() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let sample = |rng: &mut ChaCha8Rng, n: usize, shift: f64, scale: f64| -> Vec<f64> {
            (0..n).map(|_| shift + scale * rng.random_range(-1.0..1.0)).collect()
        };
        let (na, nb) = (rng.random_range(2..30), rng.random_range(2..30));
        let (scale_a, scale_b) = (rng.random_range(0.1..5.0), rng.random_range(0.1..5.0));
        let shift = rng.random_range(-2.0..2.0);
        let a = sample(&mut rng, na, 0.0, scale_a);
        let b = sample(&mut rng, nb, shift, scale_b);
        let got = welch_t_test(&a, &b).unwrap();
        let (t, df, p) = welch_oracle(&a, &b);
        worst = worst
            .max((got.statistic - t).abs())
            .max((got.df - df).abs())
            .max((got.p_value - p).abs());

        let k = rng.random_range(2..6);
        let tied = rng.random_bool(0.5);
        let groups: Vec<Vec<f64>> = (0..k)
            .map(|g| {
                (0..rng.random_range(2..15))
                    .map(|_| {
                        if tied {
                            f64::from(rng.random_range(0..6) + g % 2)
                        } else {
                            rng.random_range(0.0..10.0) + g as f64 * 0.5
                        }
                    })
                    .collect()
            })
            .collect();
        if groups.iter().flatten().all(|&v| v == groups[0][0]) {
            continue;
        }
        let got = kruskal_wallis(&groups).unwrap();
        let (h, p) = kruskal_oracle(&groups);
        worst = worst.max((got.statistic - h).abs()).max((got.p_value - p).abs());
    }

    let (_, records) = cohort();
    let report = run_stats(records, &DEFAULT_PAIRS, "cm_hor_dis", -1, 3).unwrap();
    let p = |name: &str| report.row("welch", name).and_then(|r| r.p_value).unwrap_or(f64::NAN);
    let inoc = p("inoc_ha-vs-inoc_wv");
    let mock = p("mock_ha-vs-mock_wv");
    verdict(
        worst <= 1e-6 && inoc < 0.05 && mock > 0.05,
        format!(
            "max deviation from reference over 1000+1000 cases = {worst:.2e} (<= 1e-6); delta cm_hor_dis -1->3 Welch p: \
             inoc HA vs inoc WV = {inoc:.2e} (< 0.05), inoc HA vs mock WV = {:.3}, inoc HA vs mock HA = {:.3}, mock HA vs mock WV = {mock:.3} (> 0.05)",
            p("inoc_ha-vs-mock_wv"),
            p("inoc_ha-vs-mock_ha")
        ),
    )
}

// 7 -------------------------------------------------------------------------

fn random_forest() -> Verdict {
    let (manifest, records) = cohort();
    let samples = labeled_samples(records, manifest).unwrap();
    let params = ForestParams::default();
    let start = Instant::now();
    let outcome = train_and_evaluate(&samples, &feature_names(), &params, 2024).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let perfect = [Label::Wilted, Label::NotWilted].iter().all(|&l| {
        let c = outcome.report.class(l);
        c.precision == 1.0 && c.recall == 1.0 && c.f1 == 1.0
    });

    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let mut f1s = Vec::new();
    for _ in 0..10 {
        let mut scores: Vec<f64> = samples.iter().map(|s| s.expert_score).collect();
        scores.shuffle(&mut rng);
        let shuffled: Vec<LabeledSample> = samples
            .iter()
            .zip(scores)
            .map(|(s, score)| LabeledSample::new(s.id.clone(), s.features.clone(), score).unwrap())
            .collect();
        f1s.push(train_and_evaluate(&shuffled, &feature_names(), &params, 2024).unwrap().report.macro_f1());
    }
    let mean = f1s.iter().sum::<f64>() / f1s.len() as f64;
    verdict(
        samples.len() == 122 && outcome.model.trees.len() == 1000 && perfect && (0.35..=0.65).contains(&mean) && secs < 60.0,
        format!(
            "{} labeled plants, train/test {}/{}, {} trees: per-class P=R=F1=1.00 {perfect}; train+eval {secs:.2} s (< 60 s); \
             permuted-label macro F1 mean over 10 = {mean:.3} (in [0.35, 0.65])",
            samples.len(),
            outcome.n_train,
            outcome.predictions.len(),
            outcome.model.trees.len()
        ),
    )
}

// 8 -------------------------------------------------------------------------

fn wilt(args: &[&str]) -> i32 {
    let status = Command::new(env!("CARGO_BIN_EXE_wilt"))
        .args(args)
        .env("WILT_LOG", "error")
        .status()
        .expect("run wilt");
    status.code().unwrap_or(-1)
}

fn read(p: &Path) -> Vec<u8> {
    std::fs::read(p).unwrap_or_default()
}

fn cli_determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let s = |p: &Path| p.to_str().unwrap().to_string();
    std::fs::write(
        d.join("params.json"),
        r#"{"seed": 8, "groups": [
            {"genotype": "HA", "treatment": "inoculated", "count": 8, "severity": [0.0, 0.3]},
            {"genotype": "WV", "treatment": "inoculated", "count": 8, "severity": [0.6, 1.0]},
            {"genotype": "HA", "treatment": "mock", "count": 3, "severity": [0.0, 0.1]},
            {"genotype": "WV", "treatment": "mock", "count": 3, "severity": [0.0, 0.1]}]}"#,
    )
    .unwrap();
    let cohort = d.join("cohort");
    let manifest = s(&cohort.join("manifest.json"));
    let mut codes = vec![wilt(&["synth", "--params", &s(&d.join("params.json")), "--out", &s(&cohort)])];
    let runs = [("1", "a"), ("3", "b"), ("1", "c")];
    for (jobs, tag) in runs {
        let run = d.join(tag);
        let metrics = s(&run.join("metrics.csv"));
        codes.push(wilt(&["analyze", "--manifest", &manifest, "--out", &metrics, "--jobs", jobs]));
        codes.push(wilt(&[
            "stats", "--metrics", &metrics, "--metric", "cm_hor_dis", "--from-dpi", "-1", "--to-dpi", "3", "--pairs", "all",
            "--out", &s(&run.join("stats.csv")),
        ]));
        codes.push(wilt(&[
            "forest", "--metrics", &metrics, "--manifest", &manifest, "--seed", "17", "--trees", "1000", "--out",
            &s(&run.join("forest")), "--jobs", jobs,
        ]));
    }
    let files = ["metrics.csv", "stats.csv", "forest/model.json", "forest/report.csv", "forest/predictions.csv"];
    let mut differing = Vec::new();
    for f in files {
        let a = read(&d.join("a").join(f));
        if a.is_empty() {
            differing.push(format!("{f} missing"));
            continue;
        }
        for (_, tag) in &runs[1..] {
            if read(&d.join(tag).join(f)) != a {
                differing.push(format!("{f} ({tag})"));
            }
        }
    }
    let codes_ok = codes.iter().all(|&c| c == 0);
    verdict(
        codes_ok && differing.is_empty(),
        format!(
            "3 runs (jobs 1, 3, 1) of analyze+stats+forest: exit codes {codes:?}; differing files: {}",
            if differing.is_empty() { "none".to_string() } else { differing.join(", ") }
        ),
    )
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 8] = [
        ("color-transform recovery", color_transform_recovery),
        ("segmentation oracle", segmentation_oracle),
        ("metric exactness", metric_exactness),
        ("distribution monotonicity", droop_monotonicity),
        ("bhattacharyya", bhattacharyya_criterion),
        ("statistical tests vs oracle", statistical_tests),
        ("random forest", random_forest),
        ("determinism", cli_determinism),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = std::panic::catch_unwind(check).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            verdict(false, format!("panicked: {msg}"))
        });
        failed += usize::from(!v.pass);
        println!(
            "{} criterion {} ({name}): {} [{:.1} s]",
            if v.pass { "PASS" } else { "FAIL" },
            i + 1,
            v.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
