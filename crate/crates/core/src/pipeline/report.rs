//! The `stats` and `forest` stages that run on a metrics table.

use log::warn;
use serde::Serialize;

use super::manifest::Manifest;
use super::record::{Genotype, GroupLabel, PlantRecord, Treatment};
use crate::error::{Result, WiltError};
use crate::forest::{self, EvalReport, ForestModel, ForestParams, Label, LabeledSample};
use crate::metrics::METRIC_NAMES;
use crate::stats::{self, bd_timeseries, delta_metric, BdSeries, DeltaReport, Exclusion, TestResult};

pub const BASELINE_DPI: i32 = -1;

/// Imaging days fed to the classifier.
pub const FOREST_DPI: [i32; 5] = [-1, 3, 4, 5, 6];

pub type GroupPair = (GroupLabel, GroupLabel);

pub const DEFAULT_PAIRS: [GroupPair; 4] = {
    use Genotype::*;
    use Treatment::*;
    [
        (GroupLabel::new(HA, Inoculated), GroupLabel::new(WV, Inoculated)),
        (GroupLabel::new(HA, Inoculated), GroupLabel::new(WV, Mock)),
        (GroupLabel::new(HA, Inoculated), GroupLabel::new(HA, Mock)),
        (GroupLabel::new(HA, Mock), GroupLabel::new(WV, Mock)),
    ]
};

pub fn pair_name(p: &GroupPair) -> String {
    format!("{}-vs-{}", p.0, p.1)
}

/// `all` or a comma-separated list like `inoc_ha-vs-inoc_wv`.
pub fn parse_pairs(s: &str) -> Result<Vec<GroupPair>> {
    if s.trim() == "all" {
        return Ok(DEFAULT_PAIRS.to_vec());
    }
    let valid = || {
        let mut names: Vec<String> = Vec::new();
        for a in GroupLabel::ALL {
            for b in GroupLabel::ALL {
                if a != b {
                    names.push(format!("{a}-vs-{b}"));
                }
            }
        }
        format!("all, {}", names.join(", "))
    };
    s.split(',')
        .map(str::trim)
        .map(|name| {
            name.split_once("-vs-")
                .and_then(|(a, b)| Some((a.parse().ok()?, b.parse().ok()?)))
                .filter(|(a, b): &GroupPair| a != b)
                .ok_or_else(|| WiltError::UnknownPair {
                    name: name.to_string(),
                    valid: valid(),
                })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatsRow {
    pub test: String,
    pub name: String,
    pub metric: String,
    pub n_a: usize,
    pub n_b: usize,
    pub statistic: Option<f64>,
    pub df: Option<f64>,
    pub p_value: Option<f64>,
    pub note: String,
}

impl StatsRow {
    fn new(test: &str, name: String, metric: &str, n: (usize, usize), r: Result<TestResult>) -> StatsRow {
        let (statistic, df, p_value, note) = match r {
            Ok(t) => (Some(t.statistic), Some(t.df), Some(t.p_value), String::new()),
            Err(e) => (None, None, None, e.to_string()),
        };
        StatsRow {
            test: test.into(),
            name,
            metric: metric.into(),
            n_a: n.0,
            n_b: n.1,
            statistic,
            df,
            p_value,
            note,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StatsReport {
    pub rows: Vec<StatsRow>,
    pub deltas: DeltaReport,
    pub bd: BdSeries,
}

impl StatsReport {
    pub fn row(&self, test: &str, name: &str) -> Option<&StatsRow> {
        self.rows.iter().find(|r| r.test == test && r.name == name)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| WiltError::Validation(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn exclusions(&self) -> impl Iterator<Item = &Exclusion> {
        self.deltas.excluded.iter().chain(&self.bd.excluded)
    }
}

/// Welch's t-test on per-plant metric deltas for each pair, plus a
/// Kruskal–Wallis test across post-baseline days of each group's
/// Bhattacharyya distances.
pub fn run_stats(
    records: &[PlantRecord],
    pairs: &[GroupPair],
    metric: &str,
    dpi_from: i32,
    dpi_to: i32,
) -> Result<StatsReport> {
    let deltas = delta_metric(records, metric, dpi_from, dpi_to)?;
    for e in &deltas.excluded {
        warn!("plant {} excluded from {metric} delta: {}", e.plant_id, e.reason);
    }
    let mut rows = Vec::new();
    for pair in pairs {
        let (a, b) = (deltas.values(pair.0), deltas.values(pair.1));
        rows.push(StatsRow::new(
            "welch",
            pair_name(pair),
            &format!("{metric}[{dpi_from}->{dpi_to}]"),
            (a.len(), b.len()),
            stats::welch_t_test(&a, &b),
        ));
    }
    let bd = bd_timeseries(records, BASELINE_DPI)?;
    for group in GroupLabel::ALL {
        let by_dpi = bd.by_dpi(group, BASELINE_DPI);
        if by_dpi.is_empty() {
            continue;
        }
        let n = by_dpi.values().map(Vec::len).sum();
        rows.push(StatsRow::new(
            "kruskal_wallis",
            group.to_string(),
            "bhattacharyya_distance",
            (n, by_dpi.len()),
            bd.kruskal_across_dpi(group, BASELINE_DPI),
        ));
    }
    Ok(StatsReport { rows, deltas, bd })
}

/// Feature names in classifier order.
pub fn feature_names() -> Vec<String> {
    let mut names: Vec<String> = FOREST_DPI
        .iter()
        .flat_map(|d| METRIC_NAMES.iter().map(move |m| format!("{m}@{d}")))
        .collect();
    names.extend(
        FOREST_DPI
            .iter()
            .filter(|&&d| d != BASELINE_DPI)
            .map(|d| format!("bd@{d}")),
    );
    names
}

/// Metric values per day followed by the distance to the baseline colour
/// histogram per day; absent entries stay `None`.
pub fn plant_features(record: &PlantRecord, bd: &BdSeries) -> Vec<Option<f64>> {
    let mut f: Vec<Option<f64>> = FOREST_DPI
        .iter()
        .flat_map(|&d| (0..METRIC_NAMES.len()).map(move |i| record.metric(d, i)))
        .collect();
    let dist = bd.plants.iter().find(|p| p.plant_id == record.plant_id);
    f.extend(
        FOREST_DPI
            .iter()
            .filter(|&&d| d != BASELINE_DPI)
            .map(|d| dist.and_then(|p| p.distances.get(d).copied())),
    );
    f
}

/// Labeled samples for every plant that has an expert score in the
/// manifest.
pub fn labeled_samples(records: &[PlantRecord], manifest: &Manifest) -> Result<Vec<LabeledSample>> {
    let bd = bd_timeseries(records, BASELINE_DPI)?;
    let mut out = Vec::new();
    for r in records {
        let Some(score) = manifest.plant(&r.plant_id).and_then(|p| p.expert_score) else {
            continue;
        };
        out.push(LabeledSample::new(&r.plant_id, plant_features(r, &bd), score)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictionRow {
    pub plant_id: String,
    pub truth: Label,
    pub predicted: Label,
    pub vote_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestOutcome {
    pub model: ForestModel,
    pub report: EvalReport,
    pub predictions: Vec<PredictionRow>,
    pub n_train: usize,
}

/// Stratified 6:4 split, training and evaluation on held-out plants.
pub fn train_and_evaluate(
    samples: &[LabeledSample],
    feature_order: &[String],
    params: &ForestParams,
    seed: u64,
) -> Result<ForestOutcome> {
    let (train, test) = forest::split_train_test(samples, forest::DEFAULT_TRAIN_RATIO, seed)?;
    let model = forest::train(&train, feature_order, params, seed)?;
    let mut predictions = Vec::with_capacity(test.len());
    for s in &test {
        let p = forest::predict(&model, &s.features)?;
        predictions.push(PredictionRow {
            plant_id: s.id.clone(),
            truth: s.label,
            predicted: p.label,
            vote_fraction: p.vote_fraction,
        });
    }
    predictions.sort_by(|a, b| a.plant_id.cmp(&b.plant_id));
    let preds: Vec<Label> = predictions.iter().map(|p| p.predicted).collect();
    let truths: Vec<Label> = predictions.iter().map(|p| p.truth).collect();
    let report = forest::evaluate(&preds, &truths)?;
    Ok(ForestOutcome {
        model,
        report,
        predictions,
        n_train: train.len(),
    })
}

pub fn run_forest(records: &[PlantRecord], manifest: &Manifest, params: &ForestParams, seed: u64) -> Result<ForestOutcome> {
    let samples = labeled_samples(records, manifest)?;
    train_and_evaluate(&samples, &feature_names(), params, seed)
}

pub fn predictions_csv(rows: &[PredictionRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["plant_id", "truth", "predicted", "vote_fraction"])?;
    for r in rows {
        w.write_record([
            r.plant_id.clone(),
            r.truth.as_str().to_string(),
            r.predicted.as_str().to_string(),
            format!("{}", r.vote_fraction),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| WiltError::Validation(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
