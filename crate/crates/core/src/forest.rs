//! Random-forest wilting classifier built from scratch: bootstrap-trained
//! Gini trees with per-split feature subsampling and majority voting.

use std::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WiltError};

pub const MODEL_VERSION: u32 = 1;
pub const DEFAULT_TREES: usize = 1000;
pub const DEFAULT_TRAIN_RATIO: f64 = 0.6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    NotWilted,
    Wilted,
}

impl Label {
    pub fn as_str(&self) -> &'static str {
        match self {
            Label::NotWilted => "not_wilted",
            Label::Wilted => "wilted",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// Wilted iff the expert score is strictly above 0.5.
pub fn binarize_score(score: f64) -> Result<Label> {
    if !(0.0..=1.0).contains(&score) {
        return Err(WiltError::Validation(format!(
            "expert score {score} outside [0, 1]"
        )));
    }
    Ok(if score > 0.5 { Label::Wilted } else { Label::NotWilted })
}

/// One plant's features; `None` marks an absent value (missing day or
/// undefined metric).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample {
    pub id: String,
    pub features: Vec<Option<f64>>,
    pub expert_score: f64,
    pub label: Label,
}

impl LabeledSample {
    pub fn new(id: impl Into<String>, features: Vec<Option<f64>>, expert_score: f64) -> Result<Self> {
        Ok(LabeledSample {
            id: id.into(),
            features,
            expert_score,
            label: binarize_score(expert_score)?,
        })
    }
}

fn cmp_feature(a: &Option<f64>, b: &Option<f64>) -> Ordering {
    match (a, b) {
        (None, None) => Ordering::Equal,
        (None, Some(_)) => Ordering::Less,
        (Some(_), None) => Ordering::Greater,
        (Some(x), Some(y)) => x.total_cmp(y),
    }
}

fn canonical_cmp(a: &LabeledSample, b: &LabeledSample) -> Ordering {
    a.features
        .iter()
        .zip(&b.features)
        .map(|(x, y)| cmp_feature(x, y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
        .then(a.label.cmp(&b.label))
        .then_with(|| a.id.cmp(&b.id))
}

/// Stratified split: each class contributes `round(ratio * n_c)` training
/// samples, kept within `[1, n_c - 1]`.
pub fn split_train_test(
    samples: &[LabeledSample],
    train_ratio: f64,
    seed: u64,
) -> Result<(Vec<LabeledSample>, Vec<LabeledSample>)> {
    if !(train_ratio > 0.0 && train_ratio < 1.0) {
        return Err(WiltError::Validation(format!(
            "train ratio must lie in (0, 1), got {train_ratio}"
        )));
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for label in [Label::NotWilted, Label::Wilted] {
        let mut class: Vec<&LabeledSample> = samples.iter().filter(|s| s.label == label).collect();
        if class.len() < 2 {
            return Err(WiltError::InsufficientData(format!(
                "class {} has {} samples; at least 2 are needed",
                label.as_str(),
                class.len()
            )));
        }
        class.sort_by(|a, b| canonical_cmp(a, b));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1 + label.index() as u64);
        class.shuffle(&mut rng);
        let n = class.len();
        let n_train = ((train_ratio * n as f64).round() as usize).clamp(1, n - 1);
        train.extend(class[..n_train].iter().map(|s| (*s).clone()));
        test.extend(class[n_train..].iter().map(|s| (*s).clone()));
    }
    Ok((train, test))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Features tried per split; `ceil(sqrt(d))` when absent.
    pub max_features: Option<usize>,
    pub min_samples_split: usize,
    pub max_depth: Option<usize>,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: DEFAULT_TREES,
            max_features: None,
            min_samples_split: 2,
            max_depth: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    /// Training counts `[not_wilted, wilted]`.
    Leaf { counts: [u32; 2] },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
}

impl DecisionTree {
    /// Majority class of the reached leaf; ties go to `NotWilted`.
    pub fn predict_row(&self, row: &[f64]) -> Label {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if row[*feature] <= *threshold { *left } else { *right },
                Node::Leaf { counts } => {
                    return if counts[1] > counts[0] {
                        Label::Wilted
                    } else {
                        Label::NotWilted
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub version: u32,
    pub seed: u64,
    pub n_trees: usize,
    pub feature_subset_size: usize,
    pub params: ForestParams,
    /// Names of the raw input features, in order.
    pub feature_order: Vec<String>,
    /// Training median substituted for absent raw features.
    pub imputation: Vec<f64>,
    /// Raw features that get an extra 0/1 missing-indicator column.
    pub indicator_features: Vec<usize>,
    pub trees: Vec<DecisionTree>,
}

impl ForestModel {
    /// Compact JSON; thresholds round-trip exactly.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<ForestModel> {
        let m: ForestModel = serde_json::from_str(text)?;
        if m.version != MODEL_VERSION {
            return Err(WiltError::Validation(format!(
                "model version {} is not supported (expected {MODEL_VERSION})",
                m.version
            )));
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: Label,
    pub vote_fraction: f64,
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        0.0
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn encode_row(features: &[Option<f64>], imputation: &[f64], indicators: &[usize]) -> Vec<f64> {
    let mut row: Vec<f64> = features
        .iter()
        .zip(imputation)
        .map(|(v, m)| v.unwrap_or(*m))
        .collect();
    row.extend(
        indicators
            .iter()
            .map(|&j| if features[j].is_none() { 1.0 } else { 0.0 }),
    );
    row
}

fn gini(counts: [u32; 2]) -> f64 {
    let n = f64::from(counts[0] + counts[1]);
    if n == 0.0 {
        return 0.0;
    }
    let p = f64::from(counts[0]) / n;
    2.0 * p * (1.0 - p)
}

struct TreeBuilder<'a> {
    rows: &'a [Vec<f64>],
    labels: &'a [Label],
    n_features: usize,
    m: usize,
    params: &'a ForestParams,
    nodes: Vec<Node>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    score: f64,
}

impl TreeBuilder<'_> {
    fn counts(&self, idx: &[usize]) -> [u32; 2] {
        let mut c = [0u32; 2];
        for &i in idx {
            c[self.labels[i].index()] += 1;
        }
        c
    }

    /// Lowest weighted Gini split on one feature, `None` if constant.
    fn best_on(&self, idx: &mut [usize], feature: usize, total: [u32; 2]) -> Option<BestSplit> {
        idx.sort_by(|&a, &b| self.rows[a][feature].total_cmp(&self.rows[b][feature]));
        let n = idx.len() as f64;
        let mut left = [0u32; 2];
        let mut best: Option<BestSplit> = None;
        for k in 0..idx.len() - 1 {
            left[self.labels[idx[k]].index()] += 1;
            let (a, b) = (self.rows[idx[k]][feature], self.rows[idx[k + 1]][feature]);
            if a == b {
                continue;
            }
            let right = [total[0] - left[0], total[1] - left[1]];
            let nl = (k + 1) as f64;
            let score = (nl * gini(left) + (n - nl) * gini(right)) / n;
            if best.as_ref().is_none_or(|s| score < s.score) {
                let mut threshold = a + (b - a) / 2.0;
                if threshold >= b {
                    threshold = a;
                }
                best = Some(BestSplit {
                    feature,
                    threshold,
                    score,
                });
            }
        }
        best
    }

    fn build(&mut self, mut idx: Vec<usize>, depth: usize, rng: &mut ChaCha8Rng) -> usize {
        let counts = self.counts(&idx);
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { counts });
        let pure = counts[0] == 0 || counts[1] == 0;
        let depth_capped = self.params.max_depth.is_some_and(|d| depth >= d);
        if pure || idx.len() < self.params.min_samples_split.max(2) || depth_capped {
            return id;
        }
        let mut order: Vec<usize> = (0..self.n_features).collect();
        order.shuffle(rng);
        let mut best: Option<BestSplit> = None;
        // The first `m` shuffled features are the candidate subset; the rest
        // are only consulted when every candidate is constant here.
        for (k, &f) in order.iter().enumerate() {
            if k >= self.m && best.is_some() {
                break;
            }
            if let Some(s) = self.best_on(&mut idx, f, counts) {
                if best.as_ref().is_none_or(|b| s.score < b.score) {
                    best = Some(s);
                }
            }
        }
        let Some(split) = best else {
            return id;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = idx
            .iter()
            .partition(|&&i| self.rows[i][split.feature] <= split.threshold);
        let left = self.build(l, depth + 1, rng);
        let right = self.build(r, depth + 1, rng);
        self.nodes[id] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        id
    }
}

/// Trains a forest. Samples are sorted canonically first, so the model
/// depends only on the sample multiset and the seed; tree `t` draws from
/// stream `t` of the seeded generator.
pub fn train(
    samples: &[LabeledSample],
    feature_order: &[String],
    params: &ForestParams,
    seed: u64,
) -> Result<ForestModel> {
    if params.n_trees == 0 {
        return Err(WiltError::Validation("n_trees must be at least 1".into()));
    }
    if samples.is_empty() {
        return Err(WiltError::InsufficientData("no training samples".into()));
    }
    let d_raw = feature_order.len();
    if let Some(s) = samples.iter().find(|s| s.features.len() != d_raw) {
        return Err(WiltError::Validation(format!(
            "sample {} has {} features, expected {d_raw}",
            s.id,
            s.features.len()
        )));
    }
    if !samples.iter().any(|s| s.label == Label::Wilted) || !samples.iter().any(|s| s.label == Label::NotWilted) {
        return Err(WiltError::InsufficientData(
            "training set must contain both classes".into(),
        ));
    }
    let mut sorted: Vec<&LabeledSample> = samples.iter().collect();
    sorted.sort_by(|a, b| canonical_cmp(a, b));

    let imputation: Vec<f64> = (0..d_raw)
        .map(|j| {
            let mut present: Vec<f64> = sorted.iter().filter_map(|s| s.features[j]).collect();
            median(&mut present)
        })
        .collect();
    let indicator_features: Vec<usize> = (0..d_raw)
        .filter(|&j| sorted.iter().any(|s| s.features[j].is_none()))
        .collect();
    let rows: Vec<Vec<f64>> = sorted
        .iter()
        .map(|s| encode_row(&s.features, &imputation, &indicator_features))
        .collect();
    let labels: Vec<Label> = sorted.iter().map(|s| s.label).collect();
    let n_features = d_raw + indicator_features.len();
    if n_features == 0 {
        return Err(WiltError::InsufficientData("no features".into()));
    }
    let m = params
        .max_features
        .unwrap_or_else(|| (n_features as f64).sqrt().ceil() as usize)
        .clamp(1, n_features);

    let n = rows.len();
    let trees: Vec<DecisionTree> = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            let boot: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            let mut b = TreeBuilder {
                rows: &rows,
                labels: &labels,
                n_features,
                m,
                params,
                nodes: Vec::new(),
            };
            b.build(boot, 0, &mut rng);
            DecisionTree { nodes: b.nodes }
        })
        .collect();

    Ok(ForestModel {
        version: MODEL_VERSION,
        seed,
        n_trees: params.n_trees,
        feature_subset_size: m,
        params: params.clone(),
        feature_order: feature_order.to_vec(),
        imputation,
        indicator_features,
        trees,
    })
}

/// Majority vote; `vote_fraction` is the share of trees voting wilted and
/// an exact half goes to `NotWilted`.
pub fn predict(model: &ForestModel, features: &[Option<f64>]) -> Result<Prediction> {
    if features.len() != model.feature_order.len() {
        return Err(WiltError::Validation(format!(
            "feature vector has {} entries, model expects {}",
            features.len(),
            model.feature_order.len()
        )));
    }
    let row = encode_row(features, &model.imputation, &model.indicator_features);
    let wilted = model
        .trees
        .iter()
        .filter(|t| t.predict_row(&row) == Label::Wilted)
        .count();
    let vote_fraction = wilted as f64 / model.trees.len() as f64;
    Ok(Prediction {
        label: if 2 * wilted > model.trees.len() {
            Label::Wilted
        } else {
            Label::NotWilted
        },
        vote_fraction,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Set when a zero denominator forced the metric to 0.
    pub precision_undefined: bool,
    pub recall_undefined: bool,
    pub f1_undefined: bool,
}

impl ClassMetrics {
    fn from_counts(tp: usize, fp: usize, fn_: usize, tn: usize) -> Self {
        let ratio = |num: usize, den: usize| {
            if den == 0 {
                (0.0, true)
            } else {
                (num as f64 / den as f64, false)
            }
        };
        let (precision, precision_undefined) = ratio(tp, tp + fp);
        let (recall, recall_undefined) = ratio(tp, tp + fn_);
        let (f1, f1_undefined) = if precision + recall == 0.0 {
            (0.0, true)
        } else {
            (2.0 * precision * recall / (precision + recall), false)
        };
        ClassMetrics {
            tp,
            fp,
            fn_,
            tn,
            precision,
            recall,
            f1,
            precision_undefined,
            recall_undefined,
            f1_undefined,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub wilted: ClassMetrics,
    pub not_wilted: ClassMetrics,
}

impl EvalReport {
    pub fn class(&self, label: Label) -> &ClassMetrics {
        match label {
            Label::Wilted => &self.wilted,
            Label::NotWilted => &self.not_wilted,
        }
    }

    pub fn macro_f1(&self) -> f64 {
        (self.wilted.f1 + self.not_wilted.f1) / 2.0
    }

    /// Two-decimal table: `class,precision,recall,f1`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("class,precision,recall,f1\n");
        for label in [Label::Wilted, Label::NotWilted] {
            let c = self.class(label);
            out.push_str(&format!(
                "{},{:.2},{:.2},{:.2}\n",
                label.as_str(),
                c.precision,
                c.recall,
                c.f1
            ));
        }
        out
    }
}

/// Per-class confusion counts; each class in turn is the positive one.
pub fn evaluate(predictions: &[Label], truths: &[Label]) -> Result<EvalReport> {
    if predictions.len() != truths.len() {
        return Err(WiltError::Validation(format!(
            "{} predictions for {} truths",
            predictions.len(),
            truths.len()
        )));
    }
    if predictions.is_empty() {
        return Err(WiltError::InsufficientData("nothing to evaluate".into()));
    }
    let per_class = |pos: Label| {
        let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
        for (&p, &t) in predictions.iter().zip(truths) {
            match (p == pos, t == pos) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
                (false, false) => tn += 1,
            }
        }
        ClassMetrics::from_counts(tp, fp, fn_, tn)
    };
    Ok(EvalReport {
        wilted: per_class(Label::Wilted),
        not_wilted: per_class(Label::NotWilted),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn names(d: usize) -> Vec<String> {
        (0..d).map(|i| format!("f{i}")).collect()
    }

    fn toy() -> Vec<LabeledSample> {
        // two separable clouds on a grid: wilted iff x + y > 10
        let mut v = Vec::new();
        for i in 0..20 {
            let x = (i % 5) as f64 * 2.0 + if i >= 10 { 6.0 } else { 0.0 };
            let y = (i / 5) as f64;
            let score = if x + y > 10.0 { 0.9 } else { 0.1 };
            v.push(LabeledSample::new(format!("s{i}"), vec![Some(x), Some(y)], score).unwrap());
        }
        v
    }

    #[test]
    fn binarize_examples() {
        assert_eq!(binarize_score(0.8).unwrap(), Label::Wilted);
        assert_eq!(binarize_score(0.2).unwrap(), Label::NotWilted);
        assert_eq!(binarize_score(0.5).unwrap(), Label::NotWilted);
        assert!(binarize_score(1.2).is_err());
        assert!(binarize_score(f64::NAN).is_err());
    }

    #[test]
    fn separable_toy_is_memorized() {
        let data = toy();
        let p = ForestParams {
            n_trees: 50,
            ..Default::default()
        };
        let model = train(&data, &names(2), &p, 7).unwrap();
        for s in &data {
            assert_eq!(predict(&model, &s.features).unwrap().label, s.label, "{}", s.id);
        }
    }

    #[test]
    fn single_tree_forest_votes_unanimously() {
        let model = train(&toy(), &names(2), &ForestParams { n_trees: 1, ..Default::default() }, 3).unwrap();
        for s in toy() {
            let p = predict(&model, &s.features).unwrap();
            assert!(p.vote_fraction == 0.0 || p.vote_fraction == 1.0);
            assert_eq!(p.label, model.trees[0].predict_row(&[s.features[0].unwrap(), s.features[1].unwrap()]));
        }
    }

    #[test]
    fn tie_goes_to_not_wilted() {
        let leaf = |c| DecisionTree {
            nodes: vec![Node::Leaf { counts: c }],
        };
        let model = ForestModel {
            version: MODEL_VERSION,
            seed: 0,
            n_trees: 2,
            feature_subset_size: 1,
            params: ForestParams::default(),
            feature_order: names(1),
            imputation: vec![0.0],
            indicator_features: vec![],
            trees: vec![leaf([0, 3]), leaf([3, 0])],
        };
        let p = predict(&model, &[Some(1.0)]).unwrap();
        assert_eq!(p.vote_fraction, 0.5);
        assert_eq!(p.label, Label::NotWilted);
        assert!(predict(&model, &[]).is_err());
        assert_eq!(leaf([2, 2]).predict_row(&[0.0]), Label::NotWilted);
    }

    #[test]
    fn split_sizes_and_errors() {
        let samples: Vec<_> = (0..122)
            .map(|i| LabeledSample::new(format!("p{i:03}"), vec![Some(i as f64)], if i % 2 == 0 { 0.9 } else { 0.1 }).unwrap())
            .collect();
        let (tr, te) = split_train_test(&samples, 0.6, 1).unwrap();
        assert_eq!((tr.len(), te.len()), (74, 48));
        let (tr2, _) = split_train_test(&samples, 0.6, 1).unwrap();
        assert_eq!(tr, tr2);
        let (tr3, _) = split_train_test(&samples, 0.6, 2).unwrap();
        assert_ne!(tr, tr3);
        let one_class: Vec<_> = samples.iter().filter(|s| s.label == Label::Wilted).cloned().collect();
        assert!(split_train_test(&one_class, 0.6, 1).is_err());
    }

    #[test]
    fn evaluate_examples() {
        use Label::*;
        let truths = [Wilted, NotWilted, Wilted, NotWilted];
        let perfect = evaluate(&truths, &truths).unwrap();
        assert_eq!((perfect.wilted.f1, perfect.not_wilted.f1), (1.0, 1.0));
        let r = evaluate(&[Wilted; 4], &truths).unwrap();
        assert_eq!(r.wilted.precision, 0.5);
        assert_eq!(r.wilted.recall, 1.0);
        assert!((r.wilted.f1 - 2.0 / 3.0).abs() < 1e-15);
        assert!(r.not_wilted.precision_undefined);
        assert_eq!(r.not_wilted.precision, 0.0);
        assert!(r.to_csv().starts_with("class,precision,recall,f1\nwilted,0.50,1.00,0.67\n"));
        assert!(evaluate(&[], &[]).is_err());
    }

    #[test]
    fn missing_values_are_imputed_with_indicator() {
        let mut data = toy();
        data[0].features[1] = None;
        data[15].features[1] = None;
        let model = train(&data, &names(2), &ForestParams { n_trees: 30, ..Default::default() }, 11).unwrap();
        assert_eq!(model.indicator_features, vec![1]);
        let p = predict(&model, &[Some(20.0), None]).unwrap();
        assert_eq!(p.label, Label::Wilted);
    }

    #[test]
    fn model_round_trips_through_json() {
        let model = train(&toy(), &names(2), &ForestParams { n_trees: 5, ..Default::default() }, 1).unwrap();
        let json = serde_json::to_string(&model).unwrap();
        let back: ForestModel = serde_json::from_str(&json).unwrap();
        assert_eq!(back, model);
    }

    #[test]
    fn monotone_feature_threshold() {
        let c = 5.0;
        let data: Vec<_> = (0..=20)
            .map(|i| {
                let x = i as f64 * 0.5;
                LabeledSample::new(format!("g{i}"), vec![Some(x)], if x > c { 1.0 } else { 0.0 }).unwrap()
            })
            .collect();
        let model = train(&data, &names(1), &ForestParams { n_trees: 25, ..Default::default() }, 5).unwrap();
        for x in [-3.0, 0.2, 4.4, 5.6, 7.0, 30.0] {
            let want = if x > c { Label::Wilted } else { Label::NotWilted };
            assert_eq!(predict(&model, &[Some(x)]).unwrap().label, want, "x = {x}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn order_of_training_samples_is_irrelevant(seed in any::<u64>(), perm_seed in any::<u64>()) {
            let data = toy();
            let mut shuffled = data.clone();
            shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(perm_seed));
            let p = ForestParams { n_trees: 9, ..Default::default() };
            let a = train(&data, &names(2), &p, seed).unwrap();
            let b = train(&shuffled, &names(2), &p, seed).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn f1_is_harmonic_mean(preds in proptest::collection::vec(any::<bool>(), 1..40), seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let to_label = |b: bool| if b { Label::Wilted } else { Label::NotWilted };
            let p: Vec<Label> = preds.iter().map(|&b| to_label(b)).collect();
            let t: Vec<Label> = preds.iter().map(|_| to_label(rng.random())).collect();
            let r = evaluate(&p, &t).unwrap();
            for c in [r.wilted, r.not_wilted] {
                if c.precision + c.recall > 0.0 {
                    let h = 2.0 * c.precision * c.recall / (c.precision + c.recall);
                    prop_assert!((c.f1 - h).abs() < 1e-12);
                }
                prop_assert!((0.0..=1.0).contains(&c.f1));
            }
        }
    }
}
