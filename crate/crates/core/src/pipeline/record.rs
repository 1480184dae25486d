//! Per-plant results: identity, per-day aggregates and view failures.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, WiltError};
use crate::metrics::{AStarHistogram, MetricFlags, MetricVector, ViewMetrics};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Genotype {
    HA,
    WV,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Treatment {
    Inoculated,
    Mock,
}

impl fmt::Display for Genotype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Genotype::HA => "HA",
            Genotype::WV => "WV",
        })
    }
}

impl FromStr for Genotype {
    type Err = WiltError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "HA" => Ok(Genotype::HA),
            "WV" => Ok(Genotype::WV),
            _ => Err(WiltError::Validation(format!("unknown genotype `{s}` (HA, WV)"))),
        }
    }
}

impl fmt::Display for Treatment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Treatment::Inoculated => "inoculated",
            Treatment::Mock => "mock",
        })
    }
}

impl FromStr for Treatment {
    type Err = WiltError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inoculated" => Ok(Treatment::Inoculated),
            "mock" => Ok(Treatment::Mock),
            _ => Err(WiltError::Validation(format!(
                "unknown treatment `{s}` (inoculated, mock)"
            ))),
        }
    }
}

/// Genotype × treatment cell, written `inoc_ha`, `mock_wv`, ...
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GroupLabel {
    pub genotype: Genotype,
    pub treatment: Treatment,
}

impl GroupLabel {
    pub const ALL: [GroupLabel; 4] = [
        GroupLabel::new(Genotype::HA, Treatment::Inoculated),
        GroupLabel::new(Genotype::WV, Treatment::Inoculated),
        GroupLabel::new(Genotype::HA, Treatment::Mock),
        GroupLabel::new(Genotype::WV, Treatment::Mock),
    ];

    pub const fn new(genotype: Genotype, treatment: Treatment) -> Self {
        GroupLabel { genotype, treatment }
    }
}

impl fmt::Display for GroupLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = match self.treatment {
            Treatment::Inoculated => "inoc",
            Treatment::Mock => "mock",
        };
        let g = match self.genotype {
            Genotype::HA => "ha",
            Genotype::WV => "wv",
        };
        write!(f, "{t}_{g}")
    }
}

impl FromStr for GroupLabel {
    type Err = WiltError;
    fn from_str(s: &str) -> Result<Self> {
        GroupLabel::ALL
            .into_iter()
            .find(|g| g.to_string() == s)
            .ok_or_else(|| WiltError::Validation(format!("unknown group `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewFailure {
    pub view: usize,
    pub reason: String,
}

/// Aggregate of one plant on one day. `metrics` and `histogram` are `None`
/// when every view failed.
#[derive(Debug, Clone, PartialEq)]
pub struct DayRecord {
    pub dpi: i32,
    pub views_ok: usize,
    pub views_total: usize,
    pub metrics: Option<MetricVector>,
    pub histogram: Option<AStarHistogram>,
    pub failures: Vec<ViewFailure>,
}

impl DayRecord {
    pub fn is_missing(&self) -> bool {
        self.metrics.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantRecord {
    pub plant_id: String,
    pub genotype: Genotype,
    pub treatment: Treatment,
    pub expert_score: Option<f64>,
    pub days: BTreeMap<i32, DayRecord>,
}

impl PlantRecord {
    pub fn group(&self) -> GroupLabel {
        GroupLabel::new(self.genotype, self.treatment)
    }

    pub fn metric(&self, dpi: i32, index: usize) -> Option<f64> {
        self.days.get(&dpi)?.metrics.as_ref()?.values()[index]
    }
}

/// Mean over successful views. Each field averages only the views where it
/// is defined; flags are the union; histograms are summed.
pub fn aggregate_views(dpi: i32, outcomes: &[std::result::Result<ViewMetrics, String>]) -> DayRecord {
    let mut sums = [0.0f64; 14];
    let mut counts = [0usize; 14];
    let mut flags = MetricFlags::default();
    let mut hist: Option<AStarHistogram> = None;
    let mut failures = Vec::new();
    let mut ok = 0;
    for (view, outcome) in outcomes.iter().enumerate() {
        match outcome {
            Ok(vm) => {
                ok += 1;
                for (i, v) in vm.metrics.values().iter().enumerate() {
                    if let Some(v) = v {
                        // running mean keeps k identical views bit-exact
                        counts[i] += 1;
                        sums[i] += (v - sums[i]) / counts[i] as f64;
                    }
                }
                flags = flags.union(&vm.metrics.flags);
                match &mut hist {
                    Some(h) => h.add(&vm.histogram),
                    None => hist = Some(vm.histogram.clone()),
                }
            }
            Err(reason) => failures.push(ViewFailure {
                view,
                reason: reason.clone(),
            }),
        }
    }
    let metrics = (ok > 0).then(|| {
        let values: [Option<f64>; 14] = std::array::from_fn(|i| (counts[i] > 0).then_some(sums[i]));
        MetricVector::from_values(values, flags)
    });
    DayRecord {
        dpi,
        views_ok: ok,
        views_total: outcomes.len(),
        metrics,
        histogram: hist,
        failures,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::StemLine;

    fn view(v: f64) -> ViewMetrics {
        ViewMetrics {
            metrics: MetricVector::from_values([Some(v); 14], MetricFlags::default()),
            histogram: AStarHistogram::default(),
            stem_line: StemLine::vertical(0.0),
        }
    }

    #[test]
    fn labels_round_trip() {
        for g in GroupLabel::ALL {
            assert_eq!(g.to_string().parse::<GroupLabel>().unwrap(), g);
        }
        assert_eq!(GroupLabel::ALL[0].to_string(), "inoc_ha");
        assert!("inoc_xx".parse::<GroupLabel>().is_err());
    }

    #[test]
    fn identical_views_aggregate_exactly() {
        let v = 0.1 + 0.2;
        let outcomes: Vec<_> = (0..8).map(|_| Ok(view(v))).collect();
        let day = aggregate_views(3, &outcomes);
        assert_eq!(day.metrics.unwrap(), view(v).metrics);
        assert_eq!(day.views_ok, 8);
    }

    #[test]
    fn failed_views_are_skipped() {
        let mut outcomes: Vec<_> = vec![Ok(view(1.0)), Ok(view(3.0))];
        outcomes.push(Err("unreadable".into()));
        let mut partial = view(5.0);
        partial.metrics.cm_hor_dis = None;
        outcomes.push(Ok(partial));
        let day = aggregate_views(4, &outcomes);
        assert_eq!(day.views_ok, 3);
        assert_eq!(day.views_total, 4);
        assert_eq!(day.failures[0].view, 2);
        let m = day.metrics.unwrap();
        assert_eq!(m.plant_area, Some(3.0));
        assert_eq!(m.cm_hor_dis, Some(2.0));

        let all_bad = aggregate_views(5, &[Err("x".into()), Err("y".into())]);
        assert!(all_bad.is_missing() && all_bad.histogram.is_none());
    }
}
