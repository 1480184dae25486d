//! Group comparisons: Bhattacharyya distance between color histograms,
//! Welch's t-test, Kruskal–Wallis and the per-plant delta / BD series.

pub mod special;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Result, WiltError};
use crate::metrics::MetricVector;
use crate::pipeline::record::{GroupLabel, PlantRecord};

/// Floor applied to the Bhattacharyya coefficient so the distance stays finite.
pub const BC_FLOOR: f64 = 1e-300;

const SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub df: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bhattacharyya {
    pub coefficient: f64,
    pub distance: f64,
    /// No overlapping support; `distance` is the `-ln(BC_FLOOR)` sentinel.
    pub disjoint: bool,
}

fn check_distribution(p: &[f64], which: &str) -> Result<f64> {
    if p.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(WiltError::Validation(format!(
            "histogram {which} has negative or non-finite entries"
        )));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > SUM_TOLERANCE {
        return Err(WiltError::Validation(format!("histogram {which} sums to {s}, not 1")));
    }
    Ok(s)
}

/// Bhattacharyya coefficient and distance of two normalized histograms.
///
/// The coefficient is divided by `sqrt(sum p * sum q)`, which is within the
/// input tolerance of 1 and makes `bhattacharyya(p, p)` exactly zero.
pub fn bhattacharyya(p: &[f64], q: &[f64]) -> Result<Bhattacharyya> {
    if p.len() != q.len() {
        return Err(WiltError::Validation(format!(
            "histogram bin counts differ: {} vs {}",
            p.len(),
            q.len()
        )));
    }
    let sp = check_distribution(p, "p")?;
    let sq = check_distribution(q, "q")?;
    let raw: f64 = p
        .iter()
        .zip(q)
        .map(|(&a, &b)| if a == b { a } else { (a * b).sqrt() })
        .sum();
    let norm = if sp == sq { sp } else { (sp * sq).sqrt() };
    let bc = (raw / norm).min(1.0);
    let disjoint = bc == 0.0;
    Ok(Bhattacharyya {
        coefficient: bc,
        distance: -bc.max(BC_FLOOR).ln(),
        disjoint,
    })
}

pub fn bhattacharyya_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    Ok(bhattacharyya(p, q)?.distance)
}

fn mean_var(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let ss: f64 = v.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, ss / (n - 1.0))
}

fn check_finite(v: &[f64], what: &str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(WiltError::Validation(format!("{what} contains non-finite values")))
    }
}

/// Welch's unequal-variance t-test, two-sided.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<TestResult> {
    if a.len() < 2 || b.len() < 2 {
        return Err(WiltError::InsufficientData(format!(
            "Welch's t-test needs n >= 2 per group, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    check_finite(a, "group a")?;
    check_finite(b, "group b")?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    let (sa, sb) = (va / na, vb / nb);
    let se2 = sa + sb;
    if se2 == 0.0 {
        if ma == mb {
            return Ok(TestResult {
                statistic: 0.0,
                p_value: 1.0,
                df: na + nb - 2.0,
            });
        }
        return Err(WiltError::InsufficientData(
            "both groups have zero variance but different means".into(),
        ));
    }
    let t = (ma - mb) / se2.sqrt();
    let df = se2 * se2 / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    Ok(TestResult {
        statistic: t,
        p_value: special::student_t_two_sided(t, df),
        df,
    })
}

/// Mid-ranks (1-based) of the pooled values and the tie-group sizes.
fn mid_ranks(values: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut ties = Vec::new();
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &k in &order[start..end] {
            ranks[k] = rank;
        }
        ties.push(end - start);
        start = end;
    }
    (ranks, ties)
}

/// Kruskal–Wallis H test with mid-ranks and tie correction.
pub fn kruskal_wallis(groups: &[Vec<f64>]) -> Result<TestResult> {
    if groups.len() < 2 {
        return Err(WiltError::InsufficientData(format!(
            "Kruskal-Wallis needs at least 2 groups, got {}",
            groups.len()
        )));
    }
    if groups.iter().any(|g| g.is_empty()) {
        return Err(WiltError::InsufficientData("Kruskal-Wallis group is empty".into()));
    }
    let pooled: Vec<f64> = groups.iter().flatten().copied().collect();
    check_finite(&pooled, "Kruskal-Wallis input")?;
    let n = pooled.len();
    if n < 3 {
        return Err(WiltError::InsufficientData(format!(
            "Kruskal-Wallis needs N >= 3, got {n}"
        )));
    }
    let df = (groups.len() - 1) as f64;
    let (ranks, ties) = mid_ranks(&pooled);
    let nf = n as f64;
    let tie_sum: f64 = ties.iter().map(|&t| (t as f64).powi(3) - t as f64).sum();
    let correction = 1.0 - tie_sum / (nf.powi(3) - nf);
    if correction <= 0.0 {
        return Ok(TestResult {
            statistic: 0.0,
            p_value: 1.0,
            df,
        });
    }
    let grand = (nf + 1.0) / 2.0;
    let mut offset = 0;
    let mut spread = 0.0;
    for g in groups {
        let r = &ranks[offset..offset + g.len()];
        offset += g.len();
        let mean = r.iter().sum::<f64>() / g.len() as f64;
        spread += g.len() as f64 * (mean - grand) * (mean - grand);
    }
    let h = 12.0 / (nf * (nf + 1.0)) * spread / correction;
    Ok(TestResult {
        statistic: h,
        p_value: special::chi_squared_sf(h, df).clamp(0.0, 1.0),
        df,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exclusion {
    pub plant_id: String,
    pub reason: String,
}

/// Per-plant change of one metric between two days, grouped.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DeltaReport {
    pub groups: BTreeMap<GroupLabel, Vec<(String, f64)>>,
    pub excluded: Vec<Exclusion>,
}

impl DeltaReport {
    pub fn values(&self, group: GroupLabel) -> Vec<f64> {
        self.groups
            .get(&group)
            .map(|v| v.iter().map(|(_, d)| *d).collect())
            .unwrap_or_default()
    }
}

pub fn delta_metric(records: &[PlantRecord], metric: &str, dpi_from: i32, dpi_to: i32) -> Result<DeltaReport> {
    let index = MetricVector::index_of(metric)?;
    let mut report = DeltaReport::default();
    for r in records {
        match (r.metric(dpi_from, index), r.metric(dpi_to, index)) {
            (Some(a), Some(b)) => report
                .groups
                .entry(r.group())
                .or_default()
                .push((r.plant_id.clone(), b - a)),
            (a, _) => {
                let day = if a.is_none() { dpi_from } else { dpi_to };
                report.excluded.push(Exclusion {
                    plant_id: r.plant_id.clone(),
                    reason: format!("no {metric} at dpi {day}"),
                });
            }
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantBd {
    pub plant_id: String,
    pub group: GroupLabel,
    /// Distance to the baseline day, keyed by dpi (baseline included as 0).
    pub distances: BTreeMap<i32, f64>,
    pub disjoint_days: Vec<i32>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BdSeries {
    pub plants: Vec<PlantBd>,
    pub excluded: Vec<Exclusion>,
}

impl BdSeries {
    /// Per-dpi samples for one group, baseline day left out.
    pub fn by_dpi(&self, group: GroupLabel, baseline_dpi: i32) -> BTreeMap<i32, Vec<f64>> {
        let mut out: BTreeMap<i32, Vec<f64>> = BTreeMap::new();
        for p in self.plants.iter().filter(|p| p.group == group) {
            for (&d, &bd) in &p.distances {
                if d != baseline_dpi {
                    out.entry(d).or_default().push(bd);
                }
            }
        }
        out
    }

    /// Kruskal–Wallis across the post-baseline days of one group.
    pub fn kruskal_across_dpi(&self, group: GroupLabel, baseline_dpi: i32) -> Result<TestResult> {
        let groups: Vec<Vec<f64>> = self.by_dpi(group, baseline_dpi).into_values().collect();
        kruskal_wallis(&groups)
    }
}

/// Bhattacharyya distance of each plant-day pooled histogram to the plant's
/// baseline-day histogram.
pub fn bd_timeseries(records: &[PlantRecord], baseline_dpi: i32) -> Result<BdSeries> {
    let mut series = BdSeries::default();
    for r in records {
        let Some(base) = r
            .days
            .get(&baseline_dpi)
            .and_then(|d| d.histogram.as_ref())
            .and_then(|h| h.normalized())
        else {
            series.excluded.push(Exclusion {
                plant_id: r.plant_id.clone(),
                reason: format!("no histogram at baseline dpi {baseline_dpi}"),
            });
            continue;
        };
        let mut plant = PlantBd {
            plant_id: r.plant_id.clone(),
            group: r.group(),
            distances: BTreeMap::new(),
            disjoint_days: Vec::new(),
        };
        for (&dpi, day) in &r.days {
            if let Some(p) = day.histogram.as_ref().and_then(|h| h.normalized()) {
                let b = bhattacharyya(&p, &base)?;
                if b.disjoint {
                    plant.disjoint_days.push(dpi);
                }
                plant.distances.insert(dpi, b.distance);
            }
        }
        series.plants.push(plant);
    }
    Ok(series)
}
