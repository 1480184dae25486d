//! Box plots as PNG. The image carries no text; a CSV with the same stem
//! lists each box's label and five-number summary, left to right.

use std::path::Path;

use image::{ImageBuffer, Rgb};

use super::record::{GroupLabel, PlantRecord};
use crate::error::{Result, WiltError};
use crate::metrics::METRIC_NAMES;
use crate::stats::BdSeries;

const BOX_W: u32 = 36;
const GAP: u32 = 16;
const HEIGHT: u32 = 320;
const MARGIN: u32 = 20;

const PALETTE: [[u8; 3]; 4] = [[46, 125, 50], [198, 40, 40], [21, 101, 192], [239, 108, 0]];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiveNumber {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub fn five_number(values: &[f64]) -> Option<FiveNumber> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    Some(FiveNumber {
        min: v[0],
        q1: quantile(&v, 0.25),
        median: quantile(&v, 0.5),
        q3: quantile(&v, 0.75),
        max: v[v.len() - 1],
    })
}

/// One box per `(label, values, color slot)`; empty series leave a gap.
pub fn box_plot(series: &[(String, Vec<f64>, usize)], png: &Path) -> Result<()> {
    let summaries: Vec<Option<FiveNumber>> = series.iter().map(|s| five_number(&s.1)).collect();
    let (lo, hi) = summaries
        .iter()
        .flatten()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s.min), hi.max(s.max)));
    let span = if hi > lo { hi - lo } else { 1.0 };
    let width = 2 * MARGIN + series.len().max(1) as u32 * (BOX_W + GAP);
    let mut img = ImageBuffer::from_pixel(width, HEIGHT, Rgb([255u8, 255, 255]));
    let to_y = |v: f64| {
        let t = if hi > lo { (v - lo) / span } else { 0.5 };
        (HEIGHT - MARGIN) as f64 - t * (HEIGHT - 2 * MARGIN) as f64
    };
    let hline = |img: &mut ImageBuffer<Rgb<u8>, Vec<u8>>, x0: u32, x1: u32, y: f64, c: [u8; 3]| {
        let y = (y.round() as u32).min(HEIGHT - 1);
        for x in x0..x1.min(width) {
            img.put_pixel(x, y, Rgb(c));
        }
    };
    for (k, (s, (_, _, slot))) in summaries.iter().zip(series).enumerate() {
        let Some(s) = s else { continue };
        let color = PALETTE[slot % PALETTE.len()];
        let x0 = MARGIN + k as u32 * (BOX_W + GAP);
        let xm = x0 + BOX_W / 2;
        let (ymax, yq3, ymed, yq1, ymin) = (to_y(s.max), to_y(s.q3), to_y(s.median), to_y(s.q1), to_y(s.min));
        for y in ymax.round() as u32..=(ymin.round() as u32).min(HEIGHT - 1) {
            img.put_pixel(xm, y, Rgb([60, 60, 60]));
        }
        for y in yq3.round() as u32..=(yq1.round() as u32).min(HEIGHT - 1) {
            for x in x0..x0 + BOX_W {
                img.put_pixel(x, y, Rgb(color));
            }
        }
        hline(&mut img, x0 + BOX_W / 4, x0 + 3 * BOX_W / 4, ymax, [60, 60, 60]);
        hline(&mut img, x0 + BOX_W / 4, x0 + 3 * BOX_W / 4, ymin, [60, 60, 60]);
        hline(&mut img, x0, x0 + BOX_W, ymed, [0, 0, 0]);
    }
    img.save(png).map_err(|e| WiltError::Image {
        path: png.to_path_buf(),
        source: e,
    })?;

    let mut w = csv::Writer::from_path(png.with_extension("csv"))?;
    w.write_record(["position", "label", "n", "min", "q1", "median", "q3", "max"])?;
    for (k, ((label, values, _), s)) in series.iter().zip(&summaries).enumerate() {
        let f = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
        w.write_record([
            k.to_string(),
            label.clone(),
            values.len().to_string(),
            f(s.map(|s| s.min)),
            f(s.map(|s| s.q1)),
            f(s.map(|s| s.median)),
            f(s.map(|s| s.q3)),
            f(s.map(|s| s.max)),
        ])?;
    }
    w.flush().map_err(|e| WiltError::io(png.with_extension("csv"), e))?;
    Ok(())
}

fn group_slot(g: GroupLabel) -> usize {
    GroupLabel::ALL.iter().position(|&x| x == g).unwrap_or(0)
}

/// One plot per metric: a box for every group and dpi.
pub fn metric_plots(records: &[PlantRecord], dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| WiltError::io(dir, e))?;
    let mut days: Vec<i32> = records.iter().flat_map(|r| r.days.keys().copied()).collect();
    days.sort_unstable();
    days.dedup();
    for (i, name) in METRIC_NAMES.iter().enumerate() {
        let mut series = Vec::new();
        for &d in &days {
            for g in GroupLabel::ALL {
                let values: Vec<f64> = records
                    .iter()
                    .filter(|r| r.group() == g)
                    .filter_map(|r| r.metric(d, i))
                    .collect();
                series.push((format!("{g}@{d}"), values, group_slot(g)));
            }
        }
        box_plot(&series, &dir.join(format!("{name}.png")))?;
    }
    Ok(())
}

/// Delta box per group and Bhattacharyya box per group and day.
pub fn stats_plots(
    deltas: &crate::stats::DeltaReport,
    bd: &BdSeries,
    metric: &str,
    baseline_dpi: i32,
    dir: &Path,
) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| WiltError::io(dir, e))?;
    let series: Vec<_> = GroupLabel::ALL
        .iter()
        .map(|&g| (g.to_string(), deltas.values(g), group_slot(g)))
        .collect();
    box_plot(&series, &dir.join(format!("delta_{metric}.png")))?;
    let mut series = Vec::new();
    for g in GroupLabel::ALL {
        for (d, v) in bd.by_dpi(g, baseline_dpi) {
            series.push((format!("{g}@{d}"), v, group_slot(g)));
        }
    }
    box_plot(&series, &dir.join("bhattacharyya.png"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn five_number_summary() {
        let s = five_number(&[5.0, 1.0, 3.0, 2.0, 4.0]).unwrap();
        assert_eq!((s.min, s.q1, s.median, s.q3, s.max), (1.0, 2.0, 3.0, 4.0, 5.0));
        assert!(five_number(&[]).is_none());
    }

    #[test]
    fn writes_png_and_summary() {
        let dir = tempfile::tempdir().unwrap();
        let png = dir.path().join("b.png");
        box_plot(
            &[("a".into(), vec![1.0, 2.0, 3.0], 0), ("b".into(), vec![], 1), ("c".into(), vec![7.0], 2)],
            &png,
        )
        .unwrap();
        assert!(png.exists());
        let csv = std::fs::read_to_string(dir.path().join("b.csv")).unwrap();
        assert_eq!(csv.lines().count(), 4);
    }
}
