//! Versioned metrics CSV: one row per plant and dpi.
//!
//! The first line is `#schema=1`; the header follows. Undefined values are
//! empty cells, flags are `|`-joined and the a* histogram is stored sparse
//! as `bin:count` pairs separated by `;`.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use super::record::{DayRecord, PlantRecord};
use crate::error::{Result, WiltError};
use crate::metrics::{AStarHistogram, MetricFlags, MetricVector, HISTOGRAM_BINS, METRIC_NAMES};

pub const SCHEMA_LINE: &str = "#schema=1";

const ID_COLUMNS: [&str; 7] = [
    "plant_id",
    "genotype",
    "treatment",
    "expert_score",
    "dpi",
    "views_ok",
    "views_total",
];

pub fn header() -> Vec<&'static str> {
    let mut h: Vec<&str> = ID_COLUMNS.to_vec();
    h.extend(METRIC_NAMES);
    h.push("flags");
    h.push("astar_hist");
    h
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

fn hist_field(h: Option<&AStarHistogram>) -> String {
    let Some(h) = h else {
        return String::new();
    };
    h.bins
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(i, c)| format!("{i}:{c}"))
        .collect::<Vec<_>>()
        .join(";")
}

fn parse_hist(s: &str) -> Result<Option<AStarHistogram>> {
    if s.is_empty() {
        return Ok(None);
    }
    let mut h = AStarHistogram::default();
    for pair in s.split(';') {
        let bad = || WiltError::Validation(format!("malformed histogram entry `{pair}`"));
        let (i, c) = pair.split_once(':').ok_or_else(bad)?;
        let i: usize = i.parse().map_err(|_| bad())?;
        if i >= HISTOGRAM_BINS {
            return Err(bad());
        }
        h.bins[i] = c.parse().map_err(|_| bad())?;
    }
    Ok(Some(h))
}

pub fn write_metrics<W: Write>(records: &[PlantRecord], mut out: W) -> Result<()> {
    writeln!(out, "{SCHEMA_LINE}").map_err(|e| WiltError::io("<metrics csv>", e))?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header())?;
    for r in records {
        for day in r.days.values() {
            let mut row = vec![
                r.plant_id.clone(),
                r.genotype.to_string(),
                r.treatment.to_string(),
                fmt_opt(r.expert_score),
                day.dpi.to_string(),
                day.views_ok.to_string(),
                day.views_total.to_string(),
            ];
            let values = day.metrics.as_ref().map(|m| m.values()).unwrap_or([None; 14]);
            row.extend(values.iter().map(|v| fmt_opt(*v)));
            row.push(day.metrics.as_ref().map(|m| m.flags.to_field()).unwrap_or_default());
            row.push(hist_field(day.histogram.as_ref()));
            w.write_record(&row)?;
        }
    }
    w.flush().map_err(|e| WiltError::io("<metrics csv>", e))?;
    Ok(())
}

pub fn save_metrics(records: &[PlantRecord], path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_metrics(records, &mut buf)?;
    std::fs::write(path, buf).map_err(|e| WiltError::io(path, e))
}

fn parse_opt(s: &str, column: &str, line: u64) -> Result<Option<f64>> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse().map(Some).map_err(|_| {
        WiltError::Validation(format!("line {line}: column {column}: `{s}` is not a number"))
    })
}

pub fn read_metrics(text: &str) -> Result<Vec<PlantRecord>> {
    let (first, rest) = text.split_once('\n').unwrap_or((text, ""));
    if first.trim_end() != SCHEMA_LINE {
        return Err(WiltError::Validation(format!(
            "metrics CSV must start with `{SCHEMA_LINE}`, found `{}`",
            first.trim_end()
        )));
    }
    let mut reader = csv::Reader::from_reader(rest.as_bytes());
    let expected = header();
    let found: Vec<String> = reader.headers()?.iter().map(String::from).collect();
    if found != expected {
        return Err(WiltError::Validation(format!(
            "unexpected metrics CSV header; expected {}",
            expected.join(",")
        )));
    }
    let mut plants: BTreeMap<String, PlantRecord> = BTreeMap::new();
    for row in reader.records() {
        let row = row?;
        // +1 for the schema line
        let line = row.position().map(|p| p.line() + 1).unwrap_or(0);
        let int = |i: usize| -> Result<i64> {
            row[i].parse().map_err(|_| {
                WiltError::Validation(format!("line {line}: column {}: `{}` is not an integer", expected[i], &row[i]))
            })
        };
        let id = row[0].to_string();
        let genotype = row[1].parse()?;
        let treatment = row[2].parse()?;
        let expert_score = parse_opt(&row[3], "expert_score", line)?;
        let dpi = int(4)? as i32;
        let views_ok = int(5)? as usize;
        let views_total = int(6)? as usize;
        let mut values = [None; 14];
        for (k, v) in values.iter_mut().enumerate() {
            *v = parse_opt(&row[7 + k], METRIC_NAMES[k], line)?;
        }
        let flags = MetricFlags::from_field(&row[21])?;
        let histogram = parse_hist(&row[22])?;
        let metrics = (views_ok > 0).then(|| MetricVector::from_values(values, flags));
        let plant = plants.entry(id.clone()).or_insert_with(|| PlantRecord {
            plant_id: id.clone(),
            genotype,
            treatment,
            expert_score,
            days: BTreeMap::new(),
        });
        let day = DayRecord {
            dpi,
            views_ok,
            views_total,
            metrics,
            histogram,
            failures: Vec::new(),
        };
        if plant.days.insert(dpi, day).is_some() {
            return Err(WiltError::Validation(format!(
                "line {line}: plant {id} dpi {dpi} appears twice"
            )));
        }
    }
    Ok(plants.into_values().collect())
}

pub fn load_metrics(path: &Path) -> Result<Vec<PlantRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| WiltError::io(path, e))?;
    read_metrics(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::record::{Genotype, Treatment};

    fn sample() -> Vec<PlantRecord> {
        let mut hist = AStarHistogram::default();
        hist.bins[100] = 7;
        hist.bins[101] = 2;
        let mut m = MetricVector::from_values(std::array::from_fn(|i| Some(0.1 * i as f64 + 1e-17)), MetricFlags::default());
        m.cm_height = None;
        m.flags.degenerate_stem = true;
        let day = |dpi, ok| DayRecord {
            dpi,
            views_ok: ok,
            views_total: 8,
            metrics: (ok > 0).then(|| m.clone()),
            histogram: (ok > 0).then(|| hist.clone()),
            failures: vec![],
        };
        vec![PlantRecord {
            plant_id: "p,1".into(),
            genotype: Genotype::WV,
            treatment: Treatment::Mock,
            expert_score: Some(0.25),
            days: [(-1, day(-1, 8)), (3, day(3, 0))].into_iter().collect(),
        }]
    }

    #[test]
    fn round_trip_is_lossless() {
        let recs = sample();
        let mut buf = Vec::new();
        write_metrics(&recs, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("#schema=1\nplant_id,genotype"));
        assert!(text.contains("degenerate_stem"));
        assert!(text.contains("100:7;101:2"));
        assert_eq!(read_metrics(&text).unwrap(), recs);
    }

    #[test]
    fn empty_input_is_header_only() {
        let mut buf = Vec::new();
        write_metrics(&[], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(read_metrics(&text).unwrap().is_empty());
    }

    #[test]
    fn schema_line_is_required() {
        assert!(read_metrics("plant_id\n").is_err());
    }
}
