//! CSV and JSON reports.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{io_at, Result};
use crate::matrix::{PlannerKind, RunRecord};
use crate::stats::{summarize, Metric, SummaryStats};

pub const CSV_HEADER: &str = "env,dim,planner,seed,t_init,c_init,c_final";

/// Serde adapter writing non-finite floats as the strings `"inf"`, `"-inf"`
/// and `"nan"`, which JSON numbers cannot hold.
pub mod float {
    use serde::de::Error;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else {
            s.serialize_str(&super::format_float(*x))
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(D::Error::custom(format!("not a number: {other}"))),
            },
        }
    }
}

/// Shortest round-tripping decimal form, infinities as `inf`.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x}")
    }
}

pub fn csv_string(records: &[RunRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.env,
            r.dim,
            r.planner,
            r.seed,
            format_float(r.t_init),
            format_float(r.c_init),
            format_float(r.c_final)
        );
    }
    out
}

pub fn write_csv(records: &[RunRecord], path: &Path) -> Result<()> {
    fs::write(path, csv_string(records)).map_err(io_at(path))
}

/// Statistics of one `(dim, planner)` group. Random-rectangle instances of a
/// dimension are pooled.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub dim: usize,
    pub planner: PlannerKind,
    pub t_init: SummaryStats,
    pub c_init: SummaryStats,
    pub c_final: SummaryStats,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub note: String,
    pub summaries: Vec<GroupSummary>,
    pub records: Vec<RunRecord>,
}

pub fn group_summaries(records: &[RunRecord]) -> Result<Vec<GroupSummary>> {
    let mut keys: Vec<(usize, PlannerKind)> = records.iter().map(|r| (r.dim, r.planner)).collect();
    keys.sort();
    keys.dedup();
    keys.into_iter()
        .map(|(dim, planner)| {
            let group: Vec<RunRecord> = records
                .iter()
                .filter(|r| r.dim == dim && r.planner == planner)
                .cloned()
                .collect();
            Ok(GroupSummary {
                dim,
                planner,
                t_init: summarize(&group, Metric::TInit)?,
                c_init: summarize(&group, Metric::CInit)?,
                c_final: summarize(&group, Metric::CFinal)?,
            })
        })
        .collect()
}

pub fn build_report(records: &[RunRecord]) -> Result<Report> {
    Ok(Report {
        note: "medians pool all instances of a dimension; failed runs count as +inf".into(),
        summaries: group_summaries(records)?,
        records: records.to_vec(),
    })
}

pub fn write_json(report: &Report, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(report)?;
    fs::write(path, text).map_err(io_at(path))
}

pub fn read_json(path: &Path) -> Result<Report> {
    let text = fs::read_to_string(path).map_err(io_at(path))?;
    Ok(serde_json::from_str(&text)?)
}

/// Plain-text table of group summaries.
pub fn summary_table(summaries: &[GroupSummary]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>4} {:>10} {:>8} {:>24} {:>24} {:>24}",
        "dim", "planner", "success", "t_init [99% CI]", "c_init [99% CI]", "c_final [99% CI]"
    );
    let cell = |s: &SummaryStats| {
        format!(
            "{} [{}, {}]",
            short(s.median),
            short(s.ci99_lo),
            short(s.ci99_hi)
        )
    };
    for g in summaries {
        let _ = writeln!(
            out,
            "{:>4} {:>10} {:>7.0}% {:>24} {:>24} {:>24}",
            g.dim,
            g.planner.to_string(),
            100.0 * g.c_final.success_rate,
            cell(&g.t_init),
            cell(&g.c_init),
            cell(&g.c_final)
        );
    }
    out
}

fn short(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.4}")
    } else {
        format_float(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(seed: u64, t: f64, c: f64) -> RunRecord {
        RunRecord {
            env: "np".into(),
            dim: 4,
            planner: PlannerKind::Dit,
            seed,
            t_init: t,
            c_init: c,
            c_final: c,
            trace: if t.is_finite() { vec![(t, c)] } else { vec![] },
            error: None,
        }
    }

    #[test]
    fn empty_records_give_header_only() {
        assert_eq!(csv_string(&[]), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn rows_have_seven_columns_and_inf() {
        let csv = csv_string(&[
            record(3, 0.25, 1.5),
            record(4, f64::INFINITY, f64::INFINITY),
        ]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[1], "np,4,dit,3,0.25,1.5,1.5");
        assert_eq!(lines[2], "np,4,dit,4,inf,inf,inf");
        assert!(lines.iter().all(|l| l.split(',').count() == 7));
    }

    #[test]
    fn json_round_trip() {
        let records = vec![record(0, 0.1, 2.0), record(1, f64::INFINITY, f64::INFINITY)];
        let report = build_report(&records).unwrap();
        let text = serde_json::to_string(&report).unwrap();
        let back: Report = serde_json::from_str(&text).unwrap();
        assert_eq!(back, report);
        assert!(text.contains("\"inf\""));
    }

    #[test]
    fn io_errors_name_the_path() {
        let err = write_csv(&[], Path::new("/nonexistent-dir/x.csv")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent-dir/x.csv"));
    }
}
