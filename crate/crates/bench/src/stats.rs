//! Medians with nonparametric confidence intervals.

use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, DiscreteCDF};

use crate::error::{BenchError, Result};
use crate::matrix::RunRecord;

/// Probability mass allowed outside the interval.
const CI_ALPHA: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    TInit,
    CInit,
    CFinal,
}

impl Metric {
    pub fn of(self, r: &RunRecord) -> f64 {
        match self {
            Metric::TInit => r.t_init,
            Metric::CInit => r.c_init,
            Metric::CFinal => r.c_final,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    #[serde(with = "crate::report::float")]
    pub median: f64,
    #[serde(with = "crate::report::float")]
    pub ci99_lo: f64,
    #[serde(with = "crate::report::float")]
    pub ci99_hi: f64,
    pub success_rate: f64,
    pub count: usize,
}

/// One-based ranks `(l, u)` of the order statistics bounding a 99% interval
/// for the median of `m` samples.
///
/// The ranks are symmetric, `u = m + 1 - l`, with `l` as large as possible
/// while the binomial(m, 1/2) mass outside `[l, u)` stays within 1%. Too
/// few samples to reach that level yield the full range.
pub fn ci_ranks(m: usize) -> (usize, usize) {
    if m == 0 {
        return (0, 0);
    }
    let dist = Binomial::new(0.5, m as u64).expect("valid binomial");
    let mut l = 0;
    while l < m.div_ceil(2) && 2.0 * dist.cdf(l as u64) <= CI_ALPHA {
        l += 1;
    }
    let l = l.max(1);
    (l, m + 1 - l)
}

/// Median over sorted values, `+inf` ordered last; even counts average the
/// middle pair.
fn median_sorted(v: &[f64]) -> f64 {
    let m = v.len();
    if m % 2 == 1 {
        v[m / 2]
    } else {
        let (a, b) = (v[m / 2 - 1], v[m / 2]);
        if a == b {
            a
        } else {
            0.5 * (a + b)
        }
    }
}

pub fn summarize_values(values: &[f64]) -> Result<SummaryStats> {
    if values.is_empty() {
        return Err(BenchError::Empty);
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let (l, u) = ci_ranks(v.len());
    Ok(SummaryStats {
        median: median_sorted(&v),
        ci99_lo: v[l - 1],
        ci99_hi: v[u - 1],
        success_rate: v.iter().filter(|x| x.is_finite()).count() as f64 / v.len() as f64,
        count: v.len(),
    })
}

pub fn summarize(records: &[RunRecord], metric: Metric) -> Result<SummaryStats> {
    let values: Vec<f64> = records.iter().map(|r| metric.of(r)).collect();
    summarize_values(&values)
}

/// Per-seed `a - b` differences of a metric between two planners' records.
/// A run that failed where its partner succeeded counts as an infinite
/// difference; two failures count as a tie.
pub fn paired_differences(a: &[RunRecord], b: &[RunRecord], metric: Metric) -> Result<Vec<f64>> {
    if a.len() != b.len() {
        return Err(BenchError::Config(format!(
            "cannot pair {} records with {}",
            a.len(),
            b.len()
        )));
    }
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            if (x.env.as_str(), x.dim, x.seed) != (y.env.as_str(), y.dim, y.seed) {
                return Err(BenchError::Config(format!(
                    "unpaired records: {} seed {} vs {} seed {}",
                    x.env, x.seed, y.env, y.seed
                )));
            }
            let (p, q) = (metric.of(x), metric.of(y));
            Ok(if p.is_infinite() && q.is_infinite() {
                0.0
            } else {
                p - q
            })
        })
        .collect()
}
