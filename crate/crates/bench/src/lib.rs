//! Benchmark harness: run matrices, order-statistic summaries, CSV/JSON
//! reports and SVG drawings.

pub mod error;
pub mod matrix;
pub mod report;
pub mod stats;
pub mod svg;

pub use error::{BenchError, Result};
pub use matrix::{
    default_budgets, execute, run_matrix, run_matrix_with, BenchSpec, EnvKind, PlannerKind,
    RunOutcome, RunRecord,
};
pub use report::{build_report, csv_string, write_csv, write_json, Report};
pub use stats::{ci_ranks, paired_differences, summarize, Metric, SummaryStats};
pub use svg::render_svg;
