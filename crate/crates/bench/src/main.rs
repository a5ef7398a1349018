use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use dit_bench::matrix::{execute, BenchSpec, EnvKind, PlannerKind};
use dit_bench::report::{build_report, summary_table, write_csv, write_json};
use dit_bench::svg::render_svg;
use dit_bench::{run_matrix_with, BenchError};
use dit_core::direction::FilterMode;
use dit_core::planner::{Budget, ClockKind};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FilterArg {
    Cone,
    Literal,
}

/// Runs planner benchmark matrices and writes CSV/JSON reports.
#[derive(Parser, Debug)]
#[command(name = "bench", version)]
struct Cli {
    #[arg(long, value_enum)]
    env: EnvKind,
    /// Dimensions, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [4usize, 8, 16])]
    dim: Vec<usize>,
    /// Planners, comma separated.
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [PlannerKind::Dit, PlannerKind::Eit])]
    planner: Vec<PlannerKind>,
    /// Runs per cell (per instance for random rectangles).
    #[arg(long)]
    runs: Option<usize>,
    /// Time budget in seconds for every dimension; defaults per dimension.
    #[arg(long)]
    budget: Option<f64>,
    /// Base seed; run `i` uses `seed + i`.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = FilterArg::Cone)]
    filter_mode: FilterArg,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Also draw the first run of every cell.
    #[arg(long)]
    svg: bool,
    /// Count planner iterations instead of wall time; reruns reproduce
    /// reports byte for byte.
    #[arg(long)]
    work_clock: bool,
    /// JSON planner configuration applied over the defaults.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn spec_from(cli: &Cli) -> Result<BenchSpec, BenchError> {
    let mut spec = BenchSpec::new(cli.env);
    spec.dims = cli.dim.clone();
    spec.planners = cli.planner.clone();
    if let Some(r) = cli.runs {
        spec.runs = r;
    }
    if let Some(b) = cli.budget {
        spec.budgets = cli.dim.iter().map(|&d| (d, b)).collect();
    }
    spec.base_seed = cli.seed;
    spec.filter_mode = match cli.filter_mode {
        FilterArg::Cone => FilterMode::ConeKeep,
        FilterArg::Literal => FilterMode::PaperLiteral,
    };
    if cli.work_clock {
        spec.clock = ClockKind::DEFAULT_WORK;
    }
    if let Some(path) = &cli.config {
        let text = fs::read_to_string(path).map_err(|source| BenchError::Io {
            path: path.clone(),
            source,
        })?;
        spec.planner_config = Some(text);
    }
    spec.validate()?;
    Ok(spec)
}

fn draw_first_runs(spec: &BenchSpec, out: &std::path::Path) -> Result<(), BenchError> {
    for &dim in &spec.dims {
        let budget = Budget::time(spec.budget(dim)?).with_clock(spec.clock);
        let Some((label, env)) = spec.environments(dim)?.into_iter().next() else {
            continue;
        };
        for &planner in &spec.planners {
            let cfg = spec.planner_config(dim, planner, spec.base_seed)?;
            let run = execute(&env, &label, planner, &cfg, &budget, true);
            let path = run.solutions.last().map(|s| s.path.as_slice());
            let file = out.join(format!("{label}-{dim}d-{planner}.svg"));
            render_svg(&env, Some(&run.tree), path, &file)?;
        }
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), BenchError> {
    let spec = spec_from(cli)?;
    fs::create_dir_all(&cli.out).map_err(|source| BenchError::Io {
        path: cli.out.clone(),
        source,
    })?;
    let mut done = 0;
    let records = run_matrix_with(&spec, |o| {
        done += 1;
        if done % 50 == 0 {
            eprintln!("{done} runs");
        }
        if let Some(e) = &o.record.error {
            eprintln!(
                "{} {}d {} seed {}: {e}",
                o.record.env, o.record.dim, o.record.planner, o.record.seed
            );
        }
    })?;
    write_csv(&records, &cli.out.join("records.csv"))?;
    let report = build_report(&records)?;
    write_json(&report, &cli.out.join("report.json"))?;
    if cli.svg {
        draw_first_runs(&spec, &cli.out)?;
    }
    println!("{}", report.note);
    print!("{}", summary_table(&report.summaries));
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
