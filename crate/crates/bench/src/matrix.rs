//! Run matrices: environments × dimensions × planners × seeds.

use std::collections::BTreeMap;
use std::fmt;

use clap::ValueEnum;
use dit_core::direction::FilterMode;
use dit_core::planner::{Budget, ClockKind, DitPlanner, Mode, PlannerConfig, SolutionRecord};
use dit_core::world::{
    default_rectangle_count, make_narrow_passage, make_random_rectangles, Environment,
    DEFAULT_RECTANGLE_WIDTHS,
};
use dit_core::{rrt_connect, StateVec};
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum EnvKind {
    /// Random axis-aligned rectangles, several instances per dimension.
    Rr,
    /// Wall with a thin gap.
    Np,
}

impl fmt::Display for EnvKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EnvKind::Rr => "rr",
            EnvKind::Np => "np",
        })
    }
}

#[derive(
    Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, ValueEnum,
)]
#[serde(rename_all = "lowercase")]
pub enum PlannerKind {
    Dit,
    Eit,
    #[value(name = "rrtconnect")]
    RrtConnect,
}

impl fmt::Display for PlannerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PlannerKind::Dit => "dit",
            PlannerKind::Eit => "eit",
            PlannerKind::RrtConnect => "rrtconnect",
        })
    }
}

/// Distinct random-rectangle worlds per dimension.
pub const RR_INSTANCES: usize = 10;

#[derive(Clone, Debug, PartialEq)]
pub struct BenchSpec {
    pub env_kind: EnvKind,
    pub dims: Vec<usize>,
    pub planners: Vec<PlannerKind>,
    /// Runs per cell; per instance for random rectangles.
    pub runs: usize,
    pub budgets: BTreeMap<usize, f64>,
    pub base_seed: u64,
    pub filter_mode: FilterMode,
    pub clock: ClockKind,
    pub rr_instances: usize,
    /// Flat planner configuration document applied on top of the defaults.
    pub planner_config: Option<String>,
}

impl BenchSpec {
    pub fn new(env_kind: EnvKind) -> Self {
        BenchSpec {
            env_kind,
            dims: vec![4, 8, 16],
            planners: vec![PlannerKind::Dit, PlannerKind::Eit, PlannerKind::RrtConnect],
            runs: match env_kind {
                EnvKind::Rr => 20,
                EnvKind::Np => 100,
            },
            budgets: default_budgets(env_kind),
            base_seed: 0,
            filter_mode: FilterMode::ConeKeep,
            clock: ClockKind::Wall,
            rr_instances: RR_INSTANCES,
            planner_config: None,
        }
    }

    pub fn budget(&self, dim: usize) -> Result<f64> {
        self.budgets
            .get(&dim)
            .copied()
            .ok_or_else(|| BenchError::Config(format!("no time budget for dimension {dim}")))
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(BenchError::Config("runs must be at least 1".into()));
        }
        if self.dims.is_empty() || self.planners.is_empty() {
            return Err(BenchError::Config(
                "need at least one dimension and one planner".into(),
            ));
        }
        if self.env_kind == EnvKind::Rr && self.rr_instances == 0 {
            return Err(BenchError::Config("need at least one instance".into()));
        }
        for &dim in &self.dims {
            let b = self.budget(dim)?;
            if b.is_nan() || b <= 0.0 {
                return Err(BenchError::Config(format!(
                    "budget for dimension {dim} must be positive, got {b}"
                )));
            }
            self.planner_config(dim, PlannerKind::Dit, 0)?;
        }
        Ok(())
    }

    pub fn planner_config(
        &self,
        dim: usize,
        planner: PlannerKind,
        seed: u64,
    ) -> Result<PlannerConfig> {
        let base = match &self.planner_config {
            Some(doc) => PlannerConfig::from_json(doc, dim)?,
            None => PlannerConfig::new(dim),
        };
        let mode = match planner {
            PlannerKind::Eit => Mode::Eit,
            _ => Mode::Dit,
        };
        Ok(base
            .with_seed(seed)
            .with_mode(mode)
            .with_filter_mode(self.filter_mode))
    }

    /// Environments for one dimension with their report labels.
    pub fn environments(&self, dim: usize) -> Result<Vec<(String, Environment)>> {
        Ok(match self.env_kind {
            EnvKind::Np => vec![("np".to_string(), make_narrow_passage(dim)?)],
            EnvKind::Rr => (0..self.rr_instances)
                .map(|k| {
                    let env = make_random_rectangles(
                        dim,
                        default_rectangle_count(dim),
                        rr_instance_seed(dim, k),
                        DEFAULT_RECTANGLE_WIDTHS,
                    )?;
                    Ok((format!("rr-i{k}"), env))
                })
                .collect::<Result<_>>()?,
        })
    }
}

/// Per-dimension time budgets in seconds.
pub fn default_budgets(kind: EnvKind) -> BTreeMap<usize, f64> {
    let pairs: [(usize, f64); 3] = match kind {
        EnvKind::Rr => [(4, 0.50), (8, 1.00), (16, 4.00)],
        EnvKind::Np => [(4, 0.12), (8, 0.40), (16, 0.60)],
    };
    pairs.into_iter().collect()
}

fn rr_instance_seed(dim: usize, k: usize) -> u64 {
    1000 * dim as u64 + k as u64
}

/// One planner run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub env: String,
    pub dim: usize,
    pub planner: PlannerKind,
    pub seed: u64,
    #[serde(with = "crate::report::float")]
    pub t_init: f64,
    #[serde(with = "crate::report::float")]
    pub c_init: f64,
    #[serde(with = "crate::report::float")]
    pub c_final: f64,
    /// `(t, cost)` of every improved solution.
    pub trace: Vec<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl RunRecord {
    fn from_solutions(
        env: &str,
        dim: usize,
        planner: PlannerKind,
        seed: u64,
        sols: &[SolutionRecord],
    ) -> Self {
        let trace: Vec<(f64, f64)> = sols.iter().map(|s| (s.t, s.cost)).collect();
        let first = trace
            .first()
            .copied()
            .unwrap_or((f64::INFINITY, f64::INFINITY));
        RunRecord {
            env: env.to_string(),
            dim,
            planner,
            seed,
            t_init: first.0,
            c_init: first.1,
            c_final: trace.last().map_or(f64::INFINITY, |x| x.1),
            trace,
            error: None,
        }
    }

    fn failed(env: &str, dim: usize, planner: PlannerKind, seed: u64, error: String) -> Self {
        RunRecord {
            error: Some(error),
            ..RunRecord::from_solutions(env, dim, planner, seed, &[])
        }
    }

    pub fn solved(&self) -> bool {
        self.c_final.is_finite()
    }
}

/// A run with everything needed to inspect or draw it.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub record: RunRecord,
    pub solutions: Vec<SolutionRecord>,
    /// Final forward tree as coordinate pairs; empty unless requested.
    pub tree: Vec<(StateVec, StateVec)>,
}

/// Runs one planner on one environment.
pub fn execute(
    env: &Environment,
    label: &str,
    planner: PlannerKind,
    cfg: &PlannerConfig,
    budget: &Budget,
    keep_tree: bool,
) -> RunOutcome {
    let dim = env.dim();
    let seed = cfg.seed;
    let result = match planner {
        PlannerKind::RrtConnect => rrt_connect(env, cfg, budget).map(|s| (s, Vec::new())),
        PlannerKind::Dit | PlannerKind::Eit => DitPlanner::new(env, cfg.clone()).map(|mut p| {
            let sols = p.run(budget);
            let tree = if keep_tree {
                p.forward_edges()
                    .into_iter()
                    .map(|(a, b)| (p.state(a), p.state(b)))
                    .collect()
            } else {
                Vec::new()
            };
            (sols, tree)
        }),
    };
    match result {
        Ok((solutions, tree)) => RunOutcome {
            record: RunRecord::from_solutions(label, dim, planner, seed, &solutions),
            solutions,
            tree,
        },
        Err(e) => RunOutcome {
            record: RunRecord::failed(label, dim, planner, seed, e.to_string()),
            solutions: Vec::new(),
            tree: Vec::new(),
        },
    }
}

/// Runs every cell of the matrix.
///
/// Seeds are `base_seed + run index`; the planners of a cell share seeds so
/// that records pair up one-to-one. Within each seed the planners take turns
/// going first. `visit` sees every outcome as it completes.
pub fn run_matrix_with(
    spec: &BenchSpec,
    mut visit: impl FnMut(&RunOutcome),
) -> Result<Vec<RunRecord>> {
    spec.validate()?;
    let mut out = Vec::new();
    for &dim in &spec.dims {
        let budget = Budget::time(spec.budget(dim)?).with_clock(spec.clock);
        let envs = spec.environments(dim)?;
        for (k, (label, env)) in envs.iter().enumerate() {
            let mut cell: Vec<Vec<RunRecord>> = vec![Vec::new(); spec.planners.len()];
            for j in 0..spec.runs {
                let seed = spec.base_seed + (k * spec.runs + j) as u64;
                let n = spec.planners.len();
                for i in 0..n {
                    let slot = (i + j) % n;
                    let planner = spec.planners[slot];
                    let cfg = spec.planner_config(dim, planner, seed)?;
                    let outcome = execute(env, label, planner, &cfg, &budget, false);
                    visit(&outcome);
                    cell[slot].push(outcome.record);
                }
            }
            out.extend(cell.into_iter().flatten());
        }
    }
    Ok(out)
}

pub fn run_matrix(spec: &BenchSpec) -> Result<Vec<RunRecord>> {
    run_matrix_with(spec, |_| {})
}
