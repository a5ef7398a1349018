pub mod config;
pub mod dit;
pub mod queue;
pub mod rrt_connect;

pub use config::{Budget, ClockKind, Mode, PlannerConfig, PlannerConfigDoc, SolutionRecord};
pub use dit::{DitPlanner, Emission, PlannerStats, PopRecord, GOAL, START};
pub use queue::{select_best_forward_edge, ForwardEntry};
pub use rrt_connect::{max_edge_length, rrt_connect};

use crate::error::Result;
use crate::world::Environment;

/// Runs one anytime query and returns the improving solutions in order.
pub fn plan(
    env: &Environment,
    cfg: &PlannerConfig,
    budget: &Budget,
) -> Result<Vec<SolutionRecord>> {
    budget.validate()?;
    let mut planner = DitPlanner::new(env, cfg.clone())?;
    Ok(planner.run(budget))
}
