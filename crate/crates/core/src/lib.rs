//! Direction-informed anytime sampling-based path planning on the unit
//! hypercube with axis-aligned box obstacles.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod direction;
pub mod error;
pub mod heuristics;
pub mod nn;
pub mod planner;
pub mod space;
pub mod world;

pub use error::{PlanError, Result};
pub use planner::{
    plan, rrt_connect, Budget, ClockKind, DitPlanner, Mode, PlannerConfig, SolutionRecord,
};
pub use space::StateVec;
pub use world::Environment;
