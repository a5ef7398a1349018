use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::direction::{DirectionConfig, FilterMode};
use crate::error::{PlanError, Result};
use crate::space::{RggParams, StateVec};
use crate::world::MotionCheckConfig;

/// Search variant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Direction filter and direction-cost edge selection enabled.
    Dit,
    /// Plain effort-informed search: no filter, direction cost ignored.
    Eit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlannerConfig {
    pub batch_size: usize,
    pub rgg: RggParams,
    pub direction: DirectionConfig,
    /// Effort-comparability threshold for direction-cost tie-breaking.
    pub mu: u64,
    pub mode: Mode,
    pub seed: u64,
    pub motion: MotionCheckConfig,
    /// Interpolated states checked on a reverse-search edge before trusting it.
    pub reverse_sparse_checks: u64,
}

impl PlannerConfig {
    pub fn new(dim: usize) -> Self {
        PlannerConfig {
            batch_size: 100,
            rgg: RggParams::new(dim),
            direction: DirectionConfig::default(),
            mu: 5000,
            mode: Mode::Dit,
            seed: 0,
            motion: MotionCheckConfig::default(),
            reverse_sparse_checks: 7,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_filter_mode(mut self, filter_mode: FilterMode) -> Self {
        self.direction.filter_mode = filter_mode;
        self
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.batch_size < 2 {
            return Err(PlanError::InvalidConfig(format!(
                "batch_size must be at least 2, got {}",
                self.batch_size
            )));
        }
        if self.rgg.dim != dim {
            return Err(PlanError::DimensionMismatch {
                expected: dim,
                got: self.rgg.dim,
            });
        }
        self.rgg.validate()?;
        self.direction.validate()?;
        self.motion.validate()
    }

    /// Parses the flat JSON configuration document. Missing fields keep
    /// their defaults.
    pub fn from_json(s: &str, dim: usize) -> Result<Self> {
        let doc: PlannerConfigDoc =
            serde_json::from_str(s).map_err(|e| PlanError::InvalidConfig(e.to_string()))?;
        let mut cfg = PlannerConfig::new(dim);
        doc.apply(&mut cfg);
        cfg.validate(dim)?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&PlannerConfigDoc::from(self)).expect("config serializes")
    }
}

/// Flat on-disk form of [`PlannerConfig`].
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlannerConfigDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub batch_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quantum: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub filter_mode: Option<FilterMode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resolution: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rewire_factor: Option<f64>,
}

impl PlannerConfigDoc {
    fn apply(&self, cfg: &mut PlannerConfig) {
        if let Some(v) = self.mode {
            cfg.mode = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.batch_size {
            cfg.batch_size = v;
        }
        if let Some(v) = self.mu {
            cfg.mu = v;
        }
        if let Some(v) = self.omega1 {
            cfg.direction.omega1 = v;
        }
        if let Some(v) = self.omega2 {
            cfg.direction.omega2 = v;
        }
        if let Some(v) = self.xi1 {
            cfg.direction.xi1 = v;
        }
        if let Some(v) = self.xi2 {
            cfg.direction.xi2 = v;
        }
        if let Some(v) = self.quantum {
            cfg.direction.quantum = v;
        }
        if let Some(v) = self.filter_mode {
            cfg.direction.filter_mode = v;
        }
        if let Some(v) = self.resolution {
            cfg.motion.resolution = v;
        }
        if let Some(v) = self.eta {
            cfg.rgg.eta = v;
        }
        if let Some(v) = self.rewire_factor {
            cfg.rgg.rewire_factor = v;
        }
    }
}

impl From<&PlannerConfig> for PlannerConfigDoc {
    fn from(c: &PlannerConfig) -> Self {
        PlannerConfigDoc {
            mode: Some(c.mode),
            seed: Some(c.seed),
            batch_size: Some(c.batch_size),
            mu: Some(c.mu),
            omega1: Some(c.direction.omega1),
            omega2: Some(c.direction.omega2),
            xi1: Some(c.direction.xi1),
            xi2: Some(c.direction.xi2),
            quantum: Some(c.direction.quantum),
            filter_mode: Some(c.direction.filter_mode),
            resolution: Some(c.motion.resolution),
            eta: Some(c.rgg.eta),
            rewire_factor: Some(c.rgg.rewire_factor),
        }
    }
}

/// How planner time is measured.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClockKind {
    Wall,
    /// Deterministic clock advancing a fixed number of seconds per planner
    /// iteration. Reruns reproduce timings exactly.
    Work {
        seconds_per_iteration: f64,
    },
}

impl ClockKind {
    pub const DEFAULT_WORK: ClockKind = ClockKind::Work {
        seconds_per_iteration: 1e-6,
    };
}

#[derive(Clone, Debug)]
pub(crate) struct Clock {
    kind: ClockKind,
    started: Instant,
    iterations: u64,
}

impl Clock {
    pub(crate) fn start(kind: ClockKind) -> Self {
        Clock {
            kind,
            started: Instant::now(),
            iterations: 0,
        }
    }

    pub(crate) fn tick(&mut self) {
        self.iterations += 1;
    }

    pub(crate) fn elapsed(&self) -> f64 {
        match self.kind {
            ClockKind::Wall => self.started.elapsed().as_secs_f64(),
            ClockKind::Work {
                seconds_per_iteration,
            } => self.iterations as f64 * seconds_per_iteration,
        }
    }
}

/// Termination conditions for one planning query.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Budget {
    pub seconds: f64,
    /// Stop once adding another batch would exceed this many samples
    /// (start and goal included). The last batch runs to exhaustion.
    pub max_samples: Option<usize>,
    pub clock: ClockKind,
    pub stop_at_first: bool,
}

impl Budget {
    pub fn time(seconds: f64) -> Self {
        Budget {
            seconds,
            max_samples: None,
            clock: ClockKind::Wall,
            stop_at_first: false,
        }
    }

    pub fn from_duration(d: Duration) -> Self {
        Budget::time(d.as_secs_f64())
    }

    /// Unlimited time, bounded sample count.
    pub fn samples(max_samples: usize) -> Self {
        Budget {
            seconds: f64::INFINITY,
            max_samples: Some(max_samples),
            clock: ClockKind::DEFAULT_WORK,
            stop_at_first: false,
        }
    }

    pub fn with_clock(mut self, clock: ClockKind) -> Self {
        self.clock = clock;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.seconds > 0.0) {
            return Err(PlanError::InvalidConfig(format!(
                "budget must be positive, got {}",
                self.seconds
            )));
        }
        Ok(())
    }
}

/// One improved solution found during an anytime query.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    /// Seconds since the query started.
    pub t: f64,
    pub cost: f64,
    pub path: Vec<StateVec>,
}

impl SolutionRecord {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("record serializes")
    }
}
