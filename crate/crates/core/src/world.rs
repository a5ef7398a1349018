//! Benchmark environments and the validity / collision-effort model.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{PlanError, Result};
use crate::space::{euclidean, StateVec};

/// Axis-aligned box `[lower, upper]`. Its interior is in collision.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperRect {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl HyperRect {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let r = HyperRect { lower, upper };
        r.validate(r.lower.len())?;
        Ok(r)
    }

    fn validate(&self, dim: usize) -> Result<()> {
        if self.lower.len() != dim || self.upper.len() != dim {
            return Err(PlanError::InvalidEnvironment(format!(
                "obstacle corners must have {dim} coordinates"
            )));
        }
        for (l, u) in self.lower.iter().zip(&self.upper) {
            if !(l < u) || *l < 0.0 || *u > 1.0 {
                return Err(PlanError::InvalidEnvironment(format!(
                    "obstacle extent [{l}, {u}] is empty or leaves the unit cube"
                )));
            }
        }
        Ok(())
    }

    /// Strict interior test; faces belong to free space.
    #[inline]
    pub fn contains_strict(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(c, (l, u))| l < c && c < u)
    }

    /// Euclidean distance from `x` to the closed box.
    pub fn distance_to(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(c, (l, u))| {
                let d = if c < l {
                    l - c
                } else if c > u {
                    c - u
                } else {
                    0.0
                };
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }
}

/// Interpolation granularity of the motion validator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MotionCheckConfig {
    /// Step length as a fraction of the space diagonal `sqrt(n)`.
    pub resolution: f64,
    /// Refinement multiplier for re-validating finished paths.
    pub fine_factor: u32,
}

impl Default for MotionCheckConfig {
    fn default() -> Self {
        MotionCheckConfig {
            resolution: 0.01,
            fine_factor: 10,
        }
    }
}

impl MotionCheckConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.resolution > 0.0 && self.resolution <= 0.05) {
            return Err(PlanError::InvalidConfig(format!(
                "resolution must lie in (0, 0.05], got {}",
                self.resolution
            )));
        }
        if self.fine_factor < 2 {
            return Err(PlanError::InvalidConfig(
                "fine_factor must be at least 2".into(),
            ));
        }
        Ok(())
    }

    /// The configuration used to re-validate finished paths.
    pub fn fine(&self) -> MotionCheckConfig {
        MotionCheckConfig {
            resolution: self.resolution / self.fine_factor as f64,
            fine_factor: self.fine_factor,
        }
    }

    fn step(&self, dim: usize) -> f64 {
        self.resolution * (dim as f64).sqrt()
    }
}

#[derive(Serialize, Deserialize)]
struct EnvironmentDoc {
    dim: usize,
    obstacles: Vec<HyperRect>,
    start: Vec<f64>,
    goal: Vec<f64>,
    #[serde(default)]
    goal_radius: f64,
}

/// Obstacle set plus start and goal. Immutable after construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EnvironmentDoc", into = "EnvironmentDoc")]
pub struct Environment {
    dim: usize,
    obstacles: Vec<HyperRect>,
    start: StateVec,
    goal: StateVec,
    goal_radius: f64,
}

impl TryFrom<EnvironmentDoc> for Environment {
    type Error = PlanError;
    fn try_from(doc: EnvironmentDoc) -> Result<Self> {
        let mut env = Environment::new(
            doc.dim,
            doc.obstacles,
            StateVec::new(doc.start)?,
            StateVec::new(doc.goal)?,
        )?;
        env.set_goal_radius(doc.goal_radius)?;
        Ok(env)
    }
}

impl From<Environment> for EnvironmentDoc {
    fn from(env: Environment) -> Self {
        EnvironmentDoc {
            dim: env.dim,
            obstacles: env.obstacles,
            start: env.start.into_inner(),
            goal: env.goal.into_inner(),
            goal_radius: env.goal_radius,
        }
    }
}

impl Environment {
    pub fn new(
        dim: usize,
        obstacles: Vec<HyperRect>,
        start: StateVec,
        goal: StateVec,
    ) -> Result<Self> {
        if dim < 2 {
            return Err(PlanError::Domain(format!(
                "dimension must be at least 2, got {dim}"
            )));
        }
        for o in &obstacles {
            o.validate(dim)?;
        }
        for s in [&start, &goal] {
            if s.dim() != dim {
                return Err(PlanError::DimensionMismatch {
                    expected: dim,
                    got: s.dim(),
                });
            }
        }
        let env = Environment {
            dim,
            obstacles,
            start,
            goal,
            goal_radius: 0.0,
        };
        if !env.is_valid(env.start.coords()) {
            return Err(PlanError::InvalidStart);
        }
        if !env.is_valid(env.goal.coords()) {
            return Err(PlanError::InvalidGoal);
        }
        Ok(env)
    }

    pub fn set_goal_radius(&mut self, radius: f64) -> Result<()> {
        if !(radius >= 0.0) {
            return Err(PlanError::InvalidEnvironment(format!(
                "goal radius {radius} is negative"
            )));
        }
        self.goal_radius = radius;
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn obstacles(&self) -> &[HyperRect] {
        &self.obstacles
    }

    pub fn start(&self) -> &StateVec {
        &self.start
    }

    pub fn goal(&self) -> &StateVec {
        &self.goal
    }

    pub fn goal_radius(&self) -> f64 {
        self.goal_radius
    }

    pub fn in_goal_region(&self, x: &[f64]) -> bool {
        euclidean(x, self.goal.coords()) <= self.goal_radius
    }

    /// Unchecked validity of raw coordinates.
    #[inline]
    pub fn is_valid(&self, x: &[f64]) -> bool {
        !self.obstacles.iter().any(|o| o.contains_strict(x))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("environment serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| PlanError::InvalidEnvironment(e.to_string()))
    }
}

/// True iff `x` lies in no obstacle interior.
pub fn is_state_valid(env: &Environment, x: &StateVec) -> Result<bool> {
    if x.dim() != env.dim {
        return Err(PlanError::DimensionMismatch {
            expected: env.dim,
            got: x.dim(),
        });
    }
    Ok(env.is_valid(x.coords()))
}

/// Number of interpolation intervals the validator uses for `a -> b`.
pub fn effort_estimate(a: &[f64], b: &[f64], cfg: &MotionCheckConfig) -> u64 {
    let d = euclidean(a, b);
    if d == 0.0 {
        return 0;
    }
    (d / cfg.step(a.len())).ceil() as u64
}

/// Outcome of a possibly truncated motion check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MotionCheck {
    Invalid,
    Valid,
    /// Every checked state was valid but the check budget ran out.
    Unknown,
}

/// Interior indices `1..k` in coarse-to-fine bisection order.
struct BisectionOrder {
    k: u64,
    stride: u64,
    next: u64,
}

fn bisection_order(k: u64) -> BisectionOrder {
    let stride = k.max(1).next_power_of_two() / 2;
    BisectionOrder {
        k,
        stride,
        next: stride,
    }
}

impl Iterator for BisectionOrder {
    type Item = u64;
    fn next(&mut self) -> Option<u64> {
        while self.stride > 0 {
            if self.next < self.k {
                let i = self.next;
                self.next += 2 * self.stride;
                return Some(i);
            }
            self.stride /= 2;
            self.next = self.stride;
        }
        None
    }
}

/// Checks up to `max_checks` interior states of `a -> b` in bisection order.
/// Endpoints are assumed valid. The segment is traversed in a canonical
/// direction so the result does not depend on argument order.
pub fn check_motion(
    env: &Environment,
    a: &[f64],
    b: &[f64],
    cfg: &MotionCheckConfig,
    max_checks: u64,
) -> MotionCheck {
    let (a, b) = if a.partial_cmp(b) == Some(std::cmp::Ordering::Greater) {
        (b, a)
    } else {
        (a, b)
    };
    let k = effort_estimate(a, b, cfg);
    if k <= 1 {
        return MotionCheck::Valid;
    }
    let mut stack = [0.0f64; 32];
    let mut heap = Vec::new();
    let x: &mut [f64] = if a.len() <= stack.len() {
        &mut stack[..a.len()]
    } else {
        heap.resize(a.len(), 0.0);
        &mut heap
    };
    for (count, i) in bisection_order(k).enumerate() {
        if count as u64 >= max_checks {
            return MotionCheck::Unknown;
        }
        let t = i as f64 / k as f64;
        for ((xi, ai), bi) in x.iter_mut().zip(a).zip(b) {
            *xi = ai + (bi - ai) * t;
        }
        if !env.is_valid(x) {
            return MotionCheck::Invalid;
        }
    }
    MotionCheck::Valid
}

/// True iff every interpolated state of `a -> b` at spacing at most
/// `resolution * sqrt(n)` is valid.
pub fn is_motion_valid(
    env: &Environment,
    a: &StateVec,
    b: &StateVec,
    cfg: &MotionCheckConfig,
) -> bool {
    check_motion(env, a.coords(), b.coords(), cfg, u64::MAX) == MotionCheck::Valid
}

/// Validates every segment of a polyline.
pub fn is_path_valid(env: &Environment, path: &[StateVec], cfg: &MotionCheckConfig) -> bool {
    path.iter().all(|x| env.is_valid(x.coords()))
        && path
            .windows(2)
            .all(|w| is_motion_valid(env, &w[0], &w[1], cfg))
}

/// Wall thickness in dimension 0.
pub const NARROW_PASSAGE_WALL: (f64, f64) = (0.4, 0.6);
/// Gap extent in dimension 1.
pub const NARROW_PASSAGE_GAP: (f64, f64) = (0.60, 0.62);

/// A wall slab across dimension 0 with a thin gap in dimension 1.
pub fn make_narrow_passage(n: usize) -> Result<Environment> {
    if n < 2 {
        return Err(PlanError::Domain(format!(
            "narrow passage needs n >= 2, got {n}"
        )));
    }
    let slab = |x1: (f64, f64)| {
        let mut lower = vec![0.0; n];
        let mut upper = vec![1.0; n];
        lower[0] = NARROW_PASSAGE_WALL.0;
        upper[0] = NARROW_PASSAGE_WALL.1;
        lower[1] = x1.0;
        upper[1] = x1.1;
        HyperRect { lower, upper }
    };
    Environment::new(
        n,
        vec![
            slab((0.0, NARROW_PASSAGE_GAP.0)),
            slab((NARROW_PASSAGE_GAP.1, 1.0)),
        ],
        StateVec::with_prefix(n, 0.3, 0.5, 0.5),
        StateVec::with_prefix(n, 0.7, 0.5, 0.5),
    )
}

/// Default obstacle count for random rectangles, `ceil(10 n / 4)`.
pub fn default_rectangle_count(n: usize) -> usize {
    (10 * n).div_ceil(4)
}

pub const DEFAULT_RECTANGLE_WIDTHS: (f64, f64) = (0.1, 0.5);

/// Clearance kept free around start and goal.
const RECTANGLE_CLEARANCE: f64 = 0.05;
const RECTANGLE_RETRIES: usize = 100;

/// Random axis-aligned boxes; boxes touching the start or goal clearance ball
/// are resampled and eventually dropped.
pub fn make_random_rectangles(
    n: usize,
    count: usize,
    seed: u64,
    width_range: (f64, f64),
) -> Result<Environment> {
    if n < 2 {
        return Err(PlanError::Domain(format!(
            "random rectangles need n >= 2, got {n}"
        )));
    }
    let (wlo, whi) = width_range;
    if !(wlo > 0.0 && wlo <= whi && whi <= 0.5) {
        return Err(PlanError::Domain(format!(
            "invalid width range ({wlo}, {whi})"
        )));
    }
    let start = StateVec::with_prefix(n, 0.1, 0.5, 0.5);
    let goal = StateVec::with_prefix(n, 0.9, 0.5, 0.5);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut obstacles = Vec::with_capacity(count);
    for _ in 0..count {
        for _ in 0..RECTANGLE_RETRIES {
            let mut lower = Vec::with_capacity(n);
            let mut upper = Vec::with_capacity(n);
            for _ in 0..n {
                let c: f64 = rng.random();
                let w = if whi > wlo {
                    rng.random_range(wlo..=whi)
                } else {
                    wlo
                };
                lower.push((c - 0.5 * w).max(0.0));
                upper.push((c + 0.5 * w).min(1.0));
            }
            let rect = HyperRect { lower, upper };
            if rect.distance_to(start.coords()) > RECTANGLE_CLEARANCE
                && rect.distance_to(goal.coords()) > RECTANGLE_CLEARANCE
            {
                obstacles.push(rect);
                break;
            }
        }
    }
    Environment::new(n, obstacles, start, goal)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(c: &[f64]) -> StateVec {
        StateVec::new(c.to_vec()).unwrap()
    }

    #[test]
    fn narrow_passage_geometry() {
        let env = make_narrow_passage(2).unwrap();
        assert!(env.is_valid(&[0.5, 0.61]));
        assert!(!env.is_valid(&[0.5, 0.5]));
        assert!(!env.is_valid(&[0.5, 0.8]));
        assert!(env.is_valid(&[0.5, 0.60]), "gap face belongs to free space");
        assert_eq!(env.obstacles().len(), 2);
        let env4 = make_narrow_passage(4).unwrap();
        assert!(is_state_valid(&env4, &st(&[0.3, 0.5, 0.5, 0.5])).unwrap());
        assert!(make_narrow_passage(1).is_err());
    }

    #[test]
    fn state_validity_edge_cases() {
        let env = Environment::new(
            2,
            vec![HyperRect::new(vec![0.2, 0.2], vec![0.4, 0.4]).unwrap()],
            st(&[0.1, 0.1]),
            st(&[0.9, 0.9]),
        )
        .unwrap();
        assert!(is_state_valid(&env, &st(&[0.2, 0.3])).unwrap());
        assert!(!is_state_valid(&env, &st(&[0.3, 0.3])).unwrap());
        assert!(is_state_valid(&env, &st(&[0.3, 0.3, 0.3])).is_err());
        let empty = Environment::new(2, vec![], st(&[0.1, 0.1]), st(&[0.9, 0.9])).unwrap();
        assert!(is_state_valid(&empty, &st(&[0.3, 0.3])).unwrap());
    }

    #[test]
    fn narrow_passage_motions() {
        let env = make_narrow_passage(2).unwrap();
        let cfg = MotionCheckConfig::default();
        assert!(!is_motion_valid(
            &env,
            &st(&[0.3, 0.5]),
            &st(&[0.7, 0.5]),
            &cfg
        ));
        assert!(is_motion_valid(
            &env,
            &st(&[0.3, 0.61]),
            &st(&[0.7, 0.61]),
            &cfg
        ));
        let a = st(&[0.3, 0.5]);
        assert!(is_motion_valid(&env, &a, &a, &cfg));
    }

    #[test]
    fn effort_reference_values() {
        let cfg = MotionCheckConfig::default();
        assert_eq!(effort_estimate(&[0.3, 0.5], &[0.3, 0.5], &cfg), 0);
        assert_eq!(effort_estimate(&[0.3, 0.5], &[0.7, 0.5], &cfg), 29);
        assert_eq!(
            effort_estimate(&[0.1, 0.2], &[0.7, 0.9], &cfg),
            effort_estimate(&[0.7, 0.9], &[0.1, 0.2], &cfg)
        );
    }

    #[test]
    fn bisection_order_covers_interior_once() {
        for k in 0..70u64 {
            let mut v: Vec<u64> = bisection_order(k).collect();
            let n = v.len();
            v.sort_unstable();
            v.dedup();
            assert_eq!(v.len(), n);
            assert_eq!(v, (1..k).collect::<Vec<_>>());
        }
        let first: Vec<u64> = bisection_order(8).take(3).collect();
        assert_eq!(first, vec![4, 2, 6]);
    }

    #[test]
    fn random_rectangles_deterministic_and_clear() {
        let a = make_random_rectangles(2, 6, 42, DEFAULT_RECTANGLE_WIDTHS).unwrap();
        let b = make_random_rectangles(2, 6, 42, DEFAULT_RECTANGLE_WIDTHS).unwrap();
        assert_eq!(a, b);
        let empty = make_random_rectangles(3, 0, 1, DEFAULT_RECTANGLE_WIDTHS).unwrap();
        assert!(empty.obstacles().is_empty());
        assert!(is_motion_valid(
            &empty,
            empty.start(),
            empty.goal(),
            &MotionCheckConfig::default()
        ));
        assert!(make_random_rectangles(2, 3, 1, (0.2, 0.1)).is_err());
    }

    #[test]
    fn json_round_trip_and_validation() {
        let env = make_narrow_passage(3).unwrap();
        let back = Environment::from_json(&env.to_json()).unwrap();
        assert_eq!(env, back);
        let bad = r#"{"dim":2,"obstacles":[{"lower":[0.2,0.2],"upper":[0.4,0.4]}],"start":[0.3,0.3],"goal":[0.9,0.9]}"#;
        assert!(Environment::from_json(bad).is_err());
        let flipped = r#"{"dim":2,"obstacles":[{"lower":[0.4,0.2],"upper":[0.2,0.4]}],"start":[0.1,0.1],"goal":[0.9,0.9]}"#;
        assert!(Environment::from_json(flipped).is_err());
    }
}
