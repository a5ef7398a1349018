//! The unit-hypercube state space: states, uniform and informed sampling,
//! and the random-geometric-graph connection radius.

use std::f64::consts::PI;
use std::fmt;
use std::ops::Index;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{PlanError, Result};

/// Maximum number of rejected draws before informed sampling gives up.
pub const INFORMED_REJECTION_BUDGET: usize = 100_000;

/// A point in `[0,1]^n`.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StateVec(Vec<f64>);

impl StateVec {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(PlanError::Domain(format!(
                "state dimension must be at least 2, got {}",
                coords.len()
            )));
        }
        if let Some(c) = coords.iter().find(|c| !(0.0..=1.0).contains(*c)) {
            return Err(PlanError::Domain(format!("coordinate {c} outside [0,1]")));
        }
        Ok(StateVec(coords))
    }

    /// Builds a state without range checks. Callers guarantee the coordinates
    /// lie in the unit cube.
    pub(crate) fn from_vec_unchecked(coords: Vec<f64>) -> Self {
        StateVec(coords)
    }

    /// `(v, v, ..., v)` with the first two coordinates overridden.
    pub fn with_prefix(dim: usize, x0: f64, x1: f64, rest: f64) -> Self {
        let mut c = vec![rest; dim];
        c[0] = x0;
        c[1] = x1;
        StateVec(c)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Index<usize> for StateVec {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl fmt::Debug for StateVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

#[inline]
pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Draws a state uniformly from `[0,1]^dim`, consuming exactly `dim` values
/// from `rng`.
pub fn sample_uniform<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> StateVec {
    StateVec((0..dim).map(|_| rng.random::<f64>()).collect())
}

/// The prolate hyperspheroid of states whose straight-line cost through them
/// does not exceed `c_best`.
#[derive(Clone, Debug)]
pub struct InformedSet {
    start: StateVec,
    goal: StateVec,
    c_best: f64,
    c_min: f64,
}

impl InformedSet {
    pub fn new(start: StateVec, goal: StateVec, c_best: f64) -> Result<Self> {
        if start.dim() != goal.dim() {
            return Err(PlanError::DimensionMismatch {
                expected: start.dim(),
                got: goal.dim(),
            });
        }
        let c_min = euclidean(start.coords(), goal.coords());
        if c_best.is_nan() || c_best < c_min {
            return Err(PlanError::Domain(format!(
                "c_best {c_best} below c_min {c_min}"
            )));
        }
        Ok(InformedSet {
            start,
            goal,
            c_best,
            c_min,
        })
    }

    pub fn start(&self) -> &StateVec {
        &self.start
    }

    pub fn goal(&self) -> &StateVec {
        &self.goal
    }

    pub fn c_best(&self) -> f64 {
        self.c_best
    }

    pub fn c_min(&self) -> f64 {
        self.c_min
    }

    pub fn dim(&self) -> usize {
        self.start.dim()
    }

    /// Admissible cost of the best path through `x`.
    pub fn cost_through(&self, x: &[f64]) -> f64 {
        euclidean(self.start.coords(), x) + euclidean(x, self.goal.coords())
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.cost_through(x) <= self.c_best
    }
}

/// Direct sample from the informed set: a uniform unit-ball point is
/// stretched to the spheroid axes, reflected onto the start-goal axis and
/// translated to the centre. Draws outside the unit cube are rejected.
///
/// `c_best = +inf` is not handled here; callers fall back to
/// [`sample_uniform`].
pub fn sample_informed<R: Rng + ?Sized>(set: &InformedSet, rng: &mut R) -> Result<StateVec> {
    if !set.c_best.is_finite() {
        return Err(PlanError::Domain(
            "informed sampling requires a finite c_best".into(),
        ));
    }
    let n = set.dim();
    if spheroid_measure(set) > 1.0 {
        // The spheroid is larger than the cube, so rejecting cube draws
        // outside it wastes fewer draws than rejecting spheroid draws
        // outside the cube.
        for _ in 0..INFORMED_REJECTION_BUDGET {
            let x = sample_uniform(n, rng);
            if set.contains(x.coords()) {
                return Ok(x);
            }
        }
        return Err(PlanError::DegenerateInformedSet {
            tries: INFORMED_REJECTION_BUDGET,
        });
    }
    let start = set.start.coords();
    let goal = set.goal.coords();
    let centre: Vec<f64> = start.iter().zip(goal).map(|(a, b)| 0.5 * (a + b)).collect();
    let major = 0.5 * set.c_best;
    let minor = 0.5
        * (set.c_best * set.c_best - set.c_min * set.c_min)
            .max(0.0)
            .sqrt();

    // Householder reflection H = I - 2 v v^T / (v^T v) with v = e1 - axis maps
    // e1 onto the unit start-goal axis.
    let mut v: Vec<f64> = if set.c_min > 0.0 {
        goal.iter()
            .zip(start)
            .map(|(g, s)| -(g - s) / set.c_min)
            .collect()
    } else {
        vec![0.0; n]
    };
    v[0] += 1.0;
    let vv: f64 = v.iter().map(|x| x * x).sum();
    let reflect = vv > 1e-24 && set.c_min > 0.0;

    let mut ball = vec![0.0; n];
    let mut out = vec![0.0; n];
    for _ in 0..INFORMED_REJECTION_BUDGET {
        let mut norm2 = 0.0;
        for b in ball.iter_mut() {
            let z: f64 = rng.sample(StandardNormal);
            *b = z;
            norm2 += z * z;
        }
        if norm2 == 0.0 {
            continue;
        }
        let radius = rng.random::<f64>().powf(1.0 / n as f64) / norm2.sqrt();
        for (i, b) in ball.iter_mut().enumerate() {
            *b *= radius * if i == 0 { major } else { minor };
        }
        if reflect {
            let dot: f64 = v.iter().zip(&ball).map(|(a, b)| a * b).sum();
            let s = 2.0 * dot / vv;
            for (b, vi) in ball.iter_mut().zip(&v) {
                *b -= s * vi;
            }
        }
        for i in 0..n {
            out[i] = centre[i] + ball[i];
        }
        if out.iter().all(|c| (0.0..=1.0).contains(c)) && set.contains(&out) {
            return Ok(StateVec(out));
        }
    }
    Err(PlanError::DegenerateInformedSet {
        tries: INFORMED_REJECTION_BUDGET,
    })
}

/// Tuning of the connection radius.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RggParams {
    pub eta: f64,
    pub dim: usize,
    pub rewire_factor: f64,
}

impl RggParams {
    pub fn new(dim: usize) -> Self {
        RggParams {
            eta: 1.001,
            dim,
            rewire_factor: 1.1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 1.0) {
            return Err(PlanError::InvalidConfig(format!(
                "eta must exceed 1, got {}",
                self.eta
            )));
        }
        if !(self.rewire_factor >= 1.0) {
            return Err(PlanError::InvalidConfig(format!(
                "rewire_factor must be at least 1, got {}",
                self.rewire_factor
            )));
        }
        if self.dim < 2 {
            return Err(PlanError::InvalidConfig(
                "dimension must be at least 2".into(),
            ));
        }
        Ok(())
    }
}

/// Volume of the unit ball in `R^n`, `pi^(n/2) / Gamma(n/2 + 1)`.
pub fn unit_ball_volume(n: usize) -> f64 {
    let half_n = n as f64 / 2.0;
    PI.powf(half_n) / gamma_half_integer(n + 2)
}

/// `Gamma(m / 2)` for a positive integer `m`.
fn gamma_half_integer(m: usize) -> f64 {
    debug_assert!(m >= 1);
    if m.is_multiple_of(2) {
        // Gamma(k) = (k-1)!
        (1..m / 2).map(|i| i as f64).product()
    } else {
        // Gamma(k + 1/2) = sqrt(pi) * prod_{i=0}^{k-1} (i + 1/2)
        let k = (m - 1) / 2;
        PI.sqrt() * (0..k).map(|i| i as f64 + 0.5).product::<f64>()
    }
}

fn spheroid_measure(set: &InformedSet) -> f64 {
    if !set.c_best.is_finite() {
        return f64::INFINITY;
    }
    let n = set.dim();
    let major = 0.5 * set.c_best;
    let minor = 0.5
        * (set.c_best * set.c_best - set.c_min * set.c_min)
            .max(0.0)
            .sqrt();
    unit_ball_volume(n) * major * minor.powi(n as i32 - 1)
}

/// Lebesgue measure of the informed set, clamped to the unit-cube measure.
pub fn lebesgue_informed(set: &InformedSet) -> f64 {
    spheroid_measure(set).min(1.0)
}

/// RGG connection radius for `q` samples over a region of measure
/// `lambda_informed`.
pub fn connection_radius(q: usize, params: &RggParams, lambda_informed: f64) -> Result<f64> {
    if q < 2 {
        return Err(PlanError::Domain(format!(
            "connection radius needs q >= 2, got {q}"
        )));
    }
    if !(lambda_informed > 0.0) {
        return Err(PlanError::Domain(format!(
            "informed measure must be positive, got {lambda_informed}"
        )));
    }
    let n = params.dim as f64;
    let qf = q as f64;
    let base =
        2.0 * (1.0 + 1.0 / n) * (lambda_informed / unit_ball_volume(params.dim)) * (qf.ln() / qf);
    Ok(params.rewire_factor * params.eta * base.powf(1.0 / n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn uniform_samples_in_range_and_deterministic() {
        let mut a = ChaCha8Rng::seed_from_u64(7);
        let mut b = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let x = sample_uniform(2, &mut a);
            assert!(x.coords().iter().all(|c| (0.0..=1.0).contains(c)));
            assert_eq!(x, sample_uniform(2, &mut b));
        }
    }

    #[test]
    fn uniform_consumes_exactly_n_draws() {
        let mut a = ChaCha8Rng::seed_from_u64(3);
        let mut b = ChaCha8Rng::seed_from_u64(3);
        let _ = sample_uniform(5, &mut a);
        for _ in 0..5 {
            let _: f64 = b.random();
        }
        assert_eq!(a.random::<u64>(), b.random::<u64>());
    }

    #[test]
    fn uniform_means_near_half() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut sums = [0.0; 4];
        for _ in 0..10_000 {
            let x = sample_uniform(4, &mut rng);
            for (s, c) in sums.iter_mut().zip(x.coords()) {
                *s += c;
            }
        }
        for s in sums {
            let mean = s / 10_000.0;
            assert!((0.48..=0.52).contains(&mean), "mean {mean}");
        }
    }

    #[test]
    fn state_rejects_out_of_range() {
        assert!(StateVec::new(vec![0.5, 1.5]).is_err());
        assert!(StateVec::new(vec![0.5]).is_err());
        assert!(StateVec::new(vec![0.0, 1.0]).is_ok());
    }

    #[test]
    fn degenerate_informed_set_samples_on_segment() {
        let s = StateVec::new(vec![0.3, 0.5]).unwrap();
        let g = StateVec::new(vec![0.7, 0.5]).unwrap();
        let c_min = euclidean(s.coords(), g.coords());
        let set = InformedSet::new(s, g, c_min).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let x = sample_informed(&set, &mut rng).unwrap();
            assert!((x[1] - 0.5).abs() < 1e-9);
            assert!(x[0] >= 0.3 - 1e-9 && x[0] <= 0.7 + 1e-9);
        }
    }

    #[test]
    fn informed_requires_finite_cost() {
        let s = StateVec::new(vec![0.3, 0.5]).unwrap();
        let g = StateVec::new(vec![0.7, 0.5]).unwrap();
        let set = InformedSet::new(s, g, f64::INFINITY).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(sample_informed(&set, &mut rng).is_err());
    }

    #[test]
    fn informed_rejects_cost_below_minimum() {
        let s = StateVec::new(vec![0.3, 0.5]).unwrap();
        let g = StateVec::new(vec![0.7, 0.5]).unwrap();
        assert!(InformedSet::new(s, g, 0.3).is_err());
    }

    #[test]
    fn ball_volume_closed_forms() {
        assert!((unit_ball_volume(1) - 2.0).abs() < 1e-12);
        assert!((unit_ball_volume(2) - PI).abs() < 1e-12);
        assert!((unit_ball_volume(3) - 4.18879).abs() < 1e-5);
    }

    #[test]
    fn radius_reference_value() {
        let params = RggParams {
            eta: 1.001,
            dim: 2,
            rewire_factor: 1.0,
        };
        let r = connection_radius(100, &params, 1.0).unwrap();
        assert!((r - 0.20991).abs() < 1e-4);
        assert!(connection_radius(1000, &params, 1.0).unwrap() < r);
        assert!(connection_radius(1, &params, 1.0).is_err());
        assert!(connection_radius(10, &params, 0.0).is_err());
    }

    #[test]
    fn informed_measure_cases() {
        let s = StateVec::new(vec![0.3, 0.5]).unwrap();
        let g = StateVec::new(vec![0.7, 0.5]).unwrap();
        let inf = InformedSet::new(s.clone(), g.clone(), f64::INFINITY).unwrap();
        assert_eq!(lebesgue_informed(&inf), 1.0);
        let c_min = euclidean(s.coords(), g.coords());
        let tight = InformedSet::new(s.clone(), g.clone(), c_min).unwrap();
        assert_eq!(lebesgue_informed(&tight), 0.0);
        let mid = InformedSet::new(s, g, 0.5).unwrap();
        assert!((lebesgue_informed(&mid) - 0.11781).abs() < 1e-5);
    }
}
