//! Edge direction machinery: generalized edge vectors, weighted cosine
//! similarity, the neighbour direction filter and the quantized direction
//! cost.
//!
//! Three vectors drive every decision. The *target* vector runs from the
//! previous state to the state being expanded and carries the search
//! momentum. The *goal* vector runs from the previous state to the goal. The
//! *check* vector runs from the expanded state to a candidate neighbour.

use serde::{Deserialize, Serialize};

use crate::error::{PlanError, Result};

/// Coordinate difference `b - a` with its cached Euclidean norm.
#[derive(Clone, Debug, PartialEq)]
pub struct GenVec {
    components: Vec<f64>,
    norm: f64,
}

impl GenVec {
    pub fn from_components(components: Vec<f64>) -> Self {
        let norm = components.iter().map(|c| c * c).sum::<f64>().sqrt();
        GenVec { components, norm }
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }
}

/// Vector pointing from `a` towards `b`.
pub fn general_vec(a: &[f64], b: &[f64]) -> Result<GenVec> {
    if a.len() != b.len() {
        return Err(PlanError::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    Ok(GenVec::from_components(
        a.iter().zip(b).map(|(x, y)| y - x).collect(),
    ))
}

/// Which side of the momentum cone survives the filter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FilterMode {
    /// Keep neighbours at least as goal-aligned as the momentum direction.
    ConeKeep,
    /// Remove neighbours at least as goal-aligned as the momentum direction.
    PaperLiteral,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionConfig {
    pub omega1: f64,
    pub omega2: f64,
    pub xi1: f64,
    pub xi2: f64,
    /// Norms below this are treated as zero vectors.
    pub epsilon: f64,
    /// `|phi| >= 1 - phi_one_tol` counts as maximal similarity.
    pub phi_one_tol: f64,
    /// Scale applied before flooring the direction cost.
    pub quantum: u32,
    pub filter_mode: FilterMode,
}

impl Default for DirectionConfig {
    fn default() -> Self {
        DirectionConfig {
            omega1: 0.6,
            omega2: 0.4,
            xi1: 0.6,
            xi2: 0.8,
            epsilon: 1e-9,
            phi_one_tol: 1e-3,
            quantum: 1000,
            filter_mode: FilterMode::ConeKeep,
        }
    }
}

impl DirectionConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(PlanError::InvalidConfig(format!(
                    "{name} must lie in (0,1), got {v}"
                )))
            }
        };
        unit("omega1", self.omega1)?;
        unit("omega2", self.omega2)?;
        unit("xi1", self.xi1)?;
        unit("xi2", self.xi2)?;
        if !(self.epsilon > 0.0) || !(self.phi_one_tol > 0.0) || self.quantum == 0 {
            return Err(PlanError::InvalidConfig(
                "epsilon, phi_one_tol and quantum must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Weighted cosine similarity; `raw` is unclamped, `phi` is clamped to
/// `[-1, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimilarityIndex {
    pub phi: f64,
    pub raw: f64,
}

impl SimilarityIndex {
    pub fn from_raw(raw: f64) -> Self {
        SimilarityIndex {
            phi: raw.clamp(-1.0, 1.0),
            raw,
        }
    }
}

/// Quantized direction cost in ticks.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DirectionCost(pub u64);

impl DirectionCost {
    pub const ZERO: DirectionCost = DirectionCost(0);

    pub fn ticks(self) -> u64 {
        self.0
    }
}

pub fn is_degenerate(v: &GenVec, cfg: &DirectionConfig) -> bool {
    v.norm < cfg.epsilon
}

/// Weighted cosine similarity of `v1` (weight `omega1`) and `v2` (weight
/// `omega2`), both unit-normalized first.
pub fn wgt_cos_sim(v1: &GenVec, v2: &GenVec, cfg: &DirectionConfig) -> Result<SimilarityIndex> {
    for v in [v1, v2] {
        if is_degenerate(v, cfg) {
            return Err(PlanError::DegenerateVector { norm: v.norm });
        }
    }
    if v1.components.len() != v2.components.len() {
        return Err(PlanError::DimensionMismatch {
            expected: v1.components.len(),
            got: v2.components.len(),
        });
    }
    Ok(SimilarityIndex::from_raw(weighted_cosine(
        &v1.components,
        v1.norm,
        &v2.components,
        v2.norm,
        cfg.omega1,
        cfg.omega2,
    )))
}

#[inline]
fn weighted_cosine(a: &[f64], a_norm: f64, b: &[f64], b_norm: f64, w1: f64, w2: f64) -> f64 {
    let mut dot = 0.0;
    let mut sa = 0.0;
    let mut sb = 0.0;
    for (x, y) in a.iter().zip(b) {
        let ux = x / a_norm;
        let uy = y / b_norm;
        dot += ux * uy;
        sa += (w1 * ux) * (w1 * ux);
        sb += (w2 * uy) * (w2 * uy);
    }
    dot / (sa.sqrt() * sb.sqrt())
}

#[inline]
fn sigmoid_scaled(norm: f64, phi: f64) -> f64 {
    norm / (1.0 + (-phi).exp())
}

/// Sigmoid-scaled direction cost of a candidate edge.
pub fn calc_dir_cost(
    phi_check: SimilarityIndex,
    phi_target: SimilarityIndex,
    norm_check: f64,
    norm_target: f64,
    cfg: &DirectionConfig,
) -> DirectionCost {
    let near_one = 1.0 - cfg.phi_one_tol;
    if phi_check.phi.abs() >= near_one || phi_target.phi.abs() >= near_one {
        return DirectionCost::ZERO;
    }
    let theta_target = sigmoid_scaled(norm_target, phi_target.phi);
    let theta_check = sigmoid_scaled(norm_check, phi_check.phi);
    let v = (cfg.xi1 * theta_target * theta_target + cfg.xi2 * theta_check * theta_check).sqrt();
    DirectionCost((cfg.quantum as f64 * v).floor() as u64)
}

/// Verdict for one neighbour.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FilterVerdict {
    pub keep: bool,
    pub cost: DirectionCost,
}

/// Precomputed momentum and goal vectors for filtering the neighbours of one
/// expanded state.
#[derive(Clone, Debug)]
pub struct DirectionFilter<'a> {
    source: &'a [f64],
    target_norm: f64,
    goal: Vec<f64>,
    goal_norm: f64,
    cfg: DirectionConfig,
    phi_target: Option<SimilarityIndex>,
}

impl<'a> DirectionFilter<'a> {
    /// `last` is the predecessor of `source`; `None` for a root.
    pub fn new(
        last: Option<&[f64]>,
        source: &'a [f64],
        goal: &[f64],
        cfg: &DirectionConfig,
    ) -> Self {
        let last = last.unwrap_or(source);
        let target: Vec<f64> = last.iter().zip(source).map(|(l, s)| s - l).collect();
        let goal_v: Vec<f64> = last.iter().zip(goal).map(|(l, g)| g - l).collect();
        let target_norm = target.iter().map(|c| c * c).sum::<f64>().sqrt();
        let goal_norm = goal_v.iter().map(|c| c * c).sum::<f64>().sqrt();
        let phi_target = (target_norm >= cfg.epsilon && goal_norm >= cfg.epsilon).then(|| {
            SimilarityIndex::from_raw(weighted_cosine(
                &target,
                target_norm,
                &goal_v,
                goal_norm,
                cfg.omega1,
                cfg.omega2,
            ))
        });
        DirectionFilter {
            source,
            target_norm,
            goal: goal_v,
            goal_norm,
            cfg: *cfg,
            phi_target,
        }
    }

    /// Whether any filtering can happen at all (false for degenerate momentum
    /// or goal vectors).
    pub fn is_active(&self) -> bool {
        self.phi_target.is_some()
    }

    pub fn target_norm(&self) -> f64 {
        self.target_norm
    }

    /// Similarity of `source -> neighbor` to the goal vector, with the
    /// check-vector norm. `None` for a degenerate check vector.
    fn check(&self, neighbor: &[f64]) -> Option<(SimilarityIndex, f64)> {
        let mut stack = [0.0f64; 32];
        let mut heap = Vec::new();
        let check: &mut [f64] = if neighbor.len() <= stack.len() {
            &mut stack[..neighbor.len()]
        } else {
            heap.resize(neighbor.len(), 0.0);
            &mut heap
        };
        let mut n2 = 0.0;
        for ((c, s), x) in check.iter_mut().zip(self.source).zip(neighbor) {
            *c = x - s;
            n2 += *c * *c;
        }
        let check_norm = n2.sqrt();
        if check_norm < self.cfg.epsilon {
            return None;
        }
        let phi = SimilarityIndex::from_raw(weighted_cosine(
            check,
            check_norm,
            &self.goal,
            self.goal_norm,
            self.cfg.omega1,
            self.cfg.omega2,
        ));
        Some((phi, check_norm))
    }

    fn keeps(&self, phi_check: SimilarityIndex, phi_target: SimilarityIndex) -> bool {
        let at_least_as_aligned = phi_check.raw >= phi_target.raw;
        match self.cfg.filter_mode {
            FilterMode::ConeKeep => at_least_as_aligned,
            FilterMode::PaperLiteral => !at_least_as_aligned,
        }
    }

    /// The keep decision of [`Self::evaluate`] without the direction cost.
    pub fn admits(&self, neighbor: &[f64]) -> bool {
        match (self.phi_target, self.check(neighbor)) {
            (Some(target), Some((phi, _))) => self.keeps(phi, target),
            _ => true,
        }
    }

    pub fn evaluate(&self, neighbor: &[f64]) -> FilterVerdict {
        match (self.phi_target, self.check(neighbor)) {
            (Some(target), Some((phi, norm))) => FilterVerdict {
                keep: self.keeps(phi, target),
                cost: calc_dir_cost(phi, target, norm, self.target_norm, &self.cfg),
            },
            _ => FilterVerdict {
                keep: true,
                cost: DirectionCost::ZERO,
            },
        }
    }
}

/// Splits `neighbors` into the kept subset and assigns each kept neighbour
/// its direction cost. Output order follows input order.
pub fn filter_neighbors(
    last: &[f64],
    source: &[f64],
    goal: &[f64],
    neighbors: &[&[f64]],
    cfg: &DirectionConfig,
) -> (Vec<usize>, Vec<DirectionCost>) {
    let filter = DirectionFilter::new(Some(last), source, goal, cfg);
    let mut kept = Vec::new();
    let mut costs = Vec::new();
    for (i, n) in neighbors.iter().enumerate() {
        let v = filter.evaluate(n);
        if v.keep {
            kept.push(i);
            costs.push(v.cost);
        }
    }
    (kept, costs)
}
