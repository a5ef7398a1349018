//! Per-vertex estimates and the lexicographic queue keys of the reverse and
//! forward searches.

use std::cmp::Ordering;

use crate::direction::DirectionCost;
use crate::space::euclidean;

/// Cost, effort and direction estimates attached to one vertex.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VertexEstimates {
    /// Forward cost-to-come.
    pub g: f64,
    /// Admissible cost-to-go.
    pub h_hat: f64,
    /// Inadmissible cost-to-go.
    pub h_bar: f64,
    /// Collision-check effort to go.
    pub e_bar: u64,
    /// Forward direction-cost-to-come; `None` while unreached.
    pub ds_f: Option<u64>,
    /// Admissible direction-cost-to-go. Always zero.
    pub dg_hat: u64,
    /// Inadmissible direction-cost-to-go.
    pub dg_bar: u64,
}

impl Default for VertexEstimates {
    fn default() -> Self {
        VertexEstimates {
            g: f64::INFINITY,
            h_hat: f64::INFINITY,
            h_bar: f64::INFINITY,
            e_bar: 0,
            ds_f: None,
            dg_hat: 0,
            dg_bar: 0,
        }
    }
}

/// Euclidean distance; the admissible edge-cost heuristic.
#[inline]
pub fn admissible_cost(a: &[f64], b: &[f64]) -> f64 {
    euclidean(a, b)
}

/// Reverse-queue key. Ordered lexicographically by `(k1, k2, k3)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReverseKey {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
}

impl ReverseKey {
    pub fn lex_cmp(&self, other: &Self) -> Ordering {
        self.k1
            .total_cmp(&other.k1)
            .then(self.k2.total_cmp(&other.k2))
            .then(self.k3.total_cmp(&other.k3))
    }
}

/// Inputs to a reverse key for the reverse edge `source -> target`, where the
/// reverse search grows from the goal.
#[derive(Clone, Copy, Debug)]
pub struct ReverseEdgeTerms {
    /// Admissible cost-to-go of the source.
    pub h_hat_source: f64,
    /// Admissible edge cost.
    pub edge_cost: f64,
    /// Admissible cost-to-come of the target from the start.
    pub g_hat_target: f64,
    pub e_bar_source: u64,
    pub edge_effort: u64,
    /// Remaining effort estimate from the target to the start.
    pub effort_to_start_target: u64,
    /// Admissible direction-cost of the source. Always zero.
    pub ds_hat_source: u64,
    pub edge_direction: DirectionCost,
}

pub fn reverse_key(t: &ReverseEdgeTerms) -> ReverseKey {
    ReverseKey {
        k1: t.h_hat_source + t.edge_cost + t.g_hat_target,
        k2: (t.e_bar_source + t.edge_effort + t.effort_to_start_target) as f64,
        k3: (t.ds_hat_source + t.edge_direction.ticks()) as f64,
    }
}

/// Forward-queue key.
///
/// `k1`/`k2` are the lower bound and the estimate of the solution cost
/// through the edge, `k3` the remaining collision-check effort and `k4` the
/// inadmissible direction cost through the edge.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ForwardKey {
    pub k1: f64,
    pub k2: f64,
    pub k3: u64,
    pub k4: u64,
}

impl ForwardKey {
    pub fn lex_cmp(&self, other: &Self) -> Ordering {
        self.k1
            .total_cmp(&other.k1)
            .then(self.k2.total_cmp(&other.k2))
            .then(self.k3.cmp(&other.k3))
            .then(self.k4.cmp(&other.k4))
    }

    /// Same `(k1, k2)` tie band.
    pub fn same_band(&self, other: &Self) -> bool {
        self.k1 == other.k1 && self.k2 == other.k2
    }
}

/// Admissible direction cost through an edge. Both admissible direction
/// heuristics are identically zero, so this is the source's cost-to-come.
pub fn s_hat_direction(ds_f_source: Option<u64>) -> Option<u64> {
    ds_f_source
}

/// Inadmissible direction cost through an edge: cost-to-come of the source,
/// direction cost of the edge and the target's direction-cost-to-go.
pub fn s_bar_direction(
    ds_f_source: Option<u64>,
    edge: DirectionCost,
    dg_bar_target: u64,
) -> Option<u64> {
    ds_f_source.map(|ds| ds + edge.ticks() + dg_bar_target)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn terms() -> ReverseEdgeTerms {
        ReverseEdgeTerms {
            h_hat_source: 0.1,
            edge_cost: admissible_cost(&[0.3, 0.5], &[0.7, 0.5]),
            g_hat_target: 0.2,
            e_bar_source: 0,
            edge_effort: 5,
            effort_to_start_target: 3,
            ds_hat_source: 0,
            edge_direction: DirectionCost(7),
        }
    }

    #[test]
    fn admissible_cost_cases() {
        assert_eq!(admissible_cost(&[0.2, 0.2], &[0.2, 0.2]), 0.0);
        assert!((admissible_cost(&[0.0, 0.0], &[0.3, 0.4]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn reverse_key_reference() {
        let k = reverse_key(&terms());
        assert!((k.k1 - 0.7).abs() < 1e-12);
        assert_eq!(k.k2, 8.0);
        assert_eq!(k.k3, 7.0);
        let root = ReverseEdgeTerms {
            h_hat_source: 0.0,
            ..terms()
        };
        let kr = reverse_key(&root);
        assert!((kr.k1 - (0.4 + 0.2)).abs() < 1e-12);
    }

    #[test]
    fn reverse_key_tie_on_direction() {
        let a = reverse_key(&terms());
        let b = reverse_key(&ReverseEdgeTerms {
            edge_direction: DirectionCost(2),
            ..terms()
        });
        assert_eq!(b.lex_cmp(&a), Ordering::Less);
    }

    #[test]
    fn direction_totals() {
        assert_eq!(s_hat_direction(Some(0)), Some(0));
        assert_eq!(s_hat_direction(Some(42)), Some(42));
        assert_eq!(s_bar_direction(Some(0), DirectionCost(0), 0), Some(0));
        assert_eq!(s_bar_direction(Some(10), DirectionCost(5), 3), Some(18));
        assert_eq!(s_bar_direction(None, DirectionCost(5), 3), None);
    }

    #[test]
    fn s_bar_argmin_matches_scan() {
        // (ds_f source, dc, dg_bar)
        let edges = [(10, 5, 3), (0, 40, 0), (2, 2, 2), (7, 0, 0), (1, 9, 9)];
        let totals: Vec<u64> = edges
            .iter()
            .map(|&(ds, dc, dg)| s_bar_direction(Some(ds), DirectionCost(dc), dg).unwrap())
            .collect();
        let argmin = (0..edges.len()).min_by_key(|&i| totals[i]).unwrap();
        let mut best = (u64::MAX, usize::MAX);
        for (i, &(ds, dc, dg)) in edges.iter().enumerate() {
            let s = ds + dc + dg;
            if s < best.0 {
                best = (s, i);
            }
        }
        assert_eq!(argmin, best.1);
        assert_eq!(argmin, 2);
        // admissible variant reduces to the source cost-to-come
        let hat_argmin = (0..edges.len())
            .min_by_key(|&i| s_hat_direction(Some(edges[i].0)).unwrap())
            .unwrap();
        assert_eq!(hat_argmin, 1);
    }
}
