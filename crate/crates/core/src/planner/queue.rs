//! Edge-queue entries for both searches and the forward best-edge selection.

use std::cmp::Ordering;

use crate::heuristics::{ForwardKey, ReverseKey};

#[derive(Clone, Copy, Debug)]
pub(crate) struct ReverseEntry {
    pub key: ReverseKey,
    pub source: u32,
    pub target: u32,
    /// Source cost-to-go when the entry was pushed; a mismatch marks it stale.
    pub h_source: f64,
}

impl PartialEq for ReverseEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for ReverseEntry {}
impl PartialOrd for ReverseEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for ReverseEntry {
    // reversed for BinaryHeap: smallest key on top, then smaller target id
    // (sample insertion order), then smaller source id
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .key
            .lex_cmp(&self.key)
            .then(other.target.cmp(&self.target))
            .then(other.source.cmp(&self.source))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ForwardEntry {
    pub key: ForwardKey,
    pub source: u32,
    pub target: u32,
    /// Source cost-to-come when pushed; a mismatch marks it stale.
    pub g_source: f64,
    pub seq: u64,
}

impl PartialEq for ForwardEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for ForwardEntry {}
impl PartialOrd for ForwardEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for ForwardEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .key
            .lex_cmp(&self.key)
            .then(other.target.cmp(&self.target))
            .then(other.seq.cmp(&self.seq))
    }
}

/// Picks the edge to process from a non-empty set of forward candidates.
///
/// The candidates minimizing `(k1, k2)` form the tie band. Inside the band,
/// edges whose remaining effort `k3` is within `mu` of the band's minimum
/// effort compete on direction cost `k4`; a lone candidate wins outright.
/// Returns the index of the chosen edge.
pub fn select_best_forward_edge(candidates: &[ForwardEntry], mu: u64) -> usize {
    assert!(!candidates.is_empty(), "forward queue is empty");
    let best = candidates
        .iter()
        .map(|c| c.key)
        .min_by(|a, b| a.k1.total_cmp(&b.k1).then(a.k2.total_cmp(&b.k2)))
        .expect("non-empty");
    let band: Vec<usize> = (0..candidates.len())
        .filter(|&i| candidates[i].key.same_band(&best))
        .collect();
    if band.len() == 1 {
        return band[0];
    }
    let min_effort = band
        .iter()
        .map(|&i| candidates[i].key.k3)
        .min()
        .expect("non-empty band");
    band.into_iter()
        .filter(|&i| candidates[i].key.k3 - min_effort <= mu)
        .min_by(|&a, &b| {
            let (ca, cb) = (&candidates[a], &candidates[b]);
            ca.key
                .k4
                .cmp(&cb.key.k4)
                .then(ca.key.k3.cmp(&cb.key.k3))
                .then(ca.target.cmp(&cb.target))
                .then(ca.seq.cmp(&cb.seq))
        })
        .expect("band keeps its minimum-effort edge")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(k1: f64, k3: u64, k4: u64, seq: u64) -> ForwardEntry {
        ForwardEntry {
            key: ForwardKey { k1, k2: k1, k3, k4 },
            source: 0,
            target: seq as u32 + 2,
            g_source: 0.0,
            seq,
        }
    }

    #[test]
    fn single_edge() {
        assert_eq!(select_best_forward_edge(&[entry(1.0, 10, 10, 0)], 5000), 0);
    }

    #[test]
    fn effort_outside_band_wins_on_effort() {
        let q = [entry(1.0, 100, 500, 0), entry(1.0, 9000, 0, 1)];
        assert_eq!(select_best_forward_edge(&q, 5000), 0);
    }

    #[test]
    fn comparable_effort_prefers_direction() {
        let q = [entry(1.0, 100, 40, 0), entry(1.0, 120, 10, 1)];
        assert_eq!(select_best_forward_edge(&q, 5000), 1);
    }

    #[test]
    fn lower_bound_dominates() {
        let q = [
            entry(1.0, 100, 40, 0),
            entry(0.9, 9000, 900, 1),
            entry(0.9, 8000, 1000, 2),
        ];
        assert_eq!(select_best_forward_edge(&q, 5000), 1);
        assert_eq!(select_best_forward_edge(&q, 10), 2);
    }

    #[test]
    fn heap_pops_smallest_key() {
        let mut h = std::collections::BinaryHeap::new();
        h.push(entry(2.0, 0, 0, 0));
        h.push(entry(1.0, 5, 0, 1));
        h.push(entry(1.0, 3, 0, 2));
        assert_eq!(h.pop().unwrap().seq, 2);
        assert_eq!(h.pop().unwrap().seq, 1);
        assert_eq!(h.pop().unwrap().seq, 0);
    }
}
