use dit_core::direction::{
    calc_dir_cost, general_vec, wgt_cos_sim, DirectionConfig, DirectionFilter, FilterMode, GenVec,
    SimilarityIndex,
};
use proptest::prelude::*;

const NEIGHBORS: usize = 6;

/// Random orthonormal matrix by Gram-Schmidt over a random square matrix.
fn orthonormal(raw: &[f64], n: usize) -> Option<Vec<Vec<f64>>> {
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut v = raw[i * n..(i + 1) * n].to_vec();
        for r in &rows {
            let d: f64 = v.iter().zip(r).map(|(a, b)| a * b).sum();
            for (x, y) in v.iter_mut().zip(r) {
                *x -= d * y;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-3 {
            return None;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        rows.push(v);
    }
    Some(rows)
}

fn apply(m: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    m.iter()
        .map(|r| r.iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}

struct Scene {
    last: Vec<f64>,
    source: Vec<f64>,
    goal: Vec<f64>,
    neighbors: Vec<Vec<f64>>,
}

impl Scene {
    fn map(&self, f: impl Fn(&[f64]) -> Vec<f64>) -> Scene {
        Scene {
            last: f(&self.last),
            source: f(&self.source),
            goal: f(&self.goal),
            neighbors: self.neighbors.iter().map(|x| f(x)).collect(),
        }
    }

    /// Per-neighbour (keep, ticks, raw check similarity, raw target similarity).
    fn verdicts(&self, cfg: &DirectionConfig) -> Vec<(bool, u64, f64, f64)> {
        let f = DirectionFilter::new(Some(&self.last), &self.source, &self.goal, cfg);
        let goal = general_vec(&self.last, &self.goal).unwrap();
        let target = general_vec(&self.last, &self.source).unwrap();
        let raw_t = wgt_cos_sim(&target, &goal, cfg).map_or(f64::NAN, |s| s.raw);
        self.neighbors
            .iter()
            .map(|x| {
                let v = f.evaluate(x);
                assert_eq!(v.keep, f.admits(x));
                let check = general_vec(&self.source, x).unwrap();
                let raw_c = wgt_cos_sim(&check, &goal, cfg).map_or(f64::NAN, |s| s.raw);
                (v.keep, v.cost.ticks(), raw_c, raw_t)
            })
            .collect()
    }
}

fn scene(dim: usize, pts: &[f64]) -> Scene {
    let p = |i: usize| pts[i * dim..(i + 1) * dim].to_vec();
    Scene {
        last: p(0),
        source: p(1),
        goal: p(2),
        neighbors: (0..NEIGHBORS).map(|i| p(3 + i)).collect(),
    }
}

/// Decisions and costs may legitimately differ under roundoff when the
/// comparison or the maximal-similarity shortcut sits on a knife edge.
fn fragile(raw_c: f64, raw_t: f64, cfg: &DirectionConfig) -> bool {
    let near = |a: f64, b: f64| (a - b).abs() < 1e-7 * (1.0 + a.abs());
    let edge = 1.0 - cfg.phi_one_tol;
    raw_c.is_nan()
        || raw_t.is_nan()
        || near(raw_c, raw_t)
        || near(raw_c.clamp(-1.0, 1.0).abs(), edge)
        || near(raw_t.clamp(-1.0, 1.0).abs(), edge)
}

fn scene_strategy() -> impl Strategy<Value = (usize, Vec<f64>)> {
    (2usize..6).prop_flat_map(|dim| {
        (
            Just(dim),
            prop::collection::vec(0.0f64..1.0, dim * (3 + NEIGHBORS)),
        )
    })
}

fn mode_strategy() -> impl Strategy<Value = FilterMode> {
    prop_oneof![Just(FilterMode::ConeKeep), Just(FilterMode::PaperLiteral)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn rotation_invariance((dim, pts) in scene_strategy(), raw in prop::collection::vec(-1.0f64..1.0, 36), mode in mode_strategy()) {
        let cfg = DirectionConfig { filter_mode: mode, ..DirectionConfig::default() };
        let Some(m) = orthonormal(&raw, dim) else { return Ok(()); };
        let base = scene(dim, &pts);
        let rotated = base.map(|x| apply(&m, x));
        for (a, b) in base.verdicts(&cfg).into_iter().zip(rotated.verdicts(&cfg)) {
            if fragile(a.2, a.3, &cfg) {
                continue;
            }
            prop_assert_eq!(a.0, b.0);
            prop_assert!(a.1.abs_diff(b.1) <= 1, "{} vs {}", a.1, b.1);
        }
    }

    #[test]
    fn translation_and_scale((dim, pts) in scene_strategy(), shift in -3.0f64..3.0, k in 2.0f64..10.0, mode in mode_strategy()) {
        let cfg = DirectionConfig { filter_mode: mode, ..DirectionConfig::default() };
        let base = scene(dim, &pts);
        let moved = base.map(|x| x.iter().map(|c| c + shift).collect());
        let scaled = base.map(|x| x.iter().map(|c| c * k).collect());
        let b = base.verdicts(&cfg);
        for ((a, t), s) in b.iter().zip(moved.verdicts(&cfg)).zip(scaled.verdicts(&cfg)) {
            if fragile(a.2, a.3, &cfg) {
                continue;
            }
            prop_assert_eq!(a.0, t.0);
            prop_assert!(a.1.abs_diff(t.1) <= 1);
            // decisions ignore scale, costs grow with it
            prop_assert_eq!(a.0, s.0);
            let lo = (k * a.1 as f64).floor() as u64;
            let hi = (k * (a.1 + 1) as f64).ceil() as u64;
            prop_assert!(s.1 + 1 >= lo && s.1 <= hi + 1, "ticks {} scaled by {k} gave {}", a.1, s.1);
        }
    }

    #[test]
    fn weight_scaling_preserves_decisions((dim, pts) in scene_strategy(), c in 0.2f64..1.5) {
        let cfg = DirectionConfig::default();
        let scaled = DirectionConfig { omega1: cfg.omega1 * c, ..cfg };
        let s = scene(dim, &pts);
        for (a, b) in s.verdicts(&cfg).into_iter().zip(s.verdicts(&scaled)) {
            if fragile(a.2, a.3, &cfg) {
                continue;
            }
            prop_assert!((b.2 * c - a.2).abs() <= 1e-9 * a.2.abs().max(1.0));
            prop_assert!((b.3 * c - a.3).abs() <= 1e-9 * a.3.abs().max(1.0));
            prop_assert_eq!(a.0, b.0);
        }
    }

    #[test]
    fn similarity_swap_symmetry(
        v1 in prop::collection::vec(-1.0f64..1.0, 4),
        v2 in prop::collection::vec(-1.0f64..1.0, 4),
        w1 in 0.1f64..1.0,
        w2 in 0.1f64..1.0,
    ) {
        let a = GenVec::from_components(v1);
        let b = GenVec::from_components(v2);
        prop_assume!(a.norm() > 1e-3 && b.norm() > 1e-3);
        let cfg = DirectionConfig { omega1: w1, omega2: w2, ..DirectionConfig::default() };
        let swapped = DirectionConfig { omega1: w2, omega2: w1, ..cfg };
        let ab = wgt_cos_sim(&a, &b, &cfg).unwrap().raw;
        let ba = wgt_cos_sim(&b, &a, &swapped).unwrap().raw;
        prop_assert!((ab - ba).abs() <= 1e-12 * ab.abs().max(1.0), "{ab} vs {ba}");
    }

    #[test]
    fn dir_cost_monotone(
        pc in -0.99f64..0.99,
        pt in -0.99f64..0.99,
        nc in 0.0f64..2.0,
        nt in 0.0f64..2.0,
        d in 0.0f64..0.5,
    ) {
        let cfg = DirectionConfig::default();
        let cost = |pc: f64, pt: f64, nc: f64, nt: f64| {
            calc_dir_cost(SimilarityIndex::from_raw(pc), SimilarityIndex::from_raw(pt), nc, nt, &cfg).ticks()
        };
        let base = cost(pc, pt, nc, nt);
        prop_assert!(cost(pc, pt, nc + d, nt) >= base);
        prop_assert!(cost(pc, pt, nc, nt + d) >= base);
        let up = |p: f64| (p + d).min(0.99);
        prop_assert!(cost(up(pc), pt, nc, nt) >= base);
        prop_assert!(cost(pc, up(pt), nc, nt) >= base);
    }
}

#[test]
fn empty_neighbor_set() {
    let (kept, costs) = dit_core::direction::filter_neighbors(
        &[0.1, 0.1],
        &[0.2, 0.2],
        &[0.9, 0.9],
        &[],
        &DirectionConfig::default(),
    );
    assert!(kept.is_empty() && costs.is_empty());
}
