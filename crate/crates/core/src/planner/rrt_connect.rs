//! Bidirectional RRT-Connect baseline. Stops at the first solution.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{Budget, Clock, PlannerConfig, SolutionRecord};
use crate::error::{PlanError, Result};
use crate::space::{euclidean, sample_uniform, StateVec};
use crate::world::{check_motion, is_path_valid, Environment, MotionCheck};

const GOAL_BIAS: f64 = 0.05;

/// Longest edge added in one extension step.
pub fn max_edge_length(dim: usize) -> f64 {
    match dim {
        0..=4 => 0.5,
        5..=8 => 1.25,
        _ => 3.0,
    }
}

struct Tree {
    dim: usize,
    coords: Vec<f64>,
    parent: Vec<usize>,
}

impl Tree {
    fn new(root: &[f64]) -> Self {
        Tree {
            dim: root.len(),
            coords: root.to_vec(),
            parent: vec![usize::MAX],
        }
    }

    fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    fn len(&self) -> usize {
        self.parent.len()
    }

    fn nearest(&self, x: &[f64]) -> usize {
        (0..self.len())
            .min_by(|&a, &b| euclidean(self.point(a), x).total_cmp(&euclidean(self.point(b), x)))
            .expect("tree has a root")
    }

    fn push(&mut self, x: &[f64], parent: usize) -> usize {
        self.coords.extend_from_slice(x);
        self.parent.push(parent);
        self.len() - 1
    }

    fn branch(&self, mut i: usize) -> Vec<Vec<f64>> {
        let mut out = vec![self.point(i).to_vec()];
        while self.parent[i] != usize::MAX {
            i = self.parent[i];
            out.push(self.point(i).to_vec());
        }
        out
    }
}

enum Extend {
    Trapped,
    Advanced(usize),
    Reached(usize),
}

fn extend(env: &Environment, cfg: &PlannerConfig, tree: &mut Tree, x: &[f64], step: f64) -> Extend {
    let near = tree.nearest(x);
    let from = tree.point(near).to_vec();
    let d = euclidean(&from, x);
    let (to, reached) = if d <= step {
        (x.to_vec(), true)
    } else {
        let s = step / d;
        (
            from.iter().zip(x).map(|(a, b)| a + (b - a) * s).collect(),
            false,
        )
    };
    if !env.is_valid(&to)
        || check_motion(env, &from, &to, &cfg.motion, u64::MAX) != MotionCheck::Valid
    {
        return Extend::Trapped;
    }
    let id = tree.push(&to, near);
    if reached {
        Extend::Reached(id)
    } else {
        Extend::Advanced(id)
    }
}

fn path_cost(path: &[StateVec]) -> f64 {
    path.windows(2)
        .map(|w| euclidean(w[0].coords(), w[1].coords()))
        .sum()
}

/// Runs RRT-Connect until the first valid solution or the budget runs out.
pub fn rrt_connect(
    env: &Environment,
    cfg: &PlannerConfig,
    budget: &Budget,
) -> Result<Vec<SolutionRecord>> {
    cfg.motion.validate()?;
    budget.validate()?;
    if !env.is_valid(env.start().coords()) {
        return Err(PlanError::InvalidStart);
    }
    if !env.is_valid(env.goal().coords()) {
        return Err(PlanError::InvalidGoal);
    }
    let dim = env.dim();
    let step = max_edge_length(dim);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut clock = Clock::start(budget.clock);
    let mut a = Tree::new(env.start().coords());
    let mut b = Tree::new(env.goal().coords());
    // true while `a` is rooted at the start
    let mut a_is_start = true;
    let mut samples = 2;

    while clock.elapsed() < budget.seconds && budget.max_samples.is_none_or(|m| samples < m) {
        clock.tick();
        samples += 1;
        let x = if rng.random::<f64>() < GOAL_BIAS {
            b.point(0).to_vec()
        } else {
            sample_uniform(dim, &mut rng).into_inner()
        };
        let new = match extend(env, cfg, &mut a, &x, step) {
            Extend::Trapped => None,
            Extend::Advanced(i) | Extend::Reached(i) => Some(i),
        };
        if let Some(i) = new {
            let target = a.point(i).to_vec();
            loop {
                match extend(env, cfg, &mut b, &target, step) {
                    Extend::Trapped => break,
                    Extend::Advanced(_) => continue,
                    Extend::Reached(j) => {
                        let (mut from_start, from_goal) = if a_is_start {
                            (a.branch(i), b.branch(j))
                        } else {
                            (b.branch(j), a.branch(i))
                        };
                        from_start.reverse();
                        // the meeting state appears at the end of both branches
                        from_start.extend(from_goal.into_iter().skip(1));
                        let path: Vec<StateVec> = from_start
                            .into_iter()
                            .map(StateVec::from_vec_unchecked)
                            .collect();
                        if is_path_valid(env, &path, &cfg.motion.fine()) {
                            return Ok(vec![SolutionRecord {
                                t: clock.elapsed(),
                                cost: path_cost(&path),
                                path,
                            }]);
                        }
                        break;
                    }
                }
            }
        }
        std::mem::swap(&mut a, &mut b);
        a_is_start = !a_is_start;
    }
    Ok(Vec::new())
}
