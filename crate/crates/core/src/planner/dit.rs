//! Batch-sampled asymmetric bidirectional search with direction-informed
//! forward expansion.
//!
//! Each batch grows an implicit random geometric graph over the current
//! samples. A goal-rooted reverse search computes cost and effort to go over
//! that graph without full collision checks (edges are only probed at a few
//! interpolated states, and edges the forward search proved invalid are
//! skipped). The start-rooted forward search orders candidate edges by the
//! resulting lower bound, fully validates the edge it processes and feeds
//! invalid edges back into the reverse search.

use std::collections::BinaryHeap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashSet;
use serde::Serialize;

use super::config::{Budget, Clock, ClockKind, Mode, PlannerConfig, SolutionRecord};
use super::queue::{select_best_forward_edge, ForwardEntry, ReverseEntry};
use crate::direction::DirectionFilter;
use crate::error::{PlanError, Result};
use crate::heuristics::{reverse_key, ForwardKey, ReverseEdgeTerms};
use crate::nn::KdTree;
use crate::space::{
    connection_radius, euclidean, lebesgue_informed, sample_informed, sample_uniform, InformedSet,
    StateVec,
};
use crate::world::{check_motion, effort_estimate, is_path_valid, Environment, MotionCheck};

pub const START: u32 = 0;
pub const GOAL: u32 = 1;
const NONE: u32 = u32::MAX;

/// Draws allowed per requested sample before a batch is cut short.
const SAMPLE_ATTEMPTS_PER_STATE: usize = 1000;

/// Counters collected over one query.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct PlannerStats {
    pub batches: usize,
    pub samples_added: usize,
    pub pruned: usize,
    pub iterations: u64,
    pub reverse_pops: u64,
    pub forward_pops: u64,
    pub full_edge_checks: u64,
    pub sparse_edge_checks: u64,
    pub invalid_edges: u64,
    pub filtered_neighbors: u64,
    pub released_neighbors: u64,
    pub reverse_restarts: u64,
    pub informed_fallbacks: u64,
}

/// Bookkeeping captured when a solution is emitted.
#[derive(Clone, Debug, PartialEq)]
pub struct Emission {
    pub batch: usize,
    pub cost: f64,
    /// Smallest forward lower bound (`k1`) among the processed edge and the
    /// queue at emission time.
    pub min_k1: f64,
    /// Sample ids along the solution, start first.
    pub path_ids: Vec<u32>,
}

/// One processed forward edge, logged when [`DitPlanner::log_pops`] is on.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PopRecord {
    pub batch: usize,
    pub source: u32,
    pub target: u32,
    pub k1: f64,
    pub g_source: f64,
}

/// Distance from `a` to `b` if it is at most `r`.
#[inline]
fn within_radius(a: &[f64], b: &[f64], r: f64) -> Option<f64> {
    let r2 = r * r;
    let mut d2 = 0.0;
    for (x, y) in a.iter().zip(b) {
        d2 += (x - y) * (x - y);
        if d2 > r2 {
            return None;
        }
    }
    Some(d2.sqrt())
}

#[inline]
fn edge_id(a: u32, b: u32) -> u64 {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    ((lo as u64) << 32) | hi as u64
}

pub struct DitPlanner {
    env: Environment,
    cfg: PlannerConfig,
    dim: usize,
    rng: ChaCha8Rng,
    clock: Clock,

    coords: Vec<f64>,
    to_start: Vec<f64>,
    to_goal: Vec<f64>,
    pruned: Vec<bool>,
    active: Vec<u32>,
    kdtree: KdTree,
    radius: f64,
    batch_stamp: u32,
    /// Cached neighbour ids with their distances.
    nbrs: Vec<Vec<(u32, f64)>>,
    nbr_stamp: Vec<u32>,
    /// Radius and sample count a cached neighbour list was computed with.
    nbr_radius: Vec<f64>,
    nbr_upto: Vec<u32>,
    whitelist: FxHashSet<u64>,
    blacklist: FxHashSet<u64>,

    h: Vec<f64>,
    rev_effort: Vec<u64>,
    rev_parent: Vec<u32>,
    rq: BinaryHeap<ReverseEntry>,

    g: Vec<f64>,
    parent: Vec<u32>,
    children: Vec<Vec<u32>>,
    ds_f: Vec<u64>,
    dc_in: Vec<u64>,
    fq: BinaryHeap<ForwardEntry>,
    /// Filtered edges keyed by a straight-line lower bound only.
    deferred: BinaryHeap<ForwardEntry>,
    seq: u64,

    c_min: f64,
    best_cost: f64,
    batch_done: bool,
    solutions: Vec<SolutionRecord>,
    emissions: Vec<Emission>,
    pop_log: Option<Vec<PopRecord>>,
    stats: PlannerStats,
}

impl DitPlanner {
    pub fn new(env: &Environment, cfg: PlannerConfig) -> Result<Self> {
        cfg.validate(env.dim())?;
        if !env.is_valid(env.start().coords()) {
            return Err(PlanError::InvalidStart);
        }
        if !env.is_valid(env.goal().coords()) {
            return Err(PlanError::InvalidGoal);
        }
        let dim = env.dim();
        let mut p = DitPlanner {
            env: env.clone(),
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            cfg,
            dim,
            clock: Clock::start(ClockKind::Wall),
            coords: Vec::new(),
            to_start: Vec::new(),
            to_goal: Vec::new(),
            pruned: Vec::new(),
            active: Vec::new(),
            kdtree: KdTree::default(),
            radius: 0.0,
            batch_stamp: 0,
            nbrs: Vec::new(),
            nbr_stamp: Vec::new(),
            nbr_radius: Vec::new(),
            nbr_upto: Vec::new(),
            whitelist: FxHashSet::default(),
            blacklist: FxHashSet::default(),
            h: Vec::new(),
            rev_effort: Vec::new(),
            rev_parent: Vec::new(),
            rq: BinaryHeap::new(),
            g: Vec::new(),
            parent: Vec::new(),
            children: Vec::new(),
            ds_f: Vec::new(),
            dc_in: Vec::new(),
            fq: BinaryHeap::new(),
            deferred: BinaryHeap::new(),
            seq: 0,
            c_min: euclidean(env.start().coords(), env.goal().coords()),
            best_cost: f64::INFINITY,
            batch_done: true,
            solutions: Vec::new(),
            emissions: Vec::new(),
            pop_log: None,
            stats: PlannerStats::default(),
        };
        p.push_sample(env.start().coords());
        p.push_sample(env.goal().coords());
        Ok(p)
    }

    // ---- accessors -------------------------------------------------------

    pub fn config(&self) -> &PlannerConfig {
        &self.cfg
    }

    pub fn environment(&self) -> &Environment {
        &self.env
    }

    pub fn stats(&self) -> &PlannerStats {
        &self.stats
    }

    pub fn solutions(&self) -> &[SolutionRecord] {
        &self.solutions
    }

    pub fn emissions(&self) -> &[Emission] {
        &self.emissions
    }

    /// Starts recording every processed forward edge.
    pub fn log_pops(&mut self) {
        self.pop_log.get_or_insert_with(Vec::new);
    }

    pub fn pop_log(&self) -> &[PopRecord] {
        self.pop_log.as_deref().unwrap_or(&[])
    }

    pub fn best_cost(&self) -> f64 {
        self.best_cost
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Ids of the samples in the current graph, start and goal included.
    pub fn active_ids(&self) -> &[u32] {
        &self.active
    }

    pub fn sample_count(&self) -> usize {
        self.active.len()
    }

    pub fn point(&self, id: u32) -> &[f64] {
        let s = id as usize * self.dim;
        &self.coords[s..s + self.dim]
    }

    pub fn state(&self, id: u32) -> StateVec {
        StateVec::from_vec_unchecked(self.point(id).to_vec())
    }

    /// Reverse-search cost-to-go (`+inf` if unreached).
    pub fn h_hat(&self, id: u32) -> f64 {
        self.h[id as usize]
    }

    /// Forward cost-to-come (`+inf` if unreached).
    pub fn g(&self, id: u32) -> f64 {
        self.g[id as usize]
    }

    pub fn forward_parent(&self, id: u32) -> Option<u32> {
        let p = self.parent[id as usize];
        (p != NONE).then_some(p)
    }

    pub fn direction_cost_to_come(&self, id: u32) -> Option<u64> {
        self.g[id as usize]
            .is_finite()
            .then(|| self.ds_f[id as usize])
    }

    pub fn is_blacklisted(&self, a: u32, b: u32) -> bool {
        self.blacklist.contains(&edge_id(a, b))
    }

    pub fn reverse_queue_len(&self) -> usize {
        self.rq.len()
    }

    pub fn forward_queue_len(&self) -> usize {
        self.fq.len()
    }

    /// Whether every edge of the current batch has been considered.
    pub fn batch_exhausted(&self) -> bool {
        self.batch_done
    }

    /// Forward tree edges as `(parent, child)` id pairs.
    pub fn forward_edges(&self) -> Vec<(u32, u32)> {
        (0..self.g.len() as u32)
            .filter_map(|v| self.forward_parent(v).map(|p| (p, v)))
            .collect()
    }

    /// Reverse tree edges as `(parent, child)` id pairs, parent nearer the goal.
    pub fn reverse_edges(&self) -> Vec<(u32, u32)> {
        (0..self.h.len() as u32)
            .filter(|&v| self.rev_parent[v as usize] != NONE && self.h[v as usize].is_finite())
            .map(|v| (self.rev_parent[v as usize], v))
            .collect()
    }

    /// Neighbour ids of `v` in the current graph.
    pub fn neighbor_ids(&mut self, v: u32) -> Vec<u32> {
        self.ensure_neighbors(v);
        self.nbrs[v as usize].iter().map(|&(u, _)| u).collect()
    }

    // ---- samples and graph ---------------------------------------------

    fn push_sample(&mut self, x: &[f64]) -> u32 {
        let id = self.to_start.len() as u32;
        self.coords.extend_from_slice(x);
        self.to_start.push(euclidean(x, self.env.start().coords()));
        self.to_goal.push(euclidean(x, self.env.goal().coords()));
        self.pruned.push(false);
        self.active.push(id);
        self.nbrs.push(Vec::new());
        self.nbr_stamp.push(0);
        self.nbr_radius.push(0.0);
        self.nbr_upto.push(0);
        self.h.push(f64::INFINITY);
        self.rev_effort.push(0);
        self.rev_parent.push(NONE);
        self.g.push(f64::INFINITY);
        self.parent.push(NONE);
        self.children.push(Vec::new());
        self.ds_f.push(0);
        self.dc_in.push(0);
        id
    }

    #[inline]
    fn dist(&self, a: u32, b: u32) -> f64 {
        euclidean(self.point(a), self.point(b))
    }

    fn ensure_neighbors(&mut self, v: u32) {
        let vi = v as usize;
        if self.nbr_stamp[vi] == self.batch_stamp {
            return;
        }
        let mut out = std::mem::take(&mut self.nbrs[vi]);
        let total = self.to_start.len() as u32;
        let r = self.radius;
        let x = self.point(v);
        if self.nbr_stamp[vi] != 0 && self.nbr_radius[vi] >= r {
            // The radius shrank: filter the cached list and scan only the
            // samples added since it was built.
            let upto = self.nbr_upto[vi];
            out.retain(|&(u, d)| d <= r && !self.pruned[u as usize]);
            for u in upto..total {
                if !self.pruned[u as usize] {
                    if let Some(d) = within_radius(x, self.point(u), r) {
                        out.push((u, d));
                    }
                }
            }
        } else {
            let mut ids = Vec::new();
            self.kdtree.within(&self.coords, x, r, &mut ids);
            ids.sort_unstable();
            out.clear();
            out.extend(
                ids.into_iter()
                    .filter(|&u| u != v)
                    .map(|u| (u, euclidean(x, self.point(u)))),
            );
        }
        self.nbr_radius[vi] = r;
        self.nbr_upto[vi] = total;
        self.nbrs[vi] = out;
        self.nbr_stamp[vi] = self.batch_stamp;
    }

    #[inline]
    fn edge_effort(&self, a: u32, b: u32) -> u64 {
        if self.whitelist.contains(&edge_id(a, b)) {
            0
        } else {
            effort_estimate(self.point(a), self.point(b), &self.cfg.motion)
        }
    }

    fn informed_set(&self) -> InformedSet {
        InformedSet::new(
            self.env.start().clone(),
            self.env.goal().clone(),
            self.best_cost.max(self.c_min),
        )
        .expect("start and goal share a dimension")
    }

    /// Prunes samples that cannot improve the incumbent, adds a batch of
    /// valid samples, refreshes the connection radius and restarts both
    /// searches.
    pub fn improve_approximation(&mut self) {
        self.stats.batches += 1;
        if self.best_cost.is_finite() {
            let best = self.best_cost;
            let mut removed = 0;
            for &id in &self.active {
                if id > GOAL && self.to_start[id as usize] + self.to_goal[id as usize] > best {
                    self.pruned[id as usize] = true;
                    removed += 1;
                }
            }
            let pruned = &self.pruned;
            self.active.retain(|&id| !pruned[id as usize]);
            self.stats.pruned += removed;
        }

        let informed = self.best_cost.is_finite().then(|| self.informed_set());
        let mut added = 0;
        let mut attempts = 0;
        while added < self.cfg.batch_size
            && attempts < SAMPLE_ATTEMPTS_PER_STATE * self.cfg.batch_size
        {
            attempts += 1;
            let x = match &informed {
                Some(set) => match sample_informed(set, &mut self.rng) {
                    Ok(x) => x,
                    Err(_) => {
                        self.stats.informed_fallbacks += 1;
                        sample_uniform(self.dim, &mut self.rng)
                    }
                },
                None => sample_uniform(self.dim, &mut self.rng),
            };
            if self.env.is_valid(x.coords()) {
                self.push_sample(x.coords());
                added += 1;
            }
        }
        self.stats.samples_added += added;

        self.kdtree = KdTree::build(&self.coords, self.dim, self.active.clone());
        let lambda = informed
            .as_ref()
            .map_or(1.0, lebesgue_informed)
            .max(f64::MIN_POSITIVE);
        self.radius = connection_radius(self.active.len().max(2), &self.cfg.rgg, lambda)
            .expect("sample count and measure are positive");
        self.batch_stamp += 1;
        self.reset_reverse();
        self.reset_forward();
        self.batch_done = false;
    }

    // ---- reverse search -------------------------------------------------

    fn reset_reverse(&mut self) {
        self.h.fill(f64::INFINITY);
        self.rev_parent.fill(NONE);
        self.rev_effort.fill(0);
        self.rq.clear();
        self.h[GOAL as usize] = 0.0;
        self.expand_reverse(GOAL);
    }

    fn expand_reverse(&mut self, v: u32) {
        self.ensure_neighbors(v);
        let nbrs = std::mem::take(&mut self.nbrs[v as usize]);
        let vi = v as usize;
        let hv = self.h[vi];
        let rp = self.rev_parent[vi];
        let source = self.point(v).to_vec();
        let last = (rp != NONE).then(|| self.point(rp));
        let filter = DirectionFilter::new(
            last,
            &source,
            self.env.start().coords(),
            &self.cfg.direction,
        );
        for &(u, c) in &nbrs {
            if u == rp {
                continue;
            }
            let nh = hv + c;
            if nh >= self.h[u as usize] {
                continue;
            }
            let g_hat = self.to_start[u as usize];
            if nh + g_hat > self.best_cost {
                continue;
            }
            if self.blacklist.contains(&edge_id(v, u)) {
                continue;
            }
            let direction = filter.evaluate(self.point(u)).cost;
            let key = reverse_key(&ReverseEdgeTerms {
                h_hat_source: hv,
                edge_cost: c,
                g_hat_target: g_hat,
                e_bar_source: self.rev_effort[vi],
                edge_effort: self.edge_effort(v, u),
                effort_to_start_target: effort_estimate(
                    self.point(u),
                    self.env.start().coords(),
                    &self.cfg.motion,
                ),
                ds_hat_source: 0,
                edge_direction: direction,
            });
            self.rq.push(ReverseEntry {
                key,
                source: v,
                target: u,
                h_source: hv,
            });
        }
        self.nbrs[v as usize] = nbrs;
    }

    /// Pops one reverse edge and relaxes its target. Returns false when the
    /// reverse queue is empty.
    pub fn reverse_iterate(&mut self) -> bool {
        let Some(e) = self.rq.pop() else {
            return false;
        };
        self.stats.reverse_pops += 1;
        self.clock.tick();
        let (s, t) = (e.source, e.target);
        if e.h_source != self.h[s as usize] {
            return true;
        }
        let nh = self.h[s as usize] + self.dist(s, t);
        if nh >= self.h[t as usize] {
            return true;
        }
        let id = edge_id(s, t);
        if self.blacklist.contains(&id) {
            return true;
        }
        if !self.whitelist.contains(&id) {
            self.stats.sparse_edge_checks += 1;
            match check_motion(
                &self.env,
                self.point(s),
                self.point(t),
                &self.cfg.motion,
                self.cfg.reverse_sparse_checks,
            ) {
                MotionCheck::Invalid => {
                    self.blacklist.insert(id);
                    self.stats.invalid_edges += 1;
                    return true;
                }
                MotionCheck::Valid => {
                    self.whitelist.insert(id);
                }
                MotionCheck::Unknown => {}
            }
        }
        let ti = t as usize;
        self.h[ti] = nh;
        self.rev_parent[ti] = s;
        self.rev_effort[ti] = self.rev_effort[s as usize] + self.edge_effort(s, t);
        self.expand_reverse(t);
        true
    }

    fn is_settled(&self, v: u32) -> bool {
        let hv = self.h[v as usize];
        match self.rq.peek() {
            None => true,
            Some(_) if hv.is_infinite() => false,
            Some(e) => e.key.k1 >= hv + self.to_start[v as usize],
        }
    }

    /// Runs the reverse search until `v`'s cost-to-go is final.
    fn settle(&mut self, v: u32) {
        while !self.is_settled(v) {
            self.reverse_iterate();
        }
    }

    /// Runs the reverse search until its queue is empty.
    pub fn run_reverse_to_exhaustion(&mut self) {
        while self.reverse_iterate() {}
    }

    /// Admissible cost-to-go used by forward keys: the reverse value once
    /// final, the straight-line distance before.
    fn h_for(&self, v: u32) -> f64 {
        if self.is_settled(v) {
            self.h[v as usize]
        } else {
            self.to_goal[v as usize]
        }
    }

    fn effort_to_go(&self, v: u32) -> u64 {
        if self.h[v as usize].is_finite() && self.is_settled(v) {
            self.rev_effort[v as usize]
        } else {
            effort_estimate(self.point(v), self.env.goal().coords(), &self.cfg.motion)
        }
    }

    // ---- forward search -------------------------------------------------

    fn reset_forward(&mut self) {
        self.g.fill(f64::INFINITY);
        self.parent.fill(NONE);
        for c in &mut self.children {
            c.clear();
        }
        self.ds_f.fill(0);
        self.dc_in.fill(0);
        self.fq.clear();
        self.deferred.clear();
        self.g[START as usize] = 0.0;
        self.expand_forward_vertex(START);
    }

    /// Direction cost to go of `t` if it were reached from `s`.
    fn dg_bar(&self, s: u32, t: u32) -> u64 {
        let goal = self.env.goal().coords();
        DirectionFilter::new(
            Some(self.point(s)),
            self.point(t),
            goal,
            &self.cfg.direction,
        )
        .evaluate(goal)
        .cost
        .ticks()
    }

    /// Forward key with `k4` left at zero; direction totals only matter
    /// inside a tie band and are filled in by [`Self::next_forward_edge`].
    fn forward_key(&self, s: u32, t: u32) -> ForwardKey {
        let k1 = self.g[s as usize] + self.dist(s, t) + self.h_for(t);
        ForwardKey {
            k1,
            k2: k1,
            k3: self.edge_effort(s, t) + self.effort_to_go(t),
            k4: 0,
        }
    }

    /// Direction cost of the edge `s -> t` given `s`'s current parent.
    fn edge_direction(&self, s: u32, t: u32) -> u64 {
        if self.cfg.mode == Mode::Eit {
            return 0;
        }
        let last = self.forward_parent(s).map(|p| self.point(p));
        DirectionFilter::new(
            last,
            self.point(s),
            self.env.goal().coords(),
            &self.cfg.direction,
        )
        .evaluate(self.point(t))
        .cost
        .ticks()
    }

    fn direction_total(&self, e: &ForwardEntry) -> u64 {
        self.ds_f[e.source as usize]
            + self.edge_direction(e.source, e.target)
            + self.dg_bar(e.source, e.target)
    }

    /// Queues the outgoing edges of a forward-tree vertex. In direction mode
    /// neighbours rejected by the direction filter are held back and only
    /// released once the queue has nothing better to offer.
    pub fn expand_forward_vertex(&mut self, v: u32) {
        self.ensure_neighbors(v);
        let nbrs = std::mem::take(&mut self.nbrs[v as usize]);
        let vi = v as usize;
        let gv = self.g[vi];
        let pv = self.parent[vi];
        let source = self.point(v).to_vec();
        let filter = (self.cfg.mode == Mode::Dit && pv != NONE).then(|| {
            DirectionFilter::new(
                Some(self.point(pv)),
                &source,
                self.env.goal().coords(),
                &self.cfg.direction,
            )
        });
        for &(u, c) in &nbrs {
            if u == pv {
                continue;
            }
            let ng = gv + c;
            if ng >= self.g[u as usize] || ng + self.to_goal[u as usize] >= self.best_cost {
                continue;
            }
            if self.blacklist.contains(&edge_id(v, u)) {
                continue;
            }
            let keep = filter.as_ref().is_none_or(|f| f.admits(self.point(u)));
            self.seq += 1;
            let key = if keep {
                self.forward_key(v, u)
            } else {
                let k1 = ng + self.to_goal[u as usize];
                ForwardKey {
                    k1,
                    k2: k1,
                    k3: 0,
                    k4: 0,
                }
            };
            let entry = ForwardEntry {
                key,
                source: v,
                target: u,
                g_source: gv,
                seq: self.seq,
            };
            if keep {
                self.fq.push(entry);
            } else {
                self.stats.filtered_neighbors += 1;
                self.deferred.push(entry);
            }
        }
        self.nbrs[v as usize] = nbrs;
    }

    fn can_improve(&self, e: &ForwardEntry) -> bool {
        let (s, t) = (e.source as usize, e.target as usize);
        if e.g_source != self.g[s] {
            return false;
        }
        let ng = self.g[s] + self.dist(e.source, e.target);
        ng < self.g[t] && ng + self.to_goal[t] < self.best_cost
    }

    /// Moves held-back edges whose lower bound is at most `limit` into the
    /// forward queue. Returns whether any edge was queued.
    fn release_deferred(&mut self, limit: f64) -> bool {
        let mut any = false;
        while let Some(d) = self.deferred.peek() {
            if d.key.k1 > limit {
                break;
            }
            let mut e = self.deferred.pop().expect("peeked");
            if !self.can_improve(&e) {
                continue;
            }
            e.key = self.forward_key(e.source, e.target);
            self.fq.push(e);
            self.stats.released_neighbors += 1;
            any = true;
        }
        any
    }

    /// Pops the next forward entry that is current, settled and able to
    /// improve the tree, and whose key is no larger than any held-back
    /// edge's bound. Stale entries are dropped or re-queued.
    fn pop_current(&mut self) -> Option<ForwardEntry> {
        loop {
            let top = match self.fq.pop() {
                Some(e) if e.key.k1 < self.best_cost => e,
                _ => {
                    self.fq.clear();
                    if self.release_deferred(f64::INFINITY) {
                        continue;
                    }
                    return None;
                }
            };
            if !self.can_improve(&top) {
                continue;
            }
            self.settle(top.target);
            let key = self.forward_key(top.source, top.target);
            if !(key.k1 < self.best_cost) {
                continue;
            }
            let rekeyed = ForwardEntry { key, ..top };
            if key.lex_cmp(&top.key) == std::cmp::Ordering::Greater {
                self.fq.push(rekeyed);
                continue;
            }
            if self.deferred.peek().is_some_and(|d| d.key.k1 <= key.k1) {
                self.fq.push(rekeyed);
                self.release_deferred(key.k1);
                continue;
            }
            return Some(rekeyed);
        }
    }

    /// Chooses the forward edge to process next, or `None` when the batch
    /// cannot improve the tree any further.
    fn next_forward_edge(&mut self) -> Option<ForwardEntry> {
        let first = self.pop_current()?;
        if self.cfg.mode == Mode::Eit {
            return Some(first);
        }
        let mut band = vec![first];
        while let Some(peek) = self.fq.peek() {
            if !peek.key.same_band(&first.key) {
                break;
            }
            let e = self.fq.pop().expect("peeked");
            if !self.can_improve(&e) {
                continue;
            }
            self.settle(e.target);
            let key = self.forward_key(e.source, e.target);
            if key.same_band(&first.key) {
                band.push(ForwardEntry { key, ..e });
            } else if key.k1 < self.best_cost {
                self.fq.push(ForwardEntry { key, ..e });
            }
        }
        if band.len() > 1 {
            for e in band.iter_mut() {
                e.key.k4 = self.direction_total(e);
            }
        }
        let chosen = select_best_forward_edge(&band, self.cfg.mu);
        let pick = band.swap_remove(chosen);
        self.fq.extend(band);
        Some(pick)
    }

    /// Processes one forward edge. Returns the solution it produced, if any.
    pub fn forward_iterate(&mut self) -> Option<SolutionRecord> {
        let e = self.next_forward_edge()?;
        self.stats.forward_pops += 1;
        if let Some(log) = &mut self.pop_log {
            log.push(PopRecord {
                batch: self.stats.batches,
                source: e.source,
                target: e.target,
                k1: e.key.k1,
                g_source: e.g_source,
            });
        }
        self.clock.tick();
        let (s, t) = (e.source, e.target);
        let id = edge_id(s, t);
        let valid = if self.whitelist.contains(&id) {
            true
        } else if self.blacklist.contains(&id) {
            false
        } else {
            self.stats.full_edge_checks += 1;
            let ok = check_motion(
                &self.env,
                self.point(s),
                self.point(t),
                &self.cfg.motion,
                u64::MAX,
            ) == MotionCheck::Valid;
            if ok {
                self.whitelist.insert(id);
            } else {
                self.blacklist.insert(id);
            }
            ok
        };
        if !valid {
            self.stats.invalid_edges += 1;
            if self.rev_parent[s as usize] == t || self.rev_parent[t as usize] == s {
                self.stats.reverse_restarts += 1;
                self.reset_reverse();
            }
            return None;
        }
        let ng = self.g[s as usize] + self.dist(s, t);
        if ng >= self.g[t as usize] {
            return None;
        }
        let direction = self.edge_direction(s, t);
        let updated = self.attach(s, t, ng, direction);
        for v in updated {
            self.expand_forward_vertex(v);
        }
        if self.g[GOAL as usize] < self.best_cost {
            return self.emit(e.key.k1);
        }
        None
    }

    /// Makes `s` the parent of `t` and propagates the new cost-to-come to
    /// the subtree. Returns every vertex whose cost changed, `t` first.
    fn attach(&mut self, s: u32, t: u32, g: f64, direction: u64) -> Vec<u32> {
        let ti = t as usize;
        let old = self.parent[ti];
        if old != NONE {
            self.children[old as usize].retain(|&c| c != t);
        }
        self.parent[ti] = s;
        self.children[s as usize].push(t);
        self.g[ti] = g;
        self.dc_in[ti] = direction;
        self.ds_f[ti] = self.ds_f[s as usize] + direction;
        let mut updated = vec![t];
        let mut i = 0;
        while i < updated.len() {
            let v = updated[i];
            i += 1;
            let kids = self.children[v as usize].clone();
            for c in kids {
                let ci = c as usize;
                self.g[ci] = self.g[v as usize] + self.dist(v, c);
                self.ds_f[ci] = self.ds_f[v as usize] + self.dc_in[ci];
                updated.push(c);
            }
        }
        updated
    }

    fn path_to(&self, v: u32) -> Vec<u32> {
        let mut ids = vec![v];
        let mut cur = v;
        while let Some(p) = self.forward_parent(cur) {
            ids.push(p);
            cur = p;
        }
        ids.reverse();
        ids
    }

    fn emit(&mut self, processed_k1: f64) -> Option<SolutionRecord> {
        let ids = self.path_to(GOAL);
        let path: Vec<StateVec> = ids.iter().map(|&i| self.state(i)).collect();
        if !is_path_valid(&self.env, &path, &self.cfg.motion.fine()) {
            // A segment clipped an obstacle between coarse interpolation
            // states. Drop the offending edges and redo this batch's search.
            let fine = self.cfg.motion.fine();
            let mut reverse_hit = false;
            for w in ids.windows(2) {
                if check_motion(
                    &self.env,
                    self.point(w[0]),
                    self.point(w[1]),
                    &fine,
                    u64::MAX,
                ) != MotionCheck::Valid
                {
                    let id = edge_id(w[0], w[1]);
                    self.whitelist.remove(&id);
                    self.blacklist.insert(id);
                    self.stats.invalid_edges += 1;
                    reverse_hit |= self.rev_parent[w[0] as usize] == w[1]
                        || self.rev_parent[w[1] as usize] == w[0];
                }
            }
            if reverse_hit {
                self.stats.reverse_restarts += 1;
                self.reset_reverse();
            }
            self.reset_forward();
            return None;
        }
        let cost = self.g[GOAL as usize];
        let queue_min = self.fq.peek().map_or(f64::INFINITY, |e| e.key.k1);
        self.best_cost = cost;
        self.emissions.push(Emission {
            batch: self.stats.batches,
            cost,
            min_k1: processed_k1.min(queue_min),
            path_ids: ids,
        });
        let record = SolutionRecord {
            t: self.clock.elapsed(),
            cost,
            path,
        };
        self.solutions.push(record.clone());
        Some(record)
    }

    // ---- driver ---------------------------------------------------------

    fn is_provably_optimal(&self) -> bool {
        self.best_cost <= self.c_min * (1.0 + 1e-12)
    }

    /// One unit of work: a new batch, or one forward edge after bringing the
    /// reverse search up to date for the start.
    pub fn step(&mut self) -> Option<SolutionRecord> {
        self.stats.iterations += 1;
        self.clock.tick();
        if self.batch_done {
            self.improve_approximation();
            return None;
        }
        self.settle(START);
        if self.h[START as usize].is_infinite() {
            self.batch_done = true;
            return None;
        }
        if self.fq.is_empty() && self.deferred.is_empty() {
            self.batch_done = true;
            return None;
        }
        let before = self.solutions.len();
        let out = self.forward_iterate();
        if out.is_none()
            && self.solutions.len() == before
            && self.fq.is_empty()
            && self.deferred.is_empty()
        {
            self.batch_done = true;
        }
        out
    }

    /// Runs until the budget is spent and returns every solution found.
    pub fn run(&mut self, budget: &Budget) -> Vec<SolutionRecord> {
        self.clock = Clock::start(budget.clock);
        loop {
            if self.clock.elapsed() >= budget.seconds {
                break;
            }
            if budget.stop_at_first && !self.solutions.is_empty() {
                break;
            }
            if self.is_provably_optimal() {
                break;
            }
            if self.batch_done {
                if let Some(max) = budget.max_samples {
                    if 2 + self.stats.samples_added + self.cfg.batch_size > max {
                        break;
                    }
                }
            }
            self.step();
        }
        self.solutions.clone()
    }

    /// Checks the structural invariants of the forward tree.
    pub fn check_tree_consistency(&self) -> std::result::Result<(), String> {
        if self.g[START as usize] != 0.0 && self.stats.batches > 0 {
            return Err("start cost-to-come is not zero".into());
        }
        for v in 0..self.g.len() as u32 {
            let Some(p) = self.forward_parent(v) else {
                continue;
            };
            let (vi, pi) = (v as usize, p as usize);
            let expect = self.g[pi] + self.dist(p, v);
            if (self.g[vi] - expect).abs() > 1e-9 {
                return Err(format!("g[{v}] = {} but parent gives {expect}", self.g[vi]));
            }
            if self.ds_f[vi] != self.ds_f[pi] + self.dc_in[vi] {
                return Err(format!("direction cost-to-come of {v} does not telescope"));
            }
            if !self.whitelist.contains(&edge_id(p, v)) {
                return Err(format!("tree edge ({p}, {v}) was never validated"));
            }
            // walk to the root; a cycle would exceed the vertex count
            let mut cur = v;
            let mut steps = 0;
            while let Some(q) = self.forward_parent(cur) {
                cur = q;
                steps += 1;
                if steps > self.g.len() {
                    return Err(format!("cycle through {v}"));
                }
            }
            if cur != START {
                return Err(format!("vertex {v} is not rooted at the start"));
            }
        }
        Ok(())
    }
}
