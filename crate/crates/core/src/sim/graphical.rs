//! Lazy graphical construction.
//!
//! Every unordered pair `{x, y}` inside the ball with `p(|x - y|) > 0` owns a
//! Poisson clock of rate `p(|x - y|)`, drawn from a stream keyed by the pair.
//! A ring exchanges the occupancies of `x` and `y`. Exchanging two equal
//! values changes nothing, so the unlabeled configuration evolves exactly as
//! exclusion while being a pure permutation of the initial field: the value
//! at `(v, s)` is found by following rings at `v` backwards to time 0.
//!
//! The tagged particle is the only labelled object. It jumps along a ring on
//! one of its pairs iff the partner site is vacant just before the ring.
//!
//! Each vertex's incident rings split `[0, t_end)` into segments on which its
//! occupancy is constant. Segment values are memoised, so traces started
//! later stop as soon as they reach a segment already resolved.

use std::cmp::Ordering;

use rand_distr::{Distribution, Exp1};

use crate::kernel::ModelParams;
use crate::rng::{pair_key, Streams};
use crate::tree::Vertex;

use super::arena::Arena;
use super::config::initial_occupancy;
use super::{Dynamics, Occupancy, SimError, SimParams, TrajectorySample};

const UNKNOWN: u8 = 2;
const TIME_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy)]
struct Ring {
    t: f64,
    partner: u32,
}

#[derive(Debug, Clone)]
struct Clock {
    rings: Box<[Ring]>,
    /// Occupancy on segment `j` (between rings `j-1` and `j`), or `UNKNOWN`.
    seg: Box<[u8]>,
}

#[derive(Debug, Clone)]
pub struct GraphicalSim {
    rho: f64,
    support: Vec<(u32, f64)>,
    t_end: f64,
    ball_radius: u32,
    /// The boundary flag is raised once the drift neighbourhood of the tag
    /// reaches deeper than this.
    watch_depth: u32,
    range: u32,
    max_consulted_depth: u32,
    strict: bool,
    streams: Streams,
    arena: Arena,
    clocks: Vec<Option<Clock>>,
    tag: u32,
    now: f64,
    drift: f64,
    breach: Option<(f64, u32)>,
    /// `(y, p(|X - y|) <y - X>)` for the current tag position, zero weights dropped.
    hood: Vec<(u32, f64)>,
    trace: Vec<(u32, u32)>,
    jumps: u64,
}

impl GraphicalSim {
    pub fn new(params: &SimParams) -> Result<Self, SimError> {
        params.validate()?;
        let mut sim = Self::build(
            &params.model,
            params.ball_radius,
            params.ball_radius - params.safety_margin,
            params.t_end,
            params.seed,
        );
        sim.strict = params.strict_boundary;
        Ok(sim)
    }

    /// Simulation on the closed ball of radius `ball_radius` with no boundary
    /// monitoring, for comparison against finite-state oracles on the same ball.
    pub fn closed_ball(model: &ModelParams, ball_radius: u32, t_end: f64, seed: u64) -> Self {
        Self::build(model, ball_radius, u32::MAX, t_end, seed)
    }

    fn build(model: &ModelParams, ball_radius: u32, watch_depth: u32, t_end: f64, seed: u64) -> Self {
        let mut sim = Self {
            rho: model.rho,
            support: model.kernel.support().collect(),
            t_end,
            ball_radius,
            watch_depth,
            range: model.kernel.range(),
            max_consulted_depth: 0,
            strict: false,
            streams: Streams::new(seed),
            arena: Arena::new(model.d),
            clocks: Vec::new(),
            tag: Arena::ROOT,
            now: 0.0,
            drift: 0.0,
            breach: None,
            hood: Vec::new(),
            trace: Vec::new(),
            jumps: 0,
        };
        sim.refresh_hood();
        sim
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    /// Number of jumps the tagged particle has made.
    pub fn jumps(&self) -> u64 {
        self.jumps
    }

    /// Number of vertices whose clocks have been sampled.
    pub fn consulted_vertices(&self) -> usize {
        self.clocks.iter().filter(|c| c.is_some()).count()
    }

    pub fn boundary_flag(&self) -> bool {
        self.breach.is_some()
    }

    /// Deepest vertex whose clock has been sampled. Backward traces wander
    /// further than the tag, so this bounds how much of the ball mattered.
    pub fn max_consulted_depth(&self) -> u32 {
        self.max_consulted_depth
    }

    fn ensure_clock(&mut self, v: u32) {
        if let Some(Some(_)) = self.clocks.get(v as usize) {
            return;
        }
        let depth = self.arena.depth(v);
        self.max_consulted_depth = self.max_consulted_depth.max(depth);
        let mut rings = Vec::new();
        if depth <= self.ball_radius {
            let mut partners = Vec::new();
            let key_v = self.arena.key(v);
            for &(i, p) in &self.support {
                partners.clear();
                self.arena
                    .sphere_within(v, i, self.ball_radius, &mut partners);
                for &w in &partners {
                    let mut rng = self
                        .streams
                        .pair_stream(pair_key(key_v, self.arena.key(w)));
                    let mut t = 0.0;
                    loop {
                        let e: f64 = Exp1.sample(&mut rng);
                        t += e / p;
                        if t >= self.t_end {
                            break;
                        }
                        rings.push(Ring { t, partner: w });
                    }
                }
            }
        }
        let arena = &self.arena;
        rings.sort_by(|a, b| {
            a.t.partial_cmp(&b.t)
                .unwrap_or(Ordering::Equal)
                .then_with(|| arena.vertex(a.partner).cmp(&arena.vertex(b.partner)))
        });
        let seg = vec![UNKNOWN; rings.len() + 1].into_boxed_slice();
        if self.clocks.len() < self.arena.len() {
            self.clocks.resize_with(self.arena.len(), || None);
        }
        self.clocks[v as usize] = Some(Clock {
            rings: rings.into_boxed_slice(),
            seg,
        });
    }

    #[inline]
    fn clock(&self, v: u32) -> &Clock {
        self.clocks[v as usize].as_ref().expect("clock sampled")
    }

    /// Occupancy of `v` on its segment `j`.
    fn segment_value(&mut self, v: u32, j: usize) -> bool {
        let (mut v, mut j) = (v, j);
        self.trace.clear();
        let value = loop {
            self.ensure_clock(v);
            let known = self.clock(v).seg[j];
            if known != UNKNOWN {
                break known == 1;
            }
            self.trace.push((v, j as u32));
            if j == 0 {
                break initial_occupancy(
                    &self.streams,
                    self.rho,
                    self.arena.key(v),
                    v == Arena::ROOT,
                );
            }
            let Ring { t, partner } = self.clock(v).rings[j - 1];
            self.ensure_clock(partner);
            let before = self.clock(partner).rings.partition_point(|r| r.t < t);
            v = partner;
            j = before;
        };
        for k in 0..self.trace.len() {
            let (v, j) = self.trace[k];
            if let Some(c) = self.clocks[v as usize].as_mut() {
                c.seg[j as usize] = value as u8;
            }
        }
        value
    }

    /// Occupancy of node `v` at time `s` (after rings at `s`).
    fn occupied_at(&mut self, v: u32, s: f64) -> bool {
        self.ensure_clock(v);
        let j = self.clock(v).rings.partition_point(|r| r.t <= s);
        self.segment_value(v, j)
    }

    /// Occupancy of node `v` just before time `s`.
    fn occupied_before(&mut self, v: u32, s: f64) -> bool {
        self.ensure_clock(v);
        let j = self.clock(v).rings.partition_point(|r| r.t < s);
        self.segment_value(v, j)
    }

    /// Lebesgue measure of `{s in [a, b) : η_s(y) = 0}`.
    fn vacant_time(&mut self, y: u32, a: f64, b: f64) -> f64 {
        self.ensure_clock(y);
        let mut j = self.clock(y).rings.partition_point(|r| r.t <= a);
        let mut total = 0.0;
        loop {
            let rings = &self.clock(y).rings;
            let start = if j == 0 { 0.0 } else { rings[j - 1].t }.max(a);
            let next = rings.get(j).map(|r| r.t);
            let end = next.unwrap_or(f64::INFINITY).min(b);
            if end > start && !self.segment_value(y, j) {
                total += end - start;
            }
            match next {
                Some(t) if t < b => j += 1,
                _ => break,
            }
        }
        total
    }

    fn integrate_drift(&mut self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let mut acc = 0.0;
        for k in 0..self.hood.len() {
            let (y, w) = self.hood[k];
            acc += w * self.vacant_time(y, a, b);
        }
        acc
    }

    fn refresh_hood(&mut self) {
        let reach = self.arena.depth(self.tag) + self.range;
        if reach > self.watch_depth && self.breach.is_none() {
            self.breach = Some((self.now, reach));
        }
        self.hood.clear();
        let h0 = self.arena.horo(self.tag);
        let mut ys = Vec::new();
        for k in 0..self.support.len() {
            let (i, p) = self.support[k];
            ys.clear();
            self.arena
                .sphere_within(self.tag, i, self.ball_radius, &mut ys);
            for &y in &ys {
                let w = p * (self.arena.horo(y) - h0) as f64;
                if w != 0.0 {
                    self.hood.push((y, w));
                }
            }
        }
    }

    fn check_strict(&self) -> Result<(), SimError> {
        match self.breach {
            Some((time, depth)) if self.strict => Err(SimError::TruncationBreach {
                time,
                depth,
                ball_radius: self.ball_radius,
            }),
            _ => Ok(()),
        }
    }
}

impl Occupancy for GraphicalSim {
    fn occupied(&mut self, v: &Vertex) -> bool {
        let id = self.arena.lookup(v);
        self.occupied_at(id, self.now)
    }
}

impl Dynamics for GraphicalSim {
    fn now(&self) -> f64 {
        self.now
    }

    fn advance_to(&mut self, target: f64) -> Result<(), SimError> {
        if target < self.now - TIME_SLACK || target > self.t_end + TIME_SLACK {
            return Err(SimError::InvalidParams(format!(
                "cannot advance from t = {} to t = {target} (horizon {})",
                self.now, self.t_end
            )));
        }
        let target = target.max(self.now);
        loop {
            self.ensure_clock(self.tag);
            let now = self.now;
            let c = self.clock(self.tag);
            let k = c.rings.partition_point(|r| r.t <= now);
            match c.rings.get(k).copied() {
                Some(Ring { t, partner }) if t <= target => {
                    self.drift += self.integrate_drift(now, t);
                    self.now = t;
                    if !self.occupied_before(partner, t) {
                        self.tag = partner;
                        self.jumps += 1;
                        self.refresh_hood();
                    }
                }
                _ => {
                    self.drift += self.integrate_drift(now, target);
                    self.now = target;
                    break;
                }
            }
        }
        self.check_strict()
    }

    fn tagged(&self) -> Vertex {
        self.arena.vertex(self.tag)
    }

    fn sample(&self) -> TrajectorySample {
        TrajectorySample {
            t: self.now,
            x: self.arena.vertex(self.tag),
            horo: self.arena.horo(self.tag),
            depth: self.arena.depth(self.tag),
            drift_integral: self.drift,
            boundary_flag: self.breach.is_some(),
        }
    }

    fn local_drift(&mut self) -> f64 {
        let now = self.now;
        let mut acc = 0.0;
        for k in 0..self.hood.len() {
            let (y, w) = self.hood[k];
            if !self.occupied_at(y, now) {
                acc += w;
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::record;
    use crate::tree::ball;

    fn sep(d: u32, rho: f64) -> ModelParams {
        ModelParams::simple_exclusion(d, rho).unwrap()
    }

    #[test]
    fn zero_horizon_gives_initial_sample() {
        let p = SimParams::new(sep(3, 0.5), vec![0.0], 9);
        let out = crate::sim::run(&p).unwrap();
        assert_eq!(out, vec![TrajectorySample::initial()]);
    }

    #[test]
    fn full_density_freezes_tag() {
        let p = SimParams::new(sep(3, 1.0), vec![1.0, 5.0, 10.0], 4);
        for s in crate::sim::run(&p).unwrap() {
            assert!(s.x.is_root());
            assert_eq!(s.horo, 0);
            assert_eq!(s.drift_integral, 0.0);
        }
    }

    #[test]
    fn lone_particle_first_jump_is_rate_one() {
        // d = 3 SEP, rho = 0: three exits at 1/3 each.
        let n = 4000;
        let mut total = 0.0;
        for seed in 0..n {
            let mut sim = GraphicalSim::closed_ball(&sep(3, 0.0), 4, 50.0, seed);
            sim.ensure_clock(Arena::ROOT);
            let first = sim.clock(Arena::ROOT).rings.first().map_or(50.0, |r| r.t);
            total += first;
        }
        let mean = total / n as f64;
        // Exponential(1): sd of the mean is 1/sqrt(n) ~ 0.016
        assert!((mean - 1.0).abs() < 0.06, "mean first ring {mean}");
    }

    #[test]
    fn conservation_and_tag_occupancy() {
        let model = ModelParams::new(
            3,
            0.4,
            crate::kernel::RateKernel::new(vec![(1, 0.2), (2, 0.1)]).unwrap(),
        )
        .unwrap();
        let sites = ball(3, 3);
        for seed in 0..5 {
            let mut sim = GraphicalSim::closed_ball(&model, 3, 4.0, seed);
            let count0 = sites.iter().filter(|v| sim.occupied(v)).count();
            for t in [0.5, 1.0, 2.0, 4.0] {
                sim.advance_to(t).unwrap();
                let count = sites.iter().filter(|v| sim.occupied(v)).count();
                assert_eq!(count, count0);
                let x = sim.tagged();
                assert!(sim.occupied(&x));
            }
        }
    }

    #[test]
    fn reproducible_and_order_independent() {
        let p = SimParams::new(sep(3, 0.5), vec![2.0, 4.0, 8.0], 77);
        let a = crate::sim::run(&p).unwrap();
        let b = crate::sim::run(&p).unwrap();
        assert_eq!(a, b);
        // probing the environment first must not change the trajectory
        let mut sim = GraphicalSim::new(&p).unwrap();
        for v in ball(2, 3) {
            sim.occupied(&v);
        }
        let c = record(&mut sim, &p.sample_times).unwrap();
        assert_eq!(a, c);
    }

    #[test]
    fn drift_matches_local_drift_integral() {
        // Integrate φ numerically by sampling it on a fine grid.
        let p = SimParams::new(sep(3, 0.5), vec![3.0], 5);
        let mut exact = GraphicalSim::new(&p).unwrap();
        exact.advance_to(3.0).unwrap();
        let mut grid = GraphicalSim::new(&p).unwrap();
        let steps = 30_000;
        let dt = 3.0 / steps as f64;
        let mut riemann = 0.0;
        for k in 0..steps {
            grid.advance_to((k as f64 + 0.5) * dt).unwrap();
            riemann += grid.local_drift() * dt;
        }
        let want = exact.sample().drift_integral;
        assert!((riemann - want).abs() < 0.01, "{riemann} vs {want}");
    }

    #[test]
    fn strict_mode_reports_breach() {
        let mut p = SimParams::new(sep(3, 0.0), vec![20.0], 3);
        p.ball_radius = 3;
        p.safety_margin = 1;
        p.strict_boundary = true;
        assert!(matches!(
            crate::sim::run(&p),
            Err(SimError::TruncationBreach { .. })
        ));
        p.strict_boundary = false;
        let out = crate::sim::run(&p).unwrap();
        assert!(out.last().unwrap().boundary_flag);
    }

    #[test]
    fn cannot_run_backwards_or_past_horizon() {
        let p = SimParams::new(sep(3, 0.5), vec![1.0, 2.0], 1);
        let mut sim = GraphicalSim::new(&p).unwrap();
        sim.advance_to(1.5).unwrap();
        assert!(sim.advance_to(1.0).is_err());
        assert!(sim.advance_to(3.0).is_err());
    }
}
