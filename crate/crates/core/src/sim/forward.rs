//! Event-driven simulation of the whole ball by uniformization.
//!
//! Proposals arrive at the dominating rate `Λ = Σ_i p(i) |B_L| |S_i| / 2`.
//! A proposal picks a distance class `i` with weight `p(i)|S_i|`, a uniform
//! vertex `x` of the ball and a uniform point `y` of the sphere of radius
//! `i` around `x`. Each unordered in-ball pair at distance `i` is then hit at
//! rate exactly `p(i)`; proposals with `y` outside the ball are discarded
//! and only consume time.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use crate::kernel::ModelParams;
use crate::rng::Streams;
use crate::tree::{add, busemann, distance, sphere, sphere_size, Ray, Vertex};

use super::config::{sample_palm_config, LazyConfiguration};
use super::{Dynamics, Effect, EventRecord, Occupancy, SimError, SimParams, TrajectorySample};

/// Largest ball the forward engine will enumerate rates for.
pub const MAX_FORWARD_SITES: u64 = 1 << 22;

const EVENT_STREAM: u64 = 0x243f_6a88_85a3_08d3;

#[derive(Debug, Clone)]
pub struct ForwardSim {
    model: ModelParams,
    ball_radius: u32,
    watch_depth: u32,
    strict: bool,
    t_end: f64,
    config: LazyConfiguration,
    rng: ChaCha8Rng,
    /// Cumulative vertex counts by depth, for uniform sampling in the ball.
    depth_cdf: Vec<f64>,
    /// `(i, p(i), cumulative weight p(i)|S_i|)`.
    classes: Vec<(u32, f64, f64)>,
    proposal_rate: f64,
    tag: Vertex,
    now: f64,
    drift: f64,
    phi: f64,
    breach: Option<(f64, u32)>,
    audit: Option<Vec<EventRecord>>,
    proposals: u64,
}

impl ForwardSim {
    pub fn new(params: &SimParams) -> Result<Self, SimError> {
        params.validate()?;
        let mut sim = Self::build(
            &params.model,
            params.ball_radius,
            params.ball_radius - params.safety_margin,
            params.t_end,
            params.seed,
        )?;
        sim.strict = params.strict_boundary;
        Ok(sim)
    }

    /// Forward simulation of the closed ball without boundary monitoring.
    pub fn closed_ball(
        model: &ModelParams,
        ball_radius: u32,
        t_end: f64,
        seed: u64,
    ) -> Result<Self, SimError> {
        Self::build(model, ball_radius, ball_radius, t_end, seed)
    }

    fn build(
        model: &ModelParams,
        ball_radius: u32,
        watch_depth: u32,
        t_end: f64,
        seed: u64,
    ) -> Result<Self, SimError> {
        let d = model.d;
        let mut depth_cdf = Vec::with_capacity(ball_radius as usize + 1);
        let mut total = 0u64;
        for k in 0..=ball_radius {
            total = total.saturating_add(sphere_size(k, d));
            if total > MAX_FORWARD_SITES {
                return Err(SimError::InvalidParams(format!(
                    "ball of radius {ball_radius} in T^{d} is too large for the forward engine"
                )));
            }
            depth_cdf.push(total as f64);
        }
        let sites = total as f64;
        let mut classes = Vec::new();
        let mut acc = 0.0;
        for (i, p) in model.kernel.support() {
            acc += p * sphere_size(i, d) as f64;
            classes.push((i, p, acc));
        }
        let proposal_rate = acc * sites / 2.0;
        let streams = Streams::new(seed);
        let mut sim = Self {
            model: model.clone(),
            ball_radius,
            watch_depth,
            strict: false,
            t_end,
            config: sample_palm_config(model.rho, seed),
            rng: streams.stream(EVENT_STREAM),
            depth_cdf,
            classes,
            proposal_rate,
            tag: Vertex::root(),
            now: 0.0,
            drift: 0.0,
            phi: 0.0,
            breach: None,
            audit: None,
            proposals: 0,
        };
        sim.phi = sim.local_drift();
        Ok(sim)
    }

    /// Keeps every executed ring for later inspection.
    pub fn with_audit(mut self) -> Self {
        self.audit = Some(Vec::new());
        self
    }

    pub fn audit_log(&self) -> &[EventRecord] {
        self.audit.as_deref().unwrap_or(&[])
    }

    /// Total proposal rate `Λ`.
    pub fn proposal_rate(&self) -> f64 {
        self.proposal_rate
    }

    pub fn proposals(&self) -> u64 {
        self.proposals
    }

    pub fn configuration(&mut self) -> &mut LazyConfiguration {
        &mut self.config
    }

    fn uniform_word(&mut self, len: u32) -> Vec<u8> {
        let d = self.model.d;
        let mut w = Vec::with_capacity(len as usize);
        for k in 0..len {
            let g = if k == 0 {
                self.rng.random_range(1..=d)
            } else {
                // uniform over the d - 1 letters differing from the previous one
                let prev = w[k as usize - 1];
                let g = self.rng.random_range(1..d);
                if g >= prev {
                    g + 1
                } else {
                    g
                }
            };
            w.push(g);
        }
        w
    }

    fn uniform_ball_vertex(&mut self) -> Vertex {
        let total = *self.depth_cdf.last().unwrap();
        let u = self.rng.random::<f64>() * total;
        let depth = self.depth_cdf.partition_point(|&c| c <= u) as u32;
        Vertex::from_reduced(self.uniform_word(depth)).unwrap()
    }

    /// Samples the next ring of an in-ball pair no later than `horizon`,
    /// applies it, and returns it. Returns `None` (with the clock moved to
    /// `horizon`) if no ring occurs first.
    pub fn next_event(&mut self, horizon: f64) -> Option<EventRecord> {
        loop {
            let e: f64 = Exp1.sample(&mut self.rng);
            let t = self.now + e / self.proposal_rate;
            if t > horizon {
                // memorylessness: the overshoot can be discarded
                self.drift += self.phi * (horizon - self.now);
                self.now = horizon;
                return None;
            }
            self.drift += self.phi * (t - self.now);
            self.now = t;
            self.proposals += 1;
            let u = self.rng.random::<f64>() * self.classes.last().unwrap().2;
            let class = self.classes.partition_point(|c| c.2 <= u).min(self.classes.len() - 1);
            let i = self.classes[class].0;
            let x = self.uniform_ball_vertex();
            let z = Vertex::from_reduced(self.uniform_word(i)).unwrap();
            let y = add(&x, &z);
            if y.depth() as u32 > self.ball_radius {
                continue;
            }
            let record = self.apply_ring(t, x, y);
            if let Some(log) = self.audit.as_mut() {
                log.push(record.clone());
            }
            return Some(record);
        }
    }

    fn apply_ring(&mut self, t: f64, x: Vertex, y: Vertex) -> EventRecord {
        let (ox, oy) = (self.config.reveal(&x), self.config.reveal(&y));
        let effect = if ox != oy { Effect::Swap } else { Effect::NoOp };
        let range = self.model.kernel.range() as usize;
        let near_tag = distance(&x, &self.tag) <= range || distance(&y, &self.tag) <= range;
        if effect == Effect::Swap {
            debug_assert!(ox ^ oy, "swap requires exactly one occupied endpoint");
            self.config.swap(&x, &y);
            if x == self.tag {
                self.tag = y.clone();
            } else if y == self.tag {
                self.tag = x.clone();
            }
            if near_tag {
                let deepest = x.depth().max(y.depth()).max(self.tag.depth()) as u32;
                if deepest > self.watch_depth && self.breach.is_none() {
                    self.breach = Some((t, deepest));
                }
                self.phi = self.local_drift();
            }
        }
        let pair = if x <= y { (x, y) } else { (y, x) };
        EventRecord { t, pair, effect }
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

impl Occupancy for ForwardSim {
    fn occupied(&mut self, v: &Vertex) -> bool {
        self.config.reveal(v)
    }
}

impl Dynamics for ForwardSim {
    fn now(&self) -> f64 {
        self.now
    }

    fn advance_to(&mut self, target: f64) -> Result<(), SimError> {
        if target < self.now || target > self.t_end + 1e-9 {
            return Err(SimError::InvalidParams(format!(
                "cannot advance from t = {} to t = {target} (horizon {})",
                self.now, self.t_end
            )));
        }
        while self.next_event(target).is_some() {}
        self.check_strict()
    }

    fn tagged(&self) -> Vertex {
        self.tag.clone()
    }

    fn sample(&self) -> TrajectorySample {
        TrajectorySample {
            t: self.now,
            x: self.tag.clone(),
            horo: busemann(&self.tag, Ray::standard()).get(),
            depth: self.tag.depth() as u32,
            drift_integral: self.drift,
            boundary_flag: self.breach.is_some(),
        }
    }

    fn local_drift(&mut self) -> f64 {
        let xi = Ray::standard();
        let h0 = busemann(&self.tag, xi).get();
        let mut acc = 0.0;
        let support: Vec<(u32, f64)> = self.model.kernel.support().collect();
        for (i, p) in support {
            for y in sphere(&self.tag, i as usize, self.model.d) {
                if y.depth() as u32 > self.ball_radius {
                    continue;
                }
                let h = busemann(&y, xi).get() - h0;
                if h != 0 && !self.config.reveal(&y) {
                    acc += p * h as f64;
                }
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::RateKernel;
    use crate::tree::ball;

    fn sep(d: u32, rho: f64) -> ModelParams {
        ModelParams::simple_exclusion(d, rho).unwrap()
    }

    #[test]
    fn full_ball_only_no_ops() {
        let mut sim = ForwardSim::closed_ball(&sep(3, 1.0), 3, 5.0, 2).unwrap().with_audit();
        sim.advance_to(5.0).unwrap();
        assert!(!sim.audit_log().is_empty());
        assert!(sim.audit_log().iter().all(|e| e.effect == Effect::NoOp));
        assert!(sim.tagged().is_root());
    }

    #[test]
    fn concordant_ring_is_no_op() {
        let mut sim = ForwardSim::closed_ball(&sep(3, 0.0), 2, 1.0, 0).unwrap();
        let a1: Vertex = "1".parse().unwrap();
        sim.config.set(&a1, true);
        let rec = sim.apply_ring(0.1, Vertex::root(), a1.clone());
        assert_eq!(rec.effect, Effect::NoOp);
        assert!(sim.tagged().is_root());
        let a2: Vertex = "2".parse().unwrap();
        let rec = sim.apply_ring(0.2, a2.clone(), Vertex::root());
        assert_eq!(rec.effect, Effect::Swap);
        assert_eq!(rec.pair, (Vertex::root(), a2.clone()));
        assert_eq!(sim.tagged(), a2);
    }

    #[test]
    fn events_ordered_and_legal() {
        let model = ModelParams::new(3, 0.5, RateKernel::new(vec![(1, 0.2), (2, 0.1)]).unwrap()).unwrap();
        let mut sim = ForwardSim::closed_ball(&model, 3, 3.0, 8).unwrap().with_audit();
        let sites = ball(3, 3);
        let before = sites.iter().filter(|v| sim.occupied(v)).count();
        sim.advance_to(3.0).unwrap();
        let log = sim.audit_log().to_vec();
        assert!(log.windows(2).all(|w| w[0].t < w[1].t));
        for e in &log {
            assert!(e.pair.0.depth() <= 3 && e.pair.1.depth() <= 3);
            let dist = distance(&e.pair.0, &e.pair.1) as u32;
            assert!(dist == 1 || dist == 2);
        }
        let after = sites.iter().filter(|v| sim.occupied(v)).count();
        assert_eq!(before, after);
        let x = sim.tagged();
        assert!(sim.occupied(&x));
    }

    #[test]
    fn in_ball_pair_rate_is_exact() {
        // Count rings on the pair {o, a1} in the 2-ball of T^3 over a long run.
        let mut sim = ForwardSim::closed_ball(&sep(3, 0.5), 2, 3000.0, 4).unwrap().with_audit();
        sim.advance_to(3000.0).unwrap();
        let a1: Vertex = "1".parse().unwrap();
        let hits = sim
            .audit_log()
            .iter()
            .filter(|e| e.pair == (Vertex::root(), a1.clone()))
            .count() as f64;
        // Poisson(1000): 4 sd = 126
        assert!((hits - 1000.0).abs() < 126.0, "{hits}");
        // 9 edges in the 2-ball, each at rate 1/3
        let total = sim.audit_log().len() as f64;
        assert!((total - 9000.0).abs() < 4.0 * 9000f64.sqrt(), "{total}");
    }

    #[test]
    fn forward_rejects_huge_balls() {
        assert!(ForwardSim::closed_ball(&sep(3, 0.5), 40, 1.0, 0).is_err());
    }
}
