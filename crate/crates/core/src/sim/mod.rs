//! Continuous-time simulation of the exclusion process with a tagged particle
//! on the closed ball of radius `L` around the root.
//!
//! Two engines realise the same process:
//!
//! * [`GraphicalSim`] samples the Poisson clock of every unordered pair on
//!   demand and recovers occupancies by tracing the stirring permutation
//!   backwards in time. It only ever touches vertices that influence the
//!   tagged particle, so the ball can be far larger than anything that could
//!   be enumerated. [`run`] uses it.
//! * [`ForwardSim`] runs the classic event loop over the whole ball with
//!   uniformization: proposals arrive at a dominating rate and proposals that
//!   leave the ball are discarded as timed no-ops. Practical for small balls
//!   only; it exists to audit individual events and to cross-check the
//!   graphical engine.
//!
//! Both draw the initial configuration from the same keyed Bernoulli field,
//! so for a given seed they start from the identical Palm configuration.

mod arena;
mod config;
mod forward;
mod graphical;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernel::{free_speed, ModelParams};
use crate::tree::Vertex;

pub use config::{sample_palm_config, LazyConfiguration};
pub use forward::ForwardSim;
pub use graphical::GraphicalSim;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid simulation parameters: {0}")]
    InvalidParams(String),
    #[error(
        "truncation breach at t = {time:.4}: depth {depth} is within the safety margin of the ball of radius {ball_radius}; enlarge the ball"
    )]
    TruncationBreach {
        time: f64,
        depth: u32,
        ball_radius: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimParams {
    pub model: ModelParams,
    pub t_end: f64,
    pub sample_times: Vec<f64>,
    pub ball_radius: u32,
    pub safety_margin: u32,
    pub seed: u64,
    /// Abort with [`SimError::TruncationBreach`] instead of flagging.
    pub strict_boundary: bool,
}

impl SimParams {
    /// Parameters with the automatic ball radius and a margin equal to the
    /// kernel range. Samples are taken at `sample_times`; `t_end` is their
    /// maximum (0 if empty).
    pub fn new(model: ModelParams, sample_times: Vec<f64>, seed: u64) -> Self {
        let t_end = sample_times.iter().copied().fold(0.0, f64::max);
        let ball_radius = default_ball_radius(&model, t_end);
        let safety_margin = model.kernel.range();
        Self {
            model,
            t_end,
            sample_times,
            ball_radius,
            safety_margin,
            seed,
            strict_boundary: false,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::InvalidParams(m));
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return bad(format!("t_end = {} must be finite and >= 0", self.t_end));
        }
        if self.sample_times.windows(2).any(|w| w[0] >= w[1]) {
            return bad("sample times must be strictly increasing".into());
        }
        if self
            .sample_times
            .iter()
            .any(|&t| !(0.0..=self.t_end).contains(&t))
        {
            return bad("sample times must lie in [0, t_end]".into());
        }
        let range = self.model.kernel.range();
        if self.safety_margin < range {
            return bad(format!(
                "safety margin {} below kernel range {range}",
                self.safety_margin
            ));
        }
        if self.ball_radius <= self.safety_margin {
            return bad(format!(
                "ball radius {} must exceed safety margin {}",
                self.ball_radius, self.safety_margin
            ));
        }
        Ok(())
    }
}

/// `ceil(v_free t + 4 sqrt(t) + R + 10)` with `v_free` the lone-particle speed.
pub fn default_ball_radius(model: &ModelParams, t_end: f64) -> u32 {
    let v_free = free_speed(model.d, &model.kernel);
    let r = model.kernel.range() as f64;
    (v_free * t_end + 4.0 * t_end.sqrt() + r + 10.0).ceil() as u32
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub x: Vertex,
    /// Busemann value `<X_t>`.
    pub horo: i64,
    /// `|X_t|`.
    pub depth: u32,
    /// `∫_0^t φ(s) ds`.
    pub drift_integral: f64,
    pub boundary_flag: bool,
}

impl TrajectorySample {
    pub fn initial() -> Self {
        Self {
            t: 0.0,
            x: Vertex::root(),
            horo: 0,
            depth: 0,
            drift_integral: 0.0,
            boundary_flag: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Effect {
    Swap,
    #[serde(rename = "no-op")]
    NoOp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub t: f64,
    /// Endpoints in lexicographic order.
    pub pair: (Vertex, Vertex),
    pub effect: Effect,
}

/// Anything that can report the occupancy of a vertex.
pub trait Occupancy {
    fn occupied(&mut self, v: &Vertex) -> bool;
}

/// A running tagged-particle simulation.
pub trait Dynamics: Occupancy {
    fn now(&self) -> f64;
    /// Runs the dynamics forward to time `t` (inclusive of events at `t`).
    fn advance_to(&mut self, t: f64) -> Result<(), SimError>;
    fn tagged(&self) -> Vertex;
    fn sample(&self) -> TrajectorySample;
    /// `φ = Σ_y p(|X - y|)(1 - η(y)) <y - X>` at the current time.
    fn local_drift(&mut self) -> f64;
}

/// Samples a dynamics at each time in `times`.
pub fn record<D: Dynamics>(sim: &mut D, times: &[f64]) -> Result<Vec<TrajectorySample>, SimError> {
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        sim.advance_to(t)?;
        out.push(sim.sample());
    }
    Ok(out)
}

/// Simulates one replica with the graphical engine.
pub fn run(params: &SimParams) -> Result<Vec<TrajectorySample>, SimError> {
    let mut sim = GraphicalSim::new(params)?;
    record(&mut sim, &params.sample_times)
}

/// `M_t = <X_t> - ∫_0^t φ(s) ds` at each sample.
pub fn martingale_residual(samples: &[TrajectorySample]) -> Vec<(f64, f64)> {
    samples
        .iter()
        .map(|s| (s.t, s.horo as f64 - s.drift_integral))
        .collect()
}
