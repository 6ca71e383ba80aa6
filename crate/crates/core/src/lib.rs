//! Exact Monte Carlo for finite-range symmetric exclusion processes on the
//! rooted d-regular tree, seen through a tagged particle started at the root.
//!
//! * [`tree`]: vertex algebra of the tree as a free product of involutions,
//!   distances and Busemann functions.
//! * [`kernel`]: rate kernels and closed-form speeds.
//! * [`sim`]: continuous-time engines and trajectory records.
//! * [`environment`]: the configuration seen from the tagged particle.
//! * [`oracle`]: dense generators on small balls and exact semigroups.
//! * [`stats`]: estimators that turn replica samples into verdicts.

pub mod environment;
pub mod kernel;
pub mod oracle;
pub mod rng;
pub mod sim;
pub mod stats;
pub mod tree;

pub use kernel::{ModelParams, RateKernel};
pub use sim::{run, SimParams, TrajectorySample};
pub use tree::{Ray, Vertex};
