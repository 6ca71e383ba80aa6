//! The configuration seen from the tagged particle.
//!
//! A view at time `t` maps each relative word `z` with `|z| <= radius` to
//! `η_t(X_t + z)`. Functionals of the environment read the Busemann value of
//! `z` itself, anchored at the view's origin.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernel::{speed, ModelParams, RateKernel};
use crate::sim::{Dynamics, Occupancy, SimError};
use crate::tree::{add, ball, busemann, Ray, Vertex};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnvironmentError {
    #[error("view radius {radius} is smaller than the kernel range {range}")]
    InsufficientRadius { radius: u32, range: u32 },
    #[error("stationarity check needs at least one replica and one time")]
    Empty,
    #[error("views disagree on {0}")]
    Inconsistent(&'static str),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnvironmentView {
    pub center: Vertex,
    pub radius: u32,
    pub occupancy: BTreeMap<Vertex, bool>,
}

impl EnvironmentView {
    pub fn get(&self, z: &Vertex) -> Option<bool> {
        self.occupancy.get(z).copied()
    }
}

/// `z ↦ η(X + z)` over the ball of radius `radius`.
pub fn environment_view<C: Occupancy + ?Sized>(
    config: &mut C,
    x: &Vertex,
    radius: u32,
    d: u8,
) -> EnvironmentView {
    let occupancy = ball(radius as usize, d)
        .into_iter()
        .map(|z| {
            let b = config.occupied(&add(x, &z));
            (z, b)
        })
        .collect();
    EnvironmentView {
        center: x.clone(),
        radius,
        occupancy,
    }
}

/// Advances `sim` through `times`, extracting the view at each.
pub fn sample_views<D: Dynamics>(
    sim: &mut D,
    times: &[f64],
    radius: u32,
    d: u8,
) -> Result<Vec<EnvironmentView>, SimError> {
    times
        .iter()
        .map(|&t| {
            sim.advance_to(t)?;
            let x = sim.tagged();
            Ok(environment_view(sim, &x, radius, d))
        })
        .collect()
}

/// `ψ(ζ) = Σ_z p(|z|)(1 - ζ(z))<z>`.
pub fn psi(view: &EnvironmentView, kernel: &RateKernel, _d: u8) -> Result<f64, EnvironmentError> {
    if view.radius < kernel.range() {
        return Err(EnvironmentError::InsufficientRadius {
            radius: view.radius,
            range: kernel.range(),
        });
    }
    let xi = Ray::standard();
    Ok(view
        .occupancy
        .iter()
        .filter(|(z, &b)| !b && !z.is_root())
        .map(|(z, _)| kernel.rate(z.depth() as u32) * busemann(z, xi).get() as f64)
        .sum())
}

/// `ψ - v`, centred under the Palm law.
pub fn psi_bar(view: &EnvironmentView, params: &ModelParams) -> Result<f64, EnvironmentError> {
    Ok(psi(view, &params.kernel, params.d)? - speed(params))
}

/// `Σ_i p(i) i d (d-1)^{i-1}`, an upper bound on `|ψ|`.
pub fn psi_bound(kernel: &RateKernel, d: u8) -> f64 {
    kernel
        .support()
        .map(|(i, p)| p * i as f64 * d as f64 * (d as f64 - 1.0).powi(i as i32 - 1))
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteFrequency {
    pub t: f64,
    pub z: Vertex,
    pub frequency: f64,
    /// Binomial standard error under the Palm marginal.
    pub se: f64,
    pub expected: f64,
    /// `(frequency - expected) / se`, zero where `se` is zero and they agree.
    pub zscore: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationarityReport {
    pub rho: f64,
    pub radius: u32,
    pub replicas: usize,
    pub sites: Vec<SiteFrequency>,
    pub max_abs_deviation: f64,
    pub max_abs_zscore: f64,
    pub origin_always_occupied: bool,
}

impl StationarityReport {
    pub fn within(&self, zscores: f64) -> bool {
        self.origin_always_occupied && self.max_abs_zscore < zscores
    }
}

/// Occupancy frequencies across replicas. `views[r][k]` is replica `r` at
/// `times[k]`.
pub fn stationarity_check(
    views: &[Vec<EnvironmentView>],
    times: &[f64],
    rho: f64,
) -> Result<StationarityReport, EnvironmentError> {
    let first = views
        .first()
        .and_then(|v| v.first())
        .ok_or(EnvironmentError::Empty)?;
    if times.is_empty() {
        return Err(EnvironmentError::Empty);
    }
    if views.iter().any(|r| r.len() != times.len()) {
        return Err(EnvironmentError::Inconsistent("number of times"));
    }
    let radius = first.radius;
    let keys: Vec<&Vertex> = first.occupancy.keys().collect();
    if views
        .iter()
        .flatten()
        .any(|v| v.radius != radius || v.occupancy.len() != keys.len())
    {
        return Err(EnvironmentError::Inconsistent("radius"));
    }
    let n = views.len() as f64;
    let mut sites = Vec::with_capacity(keys.len() * times.len());
    let mut origin_always_occupied = true;
    for (k, &t) in times.iter().enumerate() {
        for &z in &keys {
            let count = views
                .iter()
                .filter(|r| r[k].get(z).unwrap_or(false))
                .count();
            let frequency = count as f64 / n;
            let expected = if z.is_root() { 1.0 } else { rho };
            if z.is_root() && count != views.len() {
                origin_always_occupied = false;
            }
            let se = (expected * (1.0 - expected) / n).sqrt();
            let dev = frequency - expected;
            let zscore = if se > 0.0 {
                dev / se
            } else if dev == 0.0 {
                0.0
            } else {
                f64::INFINITY.copysign(dev)
            };
            sites.push(SiteFrequency {
                t,
                z: z.clone(),
                frequency,
                se,
                expected,
                zscore,
            });
        }
    }
    let max_abs_deviation = sites
        .iter()
        .map(|s| (s.frequency - s.expected).abs())
        .fold(0.0, f64::max);
    let max_abs_zscore = sites.iter().map(|s| s.zscore.abs()).fold(0.0, f64::max);
    Ok(StationarityReport {
        rho,
        radius,
        replicas: views.len(),
        sites,
        max_abs_deviation,
        max_abs_zscore,
        origin_always_occupied,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::simple_exclusion_kernel;
    use crate::sim::sample_palm_config;

    fn view_with(radius: u32, d: u8, fill: bool) -> EnvironmentView {
        let occupancy = ball(radius as usize, d)
            .into_iter()
            .map(|z| {
                let b = z.is_root() || fill;
                (z, b)
            })
            .collect();
        EnvironmentView {
            center: Vertex::root(),
            radius,
            occupancy,
        }
    }

    #[test]
    fn view_at_root_is_the_configuration() {
        let mut c = sample_palm_config(0.5, 9);
        let v = environment_view(&mut c, &Vertex::root(), 2, 3);
        assert_eq!(v.occupancy.len(), 10);
        for (z, &b) in &v.occupancy {
            assert_eq!(c.reveal(z), b);
        }
        assert_eq!(v.get(&Vertex::root()), Some(true));
    }

    #[test]
    fn view_is_translated() {
        let mut c = sample_palm_config(0.5, 4);
        let x: Vertex = "2.3".parse().unwrap();
        let v = environment_view(&mut c, &x, 1, 3);
        for (z, &b) in &v.occupancy {
            assert_eq!(c.reveal(&add(&x, z)), b);
        }
    }

    #[test]
    fn psi_examples() {
        let k = simple_exclusion_kernel(3).unwrap();
        assert!((psi(&view_with(1, 3, false), &k, 3).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(psi(&view_with(1, 3, true), &k, 3).unwrap(), 0.0);
        let wide = RateKernel::new(vec![(1, 0.2), (2, 0.1)]).unwrap();
        assert_eq!(
            psi(&view_with(1, 3, false), &wide, 3),
            Err(EnvironmentError::InsufficientRadius {
                radius: 1,
                range: 2
            })
        );
        // All vacant: 0.2 * 1 + 0.1 * 6.
        assert!((psi(&view_with(2, 3, false), &wide, 3).unwrap() - 0.8).abs() < 1e-14);
    }

    #[test]
    fn psi_bar_examples() {
        let half = ModelParams::simple_exclusion(3, 0.5).unwrap();
        let bar = psi_bar(&view_with(1, 3, false), &half).unwrap();
        assert!((bar - 1.0 / 6.0).abs() < 1e-15);
        let full = ModelParams::simple_exclusion(3, 1.0).unwrap();
        assert_eq!(psi_bar(&view_with(1, 3, true), &full).unwrap(), 0.0);
    }

    #[test]
    fn psi_bound_values() {
        assert!((psi_bound(&simple_exclusion_kernel(3).unwrap(), 3) - 1.0).abs() < 1e-15);
        let wide = RateKernel::new(vec![(1, 0.2), (2, 0.1)]).unwrap();
        assert!((psi_bound(&wide, 3) - (0.6 + 1.2)).abs() < 1e-14);
    }

    #[test]
    fn stationarity_at_time_zero_of_a_fixed_field() {
        let views: Vec<Vec<EnvironmentView>> = (0..400)
            .map(|s| {
                let mut c = sample_palm_config(0.5, s);
                vec![environment_view(&mut c, &Vertex::root(), 2, 3)]
            })
            .collect();
        let r = stationarity_check(&views, &[0.0], 0.5).unwrap();
        assert_eq!(r.sites.len(), 10);
        assert!(r.origin_always_occupied);
        let origin = r.sites.iter().find(|s| s.z.is_root()).unwrap();
        assert_eq!((origin.frequency, origin.zscore), (1.0, 0.0));
        assert!(r.max_abs_zscore < 5.0);
    }

    #[test]
    fn stationarity_rejects_bad_input() {
        assert_eq!(
            stationarity_check(&[], &[0.0], 0.5),
            Err(EnvironmentError::Empty)
        );
        let v = view_with(1, 3, false);
        assert!(stationarity_check(&[vec![v.clone()], vec![v.clone(), v]], &[0.0], 0.5).is_err());
    }
}
