//! Finite-range symmetric rate kernels `p(·)` and model parameters.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tree::sphere_size;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("tree degree {0} invalid (need 2 <= d <= 255)")]
    InvalidDegree(u32),
    #[error("density {0} outside [0, 1]")]
    InvalidDensity(f64),
    #[error("rate {rate} at distance {distance} is negative or not finite")]
    InvalidRate { distance: u32, rate: f64 },
    #[error("kernel has no strictly positive rate")]
    DegenerateKernel,
    #[error("kernel needs p(1) > 0")]
    UnsupportedKernel,
    #[error("distance 0 cannot carry a rate")]
    SelfJump,
    #[error("distance {0} listed twice")]
    DuplicateDistance(u32),
}

/// Rates `p(i)` per unordered pair at distance `i`, in events per unit time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateKernel {
    /// Sorted by distance, distances unique and positive.
    entries: Vec<(u32, f64)>,
}

impl RateKernel {
    pub fn new(mut entries: Vec<(u32, f64)>) -> Result<Self, KernelError> {
        entries.sort_by_key(|e| e.0);
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(KernelError::DuplicateDistance(w[0].0));
            }
        }
        let kernel = Self { entries };
        validate(&kernel)?;
        Ok(kernel)
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    /// `p(i)`, zero off the support.
    pub fn rate(&self, distance: u32) -> f64 {
        self.entries
            .iter()
            .find(|e| e.0 == distance)
            .map_or(0.0, |e| e.1)
    }

    /// Maximum supported distance `R`.
    pub fn range(&self) -> u32 {
        self.entries
            .iter()
            .rev()
            .find(|e| e.1 > 0.0)
            .map_or(0, |e| e.0)
    }

    /// Entries with strictly positive rate.
    pub fn support(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.entries.iter().copied().filter(|e| e.1 > 0.0)
    }

    /// `Σ_i i p(i)`.
    pub fn first_moment(&self) -> f64 {
        self.support().map(|(i, p)| i as f64 * p).sum()
    }
}

impl fmt::Display for RateKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (k, (i, p)) in self.entries.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "({i},{p})")?;
        }
        f.write_str("]")
    }
}

/// Accepts kernels with nonnegative finite rates, no self-jumps, and `p(1) > 0`.
pub fn validate(kernel: &RateKernel) -> Result<(), KernelError> {
    for &(distance, rate) in &kernel.entries {
        if distance == 0 {
            return Err(KernelError::SelfJump);
        }
        if !rate.is_finite() || rate < 0.0 {
            return Err(KernelError::InvalidRate { distance, rate });
        }
    }
    if kernel.entries.iter().all(|e| e.1 == 0.0) {
        return Err(KernelError::DegenerateKernel);
    }
    if kernel.rate(1) <= 0.0 {
        return Err(KernelError::UnsupportedKernel);
    }
    Ok(())
}

/// Nearest-neighbour kernel `p(1) = 1/d`.
pub fn simple_exclusion_kernel(d: u32) -> Result<RateKernel, KernelError> {
    if !(2..=255).contains(&d) {
        return Err(KernelError::InvalidDegree(d));
    }
    RateKernel::new(vec![(1, 1.0 / d as f64)])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub d: u8,
    pub rho: f64,
    pub kernel: RateKernel,
}

impl ModelParams {
    pub fn new(d: u32, rho: f64, kernel: RateKernel) -> Result<Self, KernelError> {
        if !(2..=255).contains(&d) {
            return Err(KernelError::InvalidDegree(d));
        }
        if !(0.0..=1.0).contains(&rho) {
            return Err(KernelError::InvalidDensity(rho));
        }
        validate(&kernel)?;
        Ok(Self {
            d: d as u8,
            rho,
            kernel,
        })
    }

    pub fn simple_exclusion(d: u32, rho: f64) -> Result<Self, KernelError> {
        Self::new(d, rho, simple_exclusion_kernel(d)?)
    }
}

/// `Σ_{|z| = i} <z>`: the summed horodistance over the sphere of radius `i`
/// around the root.
///
/// A vertex at distance `i` sharing exactly `l < i` letters with the ray has
/// horodistance `i - 2l`; there are `(d-1)(d-1)^{i-1}` of them for `l = 0`
/// and `(d-2)(d-1)^{i-l-1}` for `l >= 1`. The ray vertex itself contributes
/// `-i`.
pub fn sphere_horo_sum(i: u32, d: u8) -> f64 {
    if i == 0 {
        return 0.0;
    }
    let q = d as f64 - 1.0;
    let mut sum = -(i as f64);
    for l in 0..i {
        let branch = if l == 0 { q } else { d as f64 - 2.0 };
        sum += branch * q.powi((i - l - 1) as i32) * (i as f64 - 2.0 * l as f64);
    }
    sum
}

/// Mean horodistance drift of the tagged particle under the Palm law,
/// `(1-ρ) Σ_i p(i) Σ_{|z|=i} <z>`.
///
/// For nearest-neighbour kernels this is `(1-ρ)(d-2)p(1)`; in particular
/// `(1-ρ)(d-2)/d` for simple exclusion.
pub fn speed(params: &ModelParams) -> f64 {
    (1.0 - params.rho) * free_speed(params.d, &params.kernel)
}

/// Speed of a lone particle (`ρ = 0`).
pub fn free_speed(d: u8, kernel: &RateKernel) -> f64 {
    kernel
        .support()
        .map(|(i, p)| p * sphere_horo_sum(i, d))
        .sum()
}

/// `(1-ρ)(d-2) Σ_i i p(i)`. Coincides with [`speed`] when the kernel is
/// supported on distance 1 only; for longer jumps it undercounts the drift
/// because a jump of length `i` has `d(d-1)^{i-1}` targets, not `d`.
pub fn linear_moment_speed(params: &ModelParams) -> f64 {
    (1.0 - params.rho) * (params.d as f64 - 2.0) * params.kernel.first_moment()
}

/// `Σ_i p(i) d (d-1)^{i-1}`: total ring rate of pairs containing a given site.
pub fn total_rate_per_site(params: &ModelParams) -> f64 {
    params
        .kernel
        .support()
        .map(|(i, p)| p * sphere_size(i, params.d) as f64)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{busemann, sphere, Ray, Vertex};

    fn kernel(entries: &[(u32, f64)]) -> RateKernel {
        RateKernel::new(entries.to_vec()).unwrap()
    }

    #[test]
    fn simple_exclusion_rates() {
        assert_eq!(simple_exclusion_kernel(3).unwrap().rate(1), 1.0 / 3.0);
        assert_eq!(simple_exclusion_kernel(2).unwrap().rate(1), 0.5);
        assert_eq!(simple_exclusion_kernel(10).unwrap().rate(1), 0.1);
        assert_eq!(
            simple_exclusion_kernel(1),
            Err(KernelError::InvalidDegree(1))
        );
    }

    #[test]
    fn speed_examples() {
        let p = ModelParams::simple_exclusion(3, 0.5).unwrap();
        assert!((speed(&p) - 1.0 / 6.0).abs() < 1e-15);
        for d in 2..=6 {
            let full = ModelParams::simple_exclusion(d, 1.0).unwrap();
            assert_eq!(speed(&full), 0.0);
        }
        let k = kernel(&[(1, 0.2), (2, 0.1)]);
        for rho in [0.0, 0.3, 1.0] {
            let p = ModelParams::new(2, rho, k.clone()).unwrap();
            assert_eq!(speed(&p), 0.0);
        }
    }

    #[test]
    fn simple_exclusion_speed_closed_form() {
        for d in 2..=6u32 {
            for rho in [0.0, 0.25, 0.5, 0.9] {
                let p = ModelParams::simple_exclusion(d, rho).unwrap();
                let want = (1.0 - rho) * (d as f64 - 2.0) / d as f64;
                assert!((speed(&p) - want).abs() < 1e-15);
                assert!((linear_moment_speed(&p) - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn speed_linear_in_vacancy_density() {
        let k = kernel(&[(1, 0.2), (2, 0.1)]);
        let v0 = speed(&ModelParams::new(4, 0.0, k.clone()).unwrap());
        for step in 0..=10 {
            let rho = step as f64 / 10.0;
            let v = speed(&ModelParams::new(4, rho, k.clone()).unwrap());
            assert!((v - (1.0 - rho) * v0).abs() < 1e-14);
        }
    }

    #[test]
    fn sphere_horo_sum_matches_enumeration() {
        let xi = Ray::standard();
        for d in 2..=5u8 {
            for i in 0..=5u32 {
                let brute: i64 = sphere(&Vertex::root(), i as usize, d)
                    .iter()
                    .map(|z| busemann(z, xi).get())
                    .sum();
                assert_eq!(sphere_horo_sum(i, d), brute as f64, "d={d} i={i}");
            }
        }
    }

    #[test]
    fn long_range_kernel_drift_exceeds_linear_moment() {
        // d = 3, {1: 0.2, 2: 0.1}: 0.2 * 1 + 0.1 * 6 = 0.8 versus 0.2 + 0.2 = 0.4
        let p = ModelParams::new(3, 0.0, kernel(&[(1, 0.2), (2, 0.1)])).unwrap();
        assert!((speed(&p) - 0.8).abs() < 1e-15);
        assert!((linear_moment_speed(&p) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn total_rate_examples() {
        let sep3 = ModelParams::simple_exclusion(3, 0.5).unwrap();
        assert!((total_rate_per_site(&sep3) - 1.0).abs() < 1e-15);
        let (a, b) = (0.3, 0.05);
        let p = ModelParams::new(3, 0.5, kernel(&[(1, a), (2, b)])).unwrap();
        assert!((total_rate_per_site(&p) - (3.0 * a + 6.0 * b)).abs() < 1e-15);
        let sep2 = ModelParams::simple_exclusion(2, 0.5).unwrap();
        assert!((total_rate_per_site(&sep2) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn total_rate_monotone_in_entries() {
        let base = [(1u32, 0.2), (2, 0.1), (3, 0.05)];
        let r0 = total_rate_per_site(&ModelParams::new(3, 0.5, kernel(&base)).unwrap());
        for k in 0..base.len() {
            let mut bumped = base;
            bumped[k].1 += 0.01;
            let r1 = total_rate_per_site(&ModelParams::new(3, 0.5, kernel(&bumped)).unwrap());
            assert!(r1 > r0);
        }
    }

    #[test]
    fn validation_policy() {
        assert!(RateKernel::new(vec![(1, 1.0 / 3.0)]).is_ok());
        assert!(matches!(
            RateKernel::new(vec![(1, -0.1)]),
            Err(KernelError::InvalidRate { .. })
        ));
        assert_eq!(
            RateKernel::new(vec![(2, 0.5)]),
            Err(KernelError::UnsupportedKernel)
        );
        assert_eq!(
            RateKernel::new(vec![(1, 0.0)]),
            Err(KernelError::DegenerateKernel)
        );
        assert_eq!(RateKernel::new(vec![(0, 0.5)]), Err(KernelError::SelfJump));
        assert_eq!(
            RateKernel::new(vec![(1, 0.5), (1, 0.2)]),
            Err(KernelError::DuplicateDistance(1))
        );
        assert!(ModelParams::simple_exclusion(3, 1.5).is_err());
    }

    #[test]
    fn range_ignores_zero_tail() {
        let k = kernel(&[(1, 0.2), (3, 0.0)]);
        assert_eq!(k.range(), 1);
        assert_eq!(k.to_string(), "[(1,0.2),(3,0)]");
    }
}
