//! Estimators and diagnostics over replica samples.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::sim::TrajectorySample;

pub const Z95: f64 = 1.96;
pub const BOOTSTRAP_RESAMPLES: usize = 2000;
pub const MIN_CLT_SAMPLES: usize = 500;
pub const KS_THRESHOLD: f64 = 0.05;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("need at least {min} samples, got {n}")]
    InsufficientData { n: usize, min: usize },
    #[error("samples are not all taken at the same time")]
    MixedTimes,
    #[error("design is degenerate: need at least three distinct times")]
    SingularFit,
    #[error("time must be positive, got {0}")]
    NonPositiveTime(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub n: usize,
    pub mean: f64,
    pub se: f64,
    pub variance: f64,
    pub ci95: (f64, f64),
}

pub fn mean_ci(samples: &[f64]) -> Result<SummaryStats, StatsError> {
    let n = samples.len();
    if n < 2 {
        return Err(StatsError::InsufficientData { n, min: 2 });
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let variance = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let se = (variance / n as f64).sqrt();
    Ok(SummaryStats {
        n,
        mean,
        se,
        variance,
        ci95: (mean - Z95 * se, mean + Z95 * se),
    })
}

/// `(estimate - reference) / se`, with a zero standard error giving 0 on an
/// exact match and an infinite score otherwise.
pub fn zscore(estimate: f64, se: f64, reference: f64) -> f64 {
    let dev = estimate - reference;
    if se > 0.0 {
        dev / se
    } else if dev == 0.0 {
        0.0
    } else {
        f64::INFINITY.copysign(dev)
    }
}

/// An estimate compared against a reference value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub estimate: f64,
    pub se: f64,
    pub ci95: (f64, f64),
    pub reference: f64,
    pub zscore: f64,
    pub pass: bool,
}

impl Verdict {
    /// Passes when the reference lies within `k` standard errors.
    pub fn within(estimate: f64, se: f64, reference: f64, k: f64) -> Self {
        let z = zscore(estimate, se, reference);
        Self {
            estimate,
            se,
            ci95: (estimate - Z95 * se, estimate + Z95 * se),
            reference,
            zscore: z,
            pass: z.abs() < k,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedReport {
    pub t: f64,
    pub n: usize,
    /// `<X_t>/t` against the reference speed.
    pub horo: Verdict,
    /// `|X_t|/t`, biased upwards by `O(1/t)`.
    pub depth: Verdict,
}

/// Speed from samples sharing one time `t > 0`; passes within 3 SE.
pub fn speed_estimate(samples: &[TrajectorySample], v_ref: f64) -> Result<SpeedReport, StatsError> {
    let t = samples
        .first()
        .map(|s| s.t)
        .ok_or(StatsError::InsufficientData { n: 0, min: 2 })?;
    if samples.iter().any(|s| s.t != t) {
        return Err(StatsError::MixedTimes);
    }
    if t <= 0.0 {
        return Err(StatsError::NonPositiveTime(t));
    }
    let horo: Vec<f64> = samples.iter().map(|s| s.horo as f64 / t).collect();
    let depth: Vec<f64> = samples.iter().map(|s| s.depth as f64 / t).collect();
    let h = mean_ci(&horo)?;
    let d = mean_ci(&depth)?;
    Ok(SpeedReport {
        t,
        n: samples.len(),
        horo: Verdict::within(h.mean, h.se, v_ref, 3.0),
        depth: Verdict::within(d.mean, d.se, v_ref, 3.0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub slope_se: f64,
    pub intercept: f64,
    pub intercept_se: f64,
    /// Weighted residual sum of squares.
    pub chi2: f64,
    pub dof: usize,
}

impl LinearFit {
    pub fn slope_ci95(&self) -> (f64, f64) {
        (
            self.slope - Z95 * self.slope_se,
            self.slope + Z95 * self.slope_se,
        )
    }

    pub fn intercept_ci95(&self) -> (f64, f64) {
        (
            self.intercept - Z95 * self.intercept_se,
            self.intercept + Z95 * self.intercept_se,
        )
    }
}

/// Weighted least squares of `mean` on `t` with weights `1/se²`. If any
/// `se` is zero the fit is unweighted and SEs come from the residuals.
pub fn linear_fit(points: &[(f64, f64, f64)]) -> Result<LinearFit, StatsError> {
    let mut ts: Vec<f64> = points.iter().map(|p| p.0).collect();
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    if ts.len() < 3 {
        return Err(StatsError::SingularFit);
    }
    let weighted = points.iter().all(|p| p.2 > 0.0);
    let w = |p: &(f64, f64, f64)| if weighted { 1.0 / (p.2 * p.2) } else { 1.0 };
    let (mut sw, mut swt, mut swtt, mut swy, mut swty) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for p in points {
        let wi = w(p);
        sw += wi;
        swt += wi * p.0;
        swtt += wi * p.0 * p.0;
        swy += wi * p.1;
        swty += wi * p.0 * p.1;
    }
    let det = sw * swtt - swt * swt;
    if det.abs() <= f64::EPSILON * sw * swtt {
        return Err(StatsError::SingularFit);
    }
    let slope = (sw * swty - swt * swy) / det;
    let intercept = (swtt * swy - swt * swty) / det;
    let chi2: f64 = points
        .iter()
        .map(|p| w(p) * (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let dof = points.len() - 2;
    let scale = if weighted { 1.0 } else { chi2 / dof as f64 };
    Ok(LinearFit {
        slope,
        slope_se: (scale * sw / det).sqrt(),
        intercept,
        intercept_se: (scale * swtt / det).sqrt(),
        chi2,
        dof,
    })
}

/// Kolmogorov–Smirnov distance of the sample to the standard normal.
pub fn ks_standard_normal(samples: &[f64]) -> f64 {
    let normal = Normal::standard();
    let mut z = samples.to_vec();
    z.sort_by(f64::total_cmp);
    let n = z.len() as f64;
    z.iter().enumerate().fold(0.0, |d, (i, &x)| {
        let f = normal.cdf(x);
        d.max((i + 1) as f64 / n - f).max(f - i as f64 / n)
    })
}

fn sample_variance(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

fn std_dev(xs: &[f64]) -> f64 {
    sample_variance(xs).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CltReport {
    pub t: f64,
    pub n: usize,
    pub v: f64,
    /// Sample variance of `<X_t>/sqrt(t)`.
    pub sigma2: f64,
    pub sigma2_se: f64,
    /// KS distance of `(x - v t)/(σ̂ sqrt(t))` to N(0, 1).
    pub ks_distance: Option<f64>,
    /// KS distance after centring at the sample mean instead of `v t`.
    pub ks_distance_self_centred: Option<f64>,
    pub ks_threshold: f64,
    pub degenerate: bool,
    pub warning: Option<String>,
    /// `None` when the check is skipped.
    pub pass: Option<bool>,
}

/// Gaussian-shape check of displacement samples at a fixed time `t`.
pub fn clt_diagnostic(samples: &[f64], t: f64, v: f64, d: u8, seed: u64) -> Result<CltReport, StatsError> {
    let n = samples.len();
    if n < MIN_CLT_SAMPLES {
        return Err(StatsError::InsufficientData {
            n,
            min: MIN_CLT_SAMPLES,
        });
    }
    if t <= 0.0 {
        return Err(StatsError::NonPositiveTime(t));
    }
    if d == 2 {
        return Ok(CltReport {
            t,
            n,
            v,
            sigma2: sample_variance(samples) / t,
            sigma2_se: 0.0,
            ks_distance: None,
            ks_distance_self_centred: None,
            ks_threshold: KS_THRESHOLD,
            degenerate: false,
            warning: Some("subdiffusive regime for d = 2: no central limit claim, check skipped".into()),
            pass: None,
        });
    }
    let xs = sorted(samples);
    let sigma2 = sample_variance(&xs) / t;
    let scale = (sigma2 * t).sqrt();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let studentize = |c: f64| -> Vec<f64> { xs.iter().map(|x| zscore(*x, scale, c)).collect() };
    let ks_distance = ks_standard_normal(&studentize(v * t));
    let ks_distance_self_centred = ks_standard_normal(&studentize(mean));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut buf = vec![0.0; n];
    let boot: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
        .map(|_| {
            buf.iter_mut().for_each(|b| *b = xs[rng.random_range(0..n)]);
            sample_variance(&buf) / t
        })
        .collect();
    Ok(CltReport {
        t,
        n,
        v,
        sigma2,
        sigma2_se: std_dev(&boot),
        ks_distance: Some(ks_distance),
        ks_distance_self_centred: Some(ks_distance_self_centred),
        ks_threshold: KS_THRESHOLD,
        degenerate: scale == 0.0,
        warning: None,
        pass: Some(ks_distance < KS_THRESHOLD),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceGrowth {
    pub t1: f64,
    pub t2: f64,
    pub ratio: f64,
    pub ci95: (f64, f64),
    /// `t2/t1`, the diffusive value.
    pub diffusive: f64,
    pub contains_diffusive: bool,
    pub below_diffusive: bool,
}

/// `Var(t2)/Var(t1)` with a percentile bootstrap interval. With `paired`,
/// position `i` of both slices is the same replica and replicas are
/// resampled jointly.
pub fn variance_growth(
    early: &[f64],
    late: &[f64],
    t1: f64,
    t2: f64,
    paired: bool,
    seed: u64,
) -> Result<VarianceGrowth, StatsError> {
    let min = early.len().min(late.len());
    if min < 2 || (paired && early.len() != late.len()) {
        return Err(StatsError::InsufficientData { n: min, min: 2 });
    }
    let ratio = sample_variance(late) / sample_variance(early);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut boot = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    if paired {
        let mut pairs: Vec<(f64, f64)> = early.iter().copied().zip(late.iter().copied()).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let n = pairs.len();
        let (mut a, mut b) = (vec![0.0; n], vec![0.0; n]);
        for _ in 0..BOOTSTRAP_RESAMPLES {
            for k in 0..n {
                let (x, y) = pairs[rng.random_range(0..n)];
                a[k] = x;
                b[k] = y;
            }
            boot.push(sample_variance(&b) / sample_variance(&a));
        }
    } else {
        let (e, l) = (sorted(early), sorted(late));
        let (mut a, mut b) = (vec![0.0; e.len()], vec![0.0; l.len()]);
        for _ in 0..BOOTSTRAP_RESAMPLES {
            a.iter_mut().for_each(|x| *x = e[rng.random_range(0..e.len())]);
            b.iter_mut().for_each(|x| *x = l[rng.random_range(0..l.len())]);
            boot.push(sample_variance(&b) / sample_variance(&a));
        }
    }
    boot.sort_by(f64::total_cmp);
    let ci95 = (percentile(&boot, 0.025), percentile(&boot, 0.975));
    let diffusive = t2 / t1;
    Ok(VarianceGrowth {
        t1,
        t2,
        ratio,
        ci95,
        diffusive,
        contains_diffusive: ci95.0 <= diffusive && diffusive <= ci95.1,
        below_diffusive: ci95.1 < diffusive,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, StandardNormal};

    fn normals(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    #[test]
    fn mean_ci_examples() {
        let s = mean_ci(&[1.0; 4]).unwrap();
        assert_eq!((s.mean, s.se, s.variance), (1.0, 0.0, 0.0));
        let s = mean_ci(&[0.0, 2.0]).unwrap();
        assert_eq!((s.mean, s.se), (1.0, 1.0));
        assert_eq!(s.ci95, (1.0 - Z95, 1.0 + Z95));
        assert!(mean_ci(&[1.0]).is_err());
    }

    fn at(t: f64, horo: i64) -> TrajectorySample {
        TrajectorySample {
            t,
            horo,
            depth: horo.unsigned_abs() as u32,
            ..TrajectorySample::initial()
        }
    }

    #[test]
    fn speed_of_frozen_samples_is_exact() {
        let s = vec![at(10.0, 0); 5];
        let r = speed_estimate(&s, 0.0).unwrap();
        assert_eq!(r.horo.estimate, 0.0);
        assert!(r.horo.pass);
        assert!(!speed_estimate(&s, 0.1).unwrap().horo.pass);
        assert_eq!(
            speed_estimate(&[at(1.0, 1), at(2.0, 1)], 0.0),
            Err(StatsError::MixedTimes)
        );
    }

    #[test]
    fn exact_line_fit() {
        let pts: Vec<_> = [1.0, 2.0, 5.0, 7.0].iter().map(|&t| (t, 2.0 * t, 0.0)).collect();
        let f = linear_fit(&pts).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12 && f.intercept.abs() < 1e-12);
        assert!(f.slope_se < 1e-6);
        let flat: Vec<_> = [1.0, 2.0, 3.0].iter().map(|&t| (t, 0.0, 0.1)).collect();
        let f = linear_fit(&flat).unwrap();
        assert_eq!((f.slope, f.intercept), (0.0, 0.0));
        assert!(f.slope_se > 0.0);
        assert_eq!(
            linear_fit(&[(1.0, 1.0, 1.0), (1.0, 2.0, 1.0), (2.0, 1.0, 1.0)]),
            Err(StatsError::SingularFit)
        );
    }

    #[test]
    fn weighted_fit_standard_errors() {
        // Two-parameter WLS with unit weights at t = 0, 1, 2.
        let f = linear_fit(&[(0.0, 0.0, 1.0), (1.0, 1.0, 1.0), (2.0, 2.0, 1.0)]).unwrap();
        assert!((f.slope_se - (0.5f64).sqrt()).abs() < 1e-12);
        assert!((f.intercept_se - (5.0f64 / 6.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn ks_calibration() {
        let n = 2000;
        let hits = (0..200)
            .filter(|&s| ks_standard_normal(&normals(n, s)) < 1.36 / (n as f64).sqrt())
            .count();
        assert!((180..=198).contains(&hits), "{hits}");
    }

    #[test]
    fn clt_on_gaussian_input() {
        let t: f64 = 100.0;
        let xs: Vec<f64> = normals(2000, 7).iter().map(|z| 0.5 * t + 3.0 * z * t.sqrt()).collect();
        let r = clt_diagnostic(&xs, t, 0.5, 3, 1).unwrap();
        assert!(r.ks_distance.unwrap() < 0.05, "{r:?}");
        assert!((r.sigma2 - 9.0).abs() < 4.0 * r.sigma2_se);
        assert_eq!(r.pass, Some(true));
    }

    #[test]
    fn clt_constant_and_subdiffusive_cases() {
        let r = clt_diagnostic(&[5.0; 600], 10.0, 0.5, 3, 1).unwrap();
        assert!(r.degenerate && r.ks_distance.unwrap() >= 0.5);
        let r = clt_diagnostic(&[4.0; 600], 10.0, 0.5, 3, 1).unwrap();
        assert!(r.ks_distance.unwrap() >= 0.5);
        let r = clt_diagnostic(&normals(600, 1), 10.0, 0.0, 2, 1).unwrap();
        assert!(r.warning.unwrap().contains("subdiffusive"));
        assert_eq!(r.pass, None);
        assert!(clt_diagnostic(&[1.0; 10], 1.0, 0.0, 3, 1).is_err());
    }

    #[test]
    fn diffusive_growth_contains_four() {
        let a: Vec<f64> = normals(4000, 3).iter().map(|z| z * 5.0).collect();
        let b: Vec<f64> = normals(4000, 4).iter().map(|z| z * 10.0).collect();
        let g = variance_growth(&a, &b, 25.0, 100.0, false, 9).unwrap();
        assert!(g.contains_diffusive && !g.below_diffusive, "{g:?}");
        let c: Vec<f64> = normals(4000, 5).iter().map(|z| z * 7.0).collect();
        let g = variance_growth(&a, &c, 25.0, 100.0, false, 9).unwrap();
        assert!(g.below_diffusive);
    }

    #[test]
    fn paired_growth_uses_replica_pairs() {
        // Independent increments: late = early + fresh noise of three times the variance.
        let a: Vec<f64> = normals(4000, 11).iter().map(|z| z * 5.0).collect();
        let inc = normals(4000, 12);
        let b: Vec<f64> = a.iter().zip(&inc).map(|(x, z)| x + z * 75f64.sqrt()).collect();
        let g = variance_growth(&a, &b, 25.0, 100.0, true, 2).unwrap();
        assert!(g.contains_diffusive, "{g:?}");
        assert!(variance_growth(&a, &b[..10], 25.0, 100.0, true, 2).is_err());
    }
}
