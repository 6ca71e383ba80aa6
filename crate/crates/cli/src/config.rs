//! Key-value experiment configuration.
//!
//! One `key = value` entry per line; entries may also be separated by commas
//! outside brackets, so `d=3, experiment=speed` is a complete document.
//! `#` starts a comment.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;
use tagsep::kernel::{simple_exclusion_kernel, ModelParams, RateKernel};
use tagsep::sim::default_ball_radius;
use tagsep::SimParams;
use thiserror::Error;

pub const KEYS: &[&str] = &[
    "experiment",
    "d",
    "rho",
    "kernel",
    "times",
    "replicas",
    "seed",
    "ball",
    "margin",
    "strict_boundary",
    "out_dir",
    "workers",
    "plots",
    "view_radius",
    "oracle_radius",
];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("key `{0}` given more than once")]
    DuplicateKey(String),
    #[error("missing required key `{0}`")]
    MissingKey(&'static str),
    #[error("malformed entry `{0}`: expected key = value")]
    Malformed(String),
    #[error("invalid value for `{key}`: {reason}")]
    Invalid { key: String, reason: String },
}

fn invalid(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Simulate,
    Speed,
    Clt,
    Martingale,
    Stationarity,
    Oracle,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Self::Simulate,
        Self::Speed,
        Self::Clt,
        Self::Martingale,
        Self::Stationarity,
        Self::Oracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Simulate => "simulate",
            Self::Speed => "speed",
            Self::Clt => "clt",
            Self::Martingale => "martingale",
            Self::Stationarity => "stationarity",
            Self::Oracle => "oracle",
        }
    }

    pub fn default_times(self) -> Vec<f64> {
        match self {
            Self::Simulate => (1..=10).map(|k| 10.0 * k as f64).collect(),
            Self::Speed => vec![100.0],
            Self::Clt => vec![25.0, 100.0],
            Self::Martingale => vec![10.0],
            Self::Stationarity => vec![0.0, 5.0, 10.0],
            Self::Oracle => vec![0.5, 1.0],
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| invalid("experiment", format!("`{s}` is not one of simulate, speed, clt, martingale, stationarity, oracle")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BallPolicy {
    Auto,
    Radius(u32),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub model: ModelParams,
    pub times: Vec<f64>,
    pub replicas: usize,
    pub seed: u64,
    pub ball: BallPolicy,
    /// Defaults to the kernel range.
    pub margin: Option<u32>,
    pub strict_boundary: bool,
    pub out_dir: PathBuf,
    /// Defaults to the available parallelism.
    pub workers: Option<usize>,
    pub plots: bool,
    pub view_radius: u32,
    pub oracle_radius: u32,
}

impl ExperimentConfig {
    pub fn t_end(&self) -> f64 {
        self.times.iter().copied().fold(0.0, f64::max)
    }

    pub fn ball_radius(&self, t_end: f64) -> u32 {
        match self.ball {
            BallPolicy::Auto => default_ball_radius(&self.model, t_end),
            BallPolicy::Radius(l) => l,
        }
    }

    /// Simulation parameters for one replica sampled at `times`.
    pub fn sim_params(&self, times: Vec<f64>, seed: u64) -> SimParams {
        let mut p = SimParams::new(self.model.clone(), times, seed);
        p.ball_radius = self.ball_radius(p.t_end);
        if let Some(m) = self.margin {
            p.safety_margin = m;
        }
        p.strict_boundary = self.strict_boundary;
        p
    }

    pub fn worker_count(&self) -> usize {
        self.workers.unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
    }
}

/// Splits a document into `(key, value)` entries.
pub fn entries(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("");
        let mut depth = 0i32;
        let mut start = 0;
        let mut pieces = Vec::new();
        for (i, c) in line.char_indices() {
            match c {
                '[' | '(' => depth += 1,
                ']' | ')' => depth -= 1,
                ',' if depth == 0 => {
                    pieces.push(&line[start..i]);
                    start = i + 1;
                }
                _ => {}
            }
        }
        pieces.push(&line[start..]);
        for piece in pieces {
            let piece = piece.trim();
            if piece.is_empty() {
                continue;
            }
            let (k, v) = piece
                .split_once('=')
                .ok_or_else(|| ConfigError::Malformed(piece.to_string()))?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() || v.is_empty() {
                return Err(ConfigError::Malformed(piece.to_string()));
            }
            out.push((k.to_string(), v.to_string()));
        }
    }
    Ok(out)
}

fn number<T: FromStr>(key: &str, v: &str) -> Result<T, ConfigError> {
    v.parse()
        .map_err(|_| invalid(key, format!("`{v}` is not a valid number")))
}

fn switch(key: &str, v: &str) -> Result<bool, ConfigError> {
    match v {
        "on" | "true" | "yes" => Ok(true),
        "off" | "false" | "no" => Ok(false),
        _ => Err(invalid(key, format!("`{v}` is not on/off"))),
    }
}

fn bracketed<'a>(key: &str, v: &'a str, open: char, close: char) -> Result<&'a str, ConfigError> {
    v.strip_prefix(open)
        .and_then(|s| s.strip_suffix(close))
        .ok_or_else(|| invalid(key, format!("expected {open}...{close}, got `{v}`")))
}

/// `sep` or a list `[(i, p), ...]`.
pub fn parse_kernel(v: &str, d: u32) -> Result<RateKernel, ConfigError> {
    let err = |e: tagsep::kernel::KernelError| invalid("kernel", e.to_string());
    if v == "sep" {
        return simple_exclusion_kernel(d).map_err(err);
    }
    let inner = bracketed("kernel", v, '[', ']')?;
    let mut pairs = Vec::new();
    let mut rest = inner.trim();
    while !rest.is_empty() {
        let open = rest
            .find('(')
            .ok_or_else(|| invalid("kernel", format!("expected (distance, rate) in `{v}`")))?;
        let close = rest[open..]
            .find(')')
            .map(|c| c + open)
            .ok_or_else(|| invalid("kernel", format!("unclosed pair in `{v}`")))?;
        let (i, p) = rest[open + 1..close]
            .split_once(',')
            .ok_or_else(|| invalid("kernel", format!("expected (distance, rate) in `{v}`")))?;
        pairs.push((number::<u32>("kernel", i.trim())?, number::<f64>("kernel", p.trim())?));
        rest = rest[close + 1..].trim_start_matches([',', ' ']).trim();
    }
    RateKernel::new(pairs).map_err(err)
}

pub fn parse_times(v: &str) -> Result<Vec<f64>, ConfigError> {
    let body = if v.starts_with('[') {
        bracketed("times", v, '[', ']')?
    } else {
        v
    };
    let times: Vec<f64> = body
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| number("times", s))
        .collect::<Result<_, _>>()?;
    if times.is_empty() {
        return Err(invalid("times", "at least one time is required"));
    }
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(invalid("times", "times must be finite and non-negative"));
    }
    if times.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("times", "times must be strictly increasing"));
    }
    Ok(times)
}

/// Parses a document; `experiment` must be present.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    from_entries(entries(text)?, None)
}

/// Builds a configuration from entries. `experiment` overrides (or
/// supplies) the `experiment` key.
pub fn from_entries(
    list: Vec<(String, String)>,
    experiment: Option<Experiment>,
) -> Result<ExperimentConfig, ConfigError> {
    let mut map = BTreeMap::new();
    for (k, v) in list {
        if !KEYS.contains(&k.as_str()) {
            return Err(ConfigError::UnknownKey(k));
        }
        if map.insert(k.clone(), v).is_some() {
            return Err(ConfigError::DuplicateKey(k));
        }
    }
    let get = |k: &str| map.get(k).map(String::as_str);
    let experiment = match (experiment, get("experiment")) {
        (Some(e), _) => e,
        (None, Some(v)) => v.parse()?,
        (None, None) => return Err(ConfigError::MissingKey("experiment")),
    };
    let d: u32 = number("d", get("d").ok_or(ConfigError::MissingKey("d"))?)?;
    if !(2..=255).contains(&d) {
        return Err(invalid("d", format!("d = {d} violates 2 <= d <= 255")));
    }
    let rho: f64 = get("rho").map_or(Ok(0.5), |v| number("rho", v))?;
    let kernel = parse_kernel(get("kernel").unwrap_or("sep"), d)?;
    let model = ModelParams::new(d, rho, kernel).map_err(|e| {
        let key = if matches!(e, tagsep::kernel::KernelError::InvalidDensity(_)) {
            "rho"
        } else {
            "kernel"
        };
        invalid(key, e.to_string())
    })?;
    let times = get("times").map_or_else(|| Ok(experiment.default_times()), parse_times)?;
    let replicas: usize = get("replicas").map_or(Ok(1000), |v| number("replicas", v))?;
    if replicas == 0 {
        return Err(invalid("replicas", "replicas must be at least 1"));
    }
    let seed = get("seed").map_or(Ok(0), |v| number("seed", v))?;
    let ball = match get("ball") {
        None | Some("auto") => BallPolicy::Auto,
        Some(v) => BallPolicy::Radius(number("ball", v)?),
    };
    let margin = get("margin").map(|v| number("margin", v)).transpose()?;
    let range = model.kernel.range();
    if let Some(m) = margin {
        if m < range {
            return Err(invalid("margin", format!("margin {m} is below the kernel range {range}")));
        }
    }
    if let BallPolicy::Radius(l) = ball {
        let m = margin.unwrap_or(range);
        if l <= m {
            return Err(invalid("ball", format!("ball radius {l} must exceed the margin {m}")));
        }
    }
    let strict_boundary = get("strict_boundary").map_or(Ok(true), |v| switch("strict_boundary", v))?;
    let out_dir = PathBuf::from(get("out_dir").unwrap_or("out"));
    let workers = get("workers").map(|v| number("workers", v)).transpose()?;
    if workers == Some(0) {
        return Err(invalid("workers", "workers must be at least 1"));
    }
    let plots = get("plots").map_or(Ok(false), |v| switch("plots", v))?;
    let view_radius = get("view_radius").map_or(Ok(2), |v| number("view_radius", v))?;
    if view_radius < range {
        return Err(invalid(
            "view_radius",
            format!("view radius {view_radius} is below the kernel range {range}"),
        ));
    }
    let oracle_radius = get("oracle_radius").map_or(Ok(1), |v| number("oracle_radius", v))?;
    Ok(ExperimentConfig {
        experiment,
        model,
        times,
        replicas,
        seed,
        ball,
        margin,
        strict_boundary,
        out_dir,
        workers,
        plots,
        view_radius,
        oracle_radius,
    })
}
