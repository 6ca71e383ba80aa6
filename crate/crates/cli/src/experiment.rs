//! Replica farming, per-experiment analysis and artifact emission.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use tagsep::environment::{environment_view, psi, stationarity_check, EnvironmentView, StationarityReport};
use tagsep::kernel::speed;
use tagsep::oracle::{
    expected_horodistance_exact, horodistance_derivatives, oracle_report, FiniteGraph, OracleReport,
    MAX_TAGGED_VERTICES,
};
use tagsep::rng::replica_seed;
use tagsep::sim::{martingale_residual, Dynamics, GraphicalSim, SimError};
use tagsep::stats::{
    clt_diagnostic, linear_fit, mean_ci, speed_estimate, variance_growth, zscore, CltReport,
    LinearFit, SpeedReport, StatsError, SummaryStats, VarianceGrowth,
};
use tagsep::TrajectorySample;
use thiserror::Error;

use crate::config::{Experiment, ExperimentConfig};
use crate::plots;

pub const ORACLE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(
        "truncation breach in replica {replica} at t = {time:.3}: depth {depth} entered the margin of the ball of radius {ball_radius}; rerun with ball = {suggested}"
    )]
    Breach {
        replica: usize,
        time: f64,
        depth: u32,
        ball_radius: u32,
        suggested: u32,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Sim(SimError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Oracle(#[from] tagsep::oracle::OracleError),
    #[error(transparent)]
    Environment(#[from] tagsep::environment::EnvironmentError),
    #[error("cannot start worker pool: {0}")]
    Pool(String),
    #[error("cannot draw plot {0}")]
    Plot(String),
}

impl ExperimentError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Breach { .. } => 2,
            _ => 3,
        }
    }

    fn io(path: &Path) -> impl FnOnce(io::Error) -> Self + '_ {
        move |source| Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Header {
    pub experiment: Experiment,
    pub d: u8,
    pub rho: f64,
    pub kernel: String,
    pub replicas: usize,
    pub seed: u64,
    pub times: Vec<f64>,
    pub ball_radius: u32,
    pub safety_margin: u32,
    pub strict_boundary: bool,
    pub reference_speed: f64,
    /// Replicas whose boundary flag was raised.
    pub boundary_flags: usize,
    /// Deepest vertex any replica consulted.
    pub max_consulted_depth: u32,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary<R: Serialize> {
    pub header: Header,
    pub results: R,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
    pub pass: bool,
}

/// What a finished experiment produced.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub pass: bool,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
    pub files: Vec<PathBuf>,
    pub summary_json: String,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.pass {
            0
        } else {
            1
        }
    }
}

#[derive(Debug, Clone)]
pub struct Replica {
    pub samples: Vec<TrajectorySample>,
    pub views: Vec<EnvironmentView>,
    pub max_consulted_depth: u32,
}

impl Replica {
    fn flagged(&self) -> bool {
        self.samples.last().is_some_and(|s| s.boundary_flag)
    }
}

/// Runs replicas `0..n` on a pool of `workers` threads. Results are in
/// replica order, and the first failing replica by index decides the error.
pub fn farm<T: Send>(
    workers: usize,
    n: usize,
    job: impl Fn(usize) -> Result<T, ExperimentError> + Sync + Send,
) -> Result<Vec<T>, ExperimentError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| ExperimentError::Pool(e.to_string()))?;
    let results: Vec<Result<T, ExperimentError>> =
        pool.install(|| (0..n).into_par_iter().map(job).collect());
    results.into_iter().collect()
}

/// One replica of the configured model sampled at `times`.
pub fn simulate_replica(
    cfg: &ExperimentConfig,
    index: usize,
    times: &[f64],
    seed: u64,
    with_views: bool,
) -> Result<Replica, ExperimentError> {
    let params = cfg.sim_params(times.to_vec(), seed);
    let breach = |e: SimError| match e {
        SimError::TruncationBreach {
            time,
            depth,
            ball_radius,
        } => ExperimentError::Breach {
            replica: index,
            time,
            depth,
            ball_radius,
            suggested: 2 * ball_radius,
        },
        other => ExperimentError::Sim(other),
    };
    let mut sim = GraphicalSim::new(&params).map_err(breach)?;
    let mut samples = Vec::with_capacity(times.len());
    let mut views = Vec::new();
    for &t in times {
        sim.advance_to(t).map_err(breach)?;
        samples.push(sim.sample());
        if with_views {
            let x = sim.tagged();
            views.push(environment_view(&mut sim, &x, cfg.view_radius, cfg.model.d));
        }
    }
    Ok(Replica {
        samples,
        views,
        max_consulted_depth: sim.max_consulted_depth(),
    })
}

fn header(cfg: &ExperimentConfig, replicas: &[&Replica]) -> Header {
    let t_end = cfg.t_end();
    let probe = cfg.sim_params(vec![t_end], 0);
    Header {
        experiment: cfg.experiment,
        d: cfg.model.d,
        rho: cfg.model.rho,
        kernel: cfg.model.kernel.to_string(),
        replicas: cfg.replicas,
        seed: cfg.seed,
        times: cfg.times.clone(),
        ball_radius: probe.ball_radius,
        safety_margin: probe.safety_margin,
        strict_boundary: cfg.strict_boundary,
        reference_speed: speed(&cfg.model),
        boundary_flags: replicas.iter().filter(|r| r.flagged()).count(),
        max_consulted_depth: replicas.iter().map(|r| r.max_consulted_depth).max().unwrap_or(0),
    }
}

#[derive(Serialize)]
struct CsvRow<'a> {
    replica: usize,
    t: f64,
    #[serde(rename = "X")]
    x: String,
    horo: i64,
    depth: u32,
    drift_integral: f64,
    boundary_flag: bool,
    #[serde(skip)]
    _marker: std::marker::PhantomData<&'a ()>,
}

fn write_csv<'a>(
    path: &Path,
    rows: impl Iterator<Item = (usize, &'a TrajectorySample)>,
) -> Result<(), ExperimentError> {
    let to_io = |e: csv::Error| ExperimentError::Io {
        path: path.to_path_buf(),
        source: io::Error::other(e),
    };
    let mut w = csv::Writer::from_path(path).map_err(to_io)?;
    for (replica, s) in rows {
        w.serialize(CsvRow {
            replica,
            t: s.t,
            x: s.x.to_string(),
            horo: s.horo,
            depth: s.depth,
            drift_integral: s.drift_integral,
            boundary_flag: s.boundary_flag,
            _marker: std::marker::PhantomData,
        })
        .map_err(to_io)?;
    }
    w.flush().map_err(ExperimentError::io(path))
}

struct Emitter<'a> {
    cfg: &'a ExperimentConfig,
    files: Vec<PathBuf>,
}

impl<'a> Emitter<'a> {
    fn new(cfg: &'a ExperimentConfig) -> Result<Self, ExperimentError> {
        fs::create_dir_all(&cfg.out_dir).map_err(ExperimentError::io(&cfg.out_dir))?;
        Ok(Self {
            cfg,
            files: Vec::new(),
        })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.cfg.out_dir.join(name);
        self.files.push(p.clone());
        p
    }

    fn csv(&mut self, replicas: &[(usize, &Replica)]) -> Result<(), ExperimentError> {
        let path = self.path("replicas.csv");
        write_csv(
            &path,
            replicas
                .iter()
                .flat_map(|(i, r)| r.samples.iter().map(move |s| (*i, s))),
        )
    }

    fn finish<R: Serialize>(
        mut self,
        header: Header,
        results: R,
        checks: Vec<Check>,
        warnings: Vec<String>,
    ) -> Result<Outcome, ExperimentError> {
        let pass = checks.iter().all(|c| c.pass);
        let summary = Summary {
            header,
            results,
            checks: checks.clone(),
            warnings: warnings.clone(),
            pass,
        };
        let json = serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n";
        let path = self.path("summary.json");
        fs::write(&path, &json).map_err(ExperimentError::io(&path))?;
        Ok(Outcome {
            pass,
            checks,
            warnings,
            files: self.files,
            summary_json: json,
        })
    }

    fn plot(
        &mut self,
        name: &str,
        draw: impl FnOnce(&Path) -> Result<(), String>,
    ) -> Result<(), ExperimentError> {
        if !self.cfg.plots {
            return Ok(());
        }
        let path = self.path(name);
        draw(&path).map_err(|e| ExperimentError::Plot(format!("{}: {e}", path.display())))
    }
}

/// Runs the configured experiment and writes its artifacts.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Outcome, ExperimentError> {
    match cfg.experiment {
        Experiment::Simulate => simulate(cfg),
        Experiment::Speed => speed_sweep(cfg),
        Experiment::Clt => clt(cfg),
        Experiment::Martingale => martingale(cfg),
        Experiment::Stationarity => stationarity(cfg),
        Experiment::Oracle => oracle(cfg),
    }
}

fn replicas_at(cfg: &ExperimentConfig, times: &[f64], with_views: bool) -> Result<Vec<Replica>, ExperimentError> {
    farm(cfg.worker_count(), cfg.replicas, |r| {
        simulate_replica(cfg, r, times, replica_seed(cfg.seed, r as u64), with_views)
    })
}

fn column(replicas: &[Replica], k: usize, f: impl Fn(&TrajectorySample) -> f64) -> Vec<f64> {
    replicas.iter().map(|r| f(&r.samples[k])).collect()
}

#[derive(Debug, Serialize)]
struct TimeSummary {
    t: f64,
    horo: SummaryStats,
    depth: SummaryStats,
    drift_integral: SummaryStats,
    martingale: SummaryStats,
}

fn time_summaries(cfg: &ExperimentConfig, replicas: &[Replica]) -> Result<Vec<TimeSummary>, ExperimentError> {
    cfg.times
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            Ok(TimeSummary {
                t,
                horo: mean_ci(&column(replicas, k, |s| s.horo as f64))?,
                depth: mean_ci(&column(replicas, k, |s| s.depth as f64))?,
                drift_integral: mean_ci(&column(replicas, k, |s| s.drift_integral))?,
                martingale: mean_ci(&column(replicas, k, |s| s.horo as f64 - s.drift_integral))?,
            })
        })
        .collect()
}

fn common_plots(
    out: &mut Emitter,
    cfg: &ExperimentConfig,
    replicas: &[Replica],
    v: f64,
) -> Result<(), ExperimentError> {
    if !cfg.plots || cfg.replicas < 2 {
        return Ok(());
    }
    let fan: Vec<Vec<(f64, f64)>> = replicas
        .iter()
        .take(plots::FAN_SIZE)
        .map(|r| {
            std::iter::once((0.0, 0.0))
                .chain(r.samples.iter().map(|s| (s.t, s.horo as f64)))
                .collect()
        })
        .collect();
    out.plot("trajectories.svg", |p| plots::trajectory_fan(p, &fan, v))?;
    let means: Vec<(f64, f64, f64)> = time_summaries(cfg, replicas)?
        .iter()
        .map(|s| (s.t, s.horo.mean, s.horo.se))
        .collect();
    out.plot("mean_horo.svg", |p| plots::mean_against_line(p, &means, v))
}

fn simulate(cfg: &ExperimentConfig) -> Result<Outcome, ExperimentError> {
    let replicas = replicas_at(cfg, &cfg.times, false)?;
    let mut out = Emitter::new(cfg)?;
    out.csv(&replicas.iter().enumerate().collect::<Vec<_>>())?;
    let v = speed(&cfg.model);
    common_plots(&mut out, cfg, &replicas, v)?;
    let summaries = if cfg.replicas >= 2 {
        time_summaries(cfg, &replicas)?
    } else {
        Vec::new()
    };
    let refs: Vec<&Replica> = replicas.iter().collect();
    out.finish(header(cfg, &refs), summaries, Vec::new(), Vec::new())
}

#[derive(Debug, Serialize)]
struct FitReport {
    fit: LinearFit,
    slope_ci95: (f64, f64),
    intercept_ci95: (f64, f64),
    reference_slope: f64,
}

#[derive(Debug, Serialize)]
struct SpeedResults {
    points: Vec<SpeedReport>,
    fit: Option<FitReport>,
}

/// Seed of replica `r` at time point `k` of a sweep; point 0 reuses the
/// plain replica seeds.
pub fn sweep_seed(master: u64, k: usize, r: usize) -> u64 {
    replica_seed(master, ((k as u64) << 32) | r as u64)
}

fn speed_sweep(cfg: &ExperimentConfig) -> Result<Outcome, ExperimentError> {
    let v = speed(&cfg.model);
    let mut sets = Vec::with_capacity(cfg.times.len());
    for (k, &t) in cfg.times.iter().enumerate() {
        sets.push(farm(cfg.worker_count(), cfg.replicas, |r| {
            simulate_replica(cfg, r, &[t], sweep_seed(cfg.seed, k, r), false)
        })?);
    }
    let mut out = Emitter::new(cfg)?;
    let rows: Vec<(usize, &Replica)> = sets.iter().flat_map(|s| s.iter().enumerate()).collect();
    out.csv(&rows)?;
    let mut checks = Vec::new();
    let mut points = Vec::new();
    for (k, set) in sets.iter().enumerate() {
        let samples: Vec<TrajectorySample> = set.iter().map(|r| r.samples[0].clone()).collect();
        if cfg.times[k] > 0.0 {
            points.push(speed_estimate(&samples, v)?);
        }
    }
    if let Some(last) = points.last() {
        checks.push(Check::new(
            format!("speed at t = {}", last.t),
            last.horo.pass,
            format!(
                "<X_t>/t = {:.5} ± {:.5} (SE), reference {:.5}, z = {:.2}, tolerance 3 SE",
                last.horo.estimate, last.horo.se, v, last.horo.zscore
            ),
        ));
    }
    let fit = if sets.len() >= 3 {
        let pts: Vec<(f64, f64, f64)> = cfg
            .times
            .iter()
            .zip(&sets)
            .map(|(&t, set)| {
                let s = mean_ci(&set.iter().map(|r| r.samples[0].horo as f64).collect::<Vec<_>>())?;
                Ok((t, s.mean, s.se))
            })
            .collect::<Result<_, ExperimentError>>()?;
        let fit = linear_fit(&pts)?;
        let (s, i) = (fit.slope_ci95(), fit.intercept_ci95());
        checks.push(Check::new(
            "slope CI contains reference speed",
            s.0 <= v && v <= s.1,
            format!("slope {:.5} ± {:.5} (SE), 95% CI [{:.5}, {:.5}], reference {v:.5}", fit.slope, fit.slope_se, s.0, s.1),
        ));
        checks.push(Check::new(
            "intercept CI contains 0",
            i.0 <= 0.0 && 0.0 <= i.1,
            format!("intercept {:.4} ± {:.4} (SE), 95% CI [{:.4}, {:.4}]", fit.intercept, fit.intercept_se, i.0, i.1),
        ));
        out.plot("mean_horo.svg", |p| plots::mean_against_line(p, &pts, v))?;
        Some(FitReport {
            fit,
            slope_ci95: s,
            intercept_ci95: i,
            reference_slope: v,
        })
    } else {
        None
    };
    let refs: Vec<&Replica> = sets.iter().flatten().collect();
    out.finish(
        header(cfg, &refs),
        SpeedResults { points, fit },
        checks,
        Vec::new(),
    )
}

#[derive(Debug, Serialize)]
struct CltResults {
    horo: CltReport,
    depth: CltReport,
    growth: Option<VarianceGrowth>,
}

fn clt(cfg: &ExperimentConfig) -> Result<Outcome, ExperimentError> {
    let replicas = replicas_at(cfg, &cfg.times, false)?;
    let mut out = Emitter::new(cfg)?;
    out.csv(&replicas.iter().enumerate().collect::<Vec<_>>())?;
    let v = speed(&cfg.model);
    let d = cfg.model.d;
    let last = cfg.times.len() - 1;
    let t = cfg.times[last];
    let boot_seed = replica_seed(cfg.seed, u64::MAX);
    let horo = column(&replicas, last, |s| s.horo as f64);
    let horo_report = clt_diagnostic(&horo, t, v, d, boot_seed)?;
    let depth_report = clt_diagnostic(&column(&replicas, last, |s| s.depth as f64), t, v, d, boot_seed)?;
    let mut checks = Vec::new();
    let mut warnings = Vec::new();
    if let Some(w) = &horo_report.warning {
        warnings.push(w.clone());
    }
    if let (Some(pass), Some(ks)) = (horo_report.pass, horo_report.ks_distance) {
        checks.push(Check::new(
            format!("KS distance at t = {t}"),
            pass,
            format!(
                "KS {ks:.4} (threshold {}), centred at v t with v = {v:.5}; sigma^2 = {:.4} ± {:.4}; self-centred KS {:.4}",
                horo_report.ks_threshold,
                horo_report.sigma2,
                horo_report.sigma2_se,
                horo_report.ks_distance_self_centred.unwrap_or(f64::NAN)
            ),
        ));
    }
    let growth = if cfg.times.len() >= 2 && cfg.times[0] > 0.0 {
        let g = variance_growth(
            &column(&replicas, 0, |s| s.horo as f64),
            &horo,
            cfg.times[0],
            t,
            true,
            boot_seed,
        )?;
        let (name, pass) = if d == 2 {
            ("variance ratio CI below diffusive", g.below_diffusive)
        } else {
            ("variance ratio CI contains diffusive", g.contains_diffusive)
        };
        checks.push(Check::new(
            name,
            pass,
            format!(
                "Var({t})/Var({}) = {:.3}, bootstrap 95% CI [{:.3}, {:.3}], diffusive {}",
                cfg.times[0], g.ratio, g.ci95.0, g.ci95.1, g.diffusive
            ),
        ));
        Some(g)
    } else {
        None
    };
    common_plots(&mut out, cfg, &replicas, v)?;
    if horo_report.sigma2 > 0.0 && d != 2 {
        let scale = (horo_report.sigma2 * t).sqrt();
        let z: Vec<f64> = horo.iter().map(|x| zscore(*x, scale, v * t)).collect();
        out.plot("clt_histogram.svg", |p| plots::histogram_with_normal(p, &z))?;
    }
    let refs: Vec<&Replica> = replicas.iter().collect();
    out.finish(
        header(cfg, &refs),
        CltResults {
            horo: horo_report,
            depth: depth_report,
            growth,
        },
        checks,
        warnings,
    )
}

#[derive(Debug, Serialize)]
struct MartingalePoint {
    t: f64,
    residual: SummaryStats,
    zscore: f64,
    drift_integral: SummaryStats,
    horo: SummaryStats,
}

fn martingale(cfg: &ExperimentConfig) -> Result<Outcome, ExperimentError> {
    let replicas = replicas_at(cfg, &cfg.times, false)?;
    let mut out = Emitter::new(cfg)?;
    out.csv(&replicas.iter().enumerate().collect::<Vec<_>>())?;
    let mut points = Vec::new();
    let mut checks = Vec::new();
    for (k, &t) in cfg.times.iter().enumerate() {
        let residuals: Vec<f64> = replicas
            .iter()
            .map(|r| martingale_residual(&r.samples[k..=k])[0].1)
            .collect();
        let m = mean_ci(&residuals)?;
        let z = zscore(m.mean, m.se, 0.0);
        checks.push(Check::new(
            format!("mean M_t = 0 at t = {t}"),
            z.abs() < 3.0,
            format!("mean {:.5} ± {:.5} (SE), z = {z:.2}, tolerance 3 SE", m.mean, m.se),
        ));
        points.push(MartingalePoint {
            t,
            residual: m,
            zscore: z,
            drift_integral: mean_ci(&column(&replicas, k, |s| s.drift_integral))?,
            horo: mean_ci(&column(&replicas, k, |s| s.horo as f64))?,
        });
    }
    common_plots(&mut out, cfg, &replicas, speed(&cfg.model))?;
    let refs: Vec<&Replica> = replicas.iter().collect();
    out.finish(header(cfg, &refs), points, checks, Vec::new())
}

#[derive(Debug, Serialize)]
struct StationarityResults {
    report: StationarityReport,
    /// Mean of the environment drift functional at each time.
    psi: Vec<(f64, SummaryStats)>,
}

fn stationarity(cfg: &ExperimentConfig) -> Result<Outcome, ExperimentError> {
    let replicas = replicas_at(cfg, &cfg.times, true)?;
    let mut out = Emitter::new(cfg)?;
    out.csv(&replicas.iter().enumerate().collect::<Vec<_>>())?;
    let views: Vec<Vec<EnvironmentView>> = replicas.iter().map(|r| r.views.clone()).collect();
    let report = stationarity_check(&views, &cfg.times, cfg.model.rho)?;
    let mut psi_means = Vec::new();
    if cfg.replicas >= 2 {
        for (k, &t) in cfg.times.iter().enumerate() {
            let vals = views
                .iter()
                .map(|v| psi(&v[k], &cfg.model.kernel, cfg.model.d))
                .collect::<Result<Vec<_>, _>>()?;
            psi_means.push((t, mean_ci(&vals)?));
        }
    }
    let checks = vec![Check::new(
        "Palm marginals",
        report.within(3.0),
        format!(
            "max |z| = {:.2} over {} site-time pairs (tolerance 3 SE), origin always occupied: {}",
            report.max_abs_zscore,
            report.sites.len(),
            report.origin_always_occupied
        ),
    )];
    let refs: Vec<&Replica> = replicas.iter().collect();
    out.finish(
        header(cfg, &refs),
        StationarityResults {
            report,
            psi: psi_means,
        },
        checks,
        Vec::new(),
    )
}

#[derive(Debug, Serialize)]
struct TaggedExact {
    t: f64,
    expected_horo: f64,
    reference_vt: f64,
}

#[derive(Debug, Serialize)]
struct OracleResults {
    invariance: OracleReport,
    /// `d^k/dt^k E<X_t>` at 0 for the tagged chain on the ball.
    horo_derivatives: Option<Vec<f64>>,
    tagged: Vec<TaggedExact>,
}

fn oracle(cfg: &ExperimentConfig) -> Result<Outcome, ExperimentError> {
    let out = Emitter::new(cfg)?;
    let r = cfg.oracle_radius as usize;
    let report = oracle_report(cfg.model.d, r, &cfg.model.kernel, cfg.model.rho, ORACLE_TOLERANCE)?;
    let graph = FiniteGraph::ball(cfg.model.d, r, &cfg.model.kernel);
    let v = speed(&cfg.model);
    let (derivs, tagged) = if graph.len() <= MAX_TAGGED_VERTICES {
        let derivs = horodistance_derivatives(&graph, cfg.model.rho, 2)?;
        let tagged = cfg
            .times
            .iter()
            .map(|&t| {
                Ok(TaggedExact {
                    t,
                    expected_horo: expected_horodistance_exact(&graph, cfg.model.rho, t)?,
                    reference_vt: v * t,
                })
            })
            .collect::<Result<Vec<_>, ExperimentError>>()?;
        (Some(derivs), tagged)
    } else {
        (None, Vec::new())
    };
    let checks = vec![Check::new(
        "Bernoulli invariance and detailed balance",
        report.pass,
        format!(
            "invariance residual {:.2e}, detailed-balance residual {:.2e}, row sums {:.2e}, tolerance {:.0e}",
            report.invariance_residual,
            report.detailed_balance_residual,
            report.max_row_sum,
            report.tolerance
        ),
    )];
    let header = header(cfg, &[]);
    out.finish(
        header,
        OracleResults {
            invariance: report,
            horo_derivatives: derivs,
            tagged,
        },
        checks,
        Vec::new(),
    )
}
