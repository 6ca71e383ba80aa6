//! Exact finite-state reference computations.
//!
//! On a ball small enough to enumerate, the exclusion process and the joint
//! (tagged position, configuration) chain are finite Markov chains. Their
//! generators are built explicitly and the semigroup is applied to a vector
//! with a scaled Taylor series, giving exact marginals against which the
//! simulators can be compared.

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernel::RateKernel;
use crate::tree::{ball, busemann, distance, Ray, Vertex};

pub const MAX_EXCLUSION_VERTICES: usize = 14;
pub const MAX_TAGGED_VERTICES: usize = 12;
const SERIES_TOL: f64 = 1e-13;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("{count} vertices exceed the oracle limit of {max}")]
    TooManyVertices { count: usize, max: usize },
    #[error("negative time {0}")]
    NegativeTime(f64),
    #[error("vector of length {got} does not match state space of size {want}")]
    DimensionMismatch { got: usize, want: usize },
    #[error("state space of size {0} is not a plain exclusion state space")]
    NotPlainChain(usize),
}

/// A finite vertex set with the pair rates of a kernel restricted to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteGraph {
    pub d: u8,
    pub vertices: Vec<Vertex>,
    /// `(i, j, rate)` with `i < j`, one entry per unordered pair.
    pub pair_rates: Vec<(usize, usize, f64)>,
}

impl FiniteGraph {
    /// The closed ball of radius `r` in `T^d`, root first.
    pub fn ball(d: u8, r: usize, kernel: &RateKernel) -> Self {
        let vertices = ball(r, d);
        let mut pair_rates = Vec::new();
        for i in 0..vertices.len() {
            for j in i + 1..vertices.len() {
                let rate = kernel.rate(distance(&vertices[i], &vertices[j]) as u32);
                if rate > 0.0 {
                    pair_rates.push((i, j, rate));
                }
            }
        }
        Self {
            d,
            vertices,
            pair_rates,
        }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn index_of(&self, v: &Vertex) -> Option<usize> {
        self.vertices.iter().position(|w| w == v)
    }

    pub fn horo(&self) -> Vec<i64> {
        self.vertices
            .iter()
            .map(|v| busemann(v, Ray::standard()).get())
            .collect()
    }
}

/// Rate matrix stored by rows; off-diagonal entries are kept sparse and the
/// diagonal separately.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorMatrix {
    diag: Vec<f64>,
    rows: Vec<Vec<(u32, f64)>>,
}

impl GeneratorMatrix {
    fn from_rows(rows: Vec<Vec<(u32, f64)>>) -> Self {
        let diag = rows
            .iter()
            .map(|r| -r.iter().map(|&(_, q)| q).sum::<f64>())
            .collect();
        Self { diag, rows }
    }

    /// Any square matrix, diagonal included as given.
    pub fn from_dense(m: &Array2<f64>) -> Self {
        let n = m.nrows();
        let mut rows = vec![Vec::new(); n];
        let mut diag = vec![0.0; n];
        for ((i, j), &q) in m.indexed_iter() {
            if i == j {
                diag[i] = q;
            } else if q != 0.0 {
                rows[i].push((j as u32, q));
            }
        }
        Self { diag, rows }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.diag[i];
        }
        self.rows[i]
            .iter()
            .filter(|&&(k, _)| k as usize == j)
            .map(|&(_, q)| q)
            .sum()
    }

    /// Off-diagonal entries of row `i`.
    pub fn row(&self, i: usize) -> &[(u32, f64)] {
        &self.rows[i]
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum::<usize>() + self.dim()
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let n = self.dim();
        let mut m = Array2::zeros((n, n));
        for i in 0..n {
            m[[i, i]] = self.diag[i];
            for &(j, q) in &self.rows[i] {
                m[[i, j as usize]] += q;
            }
        }
        m
    }

    /// `max_i |Σ_j Q[i, j]|`.
    pub fn max_row_sum(&self) -> f64 {
        (0..self.dim())
            .map(|i| (self.diag[i] + self.rows[i].iter().map(|&(_, q)| q).sum::<f64>()).abs())
            .fold(0.0, f64::max)
    }

    pub fn off_diagonals_nonnegative(&self) -> bool {
        self.rows.iter().flatten().all(|&(_, q)| q >= 0.0)
    }

    /// Row vector times matrix, `vᵀQ`.
    pub fn apply_left(&self, v: &[f64]) -> Result<Vec<f64>, OracleError> {
        self.check_len(v.len())?;
        let mut out: Vec<f64> = v.iter().zip(&self.diag).map(|(a, b)| a * b).collect();
        for (i, row) in self.rows.iter().enumerate() {
            let vi = v[i];
            if vi == 0.0 {
                continue;
            }
            for &(j, q) in row {
                out[j as usize] += vi * q;
            }
        }
        Ok(out)
    }

    fn check_len(&self, got: usize) -> Result<(), OracleError> {
        if got != self.dim() {
            return Err(OracleError::DimensionMismatch {
                got,
                want: self.dim(),
            });
        }
        Ok(())
    }

    fn norm_inf(&self) -> f64 {
        (0..self.dim())
            .map(|i| self.diag[i].abs() + self.rows[i].iter().map(|&(_, q)| q.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// Generator of the unlabeled exclusion process. State `s` is a bit mask
/// with bit `k` set iff vertex `k` is occupied.
pub fn build_exclusion_generator(graph: &FiniteGraph) -> Result<GeneratorMatrix, OracleError> {
    let n = graph.len();
    if n > MAX_EXCLUSION_VERTICES {
        return Err(OracleError::TooManyVertices {
            count: n,
            max: MAX_EXCLUSION_VERTICES,
        });
    }
    let rows = (0..1usize << n)
        .map(|s| {
            graph
                .pair_rates
                .iter()
                .filter(|&&(i, j, _)| (s >> i & 1) != (s >> j & 1))
                .map(|&(i, j, rate)| ((s ^ (1 << i) ^ (1 << j)) as u32, rate))
                .collect()
        })
        .collect();
    Ok(GeneratorMatrix::from_rows(rows))
}

/// Bernoulli(ρ) product measure over `vertices` sites, indexed by bit mask.
pub fn product_measure(vertices: usize, rho: f64) -> Vec<f64> {
    (0..1usize << vertices)
        .map(|s| {
            let k = s.count_ones() as i32;
            rho.powi(k) * (1.0 - rho).powi(vertices as i32 - k)
        })
        .collect()
}

fn plain_vertices(q: &GeneratorMatrix) -> Result<usize, OracleError> {
    let n = q.dim();
    if !n.is_power_of_two() {
        return Err(OracleError::NotPlainChain(n));
    }
    Ok(n.trailing_zeros() as usize)
}

/// `‖νᵀQ‖_∞` for an arbitrary distribution `nu`.
pub fn invariance_residual(q: &GeneratorMatrix, nu: &[f64]) -> Result<f64, OracleError> {
    Ok(q.apply_left(nu)?.iter().fold(0.0, |m, x| m.max(x.abs())))
}

/// `‖νᵀQ‖_∞` with `ν` the Bernoulli(ρ) product measure.
pub fn check_invariance(q: &GeneratorMatrix, rho: f64) -> Result<f64, OracleError> {
    invariance_residual(q, &product_measure(plain_vertices(q)?, rho))
}

/// `max |ν(s)Q[s,s'] − ν(s')Q[s',s]|` with `ν` the Bernoulli(ρ) product measure.
pub fn check_detailed_balance(q: &GeneratorMatrix, rho: f64) -> Result<f64, OracleError> {
    let nu = product_measure(plain_vertices(q)?, rho);
    let mut worst = 0.0f64;
    for s in 0..q.dim() {
        for &(t, rate) in q.row(s) {
            let t = t as usize;
            worst = worst.max((nu[s] * rate - nu[t] * q.get(t, s)).abs());
        }
    }
    Ok(worst)
}

/// `initialᵀ e^{tQ}`. The interval is cut into steps of norm at most one and
/// each step sums the Taylor series until terms fall below `1e-13`.
pub fn semigroup_marginals(
    q: &GeneratorMatrix,
    initial: &[f64],
    t: f64,
) -> Result<Vec<f64>, OracleError> {
    if t < 0.0 {
        return Err(OracleError::NegativeTime(t));
    }
    q.check_len(initial.len())?;
    let steps = (t * q.norm_inf()).ceil().max(1.0);
    let h = t / steps;
    let mut v = initial.to_vec();
    for _ in 0..steps as usize {
        let mut term = v.clone();
        let mut k = 1.0;
        loop {
            term = q.apply_left(&term)?;
            term.iter_mut().for_each(|x| *x *= h / k);
            let size = term.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            v.iter_mut().zip(&term).for_each(|(a, b)| *a += b);
            if size <= SERIES_TOL {
                break;
            }
            k += 1.0;
        }
    }
    Ok(v)
}

/// A state of the joint chain: tag position and occupancy, tag site occupied.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TaggedChainState {
    pub tagged_index: usize,
    pub occupancy: Vec<bool>,
}

/// `x · 2^{n-1}` plus the occupancy mask with bit `x` squeezed out.
pub fn tagged_state_index(state: &TaggedChainState) -> usize {
    let x = state.tagged_index;
    let mask = state
        .occupancy
        .iter()
        .enumerate()
        .filter(|&(_, &b)| b)
        .fold(0usize, |m, (k, _)| m | 1 << k);
    (x << (state.occupancy.len() - 1)) | squeeze(mask, x)
}

pub fn tagged_state(n: usize, index: usize) -> TaggedChainState {
    let x = index >> (n - 1);
    let mask = expand(index & ((1 << (n - 1)) - 1), x) | 1 << x;
    TaggedChainState {
        tagged_index: x,
        occupancy: (0..n).map(|k| mask >> k & 1 == 1).collect(),
    }
}

fn squeeze(mask: usize, x: usize) -> usize {
    let low = mask & ((1 << x) - 1);
    let high = mask >> (x + 1);
    low | high << x
}

fn expand(rest: usize, x: usize) -> usize {
    let low = rest & ((1 << x) - 1);
    let high = rest >> x;
    low | high << (x + 1)
}

/// Generator of the (tag, configuration) chain with the tag on a particle.
/// `_rho` does not enter the rates; it is accepted for symmetry with the
/// initial law.
pub fn build_tagged_generator(graph: &FiniteGraph, _rho: f64) -> Result<GeneratorMatrix, OracleError> {
    let n = graph.len();
    if n > MAX_TAGGED_VERTICES {
        return Err(OracleError::TooManyVertices {
            count: n,
            max: MAX_TAGGED_VERTICES,
        });
    }
    let states = n << (n - 1);
    let rows = (0..states)
        .map(|idx| {
            let x = idx >> (n - 1);
            let mask = expand(idx & ((1 << (n - 1)) - 1), x) | 1 << x;
            graph
                .pair_rates
                .iter()
                .filter(|&&(i, j, _)| (mask >> i & 1) != (mask >> j & 1))
                .map(|&(i, j, rate)| {
                    let next = mask ^ (1 << i) ^ (1 << j);
                    let tag = if i == x {
                        j
                    } else if j == x {
                        i
                    } else {
                        x
                    };
                    (((tag << (n - 1)) | squeeze(next, tag)) as u32, rate)
                })
                .collect()
        })
        .collect();
    Ok(GeneratorMatrix::from_rows(rows))
}

/// Palm law on the graph: tag at the root (index 0), other sites Bernoulli(ρ).
pub fn tagged_palm_distribution(graph: &FiniteGraph, rho: f64) -> Vec<f64> {
    let n = graph.len();
    let mut out = vec![0.0; n << (n - 1)];
    for (rest, p) in product_measure(n - 1, rho).into_iter().enumerate() {
        out[rest] = p;
    }
    out
}

/// `⟨X⟩` as a function on tagged-chain states.
pub fn horo_observable(graph: &FiniteGraph) -> Vec<f64> {
    let n = graph.len();
    let horo = graph.horo();
    (0..n << (n - 1))
        .map(|idx| horo[idx >> (n - 1)] as f64)
        .collect()
}

/// Law of the tagged chain at time `t` from the Palm law.
pub fn tagged_marginals(graph: &FiniteGraph, rho: f64, t: f64) -> Result<Vec<f64>, OracleError> {
    let q = build_tagged_generator(graph, rho)?;
    semigroup_marginals(&q, &tagged_palm_distribution(graph, rho), t)
}

/// `E[⟨X_t⟩]` for the tagged chain on the graph started from the Palm law.
pub fn expected_horodistance_exact(graph: &FiniteGraph, rho: f64, t: f64) -> Result<f64, OracleError> {
    let law = tagged_marginals(graph, rho, t)?;
    Ok(dot(&law, &horo_observable(graph)))
}

/// Derivatives `d^k/dt^k E[⟨X_t⟩]` at `t = 0` for `k = 0..=order`.
pub fn horodistance_derivatives(
    graph: &FiniteGraph,
    rho: f64,
    order: usize,
) -> Result<Vec<f64>, OracleError> {
    let q = build_tagged_generator(graph, rho)?;
    let h = horo_observable(graph);
    let mut v = tagged_palm_distribution(graph, rho);
    let mut out = vec![dot(&v, &h)];
    for _ in 0..order {
        v = q.apply_left(&v)?;
        out.push(dot(&v, &h));
    }
    Ok(out)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub graph: String,
    pub rho: f64,
    pub states: usize,
    pub max_row_sum: f64,
    pub invariance_residual: f64,
    pub detailed_balance_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Invariance and detailed balance of Bernoulli(ρ) on the ball of radius `r`.
pub fn oracle_report(
    d: u8,
    r: usize,
    kernel: &RateKernel,
    rho: f64,
    tolerance: f64,
) -> Result<OracleReport, OracleError> {
    let graph = FiniteGraph::ball(d, r, kernel);
    let q = build_exclusion_generator(&graph)?;
    let invariance_residual = check_invariance(&q, rho)?;
    let detailed_balance_residual = check_detailed_balance(&q, rho)?;
    let max_row_sum = q.max_row_sum();
    Ok(OracleReport {
        graph: format!("ball(r={r}) of T^{d}, kernel {kernel}, {} vertices", graph.len()),
        rho,
        states: q.dim(),
        max_row_sum,
        invariance_residual,
        detailed_balance_residual,
        tolerance,
        pass: invariance_residual < tolerance
            && detailed_balance_residual < tolerance
            && max_row_sum < tolerance,
    })
}
