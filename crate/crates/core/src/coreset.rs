//! Sensitivity-sampling coresets.
//!
//! Construction runs in two stages: a bicriteria pass that D²-samples
//! `bicriteria_factor * k` rough centers from the (truncated) data and
//! records per-point costs, then importance sampling with probability
//! proportional to each point's sensitivity bound
//!
//! ```text
//! σ(x) = d²(x, B) / cost(B) + 1 / |cluster(x)|
//! ```
//!
//! Sampled points are weighted `1 / (s · q(x) · n)` so that, for any fixed
//! centers, the weighted risk of the coreset is an unbiased estimate of the
//! empirical risk of the data.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{Centers, CompensatedSum, Points, WeightedSet};
use crate::rng::{self, Stream};
use crate::solver::dsquared_indices;

#[derive(Debug, Clone, PartialEq)]
pub struct CoresetParams {
    pub k: usize,
    /// Coreset size s_core.
    pub size: usize,
    pub seed: u64,
    pub bicriteria_factor: usize,
}

impl CoresetParams {
    pub fn new(k: usize, size: usize) -> Self {
        Self { k, size, seed: 0, bicriteria_factor: 2 }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn rng(&self) -> Stream {
        rng::stream(self.seed, &[])
    }

    fn validate(&self) -> Result<()> {
        if self.k == 0 || self.size == 0 || self.bicriteria_factor == 0 {
            return Err(Error::param("k, size and bicriteria_factor must be >= 1"));
        }
        Ok(())
    }
}

/// Rough clustering with `bicriteria_factor * k` centers.
#[derive(Debug, Clone, PartialEq)]
pub struct Bicriteria {
    pub centers: Centers,
    pub assignment: Vec<usize>,
    pub cluster_costs: Vec<f64>,
    pub cluster_sizes: Vec<usize>,
    /// Squared distance of each point to its bicriteria center.
    pub point_costs: Vec<f64>,
    pub total_cost: f64,
}

pub fn bicriteria_init<R: Rng + ?Sized>(data: Points<'_>, p: &CoresetParams, rng: &mut R) -> Result<Bicriteria> {
    p.validate()?;
    if data.is_empty() {
        return Err(Error::Empty("dataset"));
    }
    let idx = dsquared_indices(data, None, p.k * p.bicriteria_factor, rng)?;
    let centers = Centers::new(data.dim(), data.select(&idx))?;
    let b = centers.k();
    let mut assignment = Vec::with_capacity(data.len());
    let mut point_costs = Vec::with_capacity(data.len());
    let mut cluster_costs = vec![CompensatedSum::new(); b];
    let mut cluster_sizes = vec![0; b];
    let mut total = CompensatedSum::new();
    for x in data.iter() {
        let (j, d2) = centers.nearest(x);
        assignment.push(j);
        point_costs.push(d2);
        cluster_costs[j].add(d2);
        cluster_sizes[j] += 1;
        total.add(d2);
    }
    Ok(Bicriteria {
        centers,
        assignment,
        cluster_costs: cluster_costs.iter().map(CompensatedSum::value).collect(),
        cluster_sizes,
        point_costs,
        total_cost: total.value(),
    })
}

/// Per-point sensitivity upper bounds. The distance term is dropped when
/// the bicriteria cost is zero.
pub fn sensitivities(b: &Bicriteria) -> Vec<f64> {
    let scale = if b.total_cost > 0.0 { 1.0 / b.total_cost } else { 0.0 };
    b.point_costs.iter().zip(&b.assignment).map(|(&cost, &j)| cost * scale + 1.0 / b.cluster_sizes[j] as f64).collect()
}

/// Sample `p.size` points i.i.d. with probability `q ∝ sensitivity`.
/// When `p.size >= n` the data itself is returned with weights `1/n`.
pub fn build_coreset<R: Rng + ?Sized>(data: Points<'_>, p: &CoresetParams, rng: &mut R) -> Result<WeightedSet> {
    p.validate()?;
    if data.is_empty() {
        return Err(Error::Empty("dataset"));
    }
    let n = data.len();
    if p.size >= n {
        return WeightedSet::uniform(data);
    }
    let b = bicriteria_init(data, p, rng)?;
    let sens = sensitivities(&b);
    sample_by_importance(data, &sens, p.size, rng)
}

/// Importance-sample `size` points with probability proportional to
/// `importance`, weighting each draw `1 / (size · q · n)`.
pub fn sample_by_importance<R: Rng + ?Sized>(
    data: Points<'_>,
    importance: &[f64],
    size: usize,
    rng: &mut R,
) -> Result<WeightedSet> {
    let n = data.len();
    let total: f64 = importance.iter().copied().collect::<CompensatedSum>().value();
    let dist = WeightedIndex::new(importance).map_err(|e| Error::InvalidWeights(format!("importance: {e}")))?;
    let mut coords = Vec::with_capacity(size * data.dim());
    let mut weights = Vec::with_capacity(size);
    for _ in 0..size {
        let i = dist.sample(rng);
        let q = importance[i] / total;
        coords.extend_from_slice(data.get(i));
        weights.push(1.0 / (size as f64 * q * n as f64));
    }
    WeightedSet::new(data.dim(), coords, weights)
}

/// Uniform subsample of `size` distinct points (all points when `size >= n`),
/// each weighted `1/size`.
pub fn uniform_subsample<R: Rng + ?Sized>(data: Points<'_>, size: usize, rng: &mut R) -> Result<WeightedSet> {
    if data.is_empty() || size == 0 {
        return Err(Error::Empty("subsample"));
    }
    if size >= data.len() {
        return WeightedSet::uniform(data);
    }
    let idx = rand::seq::index::sample(rng, data.len(), size).into_vec();
    let w = 1.0 / size as f64;
    WeightedSet::new(data.dim(), data.select(&idx), vec![w; size])
}

/// Constants of the approximation factor `η(s) = A·√(dk) / (√s − √(dk))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaModel {
    pub a: f64,
    pub d: usize,
    pub k: usize,
}

impl EtaModel {
    pub fn new(a: f64, d: usize, k: usize) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) || d == 0 || k == 0 {
            return Err(Error::param("EtaModel needs A > 0, d >= 1, k >= 1"));
        }
        Ok(Self { a, d, k })
    }
}

impl Default for EtaModel {
    fn default() -> Self {
        Self { a: 5.0, d: 1, k: 1 }
    }
}

/// Coreset approximation factor for size `s`; undefined at and below the
/// pole `s = d·k`.
pub fn eta_bound(s: u64, m: &EtaModel) -> Result<f64> {
    let dk = (m.d * m.k) as u64;
    if s <= dk {
        return Err(Error::Pole { size: s, dk });
    }
    let root_dk = (dk as f64).sqrt();
    Ok(m.a * root_dk / ((s as f64).sqrt() - root_dk))
}
