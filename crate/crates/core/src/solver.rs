//! Weighted k-means: D²-weighted seeding followed by weighted Lloyd
//! iterations, with independent restarts.

use std::time::{Duration, Instant};

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{sq_euclidean, weighted_risk, Centers, CompensatedSum, Points, WeightedSet};
use crate::rng::{self, Stream};

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub k: usize,
    pub max_iters: usize,
    /// Stop once the relative risk improvement of an iteration drops below this.
    pub rel_tol: f64,
    pub restarts: usize,
    pub seed: u64,
}

impl SolverConfig {
    pub fn new(k: usize) -> Self {
        Self { k, max_iters: 100, rel_tol: 1e-4, restarts: 1, seed: 0 }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::param("k must be >= 1"));
        }
        if self.max_iters == 0 {
            return Err(Error::param("max_iters must be >= 1"));
        }
        if self.restarts == 0 {
            return Err(Error::param("restarts must be >= 1"));
        }
        if !(self.rel_tol >= 0.0) {
            return Err(Error::param("rel_tol must be >= 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub centers: Centers,
    pub weighted_risk: f64,
    pub iterations: usize,
    pub elapsed: Duration,
    /// Weighted risk of the initial centers followed by the risk after each
    /// Lloyd iteration.
    pub risk_trace: Vec<f64>,
}

/// Sample an index with probability proportional to `mass`. `total` must be
/// the (positive) sum of `mass`. Zero-mass entries are never returned.
fn sample_proportional<R: Rng + ?Sized>(mass: &[f64], total: f64, rng: &mut R) -> usize {
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &m) in mass.iter().enumerate() {
        if m > 0.0 {
            acc += m;
            last_positive = i;
            if acc > target {
                return i;
            }
        }
    }
    // rounding pushed the target past the accumulated total
    last_positive
}

/// D² sampling over `points` with optional per-point weights; returns the
/// indices of the `count` chosen points. Once no point carries positive
/// mass, the already chosen indices are repeated cyclically.
pub(crate) fn dsquared_indices<R: Rng + ?Sized>(
    points: Points<'_>,
    weights: Option<&[f64]>,
    count: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let n = points.len();
    let weight = |i: usize| weights.map_or(1.0, |w| w[i]);
    let first_mass: Vec<f64> = (0..n).map(weight).collect();
    let total: f64 = first_mass.iter().sum();
    if !(total > 0.0) {
        return Err(Error::InvalidWeights("all weights are zero".into()));
    }
    let mut chosen = Vec::with_capacity(count);
    chosen.push(sample_proportional(&first_mass, total, rng));

    let mut min_d2: Vec<f64> = points.iter().map(|x| sq_euclidean(x, points.get(chosen[0]))).collect();
    let mut mass = vec![0.0; n];
    while chosen.len() < count {
        let mut total = 0.0;
        for i in 0..n {
            mass[i] = weight(i) * min_d2[i];
            total += mass[i];
        }
        if !(total > 0.0) {
            break;
        }
        let pick = sample_proportional(&mass, total, rng);
        chosen.push(pick);
        let c = points.get(pick);
        for (i, x) in points.iter().enumerate() {
            let d2 = sq_euclidean(x, c);
            if d2 < min_d2[i] {
                min_d2[i] = d2;
            }
        }
    }
    let distinct = chosen.len();
    for i in distinct..count {
        chosen.push(chosen[i % distinct]);
    }
    Ok(chosen)
}

/// Weighted k-means++ seeding.
pub fn seed_dsquared<R: Rng + ?Sized>(ws: &WeightedSet, k: usize, rng: &mut R) -> Result<Centers> {
    if k == 0 {
        return Err(Error::param("k must be >= 1"));
    }
    let idx = dsquared_indices(ws.points(), Some(ws.weights()), k, rng)?;
    Centers::new(ws.dim(), ws.points().select(&idx))
}

struct Assignment {
    labels: Vec<usize>,
    d2: Vec<f64>,
    risk: f64,
}

fn assign(ws: &WeightedSet, centers: &Centers) -> Assignment {
    let n = ws.len();
    let mut labels = Vec::with_capacity(n);
    let mut d2 = Vec::with_capacity(n);
    let mut risk = CompensatedSum::new();
    for (x, &w) in ws.points().iter().zip(ws.weights()) {
        let (j, dist) = centers.nearest(x);
        labels.push(j);
        d2.push(dist);
        if w > 0.0 {
            risk.add(w * dist);
        }
    }
    Assignment { labels, d2, risk: risk.value() }
}

/// Replace every center by the weighted mean of its points. A center whose
/// points carry no weight moves to the positive-weight point with the
/// largest weighted squared distance to its nearest center.
fn update_centers(ws: &WeightedSet, a: &Assignment, centers: &mut Centers) {
    let (k, dim) = (centers.k(), centers.dim());
    let mut sums = vec![0.0; k * dim];
    let mut mass = vec![0.0; k];
    for ((x, &w), &j) in ws.points().iter().zip(ws.weights()).zip(&a.labels) {
        if w > 0.0 {
            mass[j] += w;
            for (s, v) in sums[j * dim..(j + 1) * dim].iter_mut().zip(x) {
                *s += w * v;
            }
        }
    }
    let mut residual: Vec<f64> = a.d2.iter().zip(ws.weights()).map(|(d, w)| d * w).collect();
    for j in 0..k {
        if mass[j] > 0.0 {
            for (c, s) in centers.center_mut(j).iter_mut().zip(&sums[j * dim..(j + 1) * dim]) {
                *c = s / mass[j];
            }
            continue;
        }
        let far =
            residual.iter().enumerate().fold((None, 0.0), |best, (i, &r)| if r > best.1 { (Some(i), r) } else { best });
        if let (Some(i), _) = far {
            centers.center_mut(j).copy_from_slice(ws.points().get(i));
            residual[i] = 0.0;
        }
    }
}

/// Weighted Lloyd iterations from `init`.
pub fn lloyd(ws: &WeightedSet, init: &Centers, cfg: &SolverConfig) -> Result<SolveResult> {
    if ws.dim() != init.dim() {
        return Err(Error::DimensionMismatch { expected: init.dim(), got: ws.dim() });
    }
    let start = Instant::now();
    let mut centers = init.clone();
    let mut current = assign(ws, &centers);
    let mut trace = vec![current.risk];
    let mut iterations = 0;
    while iterations < cfg.max_iters {
        iterations += 1;
        let before = current.risk;
        update_centers(ws, &current, &mut centers);
        current = assign(ws, &centers);
        trace.push(current.risk);
        if before <= 0.0 || (before - current.risk) / before < cfg.rel_tol {
            break;
        }
    }
    Ok(SolveResult {
        weighted_risk: weighted_risk(ws, &centers)?,
        centers,
        iterations,
        elapsed: start.elapsed(),
        risk_trace: trace,
    })
}

/// Stream used by restart `r` of a solve seeded with `seed`.
pub fn restart_rng(seed: u64, restart: usize) -> Stream {
    rng::stream(seed, &[restart as u64])
}

fn single_run(ws: &WeightedSet, cfg: &SolverConfig, restart: usize) -> Result<SolveResult> {
    let mut rng = restart_rng(cfg.seed, restart);
    let init = seed_dsquared(ws, cfg.k, &mut rng)?;
    lloyd(ws, &init, cfg)
}

/// Best of `cfg.restarts` independent seeding + Lloyd runs. Restarts run
/// concurrently; each owns the stream `restart_rng(cfg.seed, r)`, so the
/// result does not depend on scheduling.
pub fn solve(ws: &WeightedSet, cfg: &SolverConfig) -> Result<SolveResult> {
    cfg.validate()?;
    let start = Instant::now();
    let runs: Vec<SolveResult> = if cfg.restarts == 1 {
        vec![single_run(ws, cfg, 0)?]
    } else {
        (0..cfg.restarts).into_par_iter().map(|r| single_run(ws, cfg, r)).collect::<Result<_>>()?
    };
    // earliest restart wins ties
    let mut best =
        runs.into_iter().reduce(|a, b| if b.weighted_risk < a.weighted_risk { b } else { a }).expect("restarts >= 1");
    best.elapsed = start.elapsed();
    Ok(best)
}
