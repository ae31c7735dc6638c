//! Empirical sweeps over (data size, summary size) grids and Pareto-frontier
//! extraction from the resulting measurements.
//!
//! A sweep cell `(n, s)` repeatedly draws `n` points from a reference
//! dataset, summarizes them to `s` points, solves on the summary, and
//! measures the risk of the result on the full reference dataset. Only the
//! summarize + solve phase is timed.

use std::collections::BTreeSet;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::coreset::{build_coreset, uniform_subsample, CoresetParams};
use crate::error::{Error, Result};
use crate::geometry::{empirical_risk, Dataset, Points, WeightedSet};
use crate::rng;
use crate::solver::{solve, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Procedure {
    Uniform,
    Coreset,
}

impl fmt::Display for Procedure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Procedure::Uniform => "uniform",
            Procedure::Coreset => "coreset",
        })
    }
}

impl FromStr for Procedure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Procedure::Uniform),
            "coreset" => Ok(Procedure::Coreset),
            other => Err(Error::param(format!("unknown procedure {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub n_values: Vec<usize>,
    pub s_values: Vec<usize>,
    pub repeats: usize,
    pub procedure: Procedure,
    pub solver: SolverConfig,
    pub bicriteria_factor: usize,
    pub seed: u64,
}

impl SweepGrid {
    pub fn new(n_values: Vec<usize>, s_values: Vec<usize>, procedure: Procedure, solver: SolverConfig) -> Self {
        Self { n_values, s_values, repeats: 50, procedure, solver, bicriteria_factor: 2, seed: 0 }
    }

    pub fn validate(&self) -> Result<()> {
        let ascending = |v: &[usize]| !v.is_empty() && v[0] > 0 && v.windows(2).all(|w| w[0] < w[1]);
        if !ascending(&self.n_values) || !ascending(&self.s_values) {
            return Err(Error::param("n and s grids must be non-empty, positive and strictly ascending"));
        }
        if self.repeats == 0 {
            return Err(Error::param("repeats must be >= 1"));
        }
        self.solver.validate()
    }
}

/// How sweep cells are scheduled. Values never depend on the choice; only
/// the measured times do.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[default]
    Sequential,
    Parallel {
        jobs: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LambdaRecord {
    pub procedure: Procedure,
    pub n: usize,
    pub s: usize,
    pub repeats: usize,
    pub mean_time_s: f64,
    pub median_time_s: f64,
    pub mean_risk: f64,
    pub std_risk: f64,
    pub seed: u64,
}

/// Measurements `{(n, t(n,s), R(n,s))}` of one or more procedures.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Lambda {
    pub records: Vec<LambdaRecord>,
}

pub const LAMBDA_HEADER: &str = "procedure,n,s,repeats,mean_time_s,median_time_s,mean_risk,std_risk,seed";
pub const FRONTIER_HEADER: &str = "n_or_eps,time_s,source";

impl Lambda {
    pub fn new(records: Vec<LambdaRecord>) -> Self {
        Self { records }
    }

    pub fn for_procedure(&self, p: Procedure) -> Lambda {
        Lambda { records: self.records.iter().filter(|r| r.procedure == p).cloned().collect() }
    }

    pub fn procedures(&self) -> Vec<Procedure> {
        self.records.iter().map(|r| r.procedure).collect::<BTreeSet<_>>().into_iter().collect()
    }

    pub fn n_values(&self) -> Vec<usize> {
        self.records.iter().map(|r| r.n).collect::<BTreeSet<_>>().into_iter().collect()
    }

    pub fn get(&self, n: usize, s: usize) -> Option<&LambdaRecord> {
        self.records.iter().find(|r| r.n == n && r.s == s)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{LAMBDA_HEADER}")?;
        for r in &self.records {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{}",
                r.procedure, r.n, r.s, r.repeats, r.mean_time_s, r.median_time_s, r.mean_risk, r.std_risk, r.seed
            )?;
        }
        w.flush()
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Lambda> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header = rdr.headers().map_err(|e| Error::Csv { row: 0, message: e.to_string() })?;
        if header.iter().collect::<Vec<_>>().join(",") != LAMBDA_HEADER {
            return Err(Error::Csv { row: 0, message: format!("expected header {LAMBDA_HEADER:?}") });
        }
        let mut records = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let row = i + 1;
            let rec = rec.map_err(|e| Error::Csv { row, message: e.to_string() })?;
            let bad = |field: &str| Error::Csv { row, message: format!("bad {field}") };
            let int = |j: usize, name: &str| rec[j].parse::<usize>().map_err(|_| bad(name));
            let real = |j: usize, name: &str| rec[j].parse::<f64>().map_err(|_| bad(name));
            records.push(LambdaRecord {
                procedure: rec[0].parse().map_err(|_| bad("procedure"))?,
                n: int(1, "n")?,
                s: int(2, "s")?,
                repeats: int(3, "repeats")?,
                mean_time_s: real(4, "mean_time_s")?,
                median_time_s: real(5, "median_time_s")?,
                mean_risk: real(6, "mean_risk")?,
                std_risk: real(7, "std_risk")?,
                seed: rec[8].parse().map_err(|_| bad("seed"))?,
            });
        }
        Ok(Lambda { records })
    }
}

const TAG_DRAW: u64 = 1;
const TAG_SUMMARY: u64 = 2;
const TAG_SOLVE: u64 = 3;

/// Summarize `points` to `s` points with the given procedure. Sizes at or
/// above `n` fall back to the full sample with uniform weights for both
/// procedures.
pub fn summarize(
    points: Points<'_>,
    procedure: Procedure,
    k: usize,
    s: usize,
    bicriteria_factor: usize,
    seed: u64,
) -> Result<WeightedSet> {
    if s >= points.len() {
        return WeightedSet::uniform(points);
    }
    match procedure {
        Procedure::Uniform => uniform_subsample(points, s, &mut rng::stream(seed, &[])),
        Procedure::Coreset => {
            let p = CoresetParams { k, size: s, seed, bicriteria_factor };
            build_coreset(points, &p, &mut p.rng())
        }
    }
}

struct Measurement {
    time_s: f64,
    risk: f64,
}

fn run_one(reference: &Dataset, grid: &SweepGrid, ni: usize, sj: usize, rep: usize) -> Result<Measurement> {
    let (n, s) = (grid.n_values[ni], grid.s_values[sj]);
    let (ni, sj, rep) = (ni as u64, sj as u64, rep as u64);
    let mut draw = rng::stream(grid.seed, &[TAG_DRAW, ni, rep]);
    let idx = rand::seq::index::sample(&mut draw, reference.n(), n).into_vec();
    let sample = reference.points().select(&idx);
    let sample = Points::new(reference.dim(), &sample)?;
    let cfg = SolverConfig { seed: rng::derive_seed(grid.seed, &[TAG_SOLVE, ni, sj, rep]), ..grid.solver.clone() };

    let start = Instant::now();
    let summary = summarize(
        sample,
        grid.procedure,
        grid.solver.k,
        s,
        grid.bicriteria_factor,
        rng::derive_seed(grid.seed, &[TAG_SUMMARY, ni, sj, rep]),
    )?;
    let solved = solve(&summary, &cfg)?;
    let time_s = start.elapsed().as_secs_f64();

    let risk = empirical_risk(reference, &solved.centers)?;
    Ok(Measurement { time_s, risk })
}

fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        0.5 * (xs[m - 1] + xs[m])
    }
}

/// Sweep every `(n, s)` cell of `grid` against `reference`, which also
/// serves as the "true" distribution for risk evaluation.
pub fn run_sweep(reference: &Dataset, grid: &SweepGrid, exec: Execution) -> Result<Lambda> {
    grid.validate()?;
    let max_n = *grid.n_values.last().expect("validated");
    if max_n > reference.n() {
        return Err(Error::GridExceedsData { needed: max_n, available: reference.n() });
    }
    let tasks: Vec<(usize, usize, usize)> = (0..grid.n_values.len())
        .flat_map(|ni| (0..grid.s_values.len()).flat_map(move |sj| (0..grid.repeats).map(move |r| (ni, sj, r))))
        .collect();
    let results: Vec<Measurement> = match exec {
        Execution::Sequential => {
            tasks.iter().map(|&(ni, sj, r)| run_one(reference, grid, ni, sj, r)).collect::<Result<_>>()?
        }
        Execution::Parallel { jobs } => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build()
                .map_err(|e| Error::param(format!("thread pool: {e}")))?;
            pool.install(|| {
                tasks.par_iter().map(|&(ni, sj, r)| run_one(reference, grid, ni, sj, r)).collect::<Result<_>>()
            })?
        }
    };

    let records = results
        .chunks(grid.repeats)
        .zip(tasks.chunks(grid.repeats))
        .map(|(cell, t)| {
            let (ni, sj, _) = t[0];
            let reps = cell.len() as f64;
            let mean_time_s = cell.iter().map(|m| m.time_s).sum::<f64>() / reps;
            let mean_risk = cell.iter().map(|m| m.risk).sum::<f64>() / reps;
            let std_risk = if cell.len() > 1 {
                (cell.iter().map(|m| (m.risk - mean_risk).powi(2)).sum::<f64>() / (reps - 1.0)).sqrt()
            } else {
                0.0
            };
            let mut times: Vec<f64> = cell.iter().map(|m| m.time_s).collect();
            LambdaRecord {
                procedure: grid.procedure,
                n: grid.n_values[ni],
                s: grid.s_values[sj],
                repeats: grid.repeats,
                mean_time_s,
                median_time_s: median(&mut times),
                mean_risk,
                std_risk,
                seed: grid.seed,
            }
        })
        .collect();
    Ok(Lambda { records })
}

/// A frontier point: `x` is a data size or a risk level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontierPoint {
    pub x: f64,
    pub time_s: f64,
}

/// Data-time frontier: for every grid `n`, the least mean time among records
/// with `record.n <= n` and `mean_risk <= eps_total`. Infeasible `n` are
/// omitted.
pub fn pareto_data_time(lam: &Lambda, eps_total: f64) -> Vec<FrontierPoint> {
    lam.n_values()
        .into_iter()
        .filter_map(|n| {
            lam.records
                .iter()
                .filter(|r| r.n <= n && r.mean_risk <= eps_total)
                .map(|r| r.mean_time_s)
                .min_by(f64::total_cmp)
                .map(|t| FrontierPoint { x: n as f64, time_s: t })
        })
        .collect()
}

/// Risk-time frontier at data size `n`: for every distinct risk level among
/// records with `record.n <= n`, the least mean time achieving it.
pub fn pareto_risk_time(lam: &Lambda, n: usize) -> Vec<FrontierPoint> {
    let usable: Vec<&LambdaRecord> = lam.records.iter().filter(|r| r.n <= n).collect();
    let mut levels: Vec<f64> = usable.iter().map(|r| r.mean_risk).collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    levels
        .into_iter()
        .map(|eps| {
            let t = usable
                .iter()
                .filter(|r| r.mean_risk <= eps)
                .map(|r| r.mean_time_s)
                .min_by(f64::total_cmp)
                .expect("eps is one of the risks");
            FrontierPoint { x: eps, time_s: t }
        })
        .collect()
}

/// ORACLE-U and ORACLE-C data-time frontiers aligned on data size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OraclePoint {
    pub n: usize,
    pub uniform: Option<f64>,
    pub coreset: Option<f64>,
}

pub fn oracle_times(lam_u: &Lambda, lam_c: &Lambda, eps_total: f64) -> Vec<OraclePoint> {
    let fu = pareto_data_time(lam_u, eps_total);
    let fc = pareto_data_time(lam_c, eps_total);
    let lookup = |f: &[FrontierPoint], n: usize| f.iter().find(|p| p.x as usize == n).map(|p| p.time_s);
    let ns: BTreeSet<usize> = lam_u.n_values().into_iter().chain(lam_c.n_values()).collect();
    ns.into_iter().map(|n| OraclePoint { n, uniform: lookup(&fu, n), coreset: lookup(&fc, n) }).collect()
}

pub fn write_frontier_csv<W: Write>(mut w: W, rows: &[(FrontierPoint, String)]) -> std::io::Result<()> {
    writeln!(w, "{FRONTIER_HEADER}")?;
    for (p, source) in rows {
        writeln!(w, "{},{},{}", p.x, p.time_s, source)?;
    }
    w.flush()
}
