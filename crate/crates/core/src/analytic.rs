//! Numerical simulator of the theoretical computation-statistics tradeoff.
//!
//! Both procedures are modelled by closed-form risk bounds and a time
//! model; the optimum time for a target risk is found by direct search.
//! Times are in abstract units with the solver coefficient normalized to 1.

use std::fmt;
use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticParams {
    pub d: usize,
    pub k: usize,
    pub sigma_bar: f64,
    pub alpha_init: f64,
    pub alpha_samp: f64,
    pub beta: f64,
    pub a: f64,
    pub b: f64,
    pub eps_total: f64,
    /// When false, the estimation term omits `sigma_bar`.
    pub include_sigma: bool,
}

impl Default for AnalyticParams {
    fn default() -> Self {
        Self {
            d: 20,
            k: 20,
            sigma_bar: 192.0,
            alpha_init: 100.0,
            alpha_samp: 100.0,
            beta: 3.0,
            a: 5.0,
            b: 1.0,
            eps_total: 300.0,
            include_sigma: true,
        }
    }
}

impl AnalyticParams {
    pub fn with_eps(self, eps_total: f64) -> Self {
        Self { eps_total, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [self.sigma_bar, self.alpha_init, self.alpha_samp, self.a, self.b, self.eps_total];
        if self.d == 0 || self.k == 0 || positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::param("analytic parameters must be positive and finite"));
        }
        if !(self.beta.is_finite() && self.beta > 1.0) {
            return Err(Error::param("beta must exceed 1"));
        }
        Ok(())
    }

    /// Numerator of the estimation bound: `eps_est(m) = c / sqrt(m)`.
    fn est_coefficient(&self) -> f64 {
        let sigma = if self.include_sigma { self.sigma_bar } else { 1.0 };
        sigma * self.b * self.b * ((self.k * self.d) as f64).sqrt()
    }
}

pub fn eps_model(p: &AnalyticParams) -> f64 {
    p.b * p.b * p.d as f64 / (p.k as f64).powf(2.0 / p.d as f64)
}

pub fn eps_est(m: u64, p: &AnalyticParams) -> f64 {
    p.est_coefficient() / (m as f64).sqrt()
}

/// Simplified approximation factor `A sqrt(k) / sqrt(s)`.
pub fn eta_simplified(s: u64, p: &AnalyticParams) -> f64 {
    p.a * (p.k as f64).sqrt() / (s as f64).sqrt()
}

pub fn subsampler_time(m: u64, p: &AnalyticParams) -> f64 {
    (m as f64).powf(p.beta)
}

pub fn coreset_time(m: u64, s: u64, p: &AnalyticParams) -> f64 {
    (s as f64).powf(p.beta) + p.alpha_init * m as f64 + p.alpha_samp * s as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Optimum {
    Feasible {
        time: f64,
        m: u64,
        /// Summary size; `None` for the plain subsampler.
        s: Option<u64>,
        /// True when the coreset program fell back to the subsampler.
        backed_off: bool,
    },
    /// No configuration fits within the data budget.
    Infeasible,
    /// The target is at or below the modelling error: infeasible for all n.
    StructurallyInfeasible,
}

impl Optimum {
    pub fn time(&self) -> Option<f64> {
        match self {
            Optimum::Feasible { time, .. } => Some(*time),
            _ => None,
        }
    }

    pub fn m(&self) -> Option<u64> {
        match self {
            Optimum::Feasible { m, .. } => Some(*m),
            _ => None,
        }
    }

    pub fn s(&self) -> Option<u64> {
        match self {
            Optimum::Feasible { s, .. } => *s,
            _ => None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self, Optimum::Feasible { .. })
    }
}

// Sizes past this are not representable exactly and are treated as unreachable.
const MAX_SIZE: f64 = 9.0e15;

/// Least `m >= lo` with `eps_model + eps_est(m) <= target`, or `None`.
fn least_m(target: f64, lo: u64, p: &AnalyticParams) -> Option<u64> {
    let gap = target - eps_model(p);
    if gap <= 0.0 {
        return None;
    }
    let guess = (p.est_coefficient() / gap).powi(2).ceil();
    if !(guess < MAX_SIZE) {
        return None;
    }
    let fits = |m: u64| eps_model(p) + eps_est(m, p) <= target;
    let mut m = (guess as u64).max(1);
    while m > 1 && fits(m - 1) {
        m -= 1;
    }
    while !fits(m) {
        m += 1;
    }
    Some(m.max(lo))
}

/// Minimize `m^beta` subject to `eps_model + eps_est(m) <= eps_total` and
/// `m <= n` (`None` means unlimited data).
pub fn subsampler_optimum(n: Option<u64>, p: &AnalyticParams) -> Optimum {
    if p.eps_total <= eps_model(p) {
        return Optimum::StructurallyInfeasible;
    }
    match least_m(p.eps_total, 1, p) {
        Some(m) if n.is_none_or(|n| m <= n) => {
            Optimum::Feasible { time: subsampler_time(m, p), m, s: None, backed_off: false }
        }
        _ => Optimum::Infeasible,
    }
}

/// Minimize `s^beta + alpha_init m + alpha_samp s` subject to
/// `(eps_model + eps_est(m)) (1 + 2 eta(s)) <= eps_total`, `s < m <= n`,
/// backing off to the subsampler whenever that is at least as fast.
///
/// For fixed `s` the cheapest admissible `m` has a closed form, so the
/// search is an exact scan over `s`, pruned once `s^beta + alpha_samp s`
/// alone exceeds the incumbent.
pub fn coreset_optimum(n: Option<u64>, p: &AnalyticParams) -> Optimum {
    let subs = subsampler_optimum(n, p);
    if subs == Optimum::StructurallyInfeasible {
        return subs;
    }
    let mut best: Option<(f64, u64, u64)> = None;
    let mut bound = subs.time().unwrap_or(f64::INFINITY);
    let s_max = n.map_or(u64::MAX, |n| n.saturating_sub(1));
    let mut s = 1u64;
    while s <= s_max {
        let floor = (s as f64).powf(p.beta) + p.alpha_samp * s as f64;
        if floor >= bound {
            break;
        }
        let target = p.eps_total / (1.0 + 2.0 * eta_simplified(s, p));
        if let Some(m) = least_m(target, s + 1, p) {
            if n.is_none_or(|n| m <= n) {
                let t = coreset_time(m, s, p);
                if t < bound {
                    bound = t;
                    best = Some((t, m, s));
                }
            }
        }
        s += 1;
    }
    match (best, subs) {
        (Some((time, m, s)), _) => Optimum::Feasible { time, m, s: Some(s), backed_off: false },
        (None, Optimum::Feasible { time, m, .. }) => Optimum::Feasible { time, m, s: None, backed_off: true },
        (None, other) => other,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveMode {
    /// Fixed target risk, x ranges over data sizes.
    DataTime,
    /// Fixed data size, x ranges over target risks.
    RiskTime { n: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    DataBounded,
    Intermediate,
    DataLaden,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::DataBounded => "data-bounded",
            Regime::Intermediate => "intermediate",
            Regime::DataLaden => "data-laden",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveRow {
    pub x: f64,
    pub subsampler: Optimum,
    pub coreset: Optimum,
    pub regime: Regime,
}

pub const CURVE_HEADER: &str = "x,t_subs,t_core,m_star_subs,m_star_core,s_star_core,regime";

/// Classify the coreset optimum at `n` against unlimited data.
fn regime(at_n: &Optimum, unlimited: &Optimum) -> Regime {
    match (at_n.time(), unlimited.time()) {
        (None, _) => Regime::DataBounded,
        (Some(t), Some(t_inf)) if t > t_inf => Regime::Intermediate,
        _ => Regime::DataLaden,
    }
}

pub fn analytic_curves(p: &AnalyticParams, mode: CurveMode, xs: &[f64]) -> Result<Vec<CurveRow>> {
    p.validate()?;
    if xs.is_empty() {
        return Err(Error::Empty("curve range"));
    }
    xs.par_iter()
        .map(|&x| {
            let (q, n) = match mode {
                CurveMode::DataTime => {
                    if !(x >= 1.0 && x.is_finite()) {
                        return Err(Error::param(format!("data size {x} must be >= 1")));
                    }
                    (*p, x.floor() as u64)
                }
                CurveMode::RiskTime { n } => {
                    if !(x > 0.0 && x.is_finite()) {
                        return Err(Error::param(format!("risk level {x} must be positive")));
                    }
                    (p.with_eps(x), n)
                }
            };
            let coreset = coreset_optimum(Some(n), &q);
            Ok(CurveRow {
                x,
                subsampler: subsampler_optimum(Some(n), &q),
                coreset,
                regime: regime(&coreset, &coreset_optimum(None, &q)),
            })
        })
        .collect()
}

pub fn write_curves_csv<W: Write>(mut w: W, rows: &[CurveRow]) -> std::io::Result<()> {
    let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    let int = |v: Option<u64>| v.map(|v| v.to_string()).unwrap_or_default();
    writeln!(w, "{CURVE_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.x,
            opt(r.subsampler.time()),
            opt(r.coreset.time()),
            int(r.subsampler.m()),
            int(r.coreset.m()),
            int(r.coreset.s()),
            r.regime
        )?;
    }
    w.flush()
}

pub fn log_range(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count <= 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count).map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp()).collect()
}

pub fn linear_range(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count <= 1 {
        return vec![lo];
    }
    (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect()
}
