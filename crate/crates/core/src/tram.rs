//! Tradeoff navigation: grow the truncation size and the coreset size
//! geometrically, validate each solution on a growing prefix of held-out
//! points, and stop once the validation risk falls below `1.5 · ε`.

use std::io::Write;
use std::time::{Duration, Instant};

use crate::coreset::{build_coreset, uniform_subsample, CoresetParams};
use crate::error::{Error, Result};
use crate::geometry::{empirical_risk, Centers, Dataset};
use crate::rng;
use crate::solver::{solve, SolverConfig};

/// Round up, treating values within floating-point noise of an integer as
/// that integer.
pub fn ceil_snap(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 8.0 * f64::EPSILON * x.abs().max(1.0) {
        r
    } else {
        x.ceil()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TramParams {
    /// Target risk ε.
    pub eps_total: f64,
    /// Accuracy parameter, `0 < δ < 1/5`.
    pub delta: f64,
    /// Support radius B; the validation budget uses `b = 2B²`.
    pub radius: f64,
    /// Solver exponent in the time model `αm + s^β`.
    pub beta: f64,
    /// Linear initialization coefficient of the time model. Recorded only.
    pub alpha: f64,
    pub m0: usize,
    pub s0: usize,
    pub gamma_m: f64,
    pub gamma_s: f64,
    pub k: usize,
    pub bicriteria_factor: usize,
    pub seed: u64,
}

impl TramParams {
    /// Parameters with `γ_m = 2` and `γ_s = 2^{1/β}` for `β = 1/log₂1.5`
    /// (1.5-fold summary growth).
    pub fn new(eps_total: f64, delta: f64, radius: f64, k: usize, m0: usize, s0: usize) -> Result<Self> {
        let beta = 1.0 / 1.5f64.log2();
        let p = Self {
            eps_total,
            delta,
            radius,
            beta,
            alpha: 1.0,
            m0,
            s0,
            gamma_m: 2.0,
            gamma_s: 2f64.powf(1.0 / beta),
            k,
            bicriteria_factor: 2,
            seed: 0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_beta(mut self, beta: f64) -> Result<Self> {
        self.beta = beta;
        self.gamma_s = 2f64.powf(1.0 / beta);
        self.validate()?;
        Ok(self)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps_total > 0.0 && self.eps_total.is_finite()) {
            return Err(Error::param("eps_total must be positive"));
        }
        if !(self.delta > 0.0 && self.delta < 0.2) {
            return Err(Error::param(format!("delta must satisfy 0 < delta < 1/5, got {}", self.delta)));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::param("radius must be positive"));
        }
        if !(self.beta > 1.0) {
            return Err(Error::param("beta must be > 1"));
        }
        if !(self.gamma_m > 1.0 && self.gamma_s > 1.0) {
            return Err(Error::param("growth factors must be > 1"));
        }
        if self.m0 == 0 || self.s0 == 0 || self.k == 0 || self.bicriteria_factor == 0 {
            return Err(Error::param("m0, s0, k and bicriteria_factor must be >= 1"));
        }
        Ok(())
    }

    /// `b = 2B²`.
    pub fn b(&self) -> f64 {
        2.0 * self.radius * self.radius
    }

    /// Stopping threshold `τ = 3ε/2`.
    pub fn threshold(&self) -> f64 {
        1.5 * self.eps_total
    }
}

/// `ceil(4 · i · b · ln(1/δ) / ε²)`, without any restriction on δ.
pub fn validation_budget(i: u64, b: f64, delta: f64, eps: f64) -> usize {
    let a = ceil_snap(4.0 * i as f64 * b * (1.0 / delta).ln() / (eps * eps)) as usize;
    // a positive budget never rounds down to nothing
    if i > 0 {
        a.max(1)
    } else {
        a
    }
}

/// Cumulative validation points `a[i]` for iteration `i >= 1`.
pub fn validation_size(i: u64, p: &TramParams) -> usize {
    validation_budget(i, p.b(), p.delta, p.eps_total)
}

/// `R_a(c) <= τ`, inclusive.
pub fn stopping_test(validation_risk: f64, p: &TramParams) -> bool {
    validation_risk <= p.threshold()
}

/// One schedule step `min(ceil(γ · current), cap)`.
pub fn next_size(current: usize, gamma: f64, cap: usize) -> usize {
    (ceil_snap(gamma * current as f64) as usize).min(cap)
}

/// Initial sizes inversely proportional to the target risk:
/// `m0 = ceil(c_m · ε_ref / ε)` and `s0 = ceil(c_s · ε_ref / ε)`.
pub fn initial_sizes(eps_total: f64, eps_ref: f64, c_m: f64, c_s: f64) -> (usize, usize) {
    let m0 = ceil_snap(c_m * eps_ref / eps_total).max(1.0) as usize;
    let s0 = ceil_snap(c_s * eps_ref / eps_total).max(1.0) as usize;
    (m0, s0)
}

/// Reference risk from a quick solve on a uniform subsample of at most
/// `pilot_size` training points, measured on that subsample.
pub fn pilot_reference_risk(train: &Dataset, pilot_size: usize, solver: &SolverConfig) -> Result<f64> {
    let mut r = rng::stream(solver.seed, &[rng::name_tag("pilot")]);
    let sample = uniform_subsample(train.points(), pilot_size, &mut r)?;
    let res = solve(&sample, solver)?;
    Ok(res.weighted_risk)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TramRow {
    pub i: usize,
    pub m: usize,
    pub s: usize,
    pub a: usize,
    pub validation_risk: f64,
    pub stopped: bool,
    /// Summarization plus solve.
    pub elapsed_solver: Duration,
    pub elapsed_validation: Duration,
}

#[derive(Debug, Clone)]
pub struct TramTrace {
    pub rows: Vec<TramRow>,
    /// The run ended without passing the stopping test.
    pub exhausted: bool,
    /// Output centers: the last solution, or the best validated one when
    /// exhausted.
    pub centers: Centers,
    pub validation_risk: f64,
    pub elapsed: Duration,
}

pub const TRACE_HEADER: &str = "i,m,s,a,val_risk,stopped,t_solver_ms,t_val_ms";

impl TramTrace {
    /// Index J of the last iteration.
    pub fn last_iteration(&self) -> usize {
        self.rows.last().map_or(0, |r| r.i)
    }

    pub fn validation_points_used(&self) -> usize {
        self.rows.last().map_or(0, |r| r.a)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{TRACE_HEADER}")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                r.i,
                r.m,
                r.s,
                r.a,
                r.validation_risk,
                r.stopped,
                r.elapsed_solver.as_secs_f64() * 1e3,
                r.elapsed_validation.as_secs_f64() * 1e3
            )?;
        }
        w.flush()
    }
}

/// Consecutive failing tests with `m` and `s` both saturated at `n` before
/// giving up.
const SATURATED_FAILURES: usize = 3;

/// Run the navigation loop. `validation` must be disjoint from `train`;
/// iteration `i` validates on its first `validation_size(i + 1)` points.
pub fn run_tram(train: &Dataset, validation: &Dataset, p: &TramParams, solver: &SolverConfig) -> Result<TramTrace> {
    p.validate()?;
    solver.validate()?;
    let n = train.n();
    if p.m0 > n {
        return Err(Error::param(format!("m0 = {} exceeds the {} training points", p.m0, n)));
    }
    if validation.dim() != train.dim() {
        return Err(Error::DimensionMismatch { expected: train.dim(), got: validation.dim() });
    }
    let start = Instant::now();
    let mut rows: Vec<TramRow> = Vec::new();
    let mut best: Option<(f64, Centers)> = None;
    let (mut m, mut s) = (p.m0, p.s0.min(n));
    let mut saturated_failures = 0;
    let mut i = 0usize;
    loop {
        let a = validation_size(i as u64 + 1, p);
        if a > validation.n() {
            return match best {
                Some((risk, centers)) => {
                    Ok(TramTrace { rows, exhausted: true, centers, validation_risk: risk, elapsed: start.elapsed() })
                }
                None => Err(Error::ValidationExhausted { needed: a, available: validation.n() }),
            };
        }

        let t0 = Instant::now();
        let cp = CoresetParams {
            k: p.k,
            size: s,
            seed: rng::derive_seed(p.seed, &[i as u64, 0]),
            bicriteria_factor: p.bicriteria_factor,
        };
        let summary = build_coreset(train.head(m), &cp, &mut cp.rng())?;
        let cfg = SolverConfig { k: p.k, seed: rng::derive_seed(p.seed, &[i as u64, 1]), ..solver.clone() };
        let solved = solve(&summary, &cfg)?;
        let elapsed_solver = t0.elapsed();

        let t1 = Instant::now();
        let risk = empirical_risk(validation.head(a), &solved.centers)?;
        let elapsed_validation = t1.elapsed();

        let stopped = stopping_test(risk, p);
        rows.push(TramRow { i, m, s, a, validation_risk: risk, stopped, elapsed_solver, elapsed_validation });
        if stopped {
            return Ok(TramTrace {
                rows,
                exhausted: false,
                centers: solved.centers,
                validation_risk: risk,
                elapsed: start.elapsed(),
            });
        }
        if best.as_ref().is_none_or(|(r, _)| risk < *r) {
            best = Some((risk, solved.centers));
        }
        if m == n && s == n {
            saturated_failures += 1;
            if saturated_failures >= SATURATED_FAILURES {
                let (risk, centers) = best.expect("at least one row");
                return Ok(TramTrace {
                    rows,
                    exhausted: true,
                    centers,
                    validation_risk: risk,
                    elapsed: start.elapsed(),
                });
            }
        }
        m = next_size(m, p.gamma_m, n);
        s = next_size(s, p.gamma_s, n);
        i += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{gen_synthetic, SyntheticSpec};

    fn params(eps: f64, m0: usize, s0: usize) -> TramParams {
        TramParams::new(eps, 0.1, 1.0, 2, m0, s0).unwrap()
    }

    #[test]
    fn validation_budget_examples() {
        let delta = (-1.0f64).exp();
        assert_eq!(validation_budget(1, 2.0, delta, 0.5), 32);
        assert_eq!(validation_budget(2, 2.0, delta, 0.5), 64);
    }

    #[test]
    fn delta_outside_range_rejected() {
        assert!(TramParams::new(1.0, 0.2, 1.0, 2, 1, 1).is_err());
        assert!(TramParams::new(1.0, 0.999, 1.0, 2, 1, 1).is_err());
        assert!(TramParams::new(1.0, 0.0, 1.0, 2, 1, 1).is_err());
        assert!(TramParams::new(1.0, 0.19, 1.0, 2, 1, 1).is_ok());
    }

    #[test]
    fn stopping_threshold_is_inclusive() {
        let p = params(2.0, 1, 1);
        assert!(stopping_test(3.0, &p));
        assert!(!stopping_test(3.0 + 1e-12, &p));
        assert!(stopping_test(0.0, &p));
    }

    #[test]
    fn truncation_schedule_saturates() {
        let mut m = 100;
        let mut seq = vec![m];
        for _ in 0..4 {
            m = next_size(m, 2.0, 350);
            seq.push(m);
        }
        assert_eq!(seq, vec![100, 200, 350, 350, 350]);
    }

    #[test]
    fn summary_schedule_rounds_up() {
        let p = params(1.0, 1, 1);
        assert!((p.gamma_s - 1.5).abs() < 1e-12);
        let mut s = 100;
        let mut seq = vec![s];
        for _ in 0..4 {
            s = next_size(s, p.gamma_s, usize::MAX);
            seq.push(s);
        }
        assert_eq!(seq, vec![100, 150, 225, 338, 507]);
    }

    #[test]
    fn initial_sizes_scale_inversely_with_risk() {
        assert_eq!(initial_sizes(10.0, 10.0, 1000.0, 100.0), (1000, 100));
        assert_eq!(initial_sizes(20.0, 10.0, 1000.0, 100.0), (500, 50));
    }

    fn blobs() -> (Dataset, Dataset) {
        let spec = SyntheticSpec { sigma2: 1.0, dirichlet_alpha: 5.0, ..SyntheticSpec::new(3000, 2, 3).with_seed(17) };
        let d = gen_synthetic(&spec).unwrap().dataset;
        crate::data::split_validation(&d, 0.2, 1).unwrap()
    }

    #[test]
    fn easy_target_stops_immediately() {
        let (train, val) = blobs();
        let b = train.radius().max(val.radius());
        let p = TramParams::new(1e6, 0.1, b, 3, 50, 10).unwrap();
        let t = run_tram(&train, &val, &p, &SolverConfig::new(3)).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert!(t.rows[0].stopped && !t.exhausted);
        assert_eq!((t.rows[0].m, t.rows[0].s), (50, 10));
        assert_eq!(t.rows[0].a, validation_size(1, &p));
    }

    #[test]
    fn impossible_target_is_exhausted() {
        let (train, val) = blobs();
        let p = TramParams::new(1e-3, 0.1, 1e-4, 3, 1000, 500).unwrap();
        let t = run_tram(&train, &val, &p, &SolverConfig::new(3)).unwrap();
        assert!(t.exhausted);
        assert!(t.rows.iter().all(|r| !r.stopped));
        let tail = &t.rows[t.rows.len() - SATURATED_FAILURES..];
        assert!(tail.iter().all(|r| r.m == train.n() && r.s == train.n()));
    }

    #[test]
    fn schedule_invariants_hold_on_a_run() {
        let (train, val) = blobs();
        let p = TramParams::new(2.5, 0.1, 5.0, 3, 40, 5).unwrap().with_seed(3);
        let t = run_tram(&train, &val, &p, &SolverConfig::new(3)).unwrap();
        for (w, r) in t.rows.iter().enumerate() {
            assert_eq!(r.i, w);
            assert_eq!(r.a, validation_size(w as u64 + 1, &p));
        }
        for pair in t.rows.windows(2) {
            assert_eq!(pair[1].m, next_size(pair[0].m, 2.0, train.n()));
            assert_eq!(pair[1].s, next_size(pair[0].s, p.gamma_s, train.n()));
            assert!(pair[1].a > pair[0].a);
            assert!(pair[1].s > pair[0].s || pair[0].s == train.n());
        }
        let stops = t.rows.iter().filter(|r| r.stopped).count();
        assert_eq!(stops, usize::from(!t.exhausted));
        assert_eq!(t.rows.last().unwrap().stopped, !t.exhausted);
    }

    #[test]
    fn runs_are_deterministic() {
        let (train, val) = blobs();
        let p = TramParams::new(2.5, 0.1, 5.0, 3, 40, 5).unwrap().with_seed(9);
        let a = run_tram(&train, &val, &p, &SolverConfig::new(3)).unwrap();
        let b = run_tram(&train, &val, &p, &SolverConfig::new(3)).unwrap();
        assert_eq!(a.centers, b.centers);
        let strip = |t: &TramTrace| t.rows.iter().map(|r| (r.m, r.s, r.a, r.validation_risk)).collect::<Vec<_>>();
        assert_eq!(strip(&a), strip(&b));
    }

    #[test]
    fn bad_inputs_rejected() {
        let (train, val) = blobs();
        let p = TramParams::new(1.0, 0.1, 1.0, 3, train.n() + 1, 5).unwrap();
        assert!(run_tram(&train, &val, &p, &SolverConfig::new(3)).is_err());
        // a[0] alone needs more than the pool holds
        let p = TramParams::new(1e-3, 0.1, 100.0, 3, 10, 5).unwrap();
        assert!(matches!(run_tram(&train, &val, &p, &SolverConfig::new(3)), Err(Error::ValidationExhausted { .. })));
    }

    #[test]
    fn trace_csv_has_documented_header() {
        let (train, val) = blobs();
        let p = TramParams::new(1e6, 0.1, 1.0, 3, 50, 10).unwrap();
        let t = run_tram(&train, &val, &p, &SolverConfig::new(3)).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), TRACE_HEADER);
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row.len(), 8);
        assert_eq!(&row[..3], &["0", "50", "10"]);
        assert_eq!(row[5], "true");
    }
}
