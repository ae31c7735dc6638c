use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use kmtrade_core::analytic::{self, analytic_curves, write_curves_csv};
use kmtrade_core::data::save_truth_csv;
use kmtrade_core::tradeoff::{pareto_data_time, pareto_risk_time, run_sweep, write_frontier_csv};
use kmtrade_core::tram::{initial_sizes, pilot_reference_risk};
use kmtrade_core::{
    gen_synthetic, load_csv, run_tram, save_csv, split_validation, AnalyticParams, CurveMode, Dataset, Error,
    Execution, Lambda, Procedure, Result, SolverConfig, SweepGrid, SyntheticSpec, TramParams,
};

use crate::manifest::sibling;
use crate::{AnalyticArgs, GenArgs, ModeArg, ParetoArgs, ProcedureArg, ScaleArg, SolverArgs, SweepArgs, TramArgs};

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io { path: path.to_path_buf(), source }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(io_err(path))
}

fn solver_config(a: &SolverArgs, seed: u64) -> SolverConfig {
    SolverConfig { k: a.k, max_iters: a.max_iters, rel_tol: a.rel_tol, restarts: a.restarts, seed }
}

pub fn gen(a: &GenArgs) -> Result<Vec<PathBuf>> {
    let spec = SyntheticSpec {
        n: a.n,
        d: a.d,
        k_true: a.k_true,
        box_lo: a.box_lo,
        box_hi: a.box_hi,
        sigma2: a.sigma2,
        dirichlet_alpha: a.alpha,
        seed: a.seed,
    };
    let data = gen_synthetic(&spec)?;
    let truth = a.truth.clone().unwrap_or_else(|| sibling(&a.output.out, "truth.csv"));
    save_csv(&data.dataset, &a.output.out)?;
    save_truth_csv(&data, &truth)?;
    eprintln!("wrote {} points in {} dimensions to {}", a.n, a.d, a.output.out.display());
    Ok(vec![a.output.out.clone(), truth])
}

pub fn sweep(a: &SweepArgs) -> Result<Vec<PathBuf>> {
    let reference = load_csv(&a.input.input, a.input.has_header)?;
    let procedure = match a.procedure {
        ProcedureArg::Uniform => Procedure::Uniform,
        ProcedureArg::Coreset => Procedure::Coreset,
    };
    let mut grid = SweepGrid::new(a.n_values.clone(), a.s_values.clone(), procedure, solver_config(&a.solver, a.seed));
    grid.repeats = a.repeats;
    grid.bicriteria_factor = a.bicriteria_factor;
    grid.seed = a.seed;
    let exec = if a.timing_strict {
        Execution::Sequential
    } else {
        let jobs = a.jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
        if jobs <= 1 {
            Execution::Sequential
        } else {
            Execution::Parallel { jobs }
        }
    };
    let lam = run_sweep(&reference, &grid, exec)?;
    lam.write_csv(create(&a.output.out)?).map_err(io_err(&a.output.out))?;
    eprintln!("wrote {} records to {}", lam.records.len(), a.output.out.display());
    Ok(vec![a.output.out.clone()])
}

pub fn pareto(a: &ParetoArgs) -> Result<Vec<PathBuf>> {
    let mut records = Vec::new();
    for path in &a.lambdas {
        let file = File::open(path).map_err(io_err(path))?;
        records.extend(Lambda::read_csv(file)?.records);
    }
    let lam = Lambda::new(records);
    let mut rows = Vec::new();
    for p in lam.procedures() {
        let sub = lam.for_procedure(p);
        let frontier = match (a.eps, a.n) {
            (Some(eps), _) => pareto_data_time(&sub, eps),
            (None, Some(n)) => pareto_risk_time(&sub, n),
            (None, None) => return Err(Error::InvalidParameter("one of --eps or --n is required".into())),
        };
        rows.extend(frontier.into_iter().map(|f| (f, p.to_string())));
    }
    if rows.is_empty() {
        eprintln!("warning: no feasible configuration; writing header only");
    }
    write_frontier_csv(create(&a.output.out)?, &rows).map_err(io_err(&a.output.out))?;
    Ok(vec![a.output.out.clone()])
}

pub fn tram(a: &TramArgs) -> Result<Vec<PathBuf>> {
    let data = load_csv(&a.input.input, a.input.has_header)?;
    let radius = a.radius.unwrap_or_else(|| data.radius());
    let (train, validation) = split_validation(&data, a.validation_fraction, a.seed)?;
    let solver = solver_config(&a.solver, a.seed);
    let (m0, s0) = match (a.m0, a.s0) {
        (Some(m0), Some(s0)) => (m0, s0),
        (m0, s0) => {
            let eps_ref = pilot_reference_risk(&train, a.pilot_size.min(train.n()), &solver)?;
            let (pm, ps) = initial_sizes(a.eps, eps_ref, a.c_m, a.c_s);
            (m0.unwrap_or(pm), s0.unwrap_or(ps))
        }
    };
    let mut p = TramParams::new(a.eps, a.delta, radius, a.solver.k, m0.min(train.n()), s0)?.with_seed(a.seed);
    if let Some(beta) = a.beta {
        p = p.with_beta(beta)?;
    }
    p.gamma_m = a.gamma_m;
    p.bicriteria_factor = a.bicriteria_factor;
    p.validate()?;
    let trace = run_tram(&train, &validation, &p, &solver)?;
    trace.write_csv(create(&a.output.out)?).map_err(io_err(&a.output.out))?;
    let centers_path = a.centers.clone().unwrap_or_else(|| sibling(&a.output.out, "centers.csv"));
    save_csv(&Dataset::new(trace.centers.dim(), trace.centers.coords().to_vec())?, &centers_path)?;
    eprintln!(
        "{} after {} iterations: validation risk {:.6} (threshold {:.6})",
        if trace.exhausted { "data exhausted" } else { "stopped" },
        trace.rows.len(),
        trace.validation_risk,
        p.threshold()
    );
    Ok(vec![a.output.out.clone(), centers_path])
}

pub fn analytic(a: &AnalyticArgs) -> Result<Vec<PathBuf>> {
    let p = AnalyticParams {
        d: a.d,
        k: a.k,
        sigma_bar: a.sigma_bar,
        alpha_init: a.alpha_init,
        alpha_samp: a.alpha_samp,
        beta: a.beta,
        a: a.a,
        b: a.b,
        eps_total: a.eps,
        include_sigma: !a.no_sigma,
    };
    let (mode, lo, hi, scale) = match a.mode {
        ModeArg::DataTime => (CurveMode::DataTime, 100.0, 1e6, ScaleArg::Log),
        ModeArg::RiskTime => (CurveMode::RiskTime { n: a.n }, 20.0, 1500.0, ScaleArg::Linear),
    };
    let (lo, hi) = (a.from.unwrap_or(lo), a.to.unwrap_or(hi));
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
        return Err(Error::InvalidParameter(format!("range must satisfy 0 < from <= to, got {lo}..{hi}")));
    }
    let xs = match a.scale.unwrap_or(scale) {
        ScaleArg::Log => analytic::log_range(lo, hi, a.points),
        ScaleArg::Linear => analytic::linear_range(lo, hi, a.points),
    };
    let rows = analytic_curves(&p, mode, &xs)?;
    write_curves_csv(create(&a.output.out)?, &rows).map_err(io_err(&a.output.out))?;
    eprintln!("wrote {} rows to {}", rows.len(), a.output.out.display());
    Ok(vec![a.output.out.clone()])
}
