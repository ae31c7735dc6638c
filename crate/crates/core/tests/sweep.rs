mod common;

use kmtrade_core::tradeoff::{run_sweep, Execution, Procedure, SweepGrid};
use kmtrade_core::{Dataset, SolverConfig};

// 1-D, two clusters at 0 and 100; the far one holds 5% of the mass.
fn rare_cluster_data() -> Dataset {
    let mut rows = Vec::new();
    for i in 0..1900 {
        rows.push(vec![(i % 19) as f64 * 0.1]);
    }
    for i in 0..100 {
        rows.push(vec![100.0 + (i % 10) as f64 * 0.1]);
    }
    Dataset::from_rows(rows).unwrap()
}

#[test]
fn coreset_covers_the_rare_cluster() {
    let data = rare_cluster_data();
    let mut grid = SweepGrid::new(vec![2000], vec![4], Procedure::Uniform, SolverConfig::new(2));
    grid.repeats = 200;
    grid.seed = 31;
    let u = run_sweep(&data, &grid, Execution::Parallel { jobs: 4 }).unwrap();
    grid.procedure = Procedure::Coreset;
    let c = run_sweep(&data, &grid, Execution::Parallel { jobs: 4 }).unwrap();
    let (ru, rc) = (&u.records[0], &c.records[0]);
    let se = ((ru.std_risk.powi(2) + rc.std_risk.powi(2)) / grid.repeats as f64).sqrt();
    assert!(rc.mean_risk <= ru.mean_risk + 2.0 * se, "coreset {} vs uniform {}", rc.mean_risk, ru.mean_risk);
    assert!(rc.mean_risk < ru.mean_risk);
}

#[test]
fn single_repeat_sweeps_reproduce_exactly() {
    let data = rare_cluster_data();
    let mut grid = SweepGrid::new(vec![100, 500], vec![10, 50], Procedure::Coreset, SolverConfig::new(2));
    grid.repeats = 1;
    grid.seed = 32;
    let a = run_sweep(&data, &grid, Execution::Sequential).unwrap();
    let b = run_sweep(&data, &grid, Execution::Sequential).unwrap();
    let risks = |l: &kmtrade_core::Lambda| l.records.iter().map(|r| r.mean_risk.to_bits()).collect::<Vec<_>>();
    assert_eq!(risks(&a), risks(&b));
}
