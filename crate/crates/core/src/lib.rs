//! Coreset-based summarization for k-means, tradeoff navigation (TRAM),
//! empirical Pareto frontiers and an analytic tradeoff simulator.

pub mod analytic;
pub mod coreset;
pub mod data;
pub mod error;
pub mod geometry;
pub mod rng;
pub mod solver;
pub mod tradeoff;
pub mod tram;

pub use analytic::{AnalyticParams, CurveMode, Optimum, Regime};
pub use coreset::{build_coreset, eta_bound, CoresetParams, EtaModel};
pub use data::{gen_synthetic, load_csv, save_csv, split_validation, SyntheticData, SyntheticSpec};
pub use error::{Error, Result};
pub use geometry::{empirical_risk, squared_dist, weighted_risk, Centers, Dataset, Points, WeightedSet};
pub use solver::{solve, SolveResult, SolverConfig};
pub use tradeoff::{Execution, Lambda, LambdaRecord, Procedure, SweepGrid};
pub use tram::{run_tram, TramParams, TramTrace};
