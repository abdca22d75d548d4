//! Benchmark tooling: graph generators, hard mixtures and experiment reports.

pub mod experiment;
pub mod generators;
pub mod mixture;

pub use experiment::{
    ratio_of_averages, run_experiment, ExperimentOptions, ExperimentReport, NamedGraph, RatioRow, RunMetrics,
    RunRecord, DEFAULT_SEEDS,
};
pub use mixture::{generate_hard_mixture, inter_edge_budget, MixtureParams, MixtureSpec};
