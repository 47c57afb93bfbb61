//! Synthetic data, demand sampling and experiment sweeps.

pub mod demand;
pub mod experiment;
pub mod graph_gen;
pub mod metrics;
pub mod vector_gen;

pub use demand::{sample_demand, two_largest_clusters, DemandMode};
pub use experiment::{
    aggregate_cells, load_dataset, run_experiment, Aggregate, CellResult, CostReport, Dataset, DatasetSpec,
    ExperimentConfig, Method, Stat,
};
pub use graph_gen::{gen_cluster_graph, GeneratedGraph, GraphGenConfig};
pub use metrics::{iteration_cost, moving_average};
pub use vector_gen::{gen_gaussian_mixture, GaussianMixtureConfig};
