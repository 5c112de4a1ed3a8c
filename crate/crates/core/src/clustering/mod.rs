//! Constrained k-means with cannot-link penalties.

mod assign;
mod dataset;
mod fit;
mod init;
mod model;
mod params;
mod update;

pub use assign::{assign_step, nearest_centroids, sweep, PenaltyTally, UNASSIGNED};
pub use dataset::{sq_dist, Dataset};
pub use fit::{
    distance_term, fit, fit_dataset, fit_from, is_locally_optimal, kmeans_baseline, local_opt_check, objective,
    objective_of, violation_count, FitOutcome,
};
pub use init::{extend_farthest, init_centroid_indices, init_centroids};
pub use model::{ClusteringModel, ModelFile, StopReason};
pub use params::ClusterParams;
pub use update::{max_shift, update_centroids};
