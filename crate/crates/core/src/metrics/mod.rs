//! Cluster quality: purity, document features, frame probe and the K sweep.

mod evaluate;
mod features;
mod probe;
mod purity;
mod sweep;

pub use evaluate::{evaluate, evaluate_cut, CutEvaluation, EvalOptions};
pub use features::{document_features, document_features_subset, standardize, DocumentFeatures};
pub use probe::{f1, frame_probe, split_documents, train_logistic, FrameModel, ProbeConfig, ProbeResult};
pub use purity::{
    active_groups, avg_role_purity, chain_forms, exact_match_purity, purity_report, retained_count, role_purity,
    role_purity_checked, stance_purity, top_fraction, top_fraction_of, ClusterPurity, PurityReport, RoleDenominator,
};
pub use sweep::{average_ranks, default_grid, sweep_csv, sweep_k, ConfigSummary, SweepConfig, SweepReport, SweepRow, CSV_HEADER};
