//! Evaluation of one fitted model at one top-fraction cut.

use serde::{Deserialize, Serialize};

use super::features::document_features_subset;
use super::probe::{frame_probe, ProbeConfig, ProbeResult};
use super::purity::{purity_report, top_fraction, PurityReport, RoleDenominator};
use crate::clustering::ClusteringModel;
use crate::corpus::{ConflictIndex, Corpus};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutEvaluation {
    pub fraction: f64,
    pub purity: PurityReport,
    /// Present only when the corpus carries frame labels.
    pub probe: Option<ProbeResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub fractions: Vec<f64>,
    pub groups: Option<Vec<String>>,
    pub denominator: RoleDenominator,
    pub probe: ProbeConfig,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            fractions: vec![1.0, 0.25],
            groups: None,
            denominator: RoleDenominator::ClusterSize,
            probe: ProbeConfig::default(),
        }
    }
}

/// Purity and, when frame labels are present, the frame probe. Document
/// features at a cut count only the retained chains.
pub fn evaluate_cut(
    model: &ClusteringModel,
    corpus: &Corpus,
    index: &ConflictIndex,
    fraction: f64,
    options: &EvalOptions,
    split_seed: u64,
) -> Result<CutEvaluation> {
    let purity = purity_report(model, corpus, index, fraction, options.groups.as_deref(), options.denominator)?;
    let probe = match corpus.frame_labels() {
        Some(labels) => {
            let subset = top_fraction(model, corpus, fraction)?;
            let features = document_features_subset(model, corpus, Some(&subset))?;
            Some(frame_probe(&features, labels, split_seed, &options.probe)?)
        }
        None => None,
    };
    Ok(CutEvaluation { fraction, purity, probe })
}

pub fn evaluate(
    model: &ClusteringModel,
    corpus: &Corpus,
    index: &ConflictIndex,
    options: &EvalOptions,
    split_seed: u64,
) -> Result<Vec<CutEvaluation>> {
    options
        .fractions
        .iter()
        .map(|&f| evaluate_cut(model, corpus, index, f, options, split_seed))
        .collect()
}
