use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::params::ClusterParams;
use crate::corpus::Corpus;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    AssignmentsStable,
    CentroidsStable,
    MaxIter,
}

/// A fitted partition of a corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusteringModel {
    pub params: ClusterParams,
    pub centroids: Vec<Vec<f64>>,
    /// Chain ids in corpus order.
    pub ids: Vec<String>,
    /// Cluster label per chain, aligned with `ids`.
    pub labels: Vec<usize>,
    pub objective_trace: Vec<f64>,
    pub violation_count: u64,
    pub stop_reason: StopReason,
}

impl ClusteringModel {
    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    pub fn iterations(&self) -> usize {
        self.objective_trace.len()
    }

    pub fn final_objective(&self) -> f64 {
        self.objective_trace.last().copied().unwrap_or(f64::NAN)
    }

    pub fn converged(&self) -> bool {
        self.stop_reason != StopReason::MaxIter
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k()];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    /// Member chain indices per cluster, ascending.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k()];
        for (i, &l) in self.labels.iter().enumerate() {
            out[l].push(i);
        }
        out
    }

    pub fn assignments(&self) -> BTreeMap<String, usize> {
        self.ids.iter().cloned().zip(self.labels.iter().copied()).collect()
    }

    /// Check that the model covers exactly the corpus' chains with matching dimensions.
    pub fn check_corpus(&self, corpus: &Corpus) -> Result<()> {
        let corpus_ids: Vec<&str> = corpus.chains().iter().map(|c| c.id.as_str()).collect();
        if let Some(missing) = self.ids.iter().find(|id| corpus.index_of(id).is_none()) {
            return Err(Error::ModelMismatch(format!(
                "model assigns chain `{missing}` which is not in the corpus"
            )));
        }
        if let Some(extra) = corpus_ids
            .iter()
            .find(|id| self.ids.binary_search_by(|m| m.as_str().cmp(id)).is_err())
        {
            return Err(Error::ModelMismatch(format!(
                "corpus chain `{extra}` has no assignment in the model"
            )));
        }
        if self.ids.len() != corpus_ids.len() || self.ids.iter().zip(&corpus_ids).any(|(a, b)| a != b) {
            return Err(Error::ModelMismatch("chain order differs from the corpus".into()));
        }
        if let Some(c) = self.centroids.iter().find(|c| c.len() != corpus.dim()) {
            return Err(Error::ModelMismatch(format!(
                "centroid dimension {} differs from embedding dimension {}",
                c.len(),
                corpus.dim()
            )));
        }
        if let Some(&l) = self.labels.iter().find(|&&l| l >= self.k()) {
            return Err(Error::ModelMismatch(format!("label {l} out of range for k = {}", self.k())));
        }
        Ok(())
    }

    pub fn to_file(&self) -> ModelFile {
        ModelFile {
            params: self.params.clone(),
            seed: self.params.seed,
            centroids: self.centroids.clone(),
            assignments: self.assignments(),
            objective_trace: self.objective_trace.clone(),
            violation_count: self.violation_count,
            iterations: self.iterations(),
            stop_reason: self.stop_reason,
        }
    }

    pub fn from_file(file: ModelFile) -> Result<Self> {
        let k = file.centroids.len();
        if k != file.params.k {
            return Err(Error::ModelMismatch(format!(
                "model lists {k} centroids but params.k = {}",
                file.params.k
            )));
        }
        let (ids, labels): (Vec<String>, Vec<usize>) = file.assignments.into_iter().unzip();
        if let Some(&l) = labels.iter().find(|&&l| l >= k) {
            return Err(Error::ModelMismatch(format!("label {l} out of range for k = {k}")));
        }
        Ok(ClusteringModel {
            params: file.params,
            centroids: file.centroids,
            ids,
            labels,
            objective_trace: file.objective_trace,
            violation_count: file.violation_count,
            stop_reason: file.stop_reason,
        })
    }
}

/// Serialized model layout.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub params: ClusterParams,
    pub seed: u64,
    pub centroids: Vec<Vec<f64>>,
    pub assignments: BTreeMap<String, usize>,
    pub objective_trace: Vec<f64>,
    pub violation_count: u64,
    pub iterations: usize,
    pub stop_reason: StopReason,
}
