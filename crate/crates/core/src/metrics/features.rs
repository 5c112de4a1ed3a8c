//! Per-document cluster frequency vectors.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::clustering::ClusteringModel;
use crate::corpus::Corpus;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentFeatures {
    pub doc_id: String,
    /// Chains of this document assigned to each cluster.
    pub raw: Vec<u32>,
    /// `raw` standardized by its own mean and population standard deviation.
    pub standardized: Vec<f64>,
}

/// Standardize a count vector across its own entries. Zero spread gives zeros.
pub fn standardize(raw: &[u32]) -> Vec<f64> {
    let k = raw.len();
    if k == 0 {
        return Vec::new();
    }
    let mean = raw.iter().map(|&c| f64::from(c)).sum::<f64>() / k as f64;
    let var = raw.iter().map(|&c| (f64::from(c) - mean).powi(2)).sum::<f64>() / k as f64;
    let sd = var.sqrt();
    if sd == 0.0 {
        return vec![0.0; k];
    }
    raw.iter().map(|&c| (f64::from(c) - mean) / sd).collect()
}

/// Feature vectors for every document, counting only chains in `subset`
/// (all chains when `None`). Documents named in the frame labels but without
/// chains get zero vectors. Output is sorted by document id.
pub fn document_features_subset(model: &ClusteringModel, corpus: &Corpus, subset: Option<&[usize]>) -> Result<Vec<DocumentFeatures>> {
    model.check_corpus(corpus)?;
    let k = model.k();
    let mut raw: BTreeMap<&str, Vec<u32>> = BTreeMap::new();
    for doc in corpus.doc_ids() {
        raw.insert(doc, vec![0; k]);
    }
    if let Some(labels) = corpus.frame_labels() {
        for doc in labels.keys() {
            raw.entry(doc.as_str()).or_insert_with(|| vec![0; k]);
        }
    }
    let chains = corpus.chains();
    let mut count = |i: usize| {
        let doc = chains[i].doc_id.as_str();
        raw.get_mut(doc).expect("every document seeded")[model.labels[i]] += 1;
    };
    match subset {
        Some(s) => s.iter().copied().for_each(&mut count),
        None => (0..chains.len()).for_each(&mut count),
    }
    Ok(raw
        .into_iter()
        .map(|(doc, counts)| DocumentFeatures {
            doc_id: doc.to_string(),
            standardized: standardize(&counts),
            raw: counts,
        })
        .collect())
}

pub fn document_features(model: &ClusteringModel, corpus: &Corpus) -> Result<Vec<DocumentFeatures>> {
    document_features_subset(model, corpus, None)
}
