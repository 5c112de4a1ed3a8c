//! Frame-signal probe: one-vs-rest logistic regression from document cluster
//! frequencies to article frame labels, scored by F1 on a seeded held-out split.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::features::DocumentFeatures;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    /// Share of documents held out for scoring.
    pub test_fraction: f64,
    pub learning_rate: f64,
    pub iterations: usize,
    /// L2 strength on the weights (the bias is not penalized).
    pub l2: f64,
    /// Minimum positive training documents for a frame to be fitted.
    pub min_support: usize,
    pub threshold: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            test_fraction: 0.2,
            learning_rate: 0.5,
            iterations: 500,
            l2: 1e-3,
            min_support: 2,
            threshold: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub per_frame_f1: BTreeMap<String, f64>,
    pub micro_f1: f64,
    pub macro_f1: f64,
    pub split_seed: u64,
    pub train_docs: usize,
    pub test_docs: usize,
    pub coefficients: BTreeMap<String, FrameModel>,
    /// Frames that were not fitted, with the reason.
    pub skipped: BTreeMap<String, String>,
}

/// Binary logistic regression by full-batch gradient descent on mean log-loss.
pub fn train_logistic(x: &[Vec<f64>], y: &[bool], config: &ProbeConfig) -> FrameModel {
    let n = x.len();
    let dim = x.first().map_or(0, Vec::len);
    let mut w = vec![0.0; dim];
    let mut b = 0.0;
    if n == 0 {
        return FrameModel { weights: w, bias: b };
    }
    let mut grad = vec![0.0; dim];
    for _ in 0..config.iterations {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut grad_b = 0.0;
        for (xi, &yi) in x.iter().zip(y) {
            let err = sigmoid(dot(&w, xi) + b) - if yi { 1.0 } else { 0.0 };
            for (g, v) in grad.iter_mut().zip(xi) {
                *g += err * v;
            }
            grad_b += err;
        }
        let scale = 1.0 / n as f64;
        for (wj, gj) in w.iter_mut().zip(&grad) {
            *wj -= config.learning_rate * (gj * scale + config.l2 * *wj);
        }
        b -= config.learning_rate * grad_b * scale;
    }
    FrameModel { weights: w, bias: b }
}

impl FrameModel {
    pub fn probability(&self, x: &[f64]) -> f64 {
        sigmoid(dot(&self.weights, x) + self.bias)
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// F1 from confusion counts; zero when there is nothing to score.
pub fn f1(tp: usize, fp: usize, fn_: usize) -> f64 {
    let denom = 2 * tp + fp + fn_;
    if denom == 0 {
        0.0
    } else {
        2.0 * tp as f64 / denom as f64
    }
}

/// Seeded split of document indices into (train, test).
pub fn split_documents(n: usize, test_fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let mut n_test = (n as f64 * test_fraction).round() as usize;
    if n >= 2 {
        n_test = n_test.clamp(1, n - 1);
    }
    let test = order[..n_test].to_vec();
    let train = order[n_test..].to_vec();
    (train, test)
}

/// Fit and score the probe.
///
/// Only documents present in `labels` take part. Frames with fewer than
/// `min_support` positive training documents, or with no negative training
/// documents, are skipped and reported rather than failing the run.
pub fn frame_probe(
    features: &[DocumentFeatures],
    labels: &BTreeMap<String, BTreeSet<String>>,
    split_seed: u64,
    config: &ProbeConfig,
) -> Result<ProbeResult> {
    if !(config.test_fraction > 0.0 && config.test_fraction < 1.0) {
        return Err(Error::InvalidParams(format!(
            "test fraction must be in (0, 1), got {}",
            config.test_fraction
        )));
    }
    let docs: Vec<&DocumentFeatures> = features.iter().filter(|f| labels.contains_key(&f.doc_id)).collect();
    if docs.len() < 2 {
        return Err(Error::InvalidParams(format!(
            "frame probe needs at least 2 labeled documents, found {}",
            docs.len()
        )));
    }
    let frames: BTreeSet<&String> = docs.iter().flat_map(|d| labels[&d.doc_id].iter()).collect();
    let (train, test) = split_documents(docs.len(), config.test_fraction, split_seed);
    let x_train: Vec<Vec<f64>> = train.iter().map(|&i| docs[i].standardized.clone()).collect();

    let mut per_frame_f1 = BTreeMap::new();
    let mut coefficients = BTreeMap::new();
    let mut skipped = BTreeMap::new();
    let (mut tp_all, mut fp_all, mut fn_all) = (0, 0, 0);

    for frame in frames {
        let has = |i: usize| labels[&docs[i].doc_id].contains(frame);
        let y_train: Vec<bool> = train.iter().map(|&i| has(i)).collect();
        let positives = y_train.iter().filter(|&&y| y).count();
        if positives < config.min_support {
            log::warn!("frame `{frame}`: {positives} positive training documents, skipped");
            skipped.insert(frame.clone(), format!("{positives} positive training documents"));
            continue;
        }
        if positives == y_train.len() {
            log::warn!("frame `{frame}`: every training document is positive, skipped");
            skipped.insert(frame.clone(), "no negative training documents".to_string());
            continue;
        }
        let model = train_logistic(&x_train, &y_train, config);
        let (mut tp, mut fp, mut fn_) = (0, 0, 0);
        for &i in &test {
            let predicted = model.probability(&docs[i].standardized) >= config.threshold;
            match (predicted, has(i)) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
                (false, false) => {}
            }
        }
        per_frame_f1.insert(frame.clone(), f1(tp, fp, fn_));
        coefficients.insert(frame.clone(), model);
        tp_all += tp;
        fp_all += fp;
        fn_all += fn_;
    }

    let macro_f1 = if per_frame_f1.is_empty() {
        0.0
    } else {
        per_frame_f1.values().sum::<f64>() / per_frame_f1.len() as f64
    };
    Ok(ProbeResult {
        per_frame_f1,
        micro_f1: f1(tp_all, fp_all, fn_all),
        macro_f1,
        split_seed,
        train_docs: train.len(),
        test_docs: test.len(),
        coefficients,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f1_values() {
        assert_eq!(f1(0, 0, 0), 0.0);
        assert_eq!(f1(5, 0, 0), 1.0);
        assert!((f1(1, 1, 1) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn split_is_twenty_percent_and_seeded() {
        let (train, test) = split_documents(100, 0.2, 7);
        assert_eq!((train.len(), test.len()), (80, 20));
        assert_eq!(split_documents(100, 0.2, 7), (train.clone(), test.clone()));
        assert_ne!(split_documents(100, 0.2, 8).1, test);
    }

    #[test]
    fn logistic_learns_threshold() {
        let x: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64 / 10.0 - 2.0]).collect();
        let y: Vec<bool> = (0..40).map(|i| i >= 20).collect();
        let m = train_logistic(&x, &y, &ProbeConfig::default());
        assert!(m.probability(&[1.5]) > 0.9);
        assert!(m.probability(&[-1.5]) < 0.1);
    }

    #[test]
    fn single_class_frame_skipped() {
        let features: Vec<DocumentFeatures> = (0..10)
            .map(|i| DocumentFeatures {
                doc_id: format!("d{i}"),
                raw: vec![1, 0],
                standardized: vec![1.0, -1.0],
            })
            .collect();
        let labels: BTreeMap<String, BTreeSet<String>> = (0..10)
            .map(|i| (format!("d{i}"), ["Economic".to_string()].into_iter().collect()))
            .collect();
        let r = frame_probe(&features, &labels, 0, &ProbeConfig::default()).unwrap();
        assert!(r.per_frame_f1.is_empty());
        assert!(r.skipped.contains_key("Economic"));
    }
}
