use super::assign::{nearest_centroids, sweep, PenaltyTally, UNASSIGNED};
use super::dataset::{sq_dist, Dataset};
use super::init::init_centroids;
use super::model::{ClusteringModel, StopReason};
use super::params::ClusterParams;
use super::update::{max_shift, update_centroids};
use crate::corpus::{ConflictIndex, Corpus};
use crate::error::{Error, Result};

/// Labels, centroids and per-iteration objective of a raw fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitOutcome {
    pub centroids: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub objective_trace: Vec<f64>,
    pub violation_count: u64,
    pub stop_reason: StopReason,
}

/// Run constrained k-means on a corpus.
pub fn fit(corpus: &Corpus, index: &ConflictIndex, params: &ClusterParams) -> Result<ClusteringModel> {
    if index.num_chains() != corpus.len() {
        return Err(Error::InvalidCorpus(format!(
            "conflict index covers {} chains, corpus has {}",
            index.num_chains(),
            corpus.len()
        )));
    }
    let data = Dataset::from_corpus(corpus, params.normalize);
    let out = fit_dataset(&data, index, params)?;
    Ok(ClusteringModel {
        params: params.clone(),
        centroids: out.centroids,
        ids: corpus.chains().iter().map(|c| c.id.clone()).collect(),
        labels: out.labels,
        objective_trace: out.objective_trace,
        violation_count: out.violation_count,
        stop_reason: out.stop_reason,
    })
}

pub fn fit_dataset(data: &Dataset, index: &ConflictIndex, params: &ClusterParams) -> Result<FitOutcome> {
    params.validate()?;
    let init = init_centroids(data, index, params.k, params.w_c, params.seed)?;
    fit_from(data, index, params, init)
}

/// Run the assign/update loop from given initial centroids.
pub fn fit_from(
    data: &Dataset,
    index: &ConflictIndex,
    params: &ClusterParams,
    mut centroids: Vec<Vec<f64>>,
) -> Result<FitOutcome> {
    params.validate()?;
    if centroids.is_empty() {
        return Err(Error::InvalidParams("no initial centroids".into()));
    }
    if let Some(c) = centroids.iter().find(|c| c.len() != data.dim()) {
        return Err(Error::Dimension {
            expected: data.dim(),
            found: c.len(),
        });
    }
    let k = centroids.len();
    let mut labels = vec![UNASSIGNED; data.len()];
    let mut tally = PenaltyTally::new(index, k);
    let mut trace = Vec::new();
    let mut stop_reason = StopReason::MaxIter;

    for iter in 0..params.max_iter {
        let changed = sweep(data, index, &centroids, params.w_c, &mut labels, &mut tally, |_, _, _, _| {});
        let (next, reseeded) = update_centroids(data, &labels, k);
        if !reseeded.is_empty() {
            log::debug!("iteration {iter}: reseeded empty clusters {reseeded:?}");
        }
        let shift = max_shift(&centroids, &next);
        centroids = next;
        trace.push(objective_of(data, index, &centroids, &labels, params.w_c));
        if changed == 0 {
            stop_reason = StopReason::AssignmentsStable;
            break;
        }
        if shift < params.tol {
            stop_reason = StopReason::CentroidsStable;
            break;
        }
    }
    let violation_count = violation_count(index, &labels, k);
    Ok(FitOutcome {
        centroids,
        labels,
        objective_trace: trace,
        violation_count,
        stop_reason,
    })
}

/// Unordered pairs of conflicting chains that share a cluster.
pub fn violation_count(index: &ConflictIndex, labels: &[usize], k: usize) -> u64 {
    if !index.has_constraints() {
        return 0;
    }
    // Chains per (form, cluster), then sum over conflicting form pairs a < b.
    let f = index.num_forms();
    let mut per_form = vec![0u64; f * k];
    for (i, &l) in labels.iter().enumerate() {
        per_form[index.form_of(i) * k + l] += 1;
    }
    let mut total = 0;
    for a in 0..f {
        for &b in index.conflicting_forms(a).iter().filter(|&&b| b > a) {
            for h in 0..k {
                total += per_form[a * k + h] * per_form[b * k + h];
            }
        }
    }
    total
}

/// Half the within-cluster sum of squared distances.
pub fn distance_term(data: &Dataset, centroids: &[Vec<f64>], labels: &[usize]) -> f64 {
    0.5 * labels
        .iter()
        .enumerate()
        .map(|(i, &l)| sq_dist(data.row(i), &centroids[l]))
        .sum::<f64>()
}

pub fn objective_of(data: &Dataset, index: &ConflictIndex, centroids: &[Vec<f64>], labels: &[usize], w_c: f64) -> f64 {
    distance_term(data, centroids, labels) + w_c * violation_count(index, labels, centroids.len()) as f64
}

/// Objective of a fitted model: half the squared distances plus `w_c` per
/// co-clustered cannot-link pair (each unordered pair counted once).
pub fn objective(model: &ClusteringModel, corpus: &Corpus, index: &ConflictIndex) -> Result<f64> {
    model.check_corpus(corpus)?;
    let data = Dataset::from_corpus(corpus, model.params.normalize);
    Ok(objective_of(&data, index, &model.centroids, &model.labels, model.params.w_c))
}

/// True when no single chain can be relabeled, centroids held fixed, to
/// strictly lower the objective.
pub fn local_opt_check(model: &ClusteringModel, corpus: &Corpus, index: &ConflictIndex) -> Result<bool> {
    model.check_corpus(corpus)?;
    let data = Dataset::from_corpus(corpus, model.params.normalize);
    Ok(is_locally_optimal(&data, index, &model.centroids, &model.labels, model.params.w_c))
}

pub fn is_locally_optimal(data: &Dataset, index: &ConflictIndex, centroids: &[Vec<f64>], labels: &[usize], w_c: f64) -> bool {
    let k = centroids.len();
    if k <= 1 {
        return true;
    }
    let f = index.num_forms();
    let mut per_form = vec![0u64; f * k];
    for (i, &l) in labels.iter().enumerate() {
        per_form[index.form_of(i) * k + l] += 1;
    }
    for (i, &current) in labels.iter().enumerate() {
        let x = data.row(i);
        let form = index.form_of(i);
        let cost = |h: usize| {
            let conflicting: u64 = index
                .conflicting_forms(form)
                .iter()
                .map(|&g| per_form[g * k + h])
                .sum();
            0.5 * sq_dist(x, &centroids[h]) + w_c * conflicting as f64
        };
        let here = cost(current);
        let slack = 1e-12 * here.abs().max(1.0);
        if (0..k).any(|h| h != current && cost(h) < here - slack) {
            return false;
        }
    }
    true
}

/// Unconstrained Lloyd's k-means sharing the initializer, tie rules, empty-
/// cluster repair and stopping rules of [`fit_from`]. Used as the baseline.
pub fn kmeans_baseline(data: &Dataset, params: &ClusterParams) -> Result<FitOutcome> {
    params.validate()?;
    let unconstrained = ConflictIndex::unconstrained(data.len());
    let mut centroids = init_centroids(data, &unconstrained, params.k, 0.0, params.seed)?;
    let k = centroids.len();
    let mut labels: Option<Vec<usize>> = None;
    let mut trace = Vec::new();
    let mut stop_reason = StopReason::MaxIter;
    for _ in 0..params.max_iter {
        let next_labels = nearest_centroids(data, &centroids);
        let changed = labels.as_ref() != Some(&next_labels);
        let (next, _) = update_centroids(data, &next_labels, k);
        let shift = max_shift(&centroids, &next);
        centroids = next;
        trace.push(distance_term(data, &centroids, &next_labels));
        labels = Some(next_labels);
        if !changed {
            stop_reason = StopReason::AssignmentsStable;
            break;
        }
        if shift < params.tol {
            stop_reason = StopReason::CentroidsStable;
            break;
        }
    }
    Ok(FitOutcome {
        centroids,
        labels: labels.expect("max_iter >= 1"),
        objective_trace: trace,
        violation_count: 0,
        stop_reason,
    })
}
