//! Sequential penalized assignment.
//!
//! Each chain in index order moves to the cluster minimizing its marginal
//! contribution to the objective,
//!
//! ```text
//! 0.5 * |x_i - mu_h|^2 + w_c * #{ j != i : l_j = h and (i, j) cannot link }
//! ```
//!
//! where `l_j` is the label already chosen in this sweep for earlier chains
//! and the previous sweep's label for later ones. Unlabeled chains (first
//! sweep) contribute no penalty. Because the cost is the exact change in the
//! objective, no single move can increase it.

use super::dataset::{sq_dist, Dataset};
use crate::corpus::ConflictIndex;

pub const UNASSIGNED: usize = usize::MAX;

/// For each constrained form `f` and cluster `h`, the number of labeled chains
/// in `h` that cannot link with chains of form `f`.
#[derive(Debug, Clone)]
pub struct PenaltyTally {
    k: usize,
    counts: Vec<u32>,
    row_of_form: Vec<Option<usize>>,
}

impl PenaltyTally {
    pub fn new(index: &ConflictIndex, k: usize) -> Self {
        let mut row_of_form = vec![None; index.num_forms()];
        let mut rows = 0;
        for (f, slot) in row_of_form.iter_mut().enumerate() {
            if !index.conflicting_forms(f).is_empty() {
                *slot = Some(rows);
                rows += 1;
            }
        }
        PenaltyTally {
            k,
            counts: vec![0; rows * k],
            row_of_form,
        }
    }

    pub fn from_labels(index: &ConflictIndex, k: usize, labels: &[usize]) -> Self {
        let mut tally = Self::new(index, k);
        for (i, &l) in labels.iter().enumerate() {
            if l != UNASSIGNED {
                tally.relabel(index, index.form_of(i), UNASSIGNED, l);
            }
        }
        tally
    }

    /// Penalty counts for a chain of form `f`, or `None` if it conflicts with nothing.
    #[inline]
    pub fn row(&self, form: usize) -> Option<&[u32]> {
        self.row_of_form[form].map(|r| &self.counts[r * self.k..(r + 1) * self.k])
    }

    /// Record a chain of form `form` moving between clusters.
    pub fn relabel(&mut self, index: &ConflictIndex, form: usize, from: usize, to: usize) {
        for &g in index.conflicting_forms(form) {
            let r = self.row_of_form[g].expect("neighbor forms have rows");
            if from != UNASSIGNED {
                self.counts[r * self.k + from] -= 1;
            }
            if to != UNASSIGNED {
                self.counts[r * self.k + to] += 1;
            }
        }
    }
}

/// One sweep of sequential assignment.
///
/// `labels` holds the previous sweep's labels (or [`UNASSIGNED`]) on entry
/// and the new labels on return; `tally` must match `labels` on entry.
/// `observer` sees every label change as `(chain, from, to, labels)` after
/// the move is applied. Returns the number of changed labels.
pub fn sweep(
    data: &Dataset,
    index: &ConflictIndex,
    centroids: &[Vec<f64>],
    w_c: f64,
    labels: &mut [usize],
    tally: &mut PenaltyTally,
    mut observer: impl FnMut(usize, usize, usize, &[usize]),
) -> usize {
    let mut changed = 0;
    for i in 0..data.len() {
        let x = data.row(i);
        let form = index.form_of(i);
        let penalties = if w_c > 0.0 { tally.row(form) } else { None };
        let mut best = 0;
        let mut best_cost = f64::INFINITY;
        for (h, c) in centroids.iter().enumerate() {
            let mut cost = 0.5 * sq_dist(x, c);
            if let Some(p) = penalties {
                cost += w_c * f64::from(p[h]);
            }
            if cost < best_cost {
                best_cost = cost;
                best = h;
            }
        }
        let old = labels[i];
        if old != best {
            tally.relabel(index, form, old, best);
            labels[i] = best;
            changed += 1;
            observer(i, old, best, labels);
        }
    }
    changed
}

/// Assignment for one iteration given the previous labels (if any).
pub fn assign_step(
    data: &Dataset,
    index: &ConflictIndex,
    centroids: &[Vec<f64>],
    prev: Option<&[usize]>,
    w_c: f64,
) -> Vec<usize> {
    let mut labels = prev.map_or_else(|| vec![UNASSIGNED; data.len()], <[usize]>::to_vec);
    let mut tally = PenaltyTally::from_labels(index, centroids.len(), &labels);
    sweep(data, index, centroids, w_c, &mut labels, &mut tally, |_, _, _, _| {});
    labels
}

/// Plain nearest-centroid labels, ties to the lowest cluster index.
pub fn nearest_centroids(data: &Dataset, centroids: &[Vec<f64>]) -> Vec<usize> {
    (0..data.len())
        .map(|i| {
            let x = data.row(i);
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (h, c) in centroids.iter().enumerate() {
                let d = sq_dist(x, c);
                if d < best_d {
                    best_d = d;
                    best = h;
                }
            }
            best
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{CanonicalForm, Role};

    fn pair_forms() -> (CanonicalForm, CanonicalForm) {
        let mk = |r| CanonicalForm {
            roles: [("Police".to_string(), r)].into_iter().collect(),
            stance: None,
        };
        (mk(Role::Hero), mk(Role::Threat))
    }

    #[test]
    fn unconstrained_is_nearest_centroid() {
        let ds = Dataset::new(vec![0.0, 0.9, 2.2, 3.0], 1);
        let idx = ConflictIndex::unconstrained(4);
        let c = vec![vec![0.0], vec![3.0]];
        assert_eq!(assign_step(&ds, &idx, &c, None, 0.0), vec![0, 0, 1, 1]);
        assert_eq!(nearest_centroids(&ds, &c), vec![0, 0, 1, 1]);
    }

    #[test]
    fn penalty_pushes_to_slightly_farther_cluster() {
        // Chain 1 is at squared distance 1.0 from h0 (which holds chain 0,
        // a conflicting chain) and 1.05 from h1. With w_c = 0.1,
        // 0.5 + 0.1 > 0.525, so it goes to h1.
        let (hero, threat) = pair_forms();
        let idx = ConflictIndex::from_forms(vec![hero, threat]);
        let ds = Dataset::new(vec![0.0, 0.0, 1.0, 0.0], 2);
        let c = vec![vec![0.0, 0.0], vec![1.0, 1.05f64.sqrt()]];
        let labels = assign_step(&ds, &idx, &c, Some(&[0, 0]), 0.1);
        assert_eq!(labels, vec![0, 1]);
        // Without the constraint it would have stayed at h0.
        assert_eq!(assign_step(&ds, &idx, &c, Some(&[0, 0]), 0.0), vec![0, 0]);
    }

    #[test]
    fn exact_tie_goes_to_lower_index() {
        let ds = Dataset::new(vec![1.0], 1);
        let idx = ConflictIndex::unconstrained(1);
        let c = vec![vec![0.0], vec![2.0]];
        assert_eq!(assign_step(&ds, &idx, &c, Some(&[1]), 0.0), vec![0]);
    }

    #[test]
    fn later_chains_see_updated_labels() {
        // Both chains sit on h0; chain 1 conflicts with chain 0. Chain 0 is
        // visited first and stays; chain 1 then sees it and leaves.
        let (hero, threat) = pair_forms();
        let idx = ConflictIndex::from_forms(vec![hero, threat]);
        let ds = Dataset::new(vec![0.0, 0.1], 1);
        let c = vec![vec![0.0], vec![1.0]];
        let labels = assign_step(&ds, &idx, &c, None, 10.0);
        assert_eq!(labels, vec![0, 1]);
    }

    #[test]
    fn tally_tracks_moves() {
        let (hero, threat) = pair_forms();
        let idx = ConflictIndex::from_forms(vec![hero.clone(), threat, hero]);
        let labels = vec![0, 1, 1];
        let tally = PenaltyTally::from_labels(&idx, 2, &labels);
        // Form 0 (hero) conflicts with the threat chain in cluster 1.
        assert_eq!(tally.row(0).unwrap(), &[0, 1]);
        // Form 1 (threat) sees heroes in clusters 0 and 1.
        assert_eq!(tally.row(1).unwrap(), &[1, 1]);
    }
}
