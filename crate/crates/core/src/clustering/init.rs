//! Constraint-aware farthest-point seeding.
//!
//! After a seeded uniform first pick, every further centroid is the chain
//! maximizing
//!
//! ```text
//! O(x) = min_s |x - mu_s|^2 + w_c * #{ selected chains s that cannot link with x }
//! ```
//!
//! The score is maximized greedily rather than sampled. Ties go to the lowest
//! chain index and already-selected chains are never picked twice.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::dataset::{sq_dist, Dataset};
use crate::corpus::ConflictIndex;
use crate::error::{Error, Result};

/// Pick `k` initial centroids from the data.
pub fn init_centroids(data: &Dataset, index: &ConflictIndex, k: usize, w_c: f64, seed: u64) -> Result<Vec<Vec<f64>>> {
    let n = data.len();
    if k > n {
        return Err(Error::TooFewPoints { k, n });
    }
    if k == 0 {
        return Ok(Vec::new());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let first = rng.gen_range(0..n);
    let (centroids, _) = extend_farthest(data, index, w_c, vec![data.row(first).to_vec()], &[first], k)?;
    Ok(centroids)
}

/// Indices of the chains chosen as initial centroids (same rule as [`init_centroids`]).
pub fn init_centroid_indices(data: &Dataset, index: &ConflictIndex, k: usize, w_c: f64, seed: u64) -> Result<Vec<usize>> {
    let n = data.len();
    if k > n {
        return Err(Error::TooFewPoints { k, n });
    }
    if k == 0 {
        return Ok(Vec::new());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let first = rng.gen_range(0..n);
    let (_, picked) = extend_farthest(data, index, w_c, vec![data.row(first).to_vec()], &[first], k)?;
    Ok(picked)
}

/// Grow a centroid set to `k` entries by the farthest-point rule.
///
/// `preset` may contain arbitrary vectors (e.g. seed phrases); `preset_chains`
/// lists the data rows among them, which both count toward the constraint
/// bonus and are excluded from selection. Returns the centroids and the
/// indices of every data row used as a centroid.
pub fn extend_farthest(
    data: &Dataset,
    index: &ConflictIndex,
    w_c: f64,
    preset: Vec<Vec<f64>>,
    preset_chains: &[usize],
    k: usize,
) -> Result<(Vec<Vec<f64>>, Vec<usize>)> {
    let n = data.len();
    let needed = k.saturating_sub(preset.len());
    let available = n - preset_chains.len();
    if needed > available {
        return Err(Error::TooFewPoints { k, n: available + preset.len() });
    }
    if let Some(c) = preset.iter().find(|c| c.len() != data.dim()) {
        return Err(Error::Dimension {
            expected: data.dim(),
            found: c.len(),
        });
    }

    let mut centroids = preset;
    let mut picked: Vec<usize> = preset_chains.to_vec();
    let mut taken = vec![false; n];
    for &p in preset_chains {
        taken[p] = true;
    }

    let mut nearest = vec![f64::INFINITY; n];
    for c in &centroids {
        for (i, slot) in nearest.iter_mut().enumerate() {
            let d = sq_dist(data.row(i), c);
            if d < *slot {
                *slot = d;
            }
        }
    }
    // Number of selected chains each row cannot link with.
    let mut bonus = vec![0usize; n];
    let use_bonus = w_c > 0.0 && index.has_constraints();
    if use_bonus {
        for &p in preset_chains {
            add_conflicts(index, p, &mut bonus);
        }
    }

    while centroids.len() < k {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..n {
            if taken[i] {
                continue;
            }
            let score = nearest[i] + w_c * bonus[i] as f64;
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((i, score));
            }
        }
        let (choice, _) = best.expect("enough unselected rows");
        taken[choice] = true;
        picked.push(choice);
        let c = data.row(choice).to_vec();
        for (i, slot) in nearest.iter_mut().enumerate() {
            let d = sq_dist(data.row(i), &c);
            if d < *slot {
                *slot = d;
            }
        }
        if use_bonus {
            add_conflicts(index, choice, &mut bonus);
        }
        centroids.push(c);
    }
    Ok((centroids, picked))
}

fn add_conflicts(index: &ConflictIndex, chain: usize, bonus: &mut [usize]) {
    let f = index.form_of(chain);
    if index.conflicting_forms(f).is_empty() {
        return;
    }
    for (j, slot) in bonus.iter_mut().enumerate() {
        if index.forms_conflict(f, index.form_of(j)) {
            *slot += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{CanonicalForm, Role};

    fn line(points: &[f64]) -> Dataset {
        Dataset::new(points.to_vec(), 1)
    }

    #[test]
    fn farthest_point_on_a_line() {
        let ds = line(&[0.0, 1.0, 10.0]);
        let idx = ConflictIndex::unconstrained(3);
        let (c, picked) = extend_farthest(&ds, &idx, 0.0, vec![vec![0.0]], &[0], 2).unwrap();
        assert_eq!(picked, vec![0, 2]);
        assert_eq!(c[1], vec![10.0]);
    }

    #[test]
    fn bonus_dominates_distance() {
        // Row 1 sits 0.1 from the first centroid but conflicts with it; row 2
        // is 5 away and compatible.
        let ds = line(&[0.0, 0.1, 5.0]);
        let hero = CanonicalForm {
            roles: [("Police".to_string(), Role::Hero)].into_iter().collect(),
            stance: None,
        };
        let threat = CanonicalForm {
            roles: [("Police".to_string(), Role::Threat)].into_iter().collect(),
            stance: None,
        };
        let idx = ConflictIndex::from_forms(vec![hero.clone(), threat, hero]);
        let (_, picked) = extend_farthest(&ds, &idx, 1e6, vec![vec![0.0]], &[0], 2).unwrap();
        assert_eq!(picked[1], 1);
        let (_, picked) = extend_farthest(&ds, &idx, 0.0, vec![vec![0.0]], &[0], 2).unwrap();
        assert_eq!(picked[1], 2);
    }

    #[test]
    fn ties_pick_lowest_index() {
        let ds = line(&[0.0, -2.0, 2.0]);
        let idx = ConflictIndex::unconstrained(3);
        let (_, picked) = extend_farthest(&ds, &idx, 0.0, vec![vec![0.0]], &[0], 2).unwrap();
        assert_eq!(picked[1], 1);
    }

    #[test]
    fn duplicates_never_reselected() {
        let ds = line(&[1.0, 1.0, 1.0]);
        let idx = ConflictIndex::unconstrained(3);
        let picked = init_centroid_indices(&ds, &idx, 3, 0.0, 9).unwrap();
        let mut sorted = picked.clone();
        sorted.sort();
        assert_eq!(sorted, vec![0, 1, 2]);
    }

    #[test]
    fn k_above_n_rejected() {
        let ds = line(&[0.0, 1.0]);
        let idx = ConflictIndex::unconstrained(2);
        assert!(matches!(
            init_centroids(&ds, &idx, 3, 0.0, 0),
            Err(Error::TooFewPoints { k: 3, n: 2 })
        ));
    }

    #[test]
    fn deterministic_given_seed() {
        let ds = line(&(0..40).map(|i| (i * 7 % 13) as f64).collect::<Vec<_>>());
        let idx = ConflictIndex::unconstrained(40);
        let a = init_centroid_indices(&ds, &idx, 5, 0.0, 42).unwrap();
        let b = init_centroid_indices(&ds, &idx, 5, 0.0, 42).unwrap();
        assert_eq!(a, b);
    }
}
