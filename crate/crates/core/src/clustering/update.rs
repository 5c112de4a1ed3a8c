use super::dataset::{sq_dist, Dataset};

/// Recompute centroids as member means.
///
/// An empty cluster is reseeded at the chain lying farthest from its own
/// (freshly updated) centroid; several empty clusters take successive
/// farthest chains in ascending cluster order. Returns the centroids and the
/// clusters that were reseeded.
pub fn update_centroids(data: &Dataset, labels: &[usize], k: usize) -> (Vec<Vec<f64>>, Vec<usize>) {
    let dim = data.dim();
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (i, &l) in labels.iter().enumerate() {
        counts[l] += 1;
        for (s, v) in sums[l].iter_mut().zip(data.row(i)) {
            *s += v;
        }
    }
    for (sum, &count) in sums.iter_mut().zip(&counts) {
        if count > 0 {
            let c = count as f64;
            sum.iter_mut().for_each(|v| *v /= c);
        }
    }

    let empty: Vec<usize> = (0..k).filter(|&h| counts[h] == 0).collect();
    if !empty.is_empty() {
        let mut by_distance: Vec<(f64, usize)> = labels
            .iter()
            .enumerate()
            .map(|(i, &l)| (sq_dist(data.row(i), &sums[l]), i))
            .collect();
        // Farthest first; ties to the lowest chain index.
        by_distance.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        for (&h, &(_, i)) in empty.iter().zip(&by_distance) {
            sums[h] = data.row(i).to_vec();
        }
    }
    (sums, empty)
}

/// Largest Euclidean displacement between matching centroids.
pub fn max_shift(old: &[Vec<f64>], new: &[Vec<f64>]) -> f64 {
    old.iter()
        .zip(new)
        .map(|(a, b)| sq_dist(a, b).sqrt())
        .fold(0.0, f64::max)
}
