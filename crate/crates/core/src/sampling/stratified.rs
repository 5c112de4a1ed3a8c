use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Ranked;
use crate::clustering::ClusteringModel;
use crate::corpus::Corpus;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratifiedSample {
    /// Requested (top, middle, bottom) counts after any shrinking.
    pub counts: (usize, usize, usize),
    pub top: Vec<usize>,
    pub middle: Vec<usize>,
    pub bottom: Vec<usize>,
    /// Non-empty clusters from densest to sparsest with their mean member distance.
    pub ranking: Vec<(usize, f64)>,
}

impl StratifiedSample {
    pub fn clusters(&self) -> Vec<usize> {
        let mut all: Vec<usize> = self.top.iter().chain(&self.middle).chain(&self.bottom).copied().collect();
        all.sort_unstable();
        all
    }
}

/// Rank clusters by density (inverse mean member-to-centroid distance) and draw
/// the requested counts from the top quartile, middle half and bottom quartile.
///
/// Outer strata hold `max(round(m / 4), quota)` clusters so that exactly
/// `m = sum(counts)` clusters splits as the counts themselves. With fewer
/// non-empty clusters than requested the counts shrink proportionally.
pub fn stratified_cluster_sample(
    model: &ClusteringModel,
    corpus: &Corpus,
    counts: (usize, usize, usize),
    seed: u64,
) -> Result<StratifiedSample> {
    let ranked = Ranked::new(model, corpus)?;
    let mut ranking: Vec<(usize, f64)> = ranked
        .members
        .iter()
        .enumerate()
        .filter(|(_, m)| !m.is_empty())
        .map(|(c, m)| (c, m.iter().map(|&(d, _)| d).sum::<f64>() / m.len() as f64))
        .collect();
    // Densest first; a zero mean distance (singletons) ranks densest.
    ranking.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));

    let m = ranking.len();
    let requested = counts.0 + counts.1 + counts.2;
    if requested == 0 {
        return Err(Error::InvalidParams("stratified sample counts are all zero".into()));
    }
    let counts = if m < requested {
        let shrunk = shrink(counts, m);
        log::warn!("{m} non-empty clusters for a request of {requested}; sampling {shrunk:?}");
        shrunk
    } else {
        counts
    };

    let quarter = (m as f64 / 4.0).round() as usize;
    let mut top_n = quarter.max(counts.0);
    let mut bottom_n = quarter.max(counts.2);
    // Give the middle stratum back enough clusters for its quota.
    let mut missing = (top_n + bottom_n + counts.1).saturating_sub(m);
    let from_top = missing.min(top_n - counts.0);
    top_n -= from_top;
    missing -= from_top;
    bottom_n -= missing.min(bottom_n - counts.2);

    let order: Vec<usize> = ranking.iter().map(|&(c, _)| c).collect();
    let (top_stratum, rest) = order.split_at(top_n);
    let (middle_stratum, bottom_stratum) = rest.split_at(rest.len() - bottom_n);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |stratum: &[usize], n: usize| {
        let mut picked: Vec<usize> = stratum.choose_multiple(&mut rng, n.min(stratum.len())).copied().collect();
        picked.sort_unstable();
        picked
    };
    let top = draw(top_stratum, counts.0);
    let middle = draw(middle_stratum, counts.1);
    let bottom = draw(bottom_stratum, counts.2);
    Ok(StratifiedSample {
        counts,
        top,
        middle,
        bottom,
        ranking,
    })
}

/// Scale counts to total `m` with largest-remainder rounding.
fn shrink(counts: (usize, usize, usize), m: usize) -> (usize, usize, usize) {
    let c = [counts.0, counts.1, counts.2];
    let total: usize = c.iter().sum();
    let exact: Vec<f64> = c.iter().map(|&x| x as f64 * m as f64 / total as f64).collect();
    let mut out: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())).then(a.cmp(&b)));
    let short = m - out.iter().sum::<usize>();
    for &i in order.iter().take(short) {
        out[i] += 1;
    }
    (out[0], out[1], out[2])
}
