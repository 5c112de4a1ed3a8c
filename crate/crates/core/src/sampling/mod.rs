//! Post-clustering sampling: schema bundles, density-stratified cluster
//! selection and intrusion-test items.

mod bundles;
mod intrusion;
mod stratified;

pub use bundles::{sample_schema_bundles, BundleChain, SchemaBundle};
pub use intrusion::{
    blind_items, generate_intrusion_items, jaccard, jaccard_tokens, validate_items, AnswerKey, BlindedItem, Difficulty,
    IntrusionItem, IntrusionOptions, IntrusionSet, PairSource,
};
pub use stratified::{stratified_cluster_sample, StratifiedSample};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::clustering::{sq_dist, ClusteringModel, Dataset};
use crate::corpus::Corpus;
use crate::error::Result;

/// Members of every cluster ordered by distance to their centroid, nearest
/// first, ties by chain index. Distances are Euclidean.
pub(crate) struct Ranked {
    pub members: Vec<Vec<(f64, usize)>>,
}

impl Ranked {
    pub fn new(model: &ClusteringModel, corpus: &Corpus) -> Result<Self> {
        model.check_corpus(corpus)?;
        let data = Dataset::from_corpus(corpus, model.params.normalize);
        let mut members: Vec<Vec<(f64, usize)>> = vec![Vec::new(); model.k()];
        for (i, &l) in model.labels.iter().enumerate() {
            members[l].push((sq_dist(data.row(i), &model.centroids[l]).sqrt(), i));
        }
        for m in &mut members {
            m.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        }
        Ok(Ranked { members })
    }

    /// The nearest `ceil(fraction * |C|)` members of cluster `c`.
    pub fn nearest(&self, c: usize, fraction: f64) -> Vec<usize> {
        let m = &self.members[c];
        if m.is_empty() {
            return Vec::new();
        }
        let n = crate::metrics::retained_count(m.len(), fraction);
        m[..n].iter().map(|&(_, i)| i).collect()
    }
}

/// Independent generator for one cluster, derived from the master seed.
pub(crate) fn cluster_rng(seed: u64, cluster: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(cluster as u64);
    rng
}
