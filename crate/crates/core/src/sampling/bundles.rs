use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{cluster_rng, Ranked};
use crate::clustering::ClusteringModel;
use crate::corpus::Corpus;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleChain {
    pub id: String,
    pub doc_id: String,
    pub text: String,
    /// One line per annotated character, e.g. `Immigrants (asylum seekers): Victim`.
    pub roles: Vec<String>,
    pub stance: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemaBundle {
    pub cluster: usize,
    pub cluster_size: usize,
    /// Size of the nearest-half subset the sample is drawn from.
    pub retained: usize,
    pub unique_documents: usize,
    /// Share of the cluster that ended up in the bundle.
    pub coverage: f64,
    pub chains: Vec<BundleChain>,
}

impl SchemaBundle {
    pub fn chain_ids(&self) -> Vec<&str> {
        self.chains.iter().map(|c| c.id.as_str()).collect()
    }
}

/// Two-stage sample per cluster: keep the nearest half by centroid distance,
/// take one chain from each distinct document in a seeded random order, then
/// top up at random from the remaining retained chains, up to `max_per_cluster`.
/// Empty clusters yield no bundle.
pub fn sample_schema_bundles(
    model: &ClusteringModel,
    corpus: &Corpus,
    seed: u64,
    max_per_cluster: usize,
) -> Result<Vec<SchemaBundle>> {
    let ranked = Ranked::new(model, corpus)?;
    let chains = corpus.chains();
    let mut out = Vec::new();
    for c in 0..model.k() {
        let size = ranked.members[c].len();
        if size == 0 {
            continue;
        }
        let mut rng = cluster_rng(seed, c);
        let mut pool = ranked.nearest(c, 0.5);
        let retained = pool.len();
        pool.shuffle(&mut rng);

        let mut picked = Vec::new();
        let mut rest = Vec::new();
        let mut docs = BTreeSet::new();
        for i in pool {
            if picked.len() < max_per_cluster && docs.insert(chains[i].doc_id.as_str()) {
                picked.push(i);
            } else {
                rest.push(i);
            }
        }
        let top_up = max_per_cluster.saturating_sub(picked.len()).min(rest.len());
        picked.extend_from_slice(&rest[..top_up]);

        let bundle_docs: BTreeSet<&str> = picked.iter().map(|&i| chains[i].doc_id.as_str()).collect();
        out.push(SchemaBundle {
            cluster: c,
            cluster_size: size,
            retained,
            unique_documents: bundle_docs.len(),
            coverage: picked.len() as f64 / size as f64,
            chains: picked.iter().map(|&i| bundle_chain(corpus, i)).collect(),
        });
    }
    Ok(out)
}

fn bundle_chain(corpus: &Corpus, i: usize) -> BundleChain {
    let chain = &corpus.chains()[i];
    BundleChain {
        id: chain.id.clone(),
        doc_id: chain.doc_id.clone(),
        text: chain.verbalization.clone(),
        roles: chain
            .characters
            .iter()
            .map(|a| format!("{} ({}): {}", a.group, a.entity, a.role))
            .collect(),
        stance: chain.stance.to_string(),
    }
}
