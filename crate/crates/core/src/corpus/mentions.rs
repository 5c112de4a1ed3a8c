//! Grouping raw character mentions into character groups.
//!
//! Mentions are embedded as TF-IDF vectors and clustered with k-means whose
//! first centers are the expected group phrases ("seeds"). Any remaining
//! centers come from the farthest-point initializer with no constraints.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::clustering::{extend_farthest, fit_from, init_centroids, ClusterParams, Dataset};
use crate::corpus::ConflictIndex;
use crate::error::{Error, Result};

/// Lowercased word tokens of at least two characters.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !(c.is_alphanumeric() || c == '_'))
        .filter(|t| t.chars().count() >= 2)
        .map(str::to_lowercase)
        .collect()
}

/// TF-IDF with smoothed idf (`ln((1 + n) / (1 + df)) + 1`) and L2-normalized rows.
#[derive(Debug, Clone)]
pub struct TfidfVectorizer {
    vocabulary: BTreeMap<String, usize>,
    idf: Vec<f64>,
}

impl TfidfVectorizer {
    pub fn fit<S: AsRef<str>>(docs: &[S]) -> Self {
        let mut df: BTreeMap<String, usize> = BTreeMap::new();
        for doc in docs {
            let unique: HashSet<String> = tokenize(doc.as_ref()).into_iter().collect();
            for t in unique {
                *df.entry(t).or_default() += 1;
            }
        }
        let n = docs.len() as f64;
        let mut vocabulary = BTreeMap::new();
        let mut idf = Vec::with_capacity(df.len());
        for (i, (term, count)) in df.into_iter().enumerate() {
            idf.push(((1.0 + n) / (1.0 + count as f64)).ln() + 1.0);
            vocabulary.insert(term, i);
        }
        TfidfVectorizer { vocabulary, idf }
    }

    pub fn vocabulary_len(&self) -> usize {
        self.idf.len()
    }

    pub fn transform(&self, doc: &str) -> Vec<f64> {
        let mut v = vec![0.0; self.idf.len().max(1)];
        for t in tokenize(doc) {
            if let Some(&i) = self.vocabulary.get(&t) {
                v[i] += 1.0;
            }
        }
        for (x, w) in v.iter_mut().zip(&self.idf) {
            *x *= w;
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            v.iter_mut().for_each(|x| *x /= norm);
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MentionClusters {
    pub k: usize,
    pub seed: u64,
    pub seeds: Vec<String>,
    pub assignments: BTreeMap<String, usize>,
}

impl MentionClusters {
    /// Members per cluster, sorted.
    pub fn groups(&self) -> Vec<Vec<&str>> {
        let mut out = vec![Vec::new(); self.k];
        for (m, &c) in &self.assignments {
            out[c].push(m.as_str());
        }
        out
    }
}

/// Cluster character mentions around seed phrases.
///
/// Defaults used for the news corpora were `k = 15` and `seed = 14`.
pub fn cluster_character_mentions(mentions: &[String], seeds: &[String], k: usize, seed: u64) -> Result<MentionClusters> {
    if mentions.is_empty() {
        return Err(Error::InvalidParams("no character mentions to cluster".into()));
    }
    if k < 1 {
        return Err(Error::InvalidParams("k must be at least 1".into()));
    }
    if seeds.len() > k {
        return Err(Error::InvalidParams(format!("{} seed phrases exceed k = {k}", seeds.len())));
    }
    let mut seen = HashSet::new();
    let unique: Vec<&String> = mentions.iter().filter(|m| seen.insert(m.as_str())).collect();

    let mut docs: Vec<&str> = unique.iter().map(|m| m.as_str()).collect();
    docs.extend(seeds.iter().map(String::as_str));
    let vectorizer = TfidfVectorizer::fit(&docs);

    let rows: Vec<Vec<f64>> = unique.iter().map(|m| vectorizer.transform(m)).collect();
    let data = Dataset::from_rows(&rows);
    let none = ConflictIndex::unconstrained(data.len());
    // Without seed phrases the first center is a seeded random mention.
    let init = if seeds.is_empty() {
        init_centroids(&data, &none, k, 0.0, seed)?
    } else {
        let preset: Vec<Vec<f64>> = seeds.iter().map(|s| vectorizer.transform(s)).collect();
        extend_farthest(&data, &none, 0.0, preset, &[], k)?.0
    };
    let params = ClusterParams {
        k,
        w_c: 0.0,
        max_iter: 300,
        seed,
        tol: 1e-4,
        normalize: false,
    };
    let out = fit_from(&data, &none, &params, init)?;

    let assignments = unique.iter().map(|m| (*m).clone()).zip(out.labels).collect();
    Ok(MentionClusters {
        k,
        seed,
        seeds: seeds.to_vec(),
        assignments,
    })
}
