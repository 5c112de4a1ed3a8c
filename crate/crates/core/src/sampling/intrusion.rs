//! Intrusion-test items: two chains from a source cluster plus one intruder
//! from another cluster, at three difficulty tiers.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Ranked;
use crate::clustering::{sq_dist, ClusteringModel, Dataset};
use crate::corpus::Corpus;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Difficulty {
    Easy,
    Medium,
    Hard,
}

impl Difficulty {
    pub const ALL: [Difficulty; 3] = [Difficulty::Easy, Difficulty::Medium, Difficulty::Hard];
}

impl fmt::Display for Difficulty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Difficulty::Easy => "easy",
            Difficulty::Medium => "medium",
            Difficulty::Hard => "hard",
        })
    }
}

/// Where the positive pair was found.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairSource {
    /// Nearest quarter of the source cluster.
    TopQuartile,
    /// Anywhere in the source cluster.
    WholeCluster,
    /// The two nearest chains from distinct documents, Jaccard not enforced.
    ProximityOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntrusionItem {
    pub item_id: String,
    pub difficulty: Difficulty,
    pub source_cluster: usize,
    pub pair: [String; 2],
    pub pair_source: PairSource,
    pub pair_jaccard: f64,
    pub intruder: String,
    pub intruder_cluster: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntrusionOptions {
    pub per_tier: usize,
    pub jaccard_max: f64,
    pub seed: u64,
    /// Allow the proximity-only pair when no pair passes the Jaccard test.
    pub proximity_fallback: bool,
}

impl Default for IntrusionOptions {
    fn default() -> Self {
        IntrusionOptions {
            per_tier: 50,
            jaccard_max: 0.6,
            seed: 0,
            proximity_fallback: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntrusionSet {
    pub items: Vec<IntrusionItem>,
    /// Items that could not be produced, per tier. Empty when every quota was met.
    pub shortfall: BTreeMap<Difficulty, usize>,
    /// Clusters whose pairs needed a fallback, with the level reached.
    pub fallbacks: BTreeMap<usize, PairSource>,
    /// Clusters with no usable pair at all.
    pub unusable_clusters: Vec<usize>,
}

/// Lowercase whitespace tokens with punctuation stripped.
pub fn jaccard_tokens(text: &str) -> BTreeSet<String> {
    text.split_whitespace()
        .map(|t| t.chars().filter(|c| c.is_alphanumeric()).collect::<String>().to_lowercase())
        .filter(|t| !t.is_empty())
        .collect()
}

/// Token-set Jaccard similarity; two empty texts count as identical.
pub fn jaccard(a: &str, b: &str) -> f64 {
    let (a, b) = (jaccard_tokens(a), jaccard_tokens(b));
    let union = a.union(&b).count();
    if union == 0 {
        return 1.0;
    }
    a.intersection(&b).count() as f64 / union as f64
}

/// Other non-empty clusters ordered by centroid distance from `c`, nearest first.
fn neighbours(centroids: &[Vec<f64>], live: &[usize], c: usize) -> Vec<usize> {
    let mut others: Vec<(f64, usize)> =
        live.iter().filter(|&&o| o != c).map(|&o| (sq_dist(&centroids[c], &centroids[o]), o)).collect();
    others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    others.into_iter().map(|(_, o)| o).collect()
}

/// Candidate intruder clusters for a tier, given neighbours nearest first.
fn tier_clusters(near: &[usize], tier: Difficulty) -> &[usize] {
    let q = crate::metrics::retained_count(near.len(), 0.25);
    match tier {
        Difficulty::Easy => &near[near.len() - q..],
        Difficulty::Medium => &near[..q],
        Difficulty::Hard => &near[..1],
    }
}

struct PairPool {
    source: PairSource,
    pairs: Vec<(usize, usize, f64)>,
}

fn pair_pool(ranked: &Ranked, corpus: &Corpus, c: usize, jaccard_max: f64, proximity_fallback: bool) -> Option<PairPool> {
    let chains = corpus.chains();
    let valid = |members: &[usize]| {
        let mut out = Vec::new();
        for (x, &i) in members.iter().enumerate() {
            for &j in &members[x + 1..] {
                if chains[i].doc_id == chains[j].doc_id {
                    continue;
                }
                let s = jaccard(&chains[i].verbalization, &chains[j].verbalization);
                if s <= jaccard_max {
                    out.push((i.min(j), i.max(j), s));
                }
            }
        }
        out
    };
    let top = ranked.nearest(c, 0.25);
    let pairs = valid(&top);
    if !pairs.is_empty() {
        return Some(PairPool {
            source: PairSource::TopQuartile,
            pairs,
        });
    }
    let all: Vec<usize> = ranked.members[c].iter().map(|&(_, i)| i).collect();
    let pairs = valid(&all);
    if !pairs.is_empty() {
        log::info!("cluster {c}: no valid pair in the nearest quarter, searched the whole cluster");
        return Some(PairPool {
            source: PairSource::WholeCluster,
            pairs,
        });
    }
    if !proximity_fallback {
        return None;
    }
    // Nearest chain plus the nearest chain from another document.
    let first = *all.first()?;
    let second = all.iter().copied().find(|&j| chains[j].doc_id != chains[first].doc_id)?;
    log::info!("cluster {c}: no pair passes the Jaccard limit, using the proximity-only pair");
    let s = jaccard(&chains[first].verbalization, &chains[second].verbalization);
    Some(PairPool {
        source: PairSource::ProximityOnly,
        pairs: vec![(first.min(second), first.max(second), s)],
    })
}

/// Generate `per_tier` items for each difficulty.
///
/// Source clusters are drawn with weight `1 / (1 + uses)`. Easy intruders
/// come from the farthest quarter of other clusters, Medium from the closest
/// quarter, Hard from the single closest cluster; the intruder itself is one of
/// the nearest quarter of its cluster's members, from a document outside the
/// pair when possible. Unused pairs are preferred over repeats.
pub fn generate_intrusion_items(model: &ClusteringModel, corpus: &Corpus, options: &IntrusionOptions) -> Result<IntrusionSet> {
    if !(0.0..=1.0).contains(&options.jaccard_max) {
        return Err(Error::InvalidParams(format!("jaccard limit must be in [0, 1], got {}", options.jaccard_max)));
    }
    let ranked = Ranked::new(model, corpus)?;
    let live: Vec<usize> = (0..model.k()).filter(|&c| !ranked.members[c].is_empty()).collect();
    if live.len() < 2 {
        return Err(Error::InvalidParams(format!(
            "intrusion items need at least 2 non-empty clusters, found {}",
            live.len()
        )));
    }
    let chains = corpus.chains();

    let mut pools: BTreeMap<usize, PairPool> = BTreeMap::new();
    let mut fallbacks = BTreeMap::new();
    let mut unusable = Vec::new();
    for &c in &live {
        match pair_pool(&ranked, corpus, c, options.jaccard_max, options.proximity_fallback) {
            Some(pool) => {
                if pool.source != PairSource::TopQuartile {
                    fallbacks.insert(c, pool.source);
                }
                pools.insert(c, pool);
            }
            None => {
                log::warn!("cluster {c}: no pair from distinct documents within the Jaccard limit, not used as a source");
                unusable.push(c);
            }
        }
    }
    let near: BTreeMap<usize, Vec<usize>> = live.iter().map(|&c| (c, neighbours(&model.centroids, &live, c))).collect();
    let representatives: BTreeMap<usize, Vec<usize>> = live.iter().map(|&c| (c, ranked.nearest(c, 0.25))).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut uses: BTreeMap<usize, usize> = BTreeMap::new();
    let mut used_pairs: HashSet<(usize, usize)> = HashSet::new();
    let mut items = Vec::new();
    let mut shortfall = BTreeMap::new();
    let sources: Vec<usize> = pools.keys().copied().collect();

    for tier in Difficulty::ALL {
        if sources.is_empty() {
            shortfall.insert(tier, options.per_tier);
            continue;
        }
        for n in 0..options.per_tier {
            let weights: Vec<f64> = sources.iter().map(|c| 1.0 / (1.0 + uses.get(c).copied().unwrap_or(0) as f64)).collect();
            let source = sources[weighted_index(&weights, &mut rng)];
            *uses.entry(source).or_default() += 1;

            let pool = &pools[&source];
            let fresh: Vec<&(usize, usize, f64)> =
                pool.pairs.iter().filter(|p| !used_pairs.contains(&(p.0, p.1))).collect();
            let &(a, b, s) = if fresh.is_empty() {
                pool.pairs.choose(&mut rng).expect("pools are non-empty")
            } else {
                *fresh.choose(&mut rng).expect("checked non-empty")
            };
            used_pairs.insert((a, b));

            let intruder_cluster = *tier_clusters(&near[&source], tier).choose(&mut rng).expect("at least one other cluster");
            let reps = &representatives[&intruder_cluster];
            let other_docs: Vec<usize> = reps
                .iter()
                .copied()
                .filter(|&i| chains[i].doc_id != chains[a].doc_id && chains[i].doc_id != chains[b].doc_id)
                .collect();
            let intruder = *if other_docs.is_empty() { reps } else { &other_docs }
                .choose(&mut rng)
                .expect("live clusters have members");

            // Present the pair in random order.
            let pair = if rng.gen_bool(0.5) { [a, b] } else { [b, a] };
            items.push(IntrusionItem {
                item_id: format!("{tier}-{n:03}"),
                difficulty: tier,
                source_cluster: source,
                pair: pair.map(|i| chains[i].id.clone()),
                pair_source: pool.source,
                pair_jaccard: s,
                intruder: chains[intruder].id.clone(),
                intruder_cluster,
            });
        }
    }
    if !shortfall.is_empty() {
        log::warn!("intrusion quotas not met: {shortfall:?}");
    }
    Ok(IntrusionSet {
        items,
        shortfall,
        fallbacks,
        unusable_clusters: unusable,
    })
}

fn weighted_index(weights: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let total: f64 = weights.iter().sum();
    let mut r = rng.gen::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if r < *w {
            return i;
        }
        r -= w;
    }
    weights.len() - 1
}

/// Re-check every item from the raw embeddings and texts. Returns one message
/// per violated invariant.
pub fn validate_items(model: &ClusteringModel, corpus: &Corpus, items: &[IntrusionItem], jaccard_max: f64) -> Result<Vec<String>> {
    model.check_corpus(corpus)?;
    let data = Dataset::from_corpus(corpus, model.params.normalize);
    let chains = corpus.chains();
    let k = model.k();
    let mut sizes = vec![0usize; k];
    for &l in &model.labels {
        sizes[l] += 1;
    }
    let dist = |i: usize| sq_dist(data.row(i), &model.centroids[model.labels[i]]).sqrt();
    // Rank of chain i within its cluster (0 = nearest), ties by index.
    let rank = |i: usize| {
        let (l, d) = (model.labels[i], dist(i));
        (0..chains.len())
            .filter(|&j| model.labels[j] == l && j != i)
            .filter(|&j| {
                let dj = dist(j);
                dj < d || (dj == d && j < i)
            })
            .count()
    };
    let in_top_quarter = |i: usize| rank(i) < (sizes[model.labels[i]] as f64 / 4.0).ceil() as usize;

    let mut problems = Vec::new();
    for item in items {
        let mut fail = |msg: String| problems.push(format!("{}: {msg}", item.item_id));
        let lookup = |id: &str| corpus.index_of(id);
        let (Some(a), Some(b), Some(x)) = (lookup(&item.pair[0]), lookup(&item.pair[1]), lookup(&item.intruder)) else {
            fail("references an unknown chain id".into());
            continue;
        };
        let s = item.source_cluster;
        if model.labels[a] != s || model.labels[b] != s {
            fail(format!("pair is not in source cluster {s}"));
        }
        if a == b || chains[a].doc_id == chains[b].doc_id {
            fail("pair chains share a document".into());
        }
        if item.pair_source != PairSource::ProximityOnly && jaccard(&chains[a].verbalization, &chains[b].verbalization) > jaccard_max {
            fail(format!("pair Jaccard exceeds {jaccard_max}"));
        }
        if item.pair_source == PairSource::TopQuartile && !(in_top_quarter(a) && in_top_quarter(b)) {
            fail("pair is not in the nearest quarter of its cluster".into());
        }
        let t = model.labels[x];
        if t != item.intruder_cluster {
            fail(format!("intruder is in cluster {t}, not {}", item.intruder_cluster));
        }
        if t == s {
            fail("intruder comes from the source cluster".into());
        }
        if !in_top_quarter(x) {
            fail("intruder is not among its cluster's nearest quarter".into());
        }
        let mut others: Vec<(f64, usize)> = (0..k)
            .filter(|&o| o != s && sizes[o] > 0)
            .map(|o| (sq_dist(&model.centroids[s], &model.centroids[o]), o))
            .collect();
        others.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.cmp(&q.1)));
        let pos = others.iter().position(|&(_, o)| o == t);
        let q = (others.len() as f64 / 4.0).ceil() as usize;
        let ok = match (item.difficulty, pos) {
            (_, None) => false,
            (Difficulty::Hard, Some(p)) => p == 0,
            (Difficulty::Medium, Some(p)) => p < q,
            (Difficulty::Easy, Some(p)) => p >= others.len() - q,
        };
        if !ok {
            fail(format!("intruder cluster {t} is outside the {} tier", item.difficulty));
        }
    }
    Ok(problems)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlindedItem {
    pub item_id: String,
    pub chain_ids: [String; 3],
    pub texts: [String; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswerKey {
    pub item_id: String,
    /// 0-based position of the intruder in the blinded triple.
    pub intruder_position: usize,
    pub difficulty: Difficulty,
    pub source_cluster: usize,
    pub intruder_cluster: usize,
}

/// Shuffle item order and the order within each triple; return the blinded
/// items and the matching answer key in the same order.
pub fn blind_items(items: &[IntrusionItem], corpus: &Corpus, seed: u64) -> Result<(Vec<BlindedItem>, Vec<AnswerKey>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<&IntrusionItem> = items.iter().collect();
    order.shuffle(&mut rng);
    let text = |id: &str| {
        corpus
            .index_of(id)
            .map(|i| corpus.chains()[i].verbalization.clone())
            .ok_or_else(|| Error::InvalidCorpus(format!("intrusion item references unknown chain `{id}`")))
    };
    let mut blinded = Vec::with_capacity(items.len());
    let mut key = Vec::with_capacity(items.len());
    for item in order {
        let mut triple = [item.pair[0].clone(), item.pair[1].clone(), item.intruder.clone()];
        triple.shuffle(&mut rng);
        let position = triple.iter().position(|id| *id == item.intruder).expect("intruder is in the triple");
        blinded.push(BlindedItem {
            item_id: item.item_id.clone(),
            texts: [text(&triple[0])?, text(&triple[1])?, text(&triple[2])?],
            chain_ids: triple,
        });
        key.push(AnswerKey {
            item_id: item.item_id.clone(),
            intruder_position: position,
            difficulty: item.difficulty,
            source_cluster: item.source_cluster,
            intruder_cluster: item.intruder_cluster,
        });
    }
    Ok((blinded, key))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jaccard_strips_punctuation_and_case() {
        assert_eq!(jaccard("Police arrest, protesters.", "police ARREST protesters"), 1.0);
        assert!((jaccard("a b c", "b c d") - 0.5).abs() < 1e-15);
        assert_eq!(jaccard("x", "y"), 0.0);
    }

    #[test]
    fn tiers_split_neighbours() {
        let near: Vec<usize> = (10..18).collect();
        assert_eq!(tier_clusters(&near, Difficulty::Hard), &[10]);
        assert_eq!(tier_clusters(&near, Difficulty::Medium), &[10, 11]);
        assert_eq!(tier_clusters(&near, Difficulty::Easy), &[16, 17]);
        let one = [4];
        for t in Difficulty::ALL {
            assert_eq!(tier_clusters(&one, t), &[4]);
        }
    }

    #[test]
    fn weighted_index_respects_zero_mass() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            assert_eq!(weighted_index(&[0.0, 1.0, 0.0], &mut rng), 1);
        }
    }
}
