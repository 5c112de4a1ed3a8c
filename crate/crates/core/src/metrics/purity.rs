//! Exact-match and role-based cluster purity.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::clustering::{sq_dist, ClusteringModel, Dataset};
use crate::corpus::{CanonicalForm, ConflictIndex, Corpus, Role, Stance};
use crate::error::{Error, Result};

/// Denominator used inside each cluster's role-purity term.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoleDenominator {
    /// `|C_i|`, every chain in the cluster, whether or not it mentions the group.
    #[default]
    ClusterSize,
    /// Only chains that assign the group a role.
    Support,
}

/// Chains retained when keeping, per cluster, the `ceil(fraction * |C_i|)`
/// members nearest their centroid. Distance ties go to the lower chain index.
/// Returns ascending chain indices.
pub fn top_fraction_of(data: &Dataset, centroids: &[Vec<f64>], labels: &[usize], fraction: f64) -> Result<Vec<usize>> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidParams(format!("fraction must be in (0, 1], got {fraction}")));
    }
    let mut members: Vec<Vec<(f64, usize)>> = vec![Vec::new(); centroids.len()];
    for (i, &l) in labels.iter().enumerate() {
        members[l].push((sq_dist(data.row(i), &centroids[l]), i));
    }
    let mut keep = Vec::new();
    for mut m in members {
        if m.is_empty() {
            continue;
        }
        m.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let n = retained_count(m.len(), fraction);
        keep.extend(m[..n].iter().map(|&(_, i)| i));
    }
    keep.sort_unstable();
    Ok(keep)
}

/// `ceil(fraction * size)`, never below one for a non-empty cluster.
pub fn retained_count(size: usize, fraction: f64) -> usize {
    // Guard against 0.25 * 4 landing a hair above 1.0.
    let raw = fraction * size as f64;
    let n = (raw - 1e-9).ceil().max(1.0) as usize;
    n.min(size)
}

pub fn top_fraction(model: &ClusteringModel, corpus: &Corpus, fraction: f64) -> Result<Vec<usize>> {
    model.check_corpus(corpus)?;
    let data = Dataset::from_corpus(corpus, model.params.normalize);
    top_fraction_of(&data, &model.centroids, &model.labels, fraction)
}

/// Canonical form per chain, in corpus order.
pub fn chain_forms(index: &ConflictIndex) -> Vec<&CanonicalForm> {
    (0..index.num_chains()).map(|i| index.form_of_chain(i)).collect()
}

/// Subset members grouped by cluster label.
fn by_cluster(labels: &[usize], subset: &[usize]) -> BTreeMap<usize, Vec<usize>> {
    let mut out: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &i in subset {
        out.entry(labels[i]).or_default().push(i);
    }
    out
}

/// Share of subset chains whose full canonical form is their cluster's most
/// frequent one.
pub fn exact_match_purity(labels: &[usize], forms: &[&CanonicalForm], subset: &[usize]) -> Result<f64> {
    if subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    let mut hits = 0usize;
    for members in by_cluster(labels, subset).values() {
        let mut counts: HashMap<&CanonicalForm, usize> = HashMap::new();
        for &i in members {
            *counts.entry(forms[i]).or_default() += 1;
        }
        hits += counts.values().copied().max().unwrap_or(0);
    }
    Ok(hits as f64 / subset.len() as f64)
}

/// Role purity of one character group, averaged over clusters that keep at
/// least one subset member.
pub fn role_purity(
    labels: &[usize],
    forms: &[&CanonicalForm],
    group: &str,
    subset: &[usize],
    denominator: RoleDenominator,
) -> Result<f64> {
    if subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    value_purity(labels, subset, denominator, |i| forms[i].role_of(group).map(role_slot))
}

/// Role purity checked against the set of groups the corpus knows about.
pub fn role_purity_checked(
    labels: &[usize],
    forms: &[&CanonicalForm],
    group: &str,
    known_groups: &BTreeSet<String>,
    subset: &[usize],
    denominator: RoleDenominator,
) -> Result<f64> {
    if !known_groups.contains(group) {
        return Err(Error::UnknownGroup(group.to_string()));
    }
    role_purity(labels, forms, group, subset, denominator)
}

/// Purity of the Pro/Anti stance, computed like a role purity.
pub fn stance_purity(labels: &[usize], forms: &[&CanonicalForm], subset: &[usize], denominator: RoleDenominator) -> Result<f64> {
    if subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    value_purity(labels, subset, denominator, |i| match forms[i].stance {
        Some(Stance::Pro) => Some(0),
        Some(Stance::Anti) => Some(1),
        _ => None,
    })
}

/// Mean role purity over `groups`.
pub fn avg_role_purity(
    labels: &[usize],
    forms: &[&CanonicalForm],
    groups: &[String],
    subset: &[usize],
    denominator: RoleDenominator,
) -> Result<f64> {
    if groups.is_empty() {
        return Err(Error::InvalidParams("no character groups to average over".into()));
    }
    let mut total = 0.0;
    for g in groups {
        total += role_purity(labels, forms, g, subset, denominator)?;
    }
    Ok(total / groups.len() as f64)
}

fn role_slot(role: Role) -> usize {
    match role {
        Role::Hero => 0,
        Role::Threat => 1,
        Role::Victim => 2,
        Role::Neutral => unreachable!("canonical forms never hold Neutral"),
    }
}

fn value_purity(
    labels: &[usize],
    subset: &[usize],
    denominator: RoleDenominator,
    value_of: impl Fn(usize) -> Option<usize>,
) -> Result<f64> {
    let clusters = by_cluster(labels, subset);
    let mut total = 0.0;
    for members in clusters.values() {
        let mut counts = [0usize; 3];
        for &i in members {
            if let Some(v) = value_of(i) {
                counts[v] += 1;
            }
        }
        let denom = match denominator {
            RoleDenominator::ClusterSize => members.len(),
            RoleDenominator::Support => counts.iter().sum(),
        };
        if denom > 0 {
            total += *counts.iter().max().expect("non-empty") as f64 / denom as f64;
        }
    }
    Ok(total / clusters.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterPurity {
    pub cluster: usize,
    pub size: usize,
    pub modal_count: usize,
    pub modal_form: String,
    pub distinct_forms: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PurityReport {
    pub fraction: f64,
    pub chains: usize,
    pub clusters: usize,
    pub exact_match: f64,
    pub per_role: BTreeMap<String, f64>,
    pub stance_purity: f64,
    pub avg_role: f64,
    pub denominator: RoleDenominator,
    pub per_cluster: Vec<ClusterPurity>,
}

/// Groups that receive a non-Neutral role in at least one chain.
pub fn active_groups(index: &ConflictIndex) -> Vec<String> {
    let set: BTreeSet<&String> = index.forms().iter().flat_map(|f| f.roles.keys()).collect();
    set.into_iter().cloned().collect()
}

/// Full purity report at one top-fraction cut.
///
/// `groups` defaults to every group holding a role somewhere in the corpus.
pub fn purity_report(
    model: &ClusteringModel,
    corpus: &Corpus,
    index: &ConflictIndex,
    fraction: f64,
    groups: Option<&[String]>,
    denominator: RoleDenominator,
) -> Result<PurityReport> {
    let subset = top_fraction(model, corpus, fraction)?;
    let forms = chain_forms(index);
    let labels = &model.labels;
    let known = corpus.character_groups();
    let default_groups;
    let groups = match groups {
        Some(g) => g,
        None => {
            default_groups = active_groups(index);
            &default_groups
        }
    };

    let mut per_role = BTreeMap::new();
    for g in groups {
        per_role.insert(g.clone(), role_purity_checked(labels, &forms, g, &known, &subset, denominator)?);
    }
    let avg_role = if per_role.is_empty() {
        0.0
    } else {
        per_role.values().sum::<f64>() / per_role.len() as f64
    };

    let mut per_cluster = Vec::new();
    for (cluster, members) in by_cluster(labels, &subset) {
        let mut counts: BTreeMap<&CanonicalForm, usize> = BTreeMap::new();
        for &i in &members {
            *counts.entry(forms[i]).or_default() += 1;
        }
        // Most frequent form; ties resolved by form order for stable output.
        let (modal, modal_count) = counts
            .iter()
            .fold((None, 0), |(best, n), (f, &c)| if c > n { (Some(*f), c) } else { (best, n) });
        per_cluster.push(ClusterPurity {
            cluster,
            size: members.len(),
            modal_count,
            modal_form: modal.map(ToString::to_string).unwrap_or_default(),
            distinct_forms: counts.len(),
        });
    }

    Ok(PurityReport {
        fraction,
        chains: subset.len(),
        clusters: per_cluster.len(),
        exact_match: exact_match_purity(labels, &forms, &subset)?,
        per_role,
        stance_purity: stance_purity(labels, &forms, &subset, denominator)?,
        avg_role,
        denominator,
        per_cluster,
    })
}
