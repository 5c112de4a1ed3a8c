use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Narrative role of a character group within one chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Role {
    Hero,
    Threat,
    Victim,
    Neutral,
}

impl Role {
    /// Roles that carry constraint information. `Neutral` is informational only.
    pub const ACTIVE: [Role; 3] = [Role::Hero, Role::Threat, Role::Victim];

    pub fn as_str(self) -> &'static str {
        match self {
            Role::Hero => "Hero",
            Role::Threat => "Threat",
            Role::Victim => "Victim",
            Role::Neutral => "Neutral",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Role {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "hero" => Ok(Role::Hero),
            "threat" => Ok(Role::Threat),
            "victim" => Ok(Role::Victim),
            "neutral" => Ok(Role::Neutral),
            _ => Err(s.to_string()),
        }
    }
}

/// Overall position of a chain toward the policy domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Stance {
    Pro,
    Anti,
    Neutral,
}

impl Stance {
    pub fn as_str(self) -> &'static str {
        match self {
            Stance::Pro => "Pro",
            Stance::Anti => "Anti",
            Stance::Neutral => "Neutral",
        }
    }
}

impl fmt::Display for Stance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stance {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pro" => Ok(Stance::Pro),
            "anti" => Ok(Stance::Anti),
            "neutral" => Ok(Stance::Neutral),
            _ => Err(s.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharacterAnnotation {
    /// Verbatim mention as it appears in the verbalization.
    pub entity: String,
    pub group: String,
    pub role: Role,
}

impl CharacterAnnotation {
    pub fn new(entity: impl Into<String>, group: impl Into<String>, role: Role) -> Self {
        CharacterAnnotation {
            entity: entity.into(),
            group: group.into(),
            role,
        }
    }
}

/// One verbalized causal chain with its annotations and sentence embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct NarrativeChain {
    pub id: String,
    pub doc_id: String,
    pub verbalization: String,
    pub embedding: Vec<f64>,
    pub characters: Vec<CharacterAnnotation>,
    pub stance: Stance,
}

/// A validated collection of chains.
///
/// Chains are kept sorted by id; every index-based API in the crate refers to
/// this order.
#[derive(Debug, Clone)]
pub struct Corpus {
    chains: Vec<NarrativeChain>,
    frame_labels: Option<BTreeMap<String, BTreeSet<String>>>,
    domain_tag: String,
    dim: usize,
}

impl Corpus {
    pub fn new(mut chains: Vec<NarrativeChain>, domain_tag: impl Into<String>) -> Result<Self> {
        if chains.is_empty() {
            return Err(Error::InvalidCorpus("corpus has no chains".into()));
        }
        let dim = chains[0].embedding.len();
        if dim == 0 {
            return Err(Error::InvalidCorpus(format!(
                "chain `{}` has an empty embedding",
                chains[0].id
            )));
        }
        let mut seen = HashSet::with_capacity(chains.len());
        for chain in &chains {
            validate_chain(chain)?;
            if chain.embedding.len() != dim {
                return Err(Error::InvalidCorpus(format!(
                    "chain `{}` has embedding length {}, expected {dim}",
                    chain.id,
                    chain.embedding.len()
                )));
            }
            if !seen.insert(chain.id.as_str()) {
                return Err(Error::InvalidCorpus(format!("duplicate chain id `{}`", chain.id)));
            }
        }
        chains.sort_by(|a, b| a.id.cmp(&b.id));
        Ok(Corpus {
            chains,
            frame_labels: None,
            domain_tag: domain_tag.into(),
            dim,
        })
    }

    /// Attach document-level frame labels. Every chain's document must be labeled.
    pub fn with_frame_labels(mut self, labels: BTreeMap<String, BTreeSet<String>>) -> Result<Self> {
        if let Some(chain) = self.chains.iter().find(|c| !labels.contains_key(&c.doc_id)) {
            return Err(Error::InvalidCorpus(format!(
                "document `{}` (chain `{}`) has no frame labels",
                chain.doc_id, chain.id
            )));
        }
        self.frame_labels = Some(labels);
        Ok(self)
    }

    pub fn chains(&self) -> &[NarrativeChain] {
        &self.chains
    }

    pub fn len(&self) -> usize {
        self.chains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chains.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain_tag(&self) -> &str {
        &self.domain_tag
    }

    pub fn frame_labels(&self) -> Option<&BTreeMap<String, BTreeSet<String>>> {
        self.frame_labels.as_ref()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.chains.binary_search_by(|c| c.id.as_str().cmp(id)).ok()
    }

    pub fn embedding(&self, i: usize) -> &[f64] {
        &self.chains[i].embedding
    }

    /// Every character group mentioned anywhere, including Neutral-only groups.
    pub fn character_groups(&self) -> BTreeSet<String> {
        self.chains
            .iter()
            .flat_map(|c| c.characters.iter().map(|a| a.group.clone()))
            .collect()
    }

    /// Distinct document ids in sorted order.
    pub fn doc_ids(&self) -> BTreeSet<&str> {
        self.chains.iter().map(|c| c.doc_id.as_str()).collect()
    }

    /// Row-major copy of all embeddings in chain order.
    pub fn embedding_matrix(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.chains.len() * self.dim);
        for chain in &self.chains {
            out.extend_from_slice(&chain.embedding);
        }
        out
    }
}

fn validate_chain(chain: &NarrativeChain) -> Result<()> {
    if chain.id.is_empty() {
        return Err(Error::InvalidCorpus("chain with empty id".into()));
    }
    if let Some(pos) = chain.embedding.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidCorpus(format!(
            "chain `{}` has a non-finite embedding component at position {pos}",
            chain.id
        )));
    }
    for ann in &chain.characters {
        if ann.entity.trim().is_empty() || ann.group.trim().is_empty() {
            return Err(Error::InvalidCorpus(format!(
                "chain `{}` has a character annotation with an empty entity or group",
                chain.id
            )));
        }
    }
    Ok(())
}
