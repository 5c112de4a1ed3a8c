//! Line-delimited JSON ingestion for chain and label files.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::types::{CharacterAnnotation, Corpus, NarrativeChain, Role, Stance};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct IngestOptions {
    pub domain_tag: String,
    /// Accept records without an `embedding` field (filled with an empty vector).
    /// Only the embedding fetcher uses this; a corpus still requires embeddings.
    pub allow_missing_embedding: bool,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            domain_tag: String::from("default"),
            allow_missing_embedding: false,
        }
    }
}

/// On-disk chain record.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainRecord {
    pub id: String,
    pub doc_id: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<Vec<f64>>,
    pub characters: Vec<CharacterRecord>,
    pub stance: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CharacterRecord {
    pub entity: String,
    pub group: String,
    pub role: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LabelRecord {
    pub doc_id: String,
    pub frames: Vec<String>,
}

impl From<&NarrativeChain> for ChainRecord {
    fn from(chain: &NarrativeChain) -> Self {
        ChainRecord {
            id: chain.id.clone(),
            doc_id: chain.doc_id.clone(),
            text: chain.verbalization.clone(),
            embedding: Some(chain.embedding.clone()),
            characters: chain
                .characters
                .iter()
                .map(|a| CharacterRecord {
                    entity: a.entity.clone(),
                    group: a.group.clone(),
                    role: a.role.to_string(),
                })
                .collect(),
            stance: chain.stance.to_string(),
        }
    }
}

fn record_to_chain(record: ChainRecord, line: usize) -> Result<NarrativeChain> {
    let stance = record
        .stance
        .parse::<Stance>()
        .map_err(|token| Error::UnknownStance { line, token })?;
    let mut characters = Vec::with_capacity(record.characters.len());
    for c in record.characters {
        let role = c
            .role
            .parse::<Role>()
            .map_err(|token| Error::UnknownRole { line, token })?;
        if c.entity.trim().is_empty() || c.group.trim().is_empty() {
            return Err(Error::MalformedRecord {
                line,
                message: format!("record `{}` has a character with empty entity or group", record.id),
            });
        }
        characters.push(CharacterAnnotation::new(c.entity, c.group, role));
    }
    if record.id.is_empty() {
        return Err(Error::MalformedRecord {
            line,
            message: "empty id".into(),
        });
    }
    Ok(NarrativeChain {
        id: record.id,
        doc_id: record.doc_id,
        verbalization: record.text,
        embedding: record.embedding.unwrap_or_default(),
        characters,
        stance,
    })
}

/// Parse chain records from a reader, returning chains in file order.
///
/// Blank lines are skipped; line numbers in errors are 1-based.
pub fn read_chains<R: BufRead>(reader: R, options: &IngestOptions) -> Result<Vec<NarrativeChain>> {
    let mut chains = Vec::new();
    let mut seen = HashSet::new();
    let mut dim: Option<usize> = None;

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::MalformedRecord {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let record: ChainRecord = serde_json::from_str(&line).map_err(|e| Error::MalformedRecord {
            line: line_no,
            message: e.to_string(),
        })?;
        if record.embedding.is_none() && !options.allow_missing_embedding {
            return Err(Error::MalformedRecord {
                line: line_no,
                message: format!("record `{}` has no embedding", record.id),
            });
        }
        let chain = record_to_chain(record, line_no)?;

        if !chain.embedding.is_empty() || !options.allow_missing_embedding {
            if chain.embedding.is_empty() {
                return Err(Error::MalformedRecord {
                    line: line_no,
                    message: format!("record `{}` has an empty embedding", chain.id),
                });
            }
            if let Some(pos) = chain.embedding.iter().position(|v| !v.is_finite()) {
                return Err(Error::MalformedRecord {
                    line: line_no,
                    message: format!("record `{}` has a non-finite embedding value at {pos}", chain.id),
                });
            }
            match dim {
                None => dim = Some(chain.embedding.len()),
                Some(d) if d != chain.embedding.len() => {
                    return Err(Error::DimensionMismatch {
                        line: line_no,
                        id: chain.id,
                        expected: d,
                        found: chain.embedding.len(),
                    });
                }
                Some(_) => {}
            }
        }
        if !seen.insert(chain.id.clone()) {
            return Err(Error::DuplicateId {
                line: line_no,
                id: chain.id,
            });
        }
        chains.push(chain);
    }
    Ok(chains)
}

/// Load and validate a chain file.
pub fn load_corpus(path: &Path, options: &IngestOptions) -> Result<Corpus> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let chains = read_chains(BufReader::new(file), options)?;
    Corpus::new(chains, options.domain_tag.clone())
}

/// Load the frame-label sidecar (`{doc_id, frames}` per line).
pub fn load_labels(path: &Path) -> Result<BTreeMap<String, BTreeSet<String>>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut labels: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: LabelRecord = serde_json::from_str(&line).map_err(|e| Error::MalformedRecord {
            line: line_no,
            message: e.to_string(),
        })?;
        labels.entry(record.doc_id).or_default().extend(record.frames);
    }
    Ok(labels)
}

pub fn write_chains<W: Write>(writer: W, chains: &[NarrativeChain]) -> Result<()> {
    let mut writer = BufWriter::new(writer);
    for chain in chains {
        serde_json::to_writer(&mut writer, &ChainRecord::from(chain))?;
        writer.write_all(b"\n").map_err(|e| Error::io("<writer>", e))?;
    }
    writer.flush().map_err(|e| Error::io("<writer>", e))?;
    Ok(())
}

pub fn write_corpus(path: &Path, corpus: &Corpus) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_chains(file, corpus.chains())
}
