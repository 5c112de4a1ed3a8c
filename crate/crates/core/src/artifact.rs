//! Reproducible output files: canonical JSON, configuration hashes and corpus fingerprints.

use std::fmt::Write as _;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::corpus::Corpus;
use crate::error::{Error, Result};

/// Pretty JSON with object keys sorted at every level and a trailing newline.
/// Floats use the shortest representation that round-trips.
pub fn canonical_json<T: Serialize>(value: &T) -> Result<String> {
    // `Value` objects are ordered maps, so converting sorts every key.
    let v: Value = serde_json::to_value(value)?;
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::with_capacity(bytes.len() * 2), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// SHA-256 of the compact canonical JSON of `config`, hex encoded.
pub fn config_hash<T: Serialize>(config: &T) -> Result<String> {
    let v: Value = serde_json::to_value(config)?;
    Ok(hex(&Sha256::digest(serde_json::to_vec(&v)?)))
}

/// SHA-256 over every chain's id, document, text, annotations, stance and the
/// exact bits of its embedding, plus the domain tag.
pub fn corpus_fingerprint(corpus: &Corpus) -> String {
    let mut h = Sha256::new();
    let mut field = |bytes: &[u8]| {
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(bytes);
    };
    field(corpus.domain_tag().as_bytes());
    for c in corpus.chains() {
        field(c.id.as_bytes());
        field(c.doc_id.as_bytes());
        field(c.verbalization.as_bytes());
        for a in &c.characters {
            field(a.entity.as_bytes());
            field(a.group.as_bytes());
            field(a.role.as_str().as_bytes());
        }
        field(c.stance.as_str().as_bytes());
        let bits: Vec<u8> = c.embedding.iter().flat_map(|x| x.to_bits().to_le_bytes()).collect();
        field(&bits);
    }
    hex(&h.finalize())
}

/// Envelope written around every output payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifact<T> {
    pub kind: String,
    pub config_hash: String,
    pub seed: u64,
    /// Everything that determined the payload; hashed into `config_hash`.
    pub config: Value,
    pub payload: T,
}

impl<T: Serialize> Artifact<T> {
    pub fn new<C: Serialize>(kind: &str, seed: u64, config: &C, payload: T) -> Result<Self> {
        let config = serde_json::to_value(config)?;
        Ok(Artifact {
            kind: kind.to_string(),
            config_hash: config_hash(&config)?,
            seed,
            config,
            payload,
        })
    }

    pub fn to_canonical_json(&self) -> Result<String> {
        canonical_json(self)
    }
}

impl<T: DeserializeOwned> Artifact<T> {
    /// Parse an artifact, checking its kind and that the recorded hash
    /// matches its configuration.
    pub fn parse(text: &str, kind: &str) -> Result<Self> {
        let a: Artifact<T> = serde_json::from_str(text)?;
        if a.kind != kind {
            return Err(Error::ModelMismatch(format!("expected a `{kind}` artifact, found `{}`", a.kind)));
        }
        let expected = config_hash(&a.config)?;
        if a.config_hash != expected {
            return Err(Error::ModelMismatch(format!(
                "artifact config hash {} does not match its configuration ({expected})",
                a.config_hash
            )));
        }
        Ok(a)
    }
}

/// Reject a set of artifacts that were not produced under one configuration hash.
pub fn ensure_same_hash<'a>(hashes: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<()> {
    let mut first: Option<(&str, &str)> = None;
    for (name, hash) in hashes {
        match first {
            None => first = Some((name, hash)),
            Some((n0, h0)) if h0 != hash => {
                return Err(Error::ModelMismatch(format!(
                    "`{name}` has config hash {hash} but `{n0}` has {h0}; artifacts come from different runs"
                )))
            }
            Some(_) => {}
        }
    }
    Ok(())
}
