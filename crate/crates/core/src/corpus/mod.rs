//! Annotated narrative chains, canonical forms and the conflict index.

mod canonical;
mod embed;
mod index;
mod io;
mod mentions;
mod types;

pub use canonical::{chain_seed, conflicts, derive_canonical_form, CanonicalForm};
pub use embed::{fetch_embeddings, EmbeddingBackend, HttpEmbedder};
pub use index::{build_conflict_index, ConflictIndex};
pub use io::{
    load_corpus, load_labels, read_chains, write_chains, write_corpus, ChainRecord, CharacterRecord, IngestOptions,
    LabelRecord,
};
pub use mentions::{cluster_character_mentions, tokenize, MentionClusters, TfidfVectorizer};
pub use types::{CharacterAnnotation, Corpus, NarrativeChain, Role, Stance};
