//! Narrative schema induction by role-constrained k-means.
//!
//! Chains carry character-group/role annotations. Chains whose canonical
//! role configurations disagree receive cannot-link constraints, which a
//! penalized k-means honors softly. The crate also provides the purity and
//! frame-probe evaluations and the post-clustering sampling procedures.

pub mod artifact;
pub mod clustering;
pub mod corpus;
pub mod error;
pub mod metrics;
pub mod sampling;
pub mod synth;

pub use error::{Error, Result};
