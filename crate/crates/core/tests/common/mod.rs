#![allow(dead_code)]

use narrclust_core::clustering::{ClusterParams, ClusteringModel, StopReason};
use narrclust_core::corpus::{CharacterAnnotation, Corpus, NarrativeChain, Role, Stance};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const GROUPS: [&str; 3] = ["Immigrants", "Government", "Employers"];
pub const ROLES: [Role; 4] = [Role::Hero, Role::Threat, Role::Victim, Role::Neutral];
pub const STANCES: [Stance; 3] = [Stance::Pro, Stance::Anti, Stance::Neutral];

pub fn chain(id: &str, doc: &str, text: &str, embedding: Vec<f64>) -> NarrativeChain {
    NarrativeChain {
        id: id.into(),
        doc_id: doc.into(),
        verbalization: text.into(),
        embedding,
        characters: vec![CharacterAnnotation::new("migrants", "Immigrants", Role::Victim)],
        stance: Stance::Pro,
    }
}

pub fn random_corpus(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Corpus {
    let mut chains = Vec::with_capacity(n);
    for i in 0..n {
        let mut characters = Vec::new();
        for g in GROUPS {
            if rng.gen_bool(0.6) {
                characters.push(CharacterAnnotation::new(g.to_lowercase(), g, ROLES[rng.gen_range(0..4)]));
            }
        }
        chains.push(NarrativeChain {
            id: format!("x{i:04}"),
            doc_id: format!("d{}", rng.gen_range(0..(n / 4).max(1))),
            verbalization: format!("chain number {i}"),
            embedding: (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect(),
            characters,
            stance: STANCES[rng.gen_range(0..3)],
        });
    }
    Corpus::new(chains, "random").unwrap()
}

/// A model over `corpus` with the given labels and centroids.
pub fn hand_model(corpus: &Corpus, centroids: Vec<Vec<f64>>, labels: Vec<usize>) -> ClusteringModel {
    ClusteringModel {
        params: ClusterParams {
            k: centroids.len(),
            ..Default::default()
        },
        centroids,
        ids: corpus.chains().iter().map(|c| c.id.clone()).collect(),
        labels,
        objective_trace: vec![0.0],
        violation_count: 0,
        stop_reason: StopReason::AssignmentsStable,
    }
}
