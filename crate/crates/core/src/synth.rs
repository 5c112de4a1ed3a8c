//! Synthetic corpora with planted role configurations.
//!
//! Chains come from `topics` embedding blobs crossed with `forms` role
//! configurations that pairwise conflict. The embedding carries the topic
//! strongly and the configuration only weakly (`form_shift`), so unconstrained
//! k-means tends to split topics along noise rather than along configurations.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::corpus::{CharacterAnnotation, Corpus, NarrativeChain, Role, Stance};
use crate::error::Result;

#[derive(Debug, Clone)]
pub struct PlantedSpec {
    pub n: usize,
    pub dim: usize,
    pub topics: usize,
    /// At most 4; every pair of configurations conflicts.
    pub forms: usize,
    pub topic_separation: f64,
    pub form_shift: f64,
    pub noise: f64,
    pub docs_per_topic: usize,
    pub seed: u64,
}

impl Default for PlantedSpec {
    fn default() -> Self {
        PlantedSpec {
            n: 500,
            dim: 8,
            topics: 2,
            forms: 2,
            topic_separation: 6.0,
            form_shift: 0.3,
            noise: 1.0,
            docs_per_topic: 25,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Planted {
    pub corpus: Corpus,
    /// Planted (topic, form) per chain, in corpus order.
    pub truth: Vec<(usize, usize)>,
}

const TOPIC_WORDS: [&str; 4] = [
    "wages jobs economy labor market tax budget employers workers farms hiring payroll industry growth costs \
     unions factories contracts exports prices",
    "border security patrol crime fence arrest detention agents smuggling cartel checkpoint raid deportation \
     enforcement sheriff warrant prison gangs surveillance desert",
    "court ruling judge appeal lawsuit statute justice hearing verdict attorney clause injunction docket \
     precedent bench filing counsel testimony motion trial",
    "school students teachers classrooms families children tuition campus parents lessons district grades \
     scholarship library reading textbook principal enrollment diploma college",
];

const FORMS: [([(&str, Role); 2], Stance, &str); 4] = [
    ([("Immigrants", Role::Victim), ("Government", Role::Threat)], Stance::Pro, "migrants suffer harsh officials"),
    ([("Immigrants", Role::Threat), ("Government", Role::Hero)], Stance::Anti, "migrants endanger protective officials"),
    ([("Immigrants", Role::Hero), ("Government", Role::Victim)], Stance::Pro, "migrants rescue overwhelmed officials"),
    ([("Immigrants", Role::Victim), ("Government", Role::Hero)], Stance::Anti, "migrants aided by officials"),
];

const FRAMES: [&str; 4] = ["Economic", "Security and Defense", "Legality", "Cultural Identity"];

/// Generate a planted corpus. Documents are topic-pure and labeled with one
/// frame per topic.
pub fn planted_corpus(spec: &PlantedSpec) -> Result<Planted> {
    assert!(spec.topics >= 1 && spec.topics <= TOPIC_WORDS.len(), "1 to 4 topics");
    assert!(spec.forms >= 1 && spec.forms <= FORMS.len(), "1 to 4 forms");
    assert!(spec.dim >= 2, "need at least 2 dimensions");
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = Normal::new(0.0, spec.noise).expect("finite noise");

    let centers: Vec<Vec<f64>> = (0..spec.topics)
        .map(|t| {
            let mut c = vec![0.0; spec.dim];
            // Topics sit on a circle in the first two dimensions.
            let angle = std::f64::consts::TAU * t as f64 / spec.topics as f64;
            c[0] = spec.topic_separation / 2.0 * angle.cos();
            c[1] = spec.topic_separation / 2.0 * angle.sin();
            c
        })
        .collect();
    let form_dirs: Vec<Vec<f64>> = (0..spec.forms)
        .map(|f| {
            let mut d = vec![0.0; spec.dim];
            d[2 % spec.dim] = if f % 2 == 0 { 1.0 } else { -1.0 };
            if spec.dim > 3 && f >= 2 {
                d[3] = 1.0;
            }
            d
        })
        .collect();

    let mut chains = Vec::with_capacity(spec.n);
    let mut truth = BTreeMap::new();
    let mut labels: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for i in 0..spec.n {
        let topic = i % spec.topics;
        let form = (i / spec.topics) % spec.forms;
        let embedding: Vec<f64> = (0..spec.dim)
            .map(|d| centers[topic][d] + spec.form_shift * form_dirs[form][d] + noise.sample(&mut rng))
            .collect();
        let doc = format!("t{topic}-d{:03}", rng.gen_range(0..spec.docs_per_topic.max(1)));
        labels.entry(doc.clone()).or_default().insert(FRAMES[topic].to_string());

        let vocab: Vec<&str> = TOPIC_WORDS[topic].split_whitespace().collect();
        let mut words: Vec<&str> = vocab.choose_multiple(&mut rng, 5).copied().collect();
        words.extend(FORMS[form].2.split_whitespace());
        let id = format!("c{i:05}");
        let (roles, stance, _) = FORMS[form];
        chains.push(NarrativeChain {
            id: id.clone(),
            doc_id: doc,
            verbalization: words.join(" "),
            embedding,
            characters: roles
                .iter()
                .map(|&(g, r)| CharacterAnnotation::new(g.to_lowercase(), g, r))
                .collect(),
            stance,
        });
        truth.insert(id, (topic, form));
    }
    let corpus = Corpus::new(chains, "synthetic")?.with_frame_labels(labels)?;
    let truth = corpus.chains().iter().map(|c| truth[&c.id]).collect();
    Ok(Planted { corpus, truth })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::build_conflict_index;

    #[test]
    fn planted_forms_conflict_pairwise() {
        let p = planted_corpus(&PlantedSpec {
            n: 40,
            forms: 4,
            ..Default::default()
        })
        .unwrap();
        let index = build_conflict_index(&p.corpus, 0);
        assert_eq!(index.num_forms(), 4);
        for a in 0..4 {
            for b in 0..4 {
                assert_eq!(index.forms_conflict(a, b), a != b);
            }
        }
    }

    #[test]
    fn seeded_and_balanced() {
        let spec = PlantedSpec {
            n: 100,
            ..Default::default()
        };
        let a = planted_corpus(&spec).unwrap();
        let b = planted_corpus(&spec).unwrap();
        assert_eq!(a.corpus.chains(), b.corpus.chains());
        let count = |t, f| a.truth.iter().filter(|&&x| x == (t, f)).count();
        assert_eq!([count(0, 0), count(0, 1), count(1, 0), count(1, 1)], [25; 4]);
    }
}
