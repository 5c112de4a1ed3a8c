use std::io::Cursor;

use narrclust_core::corpus::{load_corpus, read_chains, write_chains, write_corpus, IngestOptions};
use narrclust_core::Error;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

mod common;

fn parse(text: &str) -> narrclust_core::Result<Vec<narrclust_core::corpus::NarrativeChain>> {
    read_chains(Cursor::new(text), &IngestOptions::default())
}

const GOOD: &str = r#"{"id":"a","doc_id":"d1","text":"t","embedding":[1.0,2.0],"characters":[{"entity":"e","group":"Immigrants","role":"Hero"}],"stance":"Pro"}"#;

proptest! {
    #[test]
    fn embeddings_survive_round_trip_bit_exact(values in prop::collection::vec(prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO, 1..16)) {
        let mut c = common::chain("c1", "d1", "some text", values.clone());
        c.characters.clear();
        let mut buf = Vec::new();
        write_chains(&mut buf, &[c]).unwrap();
        let back = read_chains(Cursor::new(buf), &IngestOptions::default()).unwrap();
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        prop_assert_eq!(bits(&back[0].embedding), bits(&values));
    }
}

#[test]
fn corpus_file_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let corpus = common::random_corpus(&mut rng, 40, 5);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("chains.jsonl");
    write_corpus(&path, &corpus).unwrap();
    let back = load_corpus(&path, &IngestOptions::default()).unwrap();
    assert_eq!(back.chains(), corpus.chains());
}

#[test]
fn errors_name_the_offending_line() {
    let dim = format!("{GOOD}\n\n{}", GOOD.replace("\"a\"", "\"b\"").replace("[1.0,2.0]", "[1.0]"));
    assert!(matches!(parse(&dim), Err(Error::DimensionMismatch { line: 3, expected: 2, found: 1, .. })));

    let dup = format!("{GOOD}\n{GOOD}");
    assert!(matches!(parse(&dup), Err(Error::DuplicateId { line: 2, .. })));

    let stance = GOOD.replace("\"Pro\"", "\"Sideways\"");
    assert!(matches!(parse(&stance), Err(Error::UnknownStance { line: 1, .. })));

    let missing = GOOD.replace(",\"embedding\":[1.0,2.0]", "");
    assert!(matches!(parse(&missing), Err(Error::MalformedRecord { line: 1, .. })));
    let options = IngestOptions {
        allow_missing_embedding: true,
        ..Default::default()
    };
    assert!(read_chains(Cursor::new(missing), &options).unwrap()[0].embedding.is_empty());

    assert!(matches!(parse("{not json"), Err(Error::MalformedRecord { line: 1, .. })));
    let unknown_field = GOOD.replace("\"stance\"", "\"mood\":1,\"stance\"");
    assert!(matches!(parse(&unknown_field), Err(Error::MalformedRecord { line: 1, .. })));
}

#[test]
fn missing_file_is_an_io_error() {
    let err = load_corpus(std::path::Path::new("/nonexistent/chains.jsonl"), &IngestOptions::default()).unwrap_err();
    assert!(matches!(err, Error::Io { .. }));
    assert!(err.is_validation());
}
