#![allow(dead_code)]

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::thread;

use narrclust_core::corpus::{write_corpus, CharacterAnnotation, Corpus, NarrativeChain, Role, Stance};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const GROUPS: [&str; 4] = ["Immigrants", "Government", "Employers", "Activists"];
const ROLES: [Role; 4] = [Role::Hero, Role::Threat, Role::Victim, Role::Neutral];
const STANCES: [Stance; 3] = [Stance::Pro, Stance::Anti, Stance::Neutral];

/// Random corpus where each group appears at most once per chain, so every
/// canonical form is unambiguous without tie-breaking.
pub fn random_corpus(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Corpus {
    let chains = (0..n)
        .map(|i| {
            let mut characters = Vec::new();
            for g in GROUPS {
                if rng.gen_bool(0.5) {
                    characters.push(CharacterAnnotation::new(g.to_lowercase(), g, ROLES[rng.gen_range(0..4)]));
                }
            }
            NarrativeChain {
                id: format!("x{i:04}"),
                doc_id: format!("d{}", rng.gen_range(0..(n / 3).max(1))),
                verbalization: format!("chain {i}"),
                embedding: (0..dim).map(|_| rng.gen_range(-3.0..3.0)).collect(),
                characters,
                stance: STANCES[rng.gen_range(0..3)],
            }
        })
        .collect();
    Corpus::new(chains, "random").unwrap()
}

/// Conflict between two chains read straight from their annotations (valid
/// when each group appears at most once per chain).
pub fn annotated_conflict(a: &NarrativeChain, b: &NarrativeChain) -> bool {
    for x in &a.characters {
        for y in &b.characters {
            if x.group == y.group && x.role != Role::Neutral && y.role != Role::Neutral && x.role != y.role {
                return true;
            }
        }
    }
    a.stance != Stance::Neutral && b.stance != Stance::Neutral && a.stance != b.stance
}

pub fn write_labels(path: &Path, corpus: &Corpus) {
    let mut f = std::fs::File::create(path).unwrap();
    for (doc, frames) in corpus.frame_labels().expect("labeled corpus") {
        let line = serde_json::json!({"doc_id": doc, "frames": frames});
        writeln!(f, "{line}").unwrap();
    }
}

pub fn write_inputs(dir: &Path, corpus: &Corpus) -> (PathBuf, PathBuf) {
    let chains = dir.join("chains.jsonl");
    let labels = dir.join("labels.jsonl");
    write_corpus(&chains, corpus).unwrap();
    write_labels(&labels, corpus);
    (chains, labels)
}

pub fn narrclust(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_narrclust"))
        .args(args)
        .env_remove("NARRCLUST_CONFIG")
        .output()
        .expect("binary runs")
}

/// Embedding for a text: a few deterministic character statistics.
pub fn fake_embedding(text: &str) -> Vec<f64> {
    let len = text.len() as f64;
    let vowels = text.chars().filter(|c| "aeiou".contains(*c)).count() as f64;
    let spaces = text.chars().filter(|c| c.is_whitespace()).count() as f64;
    vec![len / 10.0, vowels / 5.0, spaces, (len * 0.37).sin()]
}

/// Minimal HTTP server answering embedding requests. Responds with `fail_first`
/// HTTP 500s before serving normally. Returns the endpoint URL.
pub fn spawn_embedding_server(fail_first: usize) -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    thread::spawn(move || {
        let mut failures = fail_first;
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { continue };
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut length = 0usize;
            loop {
                let mut line = String::new();
                if reader.read_line(&mut line).unwrap_or(0) == 0 {
                    break;
                }
                let lower = line.to_ascii_lowercase();
                if let Some(v) = lower.strip_prefix("content-length:") {
                    length = v.trim().parse().unwrap_or(0);
                }
                if line == "\r\n" {
                    break;
                }
            }
            let mut body = vec![0u8; length];
            if reader.read_exact(&mut body).is_err() {
                continue;
            }
            let (status, payload) = if failures > 0 {
                failures -= 1;
                ("500 Internal Server Error", "{}".to_string())
            } else {
                let req: serde_json::Value = serde_json::from_slice(&body).unwrap();
                let embeddings: Vec<Vec<f64>> = req["texts"]
                    .as_array()
                    .unwrap()
                    .iter()
                    .map(|t| fake_embedding(t.as_str().unwrap()))
                    .collect();
                ("200 OK", serde_json::json!({ "embeddings": embeddings }).to_string())
            };
            let _ = write!(
                stream,
                "HTTP/1.1 {status}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{payload}",
                payload.len()
            );
        }
    });
    format!("http://{addr}/embed")
}
