//! Client for an external sentence-embedding service.
//!
//! Wire format: `POST {"texts": [..]}` answered by `{"embeddings": [[..], ..]}`.

use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Something that embeds one batch of texts.
pub trait EmbeddingBackend {
    fn embed_batch(&self, texts: &[String]) -> Result<Vec<Vec<f64>>>;
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    texts: &'a [String],
}

#[derive(Deserialize)]
struct EmbedResponse {
    embeddings: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct HttpEmbedder {
    endpoint: String,
    client: reqwest::blocking::Client,
    max_attempts: u32,
    base_backoff: Duration,
}

impl HttpEmbedder {
    pub fn new(endpoint: impl Into<String>) -> Result<Self> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(120))
            .build()
            .map_err(|e| Error::Transport(e.to_string()))?;
        Ok(HttpEmbedder {
            endpoint: endpoint.into(),
            client,
            max_attempts: 4,
            base_backoff: Duration::from_millis(250),
        })
    }

    /// Attempts per batch (at least one) and the first retry delay, doubled on each retry.
    pub fn with_retries(mut self, max_attempts: u32, base_backoff: Duration) -> Self {
        self.max_attempts = max_attempts.max(1);
        self.base_backoff = base_backoff;
        self
    }

    fn try_once(&self, texts: &[String]) -> Result<Vec<Vec<f64>>> {
        let response = self
            .client
            .post(&self.endpoint)
            .json(&EmbedRequest { texts })
            .send()
            .map_err(|e| Error::Transport(e.to_string()))?;
        let status = response.status();
        if !status.is_success() {
            return Err(Error::Transport(format!("{} returned HTTP {status}", self.endpoint)));
        }
        let body: EmbedResponse = response.json().map_err(|e| Error::Transport(e.to_string()))?;
        Ok(body.embeddings)
    }
}

impl EmbeddingBackend for HttpEmbedder {
    fn embed_batch(&self, texts: &[String]) -> Result<Vec<Vec<f64>>> {
        let mut delay = self.base_backoff;
        let mut attempt = 1;
        loop {
            match self.try_once(texts) {
                Ok(v) => return Ok(v),
                Err(e) if attempt >= self.max_attempts => {
                    return Err(Error::Transport(format!("giving up after {attempt} attempts: {e}")))
                }
                Err(e) => {
                    log::warn!("embedding request failed (attempt {attempt}): {e}; retrying in {delay:?}");
                    thread::sleep(delay);
                    delay = delay.saturating_mul(2).min(Duration::from_secs(30));
                    attempt += 1;
                }
            }
        }
    }
}

/// Embed `texts` in batches of `batch`, preserving order.
pub fn fetch_embeddings(texts: &[String], backend: &dyn EmbeddingBackend, batch: usize) -> Result<Vec<Vec<f64>>> {
    if batch == 0 {
        return Err(Error::InvalidParams("batch size must be at least 1".into()));
    }
    let mut out = Vec::with_capacity(texts.len());
    let mut dim: Option<usize> = None;
    for chunk in texts.chunks(batch) {
        let vectors = backend.embed_batch(chunk)?;
        if vectors.len() != chunk.len() {
            return Err(Error::Transport(format!(
                "sent {} texts but received {} embeddings",
                chunk.len(),
                vectors.len()
            )));
        }
        for v in vectors {
            let expected = *dim.get_or_insert(v.len());
            if v.len() != expected || v.is_empty() {
                return Err(Error::EmbeddingLength {
                    expected,
                    found: v.len(),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::Transport("service returned a non-finite embedding value".into()));
            }
            out.push(v);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::cell::RefCell;

    struct Fake {
        dims: Vec<usize>,
        calls: RefCell<Vec<usize>>,
    }

    impl EmbeddingBackend for Fake {
        fn embed_batch(&self, texts: &[String]) -> Result<Vec<Vec<f64>>> {
            let call = self.calls.borrow().len();
            self.calls.borrow_mut().push(texts.len());
            let dim = self.dims[call.min(self.dims.len() - 1)];
            Ok(texts.iter().map(|t| vec![t.len() as f64; dim]).collect())
        }
    }

    fn fake(dims: &[usize]) -> Fake {
        Fake {
            dims: dims.to_vec(),
            calls: RefCell::new(Vec::new()),
        }
    }

    #[test]
    fn batches_preserve_order() {
        let texts: Vec<String> = ["a", "bb", "ccc"].iter().map(|s| s.to_string()).collect();
        let backend = fake(&[4]);
        let out = fetch_embeddings(&texts, &backend, 2).unwrap();
        assert_eq!(*backend.calls.borrow(), vec![2, 1]);
        assert_eq!(out.iter().map(|v| v[0]).collect::<Vec<_>>(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn mismatched_batches_rejected() {
        let texts: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let err = fetch_embeddings(&texts, &fake(&[384, 512]), 2).unwrap_err();
        assert!(matches!(err, Error::EmbeddingLength { expected: 384, found: 512 }));
    }

    #[test]
    fn empty_input_makes_no_requests() {
        let backend = fake(&[3]);
        assert!(fetch_embeddings(&[], &backend, 8).unwrap().is_empty());
        assert!(backend.calls.borrow().is_empty());
    }

    #[test]
    fn zero_batch_rejected() {
        assert!(fetch_embeddings(&[], &fake(&[3]), 0).is_err());
    }
}
