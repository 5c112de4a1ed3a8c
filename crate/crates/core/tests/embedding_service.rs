use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread;
use std::time::Duration;

use narrclust_core::corpus::{fetch_embeddings, HttpEmbedder};
use narrclust_core::Error;

/// Serves `fail_first` HTTP 500s, then embeds each text as `[len, index]`,
/// dropping the last vector when `short` is set. Returns the URL and a request counter.
fn serve(fail_first: usize, short: bool) -> (String, Arc<AtomicUsize>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/embed", listener.local_addr().unwrap());
    let hits = Arc::new(AtomicUsize::new(0));
    let counter = Arc::clone(&hits);
    thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { continue };
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut length = 0;
            loop {
                let mut line = String::new();
                if reader.read_line(&mut line).unwrap_or(0) == 0 || line == "\r\n" {
                    break;
                }
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    length = v.trim().parse().unwrap();
                }
            }
            let mut body = vec![0; length];
            if reader.read_exact(&mut body).is_err() {
                continue;
            }
            let n = counter.fetch_add(1, Ordering::SeqCst);
            let (status, payload) = if n < fail_first {
                ("500 Internal Server Error", String::from("{}"))
            } else {
                let req: serde_json::Value = serde_json::from_slice(&body).unwrap();
                let texts = req["texts"].as_array().unwrap();
                let mut vectors: Vec<Vec<f64>> = texts
                    .iter()
                    .enumerate()
                    .map(|(i, t)| vec![t.as_str().unwrap().len() as f64, i as f64])
                    .collect();
                if short {
                    vectors.pop();
                }
                ("200 OK", serde_json::json!({ "embeddings": vectors }).to_string())
            };
            let _ = write!(
                stream,
                "HTTP/1.1 {status}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{payload}",
                payload.len()
            );
        }
    });
    (url, hits)
}

fn texts(n: usize) -> Vec<String> {
    (0..n).map(|i| "x".repeat(i + 1)).collect()
}

#[test]
fn batches_preserve_order() {
    let (url, hits) = serve(0, false);
    let embedder = HttpEmbedder::new(url).unwrap();
    let out = fetch_embeddings(&texts(7), &embedder, 3).unwrap();
    assert_eq!(hits.load(Ordering::SeqCst), 3);
    let lengths: Vec<f64> = out.iter().map(|v| v[0]).collect();
    assert_eq!(lengths, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]);
}

#[test]
fn retries_after_server_errors() {
    let (url, hits) = serve(2, false);
    let embedder = HttpEmbedder::new(url).unwrap().with_retries(3, Duration::from_millis(5));
    let out = fetch_embeddings(&texts(2), &embedder, 8).unwrap();
    assert_eq!(out.len(), 2);
    assert_eq!(hits.load(Ordering::SeqCst), 3);
}

#[test]
fn gives_up_after_the_attempt_limit() {
    let (url, hits) = serve(usize::MAX, false);
    let embedder = HttpEmbedder::new(url).unwrap().with_retries(2, Duration::from_millis(5));
    let err = fetch_embeddings(&texts(2), &embedder, 8).unwrap_err();
    assert!(matches!(err, Error::Transport(_)));
    assert!(!err.is_validation());
    assert_eq!(hits.load(Ordering::SeqCst), 2);
}

#[test]
fn short_response_is_rejected() {
    let (url, _) = serve(0, true);
    let embedder = HttpEmbedder::new(url).unwrap();
    let err = fetch_embeddings(&texts(4), &embedder, 4).unwrap_err();
    assert!(err.to_string().contains("received 3"), "{err}");
}

#[test]
fn unreachable_service_is_a_transport_error() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/embed", listener.local_addr().unwrap());
    drop(listener);
    let embedder = HttpEmbedder::new(url).unwrap().with_retries(1, Duration::ZERO);
    assert!(matches!(fetch_embeddings(&texts(1), &embedder, 1), Err(Error::Transport(_))));
}
