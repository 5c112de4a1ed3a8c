use std::path::Path;
use std::process::{Command, Output};

use narrclust_core::synth::{planted_corpus, PlantedSpec};
use serde_json::Value;

mod common;
use common::{narrclust, spawn_embedding_server, write_inputs};

fn setup(dir: &Path) -> (String, String) {
    let planted = planted_corpus(&PlantedSpec { n: 120, seed: 3, ..Default::default() }).unwrap();
    let (chains, labels) = write_inputs(dir, &planted.corpus);
    (chains.display().to_string(), labels.display().to_string())
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn cluster(chains: &str, out: &Path, extra: &[&str]) -> Output {
    let out = out.display().to_string();
    let mut args = vec!["cluster", "--input", chains, "--output-dir", &out, "--k", "4"];
    args.extend_from_slice(extra);
    narrclust(&args)
}

#[test]
fn missing_input_is_a_validation_error_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let missing = dir.path().join("nope.jsonl").display().to_string();
    let result = narrclust(&["cluster", "--input", &missing, "--output-dir", &out.display().to_string(), "--k", "2"]);
    assert_eq!(result.status.code(), Some(1), "{}", stderr(&result));
    assert!(stderr(&result).contains("does not exist"));
    assert!(!out.exists());
}

#[test]
fn malformed_input_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let (chains, _) = setup(dir.path());
    let text = std::fs::read_to_string(&chains).unwrap();
    let broken = dir.path().join("broken.jsonl");
    let mut lines: Vec<&str> = text.lines().collect();
    lines[4] = "{\"id\": 5";
    std::fs::write(&broken, lines.join("\n")).unwrap();
    let result = cluster(&broken.display().to_string(), &dir.path().join("out"), &[]);
    assert_eq!(result.status.code(), Some(1));
    assert!(stderr(&result).contains("line 5"), "{}", stderr(&result));
}

#[test]
fn baseline_check_passes_at_zero_weight() {
    let dir = tempfile::tempdir().unwrap();
    let (chains, _) = setup(dir.path());
    let ok = cluster(&chains, &dir.path().join("out"), &["--w-c", "0", "--baseline-check"]);
    assert_eq!(ok.status.code(), Some(0), "{}", stderr(&ok));
    assert!(stdout(&ok).contains("baseline check: PASS"));

    let bad = cluster(&chains, &dir.path().join("out2"), &["--w-c", "0.1", "--baseline-check"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn settings_resolve_flag_then_env_then_file_then_default() {
    let dir = tempfile::tempdir().unwrap();
    let (chains, _) = setup(dir.path());
    let config = dir.path().join("narrclust.toml");
    std::fs::write(&config, format!("input = {chains:?}\nk = 3\nw_c = 0.3\n")).unwrap();

    let run = |name: &str, env: Option<&str>, flag: Option<&str>, with_file: bool| -> Value {
        let out = dir.path().join(name);
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_narrclust"));
        cmd.env_remove("NARRCLUST_CONFIG").env_remove("NARRCLUST_W_C");
        cmd.args(["cluster", "--output-dir", &out.display().to_string(), "--k", "3", "--input", &chains]);
        if with_file {
            cmd.args(["--config", &config.display().to_string()]);
        }
        if let Some(v) = env {
            cmd.env("NARRCLUST_W_C", v);
        }
        if let Some(v) = flag {
            cmd.args(["--w-c", v]);
        }
        let result = cmd.output().unwrap();
        assert!(result.status.success(), "{}", stderr(&result));
        read_json(&out.join("model.json"))["config"]["params"]["w_c"].clone()
    };
    assert_eq!(run("a", Some("0.2"), Some("0.1"), true), 0.1);
    assert_eq!(run("b", Some("0.2"), None, true), 0.2);
    assert_eq!(run("c", None, None, true), 0.3);
    assert_eq!(run("d", None, None, false), 0.01);
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let (chains, _) = setup(dir.path());
    let config = dir.path().join("bad.toml");
    std::fs::write(&config, "clusters = 4\n").unwrap();
    let result = narrclust(&["cluster", "--input", &chains, "--config", &config.display().to_string()]);
    assert_eq!(result.status.code(), Some(1), "{}", stderr(&result));
}

#[test]
fn model_from_another_corpus_version_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let (chains, _) = setup(dir.path());
    let out = dir.path().join("out");
    assert!(cluster(&chains, &out, &[]).status.success());

    let text = std::fs::read_to_string(&chains).unwrap();
    let mut first: Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    first["embedding"][0] = Value::from(first["embedding"][0].as_f64().unwrap() + 1.0);
    let edited = dir.path().join("edited.jsonl");
    let rest: Vec<&str> = text.lines().skip(1).collect();
    std::fs::write(&edited, format!("{first}\n{}\n", rest.join("\n"))).unwrap();

    let model = out.join("model.json").display().to_string();
    let eval_out = dir.path().join("eval").display().to_string();
    let result = narrclust(&["evaluate", "--input", &edited.display().to_string(), "--model", &model, "--output-dir", &eval_out]);
    assert_eq!(result.status.code(), Some(1));
    assert!(stderr(&result).contains("different version"), "{}", stderr(&result));
    assert!(!Path::new(&eval_out).exists());
}

#[test]
fn evaluate_without_labels_reports_purity_only() {
    let dir = tempfile::tempdir().unwrap();
    let (chains, labels) = setup(dir.path());
    let out = dir.path().join("out");
    assert!(cluster(&chains, &out, &[]).status.success());
    let model = out.join("model.json").display().to_string();
    let out_s = out.display().to_string();

    let plain = narrclust(&["evaluate", "--input", &chains, "--model", &model, "--output-dir", &out_s]);
    assert!(plain.status.success(), "{}", stderr(&plain));
    assert!(stderr(&plain).contains("frame probe skipped"));
    let report = read_json(&out.join("evaluation.json"));
    let cuts = report["payload"].as_array().unwrap();
    assert_eq!(cuts.len(), 2);
    assert!(cuts.iter().all(|c| c["probe"].is_null()));

    let labeled = narrclust(&["evaluate", "--input", &chains, "--model", &model, "--labels", &labels, "--output-dir", &out_s]);
    assert!(labeled.status.success(), "{}", stderr(&labeled));
    let report = read_json(&out.join("evaluation.json"));
    assert!(report["payload"][0]["probe"]["micro_f1"].is_number());
}

#[test]
fn verify_rejects_artifacts_from_different_runs() {
    let dir = tempfile::tempdir().unwrap();
    let (chains, _) = setup(dir.path());
    for (name, seed) in [("a", "1"), ("b", "2")] {
        let out = dir.path().join(name);
        assert!(cluster(&chains, &out, &["--seed", seed]).status.success());
        let model = out.join("model.json").display().to_string();
        let result = narrclust(&["sample", "--input", &chains, "--model", &model, "--output-dir", &out.display().to_string()]);
        assert!(result.status.success(), "{}", stderr(&result));
    }
    let path = |run: &str, file: &str| dir.path().join(run).join(file).display().to_string();
    let same = narrclust(&["verify", &path("a", "model.json"), &path("a", "bundles.json"), &path("a", "strata.json")]);
    assert!(same.status.success(), "{}", stderr(&same));
    let mixed = narrclust(&["verify", &path("a", "model.json"), &path("b", "bundles.json")]);
    assert_eq!(mixed.status.code(), Some(1), "{}", stderr(&mixed));

    let tampered = dir.path().join("tampered.json");
    let text = std::fs::read_to_string(path("a", "model.json")).unwrap().replacen("\"seed\": 1", "\"seed\": 9", 1);
    std::fs::write(&tampered, text).unwrap();
    let result = narrclust(&["verify", &tampered.display().to_string()]);
    assert_ne!(result.status.code(), Some(0));
}

#[test]
fn intrusion_needs_two_clusters() {
    let dir = tempfile::tempdir().unwrap();
    let (chains, _) = setup(dir.path());
    let out = dir.path().join("out");
    let fit = narrclust(&["cluster", "--input", &chains, "--output-dir", &out.display().to_string(), "--k", "1"]);
    assert!(fit.status.success());
    let model = out.join("model.json").display().to_string();
    let result = narrclust(&["intrusion", "--input", &chains, "--model", &model, "--output-dir", &out.display().to_string()]);
    assert_eq!(result.status.code(), Some(1), "{}", stderr(&result));
    assert!(!out.join("intrusion_items.json").exists());
}

#[test]
fn embed_fills_missing_vectors_from_the_service() {
    let dir = tempfile::tempdir().unwrap();
    let (chains, _) = setup(dir.path());
    let text = std::fs::read_to_string(&chains).unwrap();
    let stripped: Vec<String> = text
        .lines()
        .map(|l| {
            let mut v: Value = serde_json::from_str(l).unwrap();
            v.as_object_mut().unwrap().remove("embedding");
            v.to_string()
        })
        .collect();
    let input = dir.path().join("bare.jsonl");
    std::fs::write(&input, stripped.join("\n")).unwrap();
    let url = spawn_embedding_server(1);
    let out = dir.path().join("out");
    let result = narrclust(&[
        "embed",
        "--input",
        &input.display().to_string(),
        "--endpoint",
        &url,
        "--batch-size",
        "50",
        "--output-dir",
        &out.display().to_string(),
    ]);
    assert!(result.status.success(), "{}", stderr(&result));
    let embedded = std::fs::read_to_string(out.join("chains.embedded.jsonl")).unwrap();
    assert_eq!(embedded.lines().count(), 120);
    for line in embedded.lines() {
        let v: Value = serde_json::from_str(line).unwrap();
        let expected = common::fake_embedding(v["text"].as_str().unwrap());
        let got: Vec<f64> = v["embedding"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
        assert_eq!(got, expected);
    }
    assert!(out.join("embed.json").exists());
}
