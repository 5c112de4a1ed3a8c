use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::{json, Value};

use narrclust_core::artifact::{config_hash, corpus_fingerprint, ensure_same_hash, Artifact};
use narrclust_core::clustering::{fit, kmeans_baseline, ClusterParams, ClusteringModel, Dataset, ModelFile};
use narrclust_core::corpus::{
    build_conflict_index, cluster_character_mentions, fetch_embeddings, load_corpus, load_labels, read_chains,
    write_chains, Corpus, HttpEmbedder, IngestOptions,
};
use narrclust_core::metrics::{evaluate, sweep_csv, sweep_k, CutEvaluation, EvalOptions, RoleDenominator, SweepConfig};
use narrclust_core::sampling::{
    blind_items, generate_intrusion_items, sample_schema_bundles, stratified_cluster_sample, validate_items,
    IntrusionOptions,
};

use crate::config::{existing, optional_existing, pick, FileConfig};
use crate::output::{csv_string, Outputs};
use crate::{Command, CorpusArgs, Invalid, ModelArgs};

const DEFAULT_OUTPUT_DIR: &str = "narrclust-out";

pub fn run(command: Command, file: &FileConfig) -> Result<()> {
    match command {
        Command::Cluster {
            corpus,
            k,
            w_c,
            seed,
            tol,
            max_iter,
            normalize,
            baseline_check,
        } => {
            let base = ClusterParams::default();
            let params = ClusterParams {
                k: pick(k, file.k, base.k),
                w_c: pick(w_c, file.w_c, base.w_c),
                max_iter: pick(max_iter, file.max_iter, base.max_iter),
                seed: pick(seed, file.seed, base.seed),
                tol: pick(tol, file.tol, base.tol),
                normalize: pick(normalize, file.normalize, base.normalize),
            };
            cluster(&corpus, file, params, baseline_check).context("cluster")
        }
        Command::Evaluate {
            corpus,
            model,
            labels,
            fractions,
            support_denominator,
            split_seed,
        } => {
            let options = EvalOptions {
                fractions: pick(fractions, file.fractions.clone(), vec![1.0, 0.25]),
                denominator: if support_denominator {
                    RoleDenominator::Support
                } else {
                    RoleDenominator::ClusterSize
                },
                ..EvalOptions::default()
            };
            evaluate_cmd(&corpus, &model, labels, file, options, split_seed).context("evaluate")
        }
        Command::Sweep {
            corpus,
            labels,
            grid_default,
            k,
            w_c,
            seeds,
            tol,
            max_iter,
            normalize,
        } => {
            let base = SweepConfig::default();
            let grid = if grid_default {
                base.grid.clone()
            } else {
                let ks = k.or(file.k.map(|k| vec![k])).unwrap_or_else(|| vec![ClusterParams::default().k]);
                let ws = w_c.or(file.w_c.map(|w| vec![w])).unwrap_or_else(|| vec![ClusterParams::default().w_c]);
                ws.iter().flat_map(|&w| ks.iter().map(move |&k| (k, w))).collect()
            };
            let config = SweepConfig {
                grid,
                seeds: pick(seeds, file.seed.map(|s| vec![s]), vec![0]),
                max_iter: pick(max_iter, file.max_iter, base.max_iter),
                tol: pick(tol, file.tol, base.tol),
                normalize: pick(normalize, file.normalize, base.normalize),
                ..base
            };
            sweep_cmd(&corpus, labels, file, config).context("sweep")
        }
        Command::Sample {
            corpus,
            model,
            max_per_cluster,
            strata,
            seed,
        } => {
            let max = pick(max_per_cluster, file.max_per_cluster, 25);
            let strata = strata.map(|s| (s[0], s[1], s[2])).unwrap_or((15, 20, 15));
            sample_cmd(&corpus, &model, file, max, strata, seed).context("sample")
        }
        Command::Intrusion {
            corpus,
            model,
            per_tier,
            jaccard_max,
            proximity_fallback,
            seed,
        } => {
            let options = IntrusionOptions {
                per_tier: pick(per_tier, file.per_tier, 50),
                jaccard_max: pick(jaccard_max, file.jaccard_max, 0.6),
                seed: 0,
                proximity_fallback,
            };
            intrusion_cmd(&corpus, &model, file, options, seed).context("intrusion")
        }
        Command::Embed {
            corpus,
            endpoint,
            batch_size,
        } => {
            let endpoint = endpoint
                .or(file.embedding_endpoint.clone())
                .ok_or_else(|| Invalid("no embedding endpoint given".into()));
            let batch = pick(batch_size, file.batch_size, 64);
            endpoint
                .map_err(anyhow::Error::from)
                .and_then(|e| embed_cmd(&corpus, file, &e, batch))
                .context("embed")
        }
        Command::Chars {
            mentions,
            seeds,
            k,
            seed,
            output_dir,
        } => chars_cmd(&mentions, seeds.as_deref(), k.unwrap_or(15), seed.unwrap_or(14), output_dir, file).context("chars"),
        Command::Verify { files } => verify_cmd(&files).context("verify"),
    }
}

fn output_dir(args: &CorpusArgs, file: &FileConfig) -> PathBuf {
    pick(args.output_dir.clone(), file.output_dir.clone(), PathBuf::from(DEFAULT_OUTPUT_DIR))
}

fn ingest_options(args: &CorpusArgs, file: &FileConfig) -> IngestOptions {
    IngestOptions {
        domain_tag: pick(args.domain_tag.clone(), file.domain_tag.clone(), IngestOptions::default().domain_tag),
        ..IngestOptions::default()
    }
}

fn read_corpus(args: &CorpusArgs, file: &FileConfig, labels: Option<PathBuf>) -> Result<(Corpus, Option<String>)> {
    let input = existing(args.input.clone(), file.input.clone(), "input file")?;
    let corpus = load_corpus(&input, &ingest_options(args, file)).with_context(|| format!("reading {}", input.display()))?;
    match optional_existing(labels, file.labels.clone(), "label file")? {
        Some(path) => {
            let labels = load_labels(&path).with_context(|| format!("reading {}", path.display()))?;
            let labels_hash = config_hash(&labels)?;
            Ok((corpus.with_frame_labels(labels)?, Some(labels_hash)))
        }
        None => Ok((corpus, None)),
    }
}

#[derive(Serialize)]
struct ClusterRun<'a> {
    command: &'a str,
    params: &'a ClusterParams,
    corpus_fingerprint: String,
}

/// Load a model artifact and check it against the corpus it is applied to.
fn read_model(args: &ModelArgs, file: &FileConfig, corpus: &Corpus) -> Result<(ClusteringModel, String)> {
    let path = existing(args.model.clone(), file.model.clone(), "model file")?;
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let artifact: Artifact<ModelFile> =
        Artifact::parse(&text, "model").with_context(|| format!("reading {}", path.display()))?;
    let model = ClusteringModel::from_file(artifact.payload)?;
    model.check_corpus(corpus)?;
    let fingerprint = corpus_fingerprint(corpus);
    if artifact.config.get("corpus_fingerprint").and_then(Value::as_str) != Some(fingerprint.as_str()) {
        return Err(narrclust_core::Error::ModelMismatch(format!(
            "{} was fitted on a different version of this corpus",
            path.display()
        ))
        .into());
    }
    Ok((model, artifact.config_hash))
}

fn cluster(args: &CorpusArgs, file: &FileConfig, params: ClusterParams, baseline_check: bool) -> Result<()> {
    params.validate()?;
    if baseline_check && params.w_c != 0.0 {
        return Err(Invalid(format!("--baseline-check needs --w-c 0, got {}", params.w_c)).into());
    }
    let (corpus, _) = read_corpus(args, file, None)?;
    let index = build_conflict_index(&corpus, params.seed);
    let model = fit(&corpus, &index, &params)?;

    println!("chains: {}  forms: {}  implied cannot-link pairs: {}", corpus.len(), index.num_forms(), index.implied_constraint_count());
    println!("iterations: {}", model.iterations());
    println!("final objective: {:.6}", model.final_objective());
    println!("violations: {}", model.violation_count);
    println!("stopped: {:?}", model.stop_reason);

    if baseline_check {
        let data = Dataset::from_corpus(&corpus, params.normalize);
        let plain = kmeans_baseline(&data, &params)?;
        if plain.labels != model.labels {
            let differ = plain.labels.iter().zip(&model.labels).filter(|(a, b)| a != b).count();
            bail!("baseline check FAILED: {differ} chains assigned differently from plain k-means");
        }
        println!("baseline check: PASS");
    }

    let run = ClusterRun {
        command: "cluster",
        params: &params,
        corpus_fingerprint: corpus_fingerprint(&corpus),
    };
    let artifact = Artifact::new("model", params.seed, &run, model.to_file())?;
    let mut out = Outputs::default();
    out.add("model.json", artifact.to_canonical_json()?);
    report_written(out.commit(&output_dir(args, file))?);
    Ok(())
}

fn fmt6(x: f64) -> String {
    format!("{x:.6}")
}

fn evaluate_cmd(
    args: &CorpusArgs,
    model_args: &ModelArgs,
    labels: Option<PathBuf>,
    file: &FileConfig,
    options: EvalOptions,
    split_seed: Option<u64>,
) -> Result<()> {
    let (corpus, labels_hash) = read_corpus(args, file, labels)?;
    let (model, model_hash) = read_model(model_args, file, &corpus)?;
    let split_seed = split_seed.unwrap_or(model.params.seed);
    let index = build_conflict_index(&corpus, model.params.seed);
    if labels_hash.is_none() {
        eprintln!("notice: no frame labels supplied; frame probe skipped");
    }
    let cuts: Vec<CutEvaluation> = evaluate(&model, &corpus, &index, &options, split_seed)?;

    let config = json!({
        "command": "evaluate",
        "model_hash": model_hash,
        "labels_hash": labels_hash,
        "options": options,
        "split_seed": split_seed,
    });
    let artifact = Artifact::new("evaluation", split_seed, &config, &cuts)?;
    let header = [
        "config_hash",
        "seed",
        "fraction",
        "chains",
        "clusters",
        "frame_f1",
        "frame_f1_macro",
        "exact_match_purity",
        "avg_role_purity",
        "stance_purity",
    ];
    let rows: Vec<Vec<String>> = cuts
        .iter()
        .map(|c| {
            println!(
                "fraction {}: exact match {:.4}  avg role {:.4}  stance {:.4}{}",
                c.fraction,
                c.purity.exact_match,
                c.purity.avg_role,
                c.purity.stance_purity,
                c.probe.as_ref().map(|p| format!("  frame F1 {:.4}", p.micro_f1)).unwrap_or_default()
            );
            vec![
                artifact.config_hash.clone(),
                split_seed.to_string(),
                c.fraction.to_string(),
                c.purity.chains.to_string(),
                c.purity.clusters.to_string(),
                c.probe.as_ref().map(|p| fmt6(p.micro_f1)).unwrap_or_default(),
                c.probe.as_ref().map(|p| fmt6(p.macro_f1)).unwrap_or_default(),
                fmt6(c.purity.exact_match),
                fmt6(c.purity.avg_role),
                fmt6(c.purity.stance_purity),
            ]
        })
        .collect();
    let mut out = Outputs::default();
    out.add("evaluation.json", artifact.to_canonical_json()?);
    out.add("evaluation.csv", csv_string(&header, &rows)?);
    report_written(out.commit(&output_dir(args, file))?);
    Ok(())
}

fn sweep_cmd(args: &CorpusArgs, labels: Option<PathBuf>, file: &FileConfig, config: SweepConfig) -> Result<()> {
    let (corpus, labels_hash) = read_corpus(args, file, labels)?;
    let index_seed = config.seeds[0];
    let index = build_conflict_index(&corpus, index_seed);
    let report = sweep_k(&corpus, &index, &config)?;
    let best = report.best_config();
    println!("best configuration: k = {}, w_c = {} (mean rank {:.2})", best.k, best.w_c, best.mean_rank);

    let run = json!({
        "command": "sweep",
        "config": config,
        "corpus_fingerprint": corpus_fingerprint(&corpus),
        "labels_hash": labels_hash,
    });
    let artifact = Artifact::new("sweep", index_seed, &run, &report)?;
    let csv: String = sweep_csv(&report)
        .lines()
        .enumerate()
        .map(|(i, line)| {
            let first = if i == 0 { "config_hash" } else { artifact.config_hash.as_str() };
            format!("{first},{line}\n")
        })
        .collect();
    let mut out = Outputs::default();
    out.add("sweep.json", artifact.to_canonical_json()?);
    out.add("sweep.csv", csv);
    report_written(out.commit(&output_dir(args, file))?);
    Ok(())
}

fn sample_cmd(
    args: &CorpusArgs,
    model_args: &ModelArgs,
    file: &FileConfig,
    max_per_cluster: usize,
    strata: (usize, usize, usize),
    seed: Option<u64>,
) -> Result<()> {
    let (corpus, _) = read_corpus(args, file, None)?;
    let (model, model_hash) = read_model(model_args, file, &corpus)?;
    let seed = pick(seed, file.seed, model.params.seed);
    let bundles = sample_schema_bundles(&model, &corpus, seed, max_per_cluster)?;
    let stratified = stratified_cluster_sample(&model, &corpus, strata, seed)?;
    println!(
        "{} bundles, largest {} chains; stratified sample of {} clusters",
        bundles.len(),
        bundles.iter().map(|b| b.chains.len()).max().unwrap_or(0),
        stratified.clusters().len()
    );
    let config = json!({
        "command": "sample",
        "model_hash": model_hash,
        "max_per_cluster": max_per_cluster,
        "strata": [strata.0, strata.1, strata.2],
        "seed": seed,
    });
    let mut out = Outputs::default();
    out.add("bundles.json", Artifact::new("bundles", seed, &config, &bundles)?.to_canonical_json()?);
    out.add("strata.json", Artifact::new("strata", seed, &config, &stratified)?.to_canonical_json()?);
    report_written(out.commit(&output_dir(args, file))?);
    Ok(())
}

fn intrusion_cmd(
    args: &CorpusArgs,
    model_args: &ModelArgs,
    file: &FileConfig,
    mut options: IntrusionOptions,
    seed: Option<u64>,
) -> Result<()> {
    let (corpus, _) = read_corpus(args, file, None)?;
    let (model, model_hash) = read_model(model_args, file, &corpus)?;
    options.seed = pick(seed, file.seed, model.params.seed);
    let set = generate_intrusion_items(&model, &corpus, &options)?;
    let problems = validate_items(&model, &corpus, &set.items, options.jaccard_max)?;
    if !problems.is_empty() {
        bail!("{} generated items fail validation:\n{}", problems.len(), problems.join("\n"));
    }
    for (tier, missing) in &set.shortfall {
        eprintln!("warning: {missing} {tier} items could not be generated");
    }
    println!("{} items generated and validated", set.items.len());

    let (blinded, key) = blind_items(&set.items, &corpus, options.seed)?;
    let config = json!({
        "command": "intrusion",
        "model_hash": model_hash,
        "options": options,
    });
    let items = Artifact::new("intrusion_items", options.seed, &config, &set)?;
    let hash = items.config_hash.clone();
    let header = ["config_hash", "item_id", "chain_1", "chain_2", "chain_3"];
    let rows: Vec<Vec<String>> = blinded
        .iter()
        .map(|b| {
            let mut r = vec![hash.clone(), b.item_id.clone()];
            r.extend(b.texts.iter().cloned());
            r
        })
        .collect();
    let mut out = Outputs::default();
    out.add("intrusion_items.json", items.to_canonical_json()?);
    out.add("intrusion_blinded.json", Artifact::new("intrusion_blinded", options.seed, &config, &blinded)?.to_canonical_json()?);
    out.add("intrusion_answer_key.json", Artifact::new("intrusion_answer_key", options.seed, &config, &key)?.to_canonical_json()?);
    out.add("intrusion_blinded.csv", csv_string(&header, &rows)?);
    report_written(out.commit(&output_dir(args, file))?);
    Ok(())
}

fn embed_cmd(args: &CorpusArgs, file: &FileConfig, endpoint: &str, batch: usize) -> Result<()> {
    let input = existing(args.input.clone(), file.input.clone(), "input file")?;
    let options = IngestOptions {
        allow_missing_embedding: true,
        ..ingest_options(args, file)
    };
    let reader = BufReader::new(File::open(&input).with_context(|| format!("opening {}", input.display()))?);
    let mut chains = read_chains(reader, &options).with_context(|| format!("reading {}", input.display()))?;
    let missing: Vec<usize> = (0..chains.len()).filter(|&i| chains[i].embedding.is_empty()).collect();
    let texts: Vec<String> = missing.iter().map(|&i| chains[i].verbalization.clone()).collect();
    let backend = HttpEmbedder::new(endpoint)?;
    let vectors = fetch_embeddings(&texts, &backend, batch)?;
    for (&i, v) in missing.iter().zip(vectors) {
        chains[i].embedding = v;
    }
    // Validates dimensions across previously present and fetched vectors.
    let corpus = Corpus::new(chains.clone(), options.domain_tag.clone())?;
    println!("embedded {} of {} chains (dimension {})", missing.len(), chains.len(), corpus.dim());

    let mut jsonl = Vec::new();
    write_chains(&mut jsonl, &chains)?;
    let config = json!({
        "command": "embed",
        "endpoint": endpoint,
        "batch_size": batch,
        "corpus_fingerprint": corpus_fingerprint(&corpus),
    });
    let manifest = json!({
        "chains": chains.len(),
        "embedded": missing.len(),
        "dimension": corpus.dim(),
        "output": "chains.embedded.jsonl",
    });
    let mut out = Outputs::default();
    out.add("chains.embedded.jsonl", jsonl);
    out.add("embed.json", Artifact::new("embed", 0, &config, manifest)?.to_canonical_json()?);
    report_written(out.commit(&output_dir(args, file))?);
    Ok(())
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    if !path.is_file() {
        return Err(Invalid(format!("{} does not exist", path.display())).into());
    }
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect())
}

fn chars_cmd(
    mentions: &Path,
    seeds: Option<&Path>,
    k: usize,
    seed: u64,
    output_dir: Option<PathBuf>,
    file: &FileConfig,
) -> Result<()> {
    let mentions = read_lines(mentions)?;
    let seeds = match seeds {
        Some(p) => read_lines(p)?,
        None => Vec::new(),
    };
    let groups = cluster_character_mentions(&mentions, &seeds, k, seed)?;
    println!("{} distinct mentions in {} groups", groups.assignments.len(), k);
    let config = json!({
        "command": "chars",
        "mentions_hash": config_hash(&mentions)?,
        "seeds": seeds,
        "k": k,
        "seed": seed,
    });
    let mut out = Outputs::default();
    out.add("character_groups.json", Artifact::new("character_groups", seed, &config, &groups)?.to_canonical_json()?);
    let dir = pick(output_dir, file.output_dir.clone(), PathBuf::from(DEFAULT_OUTPUT_DIR));
    report_written(out.commit(&dir)?);
    Ok(())
}

/// The model run an artifact descends from: a model's own hash, or the
/// `model_hash` recorded by artifacts derived from one.
fn lineage(artifact: &Artifact<Value>) -> String {
    artifact
        .config
        .get("model_hash")
        .and_then(Value::as_str)
        .map(String::from)
        .unwrap_or_else(|| artifact.config_hash.clone())
}

fn verify_cmd(files: &[PathBuf]) -> Result<()> {
    let mut roots = Vec::new();
    for path in files {
        let text = std::fs::read_to_string(path).map_err(|e| Invalid(format!("{}: {e}", path.display())))?;
        let kind = serde_json::from_str::<Value>(&text)
            .ok()
            .and_then(|v| v.get("kind").and_then(Value::as_str).map(String::from))
            .ok_or_else(|| Invalid(format!("{} is not an artifact", path.display())))?;
        let artifact: Artifact<Value> = Artifact::parse(&text, &kind).with_context(|| path.display().to_string())?;
        roots.push((path.display().to_string(), lineage(&artifact)));
    }
    ensure_same_hash(roots.iter().map(|(p, h)| (p.as_str(), h.as_str())))?;
    println!("{} artifacts intact, all from run {}", files.len(), roots[0].1);
    Ok(())
}

fn report_written(paths: Vec<PathBuf>) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}
