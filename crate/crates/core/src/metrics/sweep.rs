//! Grid sweep over (K, w_c) with joint best-configuration selection.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::evaluate::{evaluate_cut, EvalOptions};
use crate::clustering::{fit, ClusterParams};
use crate::corpus::{ConflictIndex, Corpus};
use crate::error::{Error, Result};

/// K in {50, 100, ..., 500} crossed with both constraint weights used for the news corpora.
pub fn default_grid() -> Vec<(usize, f64)> {
    let mut grid = Vec::new();
    for w_c in [0.01, 0.1] {
        for k in (50..=500).step_by(50) {
            grid.push((k, w_c));
        }
    }
    grid
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub grid: Vec<(usize, f64)>,
    pub seeds: Vec<u64>,
    pub max_iter: usize,
    pub tol: f64,
    pub normalize: bool,
    /// Narrow cut reported next to the all-chains cut.
    pub top_fraction: f64,
    pub eval: EvalOptions,
}

impl Default for SweepConfig {
    fn default() -> Self {
        let base = ClusterParams::default();
        SweepConfig {
            grid: default_grid(),
            seeds: vec![0],
            max_iter: base.max_iter,
            tol: base.tol,
            normalize: base.normalize,
            top_fraction: 0.25,
            eval: EvalOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub k: usize,
    pub w_c: f64,
    pub seed: u64,
    pub top_frame_f1: Option<f64>,
    pub top_exact_match_purity: f64,
    pub top_avg_role_purity: f64,
    pub top_stance_purity: f64,
    pub all_frame_f1: Option<f64>,
    pub all_exact_match_purity: f64,
    pub all_avg_role_purity: f64,
    pub all_stance_purity: f64,
    pub objective: f64,
    pub violations: u64,
    pub iterations: usize,
}

impl SweepRow {
    /// Values entering the joint ranking, higher is better.
    fn ranked_metrics(&self) -> Vec<Option<f64>> {
        vec![
            self.top_frame_f1,
            Some(self.top_exact_match_purity),
            Some(self.top_avg_role_purity),
            self.all_frame_f1,
            Some(self.all_exact_match_purity),
            Some(self.all_avg_role_purity),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigSummary {
    pub k: usize,
    pub w_c: f64,
    /// Seed means of the ranked metrics, in row column order; `None` when unavailable.
    pub means: Vec<Option<f64>>,
    pub mean_rank: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub summary: Vec<ConfigSummary>,
    /// Index into `summary` of the configuration with the best (lowest) mean rank.
    pub best: usize,
}

impl SweepReport {
    pub fn best_config(&self) -> &ConfigSummary {
        &self.summary[self.best]
    }
}

/// Fit and evaluate every grid cell for every seed, in grid-then-seed order.
pub fn sweep_k(corpus: &Corpus, index: &ConflictIndex, config: &SweepConfig) -> Result<SweepReport> {
    if config.grid.is_empty() {
        return Err(Error::InvalidParams("sweep grid is empty".into()));
    }
    if config.seeds.is_empty() {
        return Err(Error::InvalidParams("sweep needs at least one seed".into()));
    }
    let mut rows = Vec::with_capacity(config.grid.len() * config.seeds.len());
    for &(k, w_c) in &config.grid {
        for &seed in &config.seeds {
            let params = ClusterParams {
                k,
                w_c,
                max_iter: config.max_iter,
                seed,
                tol: config.tol,
                normalize: config.normalize,
            };
            let model = fit(corpus, index, &params)?;
            let top = evaluate_cut(&model, corpus, index, config.top_fraction, &config.eval, seed)?;
            let all = evaluate_cut(&model, corpus, index, 1.0, &config.eval, seed)?;
            log::info!(
                "k={k} w_c={w_c} seed={seed}: exact match {:.4} (all) {:.4} (top)",
                all.purity.exact_match,
                top.purity.exact_match
            );
            rows.push(SweepRow {
                k,
                w_c,
                seed,
                top_frame_f1: top.probe.as_ref().map(|p| p.micro_f1),
                top_exact_match_purity: top.purity.exact_match,
                top_avg_role_purity: top.purity.avg_role,
                top_stance_purity: top.purity.stance_purity,
                all_frame_f1: all.probe.as_ref().map(|p| p.micro_f1),
                all_exact_match_purity: all.purity.exact_match,
                all_avg_role_purity: all.purity.avg_role,
                all_stance_purity: all.purity.stance_purity,
                objective: model.final_objective(),
                violations: model.violation_count,
                iterations: model.iterations(),
            });
        }
    }
    let summary = summarize(&config.grid, &rows);
    let best = summary
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.mean_rank.total_cmp(&b.1.mean_rank).then(a.0.cmp(&b.0)))
        .map(|(i, _)| i)
        .expect("grid is non-empty");
    Ok(SweepReport { rows, summary, best })
}

/// Average each metric across seeds per configuration, rank configurations per
/// metric (1 = best, ties share the average rank), and average the ranks.
fn summarize(grid: &[(usize, f64)], rows: &[SweepRow]) -> Vec<ConfigSummary> {
    let mut summary: Vec<ConfigSummary> = grid
        .iter()
        .map(|&(k, w_c)| {
            let cell: Vec<&SweepRow> = rows.iter().filter(|r| r.k == k && r.w_c == w_c).collect();
            let width = cell[0].ranked_metrics().len();
            let means = (0..width)
                .map(|m| {
                    let vals: Option<Vec<f64>> = cell.iter().map(|r| r.ranked_metrics()[m]).collect();
                    vals.map(|v| v.iter().sum::<f64>() / v.len() as f64)
                })
                .collect();
            ConfigSummary {
                k,
                w_c,
                means,
                mean_rank: 0.0,
            }
        })
        .collect();

    let width = summary[0].means.len();
    let mut rank_sum = vec![0.0; summary.len()];
    let mut ranked = 0usize;
    for m in 0..width {
        let vals: Option<Vec<f64>> = summary.iter().map(|s| s.means[m]).collect();
        let Some(vals) = vals else { continue };
        ranked += 1;
        for (i, r) in average_ranks(&vals).into_iter().enumerate() {
            rank_sum[i] += r;
        }
    }
    for (s, total) in summary.iter_mut().zip(rank_sum) {
        s.mean_rank = if ranked == 0 { 1.0 } else { total / ranked as f64 };
    }
    summary
}

/// Descending ranks starting at 1; tied values receive the mean of their positions.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

pub const CSV_HEADER: &str = "k,w_c,seed,top25_frame_f1,top25_exact_match_purity,top25_avg_role_purity,top25_stance_purity,\
all_frame_f1,all_exact_match_purity,all_avg_role_purity,all_stance_purity,objective,violations,iterations";

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

/// One line per (k, w_c, seed); scores as fractions with six decimals, missing frame F1 left blank.
pub fn sweep_csv(report: &SweepReport) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in &report.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{:.6},{:.6},{:.6},{},{:.6},{:.6},{:.6},{:.6},{},{}",
            r.k,
            r.w_c,
            r.seed,
            opt(r.top_frame_f1),
            r.top_exact_match_purity,
            r.top_avg_role_purity,
            r.top_stance_purity,
            opt(r.all_frame_f1),
            r.all_exact_match_purity,
            r.all_avg_role_purity,
            r.all_stance_purity,
            r.objective,
            r.violations,
            r.iterations
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_has_twenty_cells() {
        let g = default_grid();
        assert_eq!(g.len(), 20);
        let ks: Vec<usize> = g.iter().filter(|c| c.1 == 0.01).map(|c| c.0).collect();
        assert_eq!(ks, vec![50, 100, 150, 200, 250, 300, 350, 400, 450, 500]);
    }

    #[test]
    fn ranks_average_ties() {
        assert_eq!(average_ranks(&[0.3, 0.9, 0.3, 0.1]), vec![2.5, 1.0, 2.5, 4.0]);
        assert_eq!(average_ranks(&[1.0]), vec![1.0]);
    }

    fn row(k: usize, seed: u64, em: f64, role: f64) -> SweepRow {
        SweepRow {
            k,
            w_c: 0.1,
            seed,
            top_frame_f1: None,
            top_exact_match_purity: em,
            top_avg_role_purity: role,
            top_stance_purity: 0.0,
            all_frame_f1: None,
            all_exact_match_purity: em,
            all_avg_role_purity: role,
            all_stance_purity: 0.0,
            objective: 0.0,
            violations: 0,
            iterations: 1,
        }
    }

    #[test]
    fn summary_ranks_seed_means() {
        let grid = [(2, 0.1), (3, 0.1)];
        let rows = vec![row(2, 0, 0.5, 0.9), row(2, 1, 0.7, 0.9), row(3, 0, 0.8, 0.5), row(3, 1, 0.8, 0.5)];
        let s = summarize(&grid, &rows);
        assert!((s[0].means[1].unwrap() - 0.6).abs() < 1e-12);
        assert!(s[0].means[0].is_none());
        // Config 0 wins role purity, config 1 wins exact match: equal mean ranks.
        assert_eq!(s[0].mean_rank, 1.5);
        assert_eq!(s[1].mean_rank, 1.5);
    }
}
