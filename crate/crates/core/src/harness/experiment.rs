//! Seeded experiment runs and ratio-of-averages reports.

use std::collections::BTreeSet;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::graph::Graph;
use crate::multilevel::{partition_graph, Config, Preset};

pub const DEFAULT_SEEDS: [u64; 10] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10];

#[derive(Clone, Debug)]
pub struct NamedGraph {
    pub name: String,
    pub graph: Graph,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentOptions {
    pub epsilon: f64,
    pub iterations: usize,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        ExperimentOptions {
            epsilon: 0.03,
            iterations: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunMetrics {
    pub cut: f64,
    pub cut_pre_final: f64,
    pub balanced: bool,
    pub t_uncoarsen_ms: f64,
    pub t_total_ms: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub graph: String,
    pub preset: Preset,
    pub k: usize,
    pub seed: u64,
    /// Failed runs keep their error message and are left out of averages.
    pub outcome: std::result::Result<RunMetrics, String>,
}

impl RunRecord {
    fn status(&self) -> String {
        match &self.outcome {
            Ok(m) if m.balanced => "ok".into(),
            Ok(_) => "unbalanced".into(),
            Err(e) => format!("failed: {e}"),
        }
    }
}

#[derive(Serialize)]
struct RunRow<'a> {
    graph: &'a str,
    preset: &'static str,
    k: usize,
    seed: u64,
    cut: Option<f64>,
    cut_pre_final: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    t_uncoarsen_ms: Option<Option<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    t_total_ms: Option<Option<f64>>,
    status: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioRow {
    pub graph: String,
    pub k: usize,
    pub numerator: String,
    pub denominator: String,
    pub avg_numerator: f64,
    pub avg_denominator: f64,
    pub ratio: f64,
    pub ratio_pre_final: f64,
}

/// `mean(numerator) / mean(denominator)`.
pub fn ratio_of_averages(numerator: &[f64], denominator: &[f64]) -> f64 {
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    let (a, b) = (mean(numerator), mean(denominator));
    if a == b {
        1.0
    } else {
        a / b
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExperimentReport {
    /// Ordered by graph, preset, k, seed as given to [`run_experiment`].
    pub runs: Vec<RunRecord>,
}

impl ExperimentReport {
    fn successful(&self, graph: &str, preset: Preset, k: usize) -> Vec<(u64, &RunMetrics)> {
        self.runs
            .iter()
            .filter(|r| r.graph == graph && r.preset == preset && r.k == k)
            .filter_map(|r| r.outcome.as_ref().ok().map(|m| (r.seed, m)))
            .collect()
    }

    /// Average final cut over successful runs.
    pub fn average_cut(&self, graph: &str, preset: Preset, k: usize) -> Option<f64> {
        let runs = self.successful(graph, preset, k);
        if runs.is_empty() {
            return None;
        }
        Some(runs.iter().map(|(_, m)| m.cut).sum::<f64>() / runs.len() as f64)
    }

    /// Ratio of averages on the seeds where both presets succeeded.
    pub fn ratio(&self, graph: &str, k: usize, numerator: Preset, denominator: Preset) -> Option<RatioRow> {
        let a = self.successful(graph, numerator, k);
        let b = self.successful(graph, denominator, k);
        let common: BTreeSet<u64> = a
            .iter()
            .map(|(s, _)| *s)
            .filter(|s| b.iter().any(|(t, _)| t == s))
            .collect();
        if common.is_empty() {
            return None;
        }
        let pick = |runs: &[(u64, &RunMetrics)], f: fn(&RunMetrics) -> f64| -> Vec<f64> {
            runs.iter().filter(|(s, _)| common.contains(s)).map(|(_, m)| f(m)).collect()
        };
        let (num, den) = (pick(&a, |m| m.cut), pick(&b, |m| m.cut));
        let ratio_pre_final = ratio_of_averages(&pick(&a, |m| m.cut_pre_final), &pick(&b, |m| m.cut_pre_final));
        let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
        Some(RatioRow {
            graph: graph.to_string(),
            k,
            numerator: numerator.name().to_string(),
            denominator: denominator.name().to_string(),
            avg_numerator: mean(&num),
            avg_denominator: mean(&den),
            ratio: ratio_of_averages(&num, &den),
            ratio_pre_final,
        })
    }

    /// Ratios for every ordered pair of distinct presets, per graph and k.
    pub fn ratio_table(&self) -> Vec<RatioRow> {
        let mut keys: Vec<(&str, usize)> = Vec::new();
        let mut presets: Vec<Preset> = Vec::new();
        for r in &self.runs {
            if !keys.contains(&(r.graph.as_str(), r.k)) {
                keys.push((r.graph.as_str(), r.k));
            }
            if !presets.contains(&r.preset) {
                presets.push(r.preset);
            }
        }
        let mut rows = Vec::new();
        for &(graph, k) in &keys {
            for &a in &presets {
                for &b in &presets {
                    if a != b {
                        rows.extend(self.ratio(graph, k, a, b));
                    }
                }
            }
        }
        rows
    }

    /// One row per run. Without timings the two time columns are omitted,
    /// which makes the output reproducible byte for byte.
    pub fn write_csv<W: Write>(&self, out: W, with_timings: bool) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.runs {
            let metrics = r.outcome.as_ref().ok();
            let timing = |f: fn(&RunMetrics) -> f64| with_timings.then(|| metrics.map(f));
            w.serialize(RunRow {
                graph: &r.graph,
                preset: r.preset.name(),
                k: r.k,
                seed: r.seed,
                cut: metrics.map(|m| m.cut),
                cut_pre_final: metrics.map(|m| m.cut_pre_final),
                t_uncoarsen_ms: timing(|m| m.t_uncoarsen_ms),
                t_total_ms: timing(|m| m.t_total_ms),
                status: r.status(),
            })?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_ratios_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in self.ratio_table() {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs every (graph, preset, k, seed) combination in parallel.
pub fn run_experiment(
    graphs: &[NamedGraph],
    presets: &[Preset],
    ks: &[usize],
    seeds: &[u64],
    options: &ExperimentOptions,
) -> ExperimentReport {
    let mut tasks = Vec::new();
    for g in graphs {
        for &preset in presets {
            for &k in ks {
                for &seed in seeds {
                    tasks.push((g, preset, k, seed));
                }
            }
        }
    }
    let runs = tasks
        .into_par_iter()
        .map(|(g, preset, k, seed)| {
            let config = Config::new(k, preset).with_seed(seed).with_epsilon(options.epsilon);
            let outcome = partition_graph(&g.graph, &config, options.iterations)
                .map(|o| RunMetrics {
                    cut: o.partition.cut(),
                    cut_pre_final: o.stats.cut_before_final_refinement,
                    balanced: o.partition.is_balanced(),
                    t_uncoarsen_ms: o.stats.uncoarsen_time.as_secs_f64() * 1e3,
                    t_total_ms: o.stats.total_time.as_secs_f64() * 1e3,
                })
                .map_err(|e| e.to_string());
            RunRecord {
                graph: g.name.clone(),
                preset,
                k,
                seed,
                outcome,
            }
        })
        .collect();
    ExperimentReport { runs }
}
