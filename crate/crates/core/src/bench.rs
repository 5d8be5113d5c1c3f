// SPDX-License-Identifier: MIT OR Apache-2.0

//! Seeded benchmark over the simulated families.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datagen::{generator_by_name, SimSpec};
use crate::detect::{compute_components, detect_with, detector_by_name, DetectConfig};
use crate::error::Error;
use crate::eval::{match_and_score_with, EvalReport, MarginRule, Summary};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub families: Vec<String>,
    pub detectors: Vec<String>,
    /// Replicate `k` uses seed `seed_base + k`.
    pub n_seeds: usize,
    pub seed_base: u64,
    pub margin: usize,
    pub margin_rule: MarginRule,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            families: crate::datagen::family_names().iter().map(|s| s.to_string()).collect(),
            detectors: crate::detect::detector_names().iter().map(|s| s.to_string()).collect(),
            n_seeds: 10,
            seed_base: 0,
            margin: 5,
            margin_rule: MarginRule::Full,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub family: String,
    pub detector: String,
    pub label: String,
    pub summary: Summary,
    pub reports: Vec<EvalReport>,
}

/// Runs every detector on every seeded replicate of every family.
/// `config_for` supplies the detection settings of a family.
pub fn run_benchmark(
    bench: &BenchConfig,
    spec: &SimSpec,
    config_for: &(dyn Fn(&str) -> DetectConfig + Sync),
) -> Result<Vec<BenchRow>, Error> {
    let detectors = bench
        .detectors
        .iter()
        .map(|d| detector_by_name(d))
        .collect::<Result<Vec<_>, _>>()?;
    let need_cov = detectors.iter().any(|d| d.uses_cov());
    let need_dist = detectors.iter().any(|d| d.uses_dist());
    let mut rows = Vec::new();
    for family in &bench.families {
        let generator = generator_by_name(family)?;
        let config = config_for(family);
        let per_seed: Vec<Vec<EvalReport>> = (0..bench.n_seeds)
            .into_par_iter()
            .map(|k| {
                let ds = generator.generate(&spec.with_seed(bench.seed_base + k as u64))?;
                let comps = compute_components(&ds.series, &config, need_cov, need_dist)?;
                detectors
                    .iter()
                    .map(|d| {
                        let det = detect_with(&comps, *d, &config)?;
                        Ok(match_and_score_with(
                            &det.change_points,
                            ds.change_points(),
                            bench.margin,
                            bench.margin_rule,
                        ))
                    })
                    .collect::<Result<Vec<_>, Error>>()
            })
            .collect::<Result<_, Error>>()?;
        for (i, d) in detectors.iter().enumerate() {
            let reports: Vec<EvalReport> = per_seed.iter().map(|r| r[i].clone()).collect();
            rows.push(BenchRow {
                family: family.clone(),
                detector: d.name().to_string(),
                label: d.label().to_string(),
                summary: Summary::of(&reports),
                reports,
            });
        }
    }
    Ok(rows)
}

/// Markdown table with one row per detector and a precision, recall and
/// F1 column group per family.
pub fn markdown_table(rows: &[BenchRow]) -> String {
    let mut families: Vec<&str> = Vec::new();
    let mut detectors: Vec<(&str, &str)> = Vec::new();
    for r in rows {
        if !families.contains(&r.family.as_str()) {
            families.push(&r.family);
        }
        if !detectors.iter().any(|(d, _)| *d == r.detector) {
            detectors.push((&r.detector, &r.label));
        }
    }
    let mut out = String::from("| Method |");
    for f in &families {
        let title = generator_by_name(f).map_or(*f, |g| g.title());
        out += &format!(" {title} P | {title} R | {title} F1 |");
    }
    out += "\n|---|";
    out += &"---|---|---|".repeat(families.len());
    out.push('\n');
    for (d, label) in &detectors {
        out += &format!("| {label} |");
        for f in &families {
            match rows.iter().find(|r| r.family == *f && r.detector == *d) {
                Some(r) => {
                    let s = &r.summary;
                    out += &format!(" {} | {} | {} |", s.precision, s.recall, s.f1)
                }
                None => out += " - | - | - |",
            }
        }
        out.push('\n');
    }
    out
}

pub fn csv_table(rows: &[BenchRow]) -> String {
    let mut out = String::from(
        "family,detector,runs,precision_mean,precision_std,recall_mean,recall_std,f1_mean,f1_std\n",
    );
    for r in rows {
        let s = &r.summary;
        out += &format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.family,
            r.detector,
            s.runs,
            s.precision.mean,
            s.precision.std,
            s.recall.mean,
            s.recall.std,
            s.f1.mean,
            s.f1.std
        );
    }
    out
}
