// SPDX-License-Identifier: MIT OR Apache-2.0

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use tivacpd::bench::{csv_table, markdown_table, run_benchmark};
use tivacpd::datagen::simulate;
use tivacpd::detect::{compute_components, detect_with, detector_by_name, CpCategory};
use tivacpd::error::Error;
use tivacpd::eval::{match_and_score_with, EvalReport};
use tivacpd::presets::{family_config, preset_for};
use tivacpd::series::{ChangePointSet, TimeSeries};
use tivacpd::tune::tune_thresholds;

use crate::config::RunConfig;

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::json(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))?;
    Ok(())
}

fn write_text(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Error::io(p, e))?,
        None => print!("{text}"),
    }
    Ok(())
}

#[derive(Serialize)]
struct TvglStatus {
    converged: bool,
    iterations: usize,
    primal_residual: f64,
    dual_residual: f64,
}

#[derive(Serialize)]
struct CpsFile<'a> {
    detector: &'a str,
    threshold: f64,
    length: usize,
    features: &'a [String],
    dropped_features: &'a [String],
    change_points: &'a [usize],
    categories: &'a [CpCategory],
    tvgl: Option<TvglStatus>,
}

/// Runs detection on `input` and writes `scores.csv`, `cps.json` and
/// `heatmap.json` (plus traces on request) into the output directory.
pub fn detect(config: &RunConfig, input: &Path) -> Result<Vec<PathBuf>> {
    let series = TimeSeries::read_csv(input).map_err(Error::from)?;
    let detector = detector_by_name(&config.detector)?;
    let mut detect_config = config.detect.clone();
    if let Some(family) = &config.preset {
        match preset_for(family) {
            Some(p) => p.apply(&mut detect_config),
            None => bail!("config: no preset for family `{family}`"),
        }
    }
    let comps = compute_components(&series, &detect_config, true, true)?;
    let det = detect_with(&comps, detector, &detect_config)?;
    let out = &config.output;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let cov = comps.cov.as_ref().expect("covariance branch requested");
    let dist = comps.dist.as_ref().expect("distribution branch requested");

    let last = if det.ensemble.is_some() { "ensemble" } else { "score" };
    let mut csv = format!("t,CovScore,DistScore,{last}\n");
    for t in 0..det.score.len() {
        writeln!(
            csv,
            "{t},{},{},{}",
            cov.score.scores[t], dist.score.scores[t], det.score.scores[t]
        )?;
    }
    let mut written = Vec::new();
    let scores_path = out.join("scores.csv");
    fs::write(&scores_path, csv).map_err(|e| Error::io(&scores_path, e))?;
    written.push(scores_path);

    let sol = &cov.solution;
    let cps = CpsFile {
        detector: det.detector,
        threshold: det.threshold,
        length: comps.series.len(),
        features: comps.series.feature_names(),
        dropped_features: &comps.dropped_features,
        change_points: det.change_points.indices(),
        categories: &det.categories,
        tvgl: Some(TvglStatus {
            converged: sol.converged,
            iterations: sol.iterations,
            primal_residual: sol.primal_residual,
            dual_residual: sol.dual_residual,
        }),
    };
    let mut json_out = vec![
        ("cps.json", serde_json::to_value(&cps)?),
        ("heatmap.json", serde_json::to_value(&cov.heatmap)?),
    ];
    if config.traces {
        if let Some(tr) = &det.ensemble {
            json_out.push(("ensemble.json", serde_json::to_value(tr)?));
        }
        json_out.push(("tvgl.json", serde_json::to_value(&cov.solution)?));
        json_out.push(("mmd.json", serde_json::to_value(&dist.trace)?));
    }
    for (name, value) in json_out {
        let path = out.join(name);
        write_json(&path, &value)?;
        written.push(path);
    }
    log::info!(
        "detect: {} change point(s) at {:?}",
        det.change_points.len(),
        det.change_points.indices()
    );
    Ok(written)
}

/// Writes `<family>_<seed>.csv` and `<family>_<seed>.truth.json`.
pub fn simulate_cmd(config: &RunConfig, family: &str) -> Result<(PathBuf, PathBuf)> {
    let ds = simulate(family, &config.sim)?;
    let out = &config.output;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let stem = format!("{family}_{}", config.sim.seed);
    let csv = out.join(format!("{stem}.csv"));
    let truth = out.join(format!("{stem}.truth.json"));
    ds.write(&csv, &truth)?;
    Ok((csv, truth))
}

/// Reads `change_points` from a detection or ground-truth file, or a bare
/// JSON array of indices.
pub fn read_change_points(path: &Path) -> Result<ChangePointSet> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
    let list = match &value {
        serde_json::Value::Array(_) => &value,
        serde_json::Value::Object(map) => map
            .get("change_points")
            .with_context(|| format!("eval: {}: no `change_points` field", path.display()))?,
        _ => bail!("eval: {}: expected an object or an array", path.display()),
    };
    let indices: Vec<usize> = serde_json::from_value(list.clone())
        .map_err(|e| Error::json(path, e))
        .context("eval: change points must be non-negative integers")?;
    Ok(ChangePointSet::from_unsorted(indices))
}

pub fn eval(config: &RunConfig, cps: &Path, truth: &Path) -> Result<Vec<EvalReport>> {
    let pred = read_change_points(cps)?;
    let truth = read_change_points(truth)?;
    Ok(config
        .eval
        .margins
        .iter()
        .map(|&m| match_and_score_with(&pred, &truth, m, config.eval.margin_rule))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum TableFormat {
    Markdown,
    Csv,
    Json,
}

pub fn benchmark(config: &RunConfig, format: TableFormat, out: Option<&Path>) -> Result<()> {
    let base = config.detect.clone();
    let use_presets = config.use_presets;
    let config_for = move |family: &str| {
        if use_presets {
            family_config(family, &base)
        } else {
            base.clone()
        }
    };
    let rows = run_benchmark(&config.bench, &config.sim, &config_for)?;
    let text = match format {
        TableFormat::Markdown => markdown_table(&rows),
        TableFormat::Csv => csv_table(&rows),
        TableFormat::Json => serde_json::to_string_pretty(&rows)? + "\n",
    };
    write_text(out, &text)
}

pub fn tune(config: &RunConfig, families: &[String], out: Option<&Path>) -> Result<()> {
    let results = families
        .iter()
        .map(|f| tune_thresholds(f, &config.sim, &config.detect, &config.tune))
        .collect::<Result<Vec<_>, Error>>()?;
    write_text(out, &(serde_json::to_string_pretty(&results)? + "\n"))
}
