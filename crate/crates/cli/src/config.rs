// SPDX-License-Identifier: MIT OR Apache-2.0

//! The run configuration: every library config plus CLI plumbing, loaded
//! from defaults, then a TOML file, then `--set` overrides, then flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use tivacpd::bench::BenchConfig;
use tivacpd::datagen::SimSpec;
use tivacpd::detect::DetectConfig;
use tivacpd::eval::MarginRule;
use tivacpd::tune::TuneConfig;

pub const CONFIG_ENV: &str = "TIVACPD_CONFIG";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub margins: Vec<usize>,
    pub margin_rule: MarginRule,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            margins: vec![5, 10],
            margin_rule: MarginRule::Full,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// When set, replaces both `sim.seed` and `detect.mmd.rng_seed`.
    pub seed: Option<u64>,
    /// 0 warnings, 1 info, 2 debug, 3 trace.
    pub verbosity: u8,
    pub input: Option<PathBuf>,
    pub output: PathBuf,
    pub detector: String,
    /// Family whose tuned thresholds `detect` applies.
    pub preset: Option<String>,
    /// Apply each family's tuned thresholds during `benchmark`.
    pub use_presets: bool,
    /// Also write the ensemble, solver and window traces.
    pub traces: bool,
    pub detect: DetectConfig,
    pub sim: SimSpec,
    pub eval: EvalConfig,
    pub bench: BenchConfig,
    pub tune: TuneConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: None,
            verbosity: 0,
            input: None,
            output: PathBuf::from("out"),
            detector: "tivacpd".into(),
            preset: None,
            use_presets: true,
            traces: false,
            detect: DetectConfig::default(),
            sim: SimSpec::default(),
            eval: EvalConfig::default(),
            bench: BenchConfig::default(),
            tune: TuneConfig::default(),
        }
    }
}

impl RunConfig {
    /// Reads `path`, or the file named by `TIVACPD_CONFIG`, over the
    /// defaults, then applies `key=value` overrides.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let env_path = std::env::var_os(CONFIG_ENV).map(PathBuf::from);
        let mut table = match path.map(Path::to_path_buf).or(env_path) {
            Some(p) => {
                let text = std::fs::read_to_string(&p)
                    .with_context(|| format!("config: cannot read {}", p.display()))?;
                let file: RunConfig =
                    toml::from_str(&text).with_context(|| format!("config: {}", p.display()))?;
                to_table(&file)?
            }
            None => to_table(&RunConfig::default())?,
        };
        for o in overrides {
            set_key(&mut table, o)?;
        }
        let config: RunConfig = toml::Value::Table(table)
            .try_into()
            .context("config: invalid override")?;
        Ok(config)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string_pretty(self)?)
    }

    pub fn apply_seed(&mut self) {
        if let Some(seed) = self.seed {
            self.sim.seed = seed;
            self.detect.mmd.rng_seed = seed;
        }
    }
}

fn to_table(c: &RunConfig) -> Result<toml::Table> {
    Ok(toml::Table::try_from(c)?)
}

/// Sets a dotted key such as `detect.tvgl.beta=3`. The value is read as a
/// TOML literal and falls back to a plain string.
pub fn set_key(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let Some((key, raw)) = assignment.split_once('=') else {
        bail!("config: override `{assignment}` is not of the form key=value");
    };
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let parts: Vec<&str> = key.trim().split('.').collect();
    let (last, path) = parts.split_last().expect("split yields at least one part");
    let mut cur = table;
    for p in path {
        let entry = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = match entry {
            toml::Value::Table(t) => t,
            _ => bail!("config: `{key}`: `{p}` is not a table"),
        };
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let c = RunConfig::default();
        let back: RunConfig = toml::from_str(&c.to_toml().unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn overrides_reach_nested_fields() {
        let c = RunConfig::load(
            None,
            &[
                "detect.tvgl.beta=3".into(),
                "sim.rho=[0.0, 0.9]".into(),
                "detector=cov".into(),
                "detect.strict=true".into(),
            ],
        )
        .unwrap();
        assert_eq!(c.detect.tvgl.beta, 3.0);
        assert_eq!(c.sim.rho, Some(vec![0.0, 0.9]));
        assert_eq!(c.detector, "cov");
        assert!(c.detect.strict);
    }

    #[test]
    fn unknown_key_is_rejected() {
        assert!(RunConfig::load(None, &["detect.tvgl.gamma=1".into()]).is_err());
        assert!(RunConfig::load(None, &["nokey".into()]).is_err());
    }
}
