//! Run configuration: a TOML file with one table per command, plus flag overrides.
//!
//! ```toml
//! seed = 7
//! reps = 10
//!
//! [reduction]
//! eta = 0.2
//! lambda_grid = "0.25:4:0.25"
//! ```

use std::path::Path;
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use ussl_core::kernel::Epsilon;
use ussl_core::overlap::EpsilonMixture;

use crate::error::{usage, CliError, Result};

pub const DEFAULT_SEED: u64 = 2024;
pub const DEFAULT_REPS: usize = 10;
pub const DEFAULT_TOL: f64 = 1e-10;

/// Nonempty, strictly increasing, finite list of values.
///
/// Accepts a number, a list, or a `"start:stop:step"` string whose stop is
/// included when it lands on the step lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridRepr", into = "Vec<f64>")]
pub struct Grid(Vec<f64>);

#[derive(Deserialize)]
#[serde(untagged)]
enum GridRepr {
    One(f64),
    List(Vec<f64>),
    Range(String),
}

impl TryFrom<GridRepr> for Grid {
    type Error = String;

    fn try_from(r: GridRepr) -> std::result::Result<Self, String> {
        match r {
            GridRepr::One(x) => Grid::new(vec![x]),
            GridRepr::List(v) => Grid::new(v),
            GridRepr::Range(s) => s.parse(),
        }
    }
}

impl From<Grid> for Vec<f64> {
    fn from(g: Grid) -> Self {
        g.0
    }
}

impl Grid {
    pub fn new(values: Vec<f64>) -> std::result::Result<Self, String> {
        if values.is_empty() {
            return Err("grid is empty".into());
        }
        if let Some(x) = values.iter().find(|x| !x.is_finite()) {
            return Err(format!("grid value {x} is not finite"));
        }
        if let Some(w) = values.windows(2).find(|w| w[1] <= w[0]) {
            return Err(format!("grid is not strictly increasing at {} -> {}", w[0], w[1]));
        }
        Ok(Grid(values))
    }

    pub fn range(start: f64, stop: f64, step: f64) -> std::result::Result<Self, String> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(format!("grid step must be positive, got {step}"));
        }
        if !(stop >= start) {
            return Err(format!("grid stop {stop} is below start {start}"));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        // trim representation noise such as 0.07000000000000001
        let values = (0..count).map(|i| round12(start + i as f64 * step)).collect();
        Grid::new(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn round12(x: f64) -> f64 {
    format!("{x:.12}").parse().unwrap_or(x)
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        if s.is_empty() {
            return Err("grid is empty".into());
        }
        let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("bad grid number {t:?}: {e}"));
        if s.contains(':') {
            let parts: Vec<&str> = s.split(':').collect();
            if parts.len() != 3 {
                return Err(format!("range grid must be start:stop:step, got {s:?}"));
            }
            Grid::range(num(parts[0])?, num(parts[1])?, num(parts[2])?)
        } else {
            Grid::new(s.split(',').map(num).collect::<std::result::Result<_, _>>()?)
        }
    }
}

/// A fraction of the samples labeled by an annotator who is right with probability `kappa`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Block {
    pub fraction: f64,
    pub kappa: f64,
}

impl Block {
    pub fn to_core(self) -> ussl_core::montecarlo::LabelBlock {
        ussl_core::montecarlo::LabelBlock::new(self.fraction, self.kappa)
    }
}

/// Population mixture of `|ε|` implied by labeling blocks; unlabeled mass sits at zero.
pub fn blocks_mixture(blocks: &[Block]) -> Result<EpsilonMixture> {
    let mut atoms = Vec::with_capacity(blocks.len() + 1);
    let mut labeled = 0.0;
    for b in blocks {
        if !(0.0..=1.0).contains(&b.fraction) || !(0.5..=1.0).contains(&b.kappa) {
            return Err(usage(format!("invalid block fraction={} kappa={}", b.fraction, b.kappa)));
        }
        atoms.push((Epsilon::new(2.0 * b.kappa - 1.0)?, b.fraction));
        labeled += b.fraction;
    }
    if labeled > 1.0 + 1e-12 {
        return Err(usage(format!("block fractions sum to {labeled} > 1")));
    }
    atoms.push((Epsilon::ZERO, (1.0 - labeled).max(0.0)));
    Ok(EpsilonMixture::new(atoms)?)
}

/// Top-level layout of a config file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub reps: Option<usize>,
    pub tol: Option<f64>,
    pub solve: Option<toml::Table>,
    #[serde(rename = "approx-error")]
    pub approx_error: Option<toml::Table>,
    pub usefulness: Option<toml::Table>,
    #[serde(rename = "labeled-needed")]
    pub labeled_needed: Option<toml::Table>,
    pub reduction: Option<toml::Table>,
    pub simulate: Option<toml::Table>,
    #[serde(rename = "channel-check")]
    pub channel_check: Option<toml::Table>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config { path: path.display().to_string(), source: Box::new(e) })?;
        toml::from_str(&text).map_err(|e| CliError::Config { path: path.display().to_string(), source: Box::new(e) })
    }

    pub fn section(&self, command: &str) -> Option<&toml::Table> {
        match command {
            "solve" => self.solve.as_ref(),
            "approx-error" => self.approx_error.as_ref(),
            "usefulness" => self.usefulness.as_ref(),
            "labeled-needed" => self.labeled_needed.as_ref(),
            "reduction" => self.reduction.as_ref(),
            "simulate" => self.simulate.as_ref(),
            "channel-check" => self.channel_check.as_ref(),
            _ => None,
        }
    }
}

/// Parses a `key=value` override; the value is read as TOML, falling back to a bare string.
pub fn parse_override(s: &str) -> std::result::Result<(String, toml::Value), String> {
    let (key, raw) = s.split_once('=').ok_or_else(|| format!("override must be key=value, got {s:?}"))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(format!("override has an empty key: {s:?}"));
    }
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.trim().to_string()));
    Ok((key.to_string(), value))
}

/// Merges the file section and overrides, then deserializes the command's parameters.
pub fn resolve<P: DeserializeOwned>(
    file: &FileConfig,
    command: &str,
    overrides: &[(String, toml::Value)],
) -> Result<P> {
    let mut table = file.section(command).cloned().unwrap_or_default();
    for (k, v) in overrides {
        table.insert(k.clone(), v.clone());
    }
    P::deserialize(toml::Value::Table(table)).map_err(|e| {
        let msg = e.to_string().split_whitespace().collect::<Vec<_>>().join(" ");
        usage(format!("[{command}] {msg}"))
    })
}

/// Seed, replicate count and solver tolerance after flags and file are merged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Common {
    pub seed: u64,
    pub reps: usize,
    pub tol: f64,
}

impl Common {
    pub fn resolve(file: &FileConfig, seed: Option<u64>, reps: Option<usize>, tol: Option<f64>) -> Result<Self> {
        let common = Common {
            seed: seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            reps: reps.or(file.reps).unwrap_or(DEFAULT_REPS),
            tol: tol.or(file.tol).unwrap_or(DEFAULT_TOL),
        };
        if common.reps == 0 {
            return Err(usage("reps must be positive"));
        }
        if !(common.tol > 0.0) || !common.tol.is_finite() {
            return Err(usage(format!("tol must be positive, got {}", common.tol)));
        }
        Ok(common)
    }

    pub fn solver(&self) -> ussl_core::SolverOptions {
        ussl_core::SolverOptions { tol: self.tol, ..Default::default() }
    }
}

pub fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(usage(msg()))
    }
}
