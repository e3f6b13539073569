//! Run configuration: one TOML file with `[physics]`, `[numerics]`,
//! `[evolution]`, `[flags]` and `[output]` tables.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use dirac1d::potentials::{PotentialConfig, PotentialShape, RampSpec, StepProfile};
use dirac1d::Error;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct Physics {
    pub m: f64,
    pub eta: f64,
    pub a: f64,
    #[serde(rename = "L")]
    pub box_len: f64,
    /// Optional piecewise-constant `V` as `[[z_start, value], ...]`,
    /// replacing the square well.
    pub potential_table: Option<Vec<[f64; 2]>>,
}

impl Default for Physics {
    fn default() -> Self {
        Physics {
            m: 1.0,
            eta: 0.5,
            a: 4.0,
            box_len: 40.0,
            potential_table: None,
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct Numerics {
    #[serde(rename = "N")]
    pub cutoff: usize,
    #[serde(rename = "Lambda_damp")]
    pub lambda_damp: Option<f64>,
    pub grid_size: usize,
    /// Explicit split distances; when absent `epsilon_count` points span
    /// the resolvable window.
    pub epsilons: Option<Vec<f64>>,
    pub epsilon_count: usize,
    /// Cutoffs of the spectrum convergence table.
    pub convergence: Vec<usize>,
    /// Plane-wave cutoff of the free-field box sums.
    pub free_cutoff: usize,
}

impl Default for Numerics {
    fn default() -> Self {
        Numerics {
            cutoff: 256,
            lambda_damp: None,
            grid_size: 512,
            epsilons: None,
            epsilon_count: 9,
            convergence: vec![64, 128, 256],
            free_cutoff: 1 << 16,
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct Evolution {
    pub t_f: f64,
    pub dt: f64,
    /// Cutoff used for propagation.
    #[serde(rename = "N")]
    pub cutoff: usize,
    /// Further ramp durations whose end states are compared.
    pub alt_t_f: Vec<f64>,
    /// Index among positive-energy A modes of the initial state.
    pub mode: usize,
    pub oversample: usize,
    pub stride: usize,
}

impl Default for Evolution {
    fn default() -> Self {
        Evolution {
            t_f: 20.0,
            dt: 0.005,
            cutoff: 128,
            alt_t_f: vec![10.0, 40.0],
            mode: 0,
            oversample: 8,
            stride: 20,
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct Flags {
    pub compensate: bool,
    /// Free-text notes copied into every output header.
    pub notes: String,
}

impl Default for Flags {
    fn default() -> Self {
        Flags {
            compensate: true,
            notes: "half-commutator charge density".into(),
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct Output {
    pub directory: PathBuf,
}

impl Default for Output {
    fn default() -> Self {
        Output {
            directory: PathBuf::from("runs"),
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub physics: Physics,
    pub numerics: Numerics,
    pub evolution: Evolution,
    pub flags: Flags,
    pub output: Output,
}

/// Splits `section.key=value` and parses the value as a TOML value, falling
/// back to a bare string.
fn parse_override(spec: &str) -> Result<(String, String, toml::Value)> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| anyhow!("override `{spec}` is not of the form section.key=value"))?;
    let (section, key) = path
        .trim()
        .split_once('.')
        .ok_or_else(|| anyhow!("override `{spec}` must name a section, e.g. physics.eta=0.3"))?;
    let raw = raw.trim();
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    Ok((section.to_string(), key.to_string(), value))
}

impl RunConfig {
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::from_toml(&text, overrides).with_context(|| format!("in config {}", path.display()))
    }

    pub fn from_toml(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = toml::from_str(text)?;
        for spec in overrides {
            let (section, key, value) = parse_override(spec)?;
            let entry = table
                .entry(section.clone())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()));
            let sub = entry
                .as_table_mut()
                .ok_or_else(|| anyhow!("`{section}` is not a table"))?;
            sub.insert(key, value);
        }
        let cfg: RunConfig = toml::Value::Table(table).try_into()?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn potential(&self) -> Result<PotentialConfig> {
        self.potential_with_cutoff(self.numerics.cutoff)
    }

    pub fn potential_with_cutoff(&self, cutoff: usize) -> Result<PotentialConfig> {
        let p = &self.physics;
        let shape = match &p.potential_table {
            None => PotentialShape::SquareWell,
            Some(rows) => {
                let steps: Vec<(f64, f64)> = rows.iter().map(|r| (r[0], r[1])).collect();
                PotentialShape::Steps(StepProfile::from_steps(&steps, p.box_len).map_err(field_error)?)
            }
        };
        let cfg = PotentialConfig {
            m: p.m,
            eta: p.eta,
            a: p.a,
            box_len: p.box_len,
            cutoff,
            compensate: self.flags.compensate,
            lambda_damp: self.numerics.lambda_damp,
            shape,
            mass_profile: None,
        };
        cfg.validate().map_err(field_error)?;
        Ok(cfg)
    }

    pub fn ramp(&self) -> Result<RampSpec> {
        RampSpec::new(self.evolution.t_f).map_err(field_error)
    }

    /// Split distances: the explicit list or `epsilon_count` evenly spaced
    /// points on `[4/k_max, 0.5/m]`.
    pub fn epsilons(&self, cfg: &PotentialConfig) -> Vec<f64> {
        match &self.numerics.epsilons {
            Some(list) => list.clone(),
            None => dirac1d::vacuum::default_epsilons(cfg, self.numerics.epsilon_count),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let cfg = self.potential()?;
        let (lo, hi) = (4.0 / cfg.k_max(), 0.5 / cfg.m);
        if lo > hi {
            bail!("numerics.N: resolvable split window [{lo:.4}, {hi:.4}] is empty; raise N");
        }
        if let Some(list) = &self.numerics.epsilons {
            if list.len() < 2 {
                bail!("numerics.epsilons: need at least two split distances");
            }
            for &e in list {
                if !(lo * (1.0 - 1e-12)..=hi * (1.0 + 1e-12)).contains(&e) {
                    bail!("numerics.epsilons: {e} lies outside the resolvable window [{lo:.6}, {hi:.6}]");
                }
            }
        } else if self.numerics.epsilon_count < 2 {
            bail!("numerics.epsilon_count: need at least 2, got {}", self.numerics.epsilon_count);
        }
        if self.numerics.grid_size < 2 {
            bail!("numerics.grid_size: need at least 2 points");
        }
        if self.numerics.free_cutoff < 16 {
            bail!("numerics.free_cutoff: must be at least 16, got {}", self.numerics.free_cutoff);
        }
        if self.numerics.convergence.iter().any(|&n| n < 16) {
            bail!("numerics.convergence: every cutoff must be at least 16");
        }
        let e = &self.evolution;
        self.ramp()?;
        for &t in &e.alt_t_f {
            if !(t.is_finite() && t > 0.0) {
                bail!("evolution.alt_t_f: ramp durations must be positive, got {t}");
            }
        }
        if !(e.dt.is_finite() && e.dt > 0.0) {
            bail!("evolution.dt: must be positive, got {}", e.dt);
        }
        if e.cutoff < 16 {
            bail!("evolution.N: must be at least 16, got {}", e.cutoff);
        }
        if e.oversample < 2 || e.stride == 0 {
            bail!("evolution.oversample must be >= 2 and evolution.stride >= 1");
        }
        Ok(())
    }

    /// Flat `section.key = value` lines of the resolved configuration.
    pub fn flatten(&self) -> Vec<(String, String)> {
        let value = toml::Value::try_from(self).expect("config serializes");
        let mut out = Vec::new();
        if let toml::Value::Table(t) = value {
            for (section, sub) in t {
                if let toml::Value::Table(sub) = sub {
                    for (k, v) in sub {
                        out.push((format!("{section}.{k}"), render(&v)));
                    }
                }
            }
        }
        out
    }
}

fn render(v: &toml::Value) -> String {
    match v {
        toml::Value::String(s) => s.clone(),
        toml::Value::Array(items) => {
            let mut s = String::from("[");
            for (i, x) in items.iter().enumerate() {
                if i > 0 {
                    s.push_str(", ");
                }
                let _ = write!(s, "{}", render(x));
            }
            s.push(']');
            s
        }
        other => other.to_string(),
    }
}

/// Maps core validation errors onto config field paths.
fn field_error(e: Error) -> anyhow::Error {
    match e {
        Error::InvalidConfig { field, reason } => {
            let path = match field {
                "m" | "eta" | "a" | "L" => format!("physics.{field}"),
                "profile" => "physics.potential_table".into(),
                "N" | "Lambda_damp" => format!("numerics.{field}"),
                "t_f" => "evolution.t_f".into(),
                other => other.to_string(),
            };
            anyhow!("{path}: {reason}")
        }
        other => anyhow!(other),
    }
}
