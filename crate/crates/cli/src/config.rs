//! Run configuration: TOML with dotted sections, unknown keys rejected.

use std::path::{Path, PathBuf};

use anyhow::bail;
use gaussdim::bound_lab::{CantorSpec, EnumerationMode, SparseRule};
use gaussdim::pressure::{PressureSource, DEFAULT_GRID};
use gaussdim::{SystemKind, SystemSpec, TargetSpec};
use serde::Deserialize;

/// A base written either as a number or as the string `"e"`.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Base {
    Number(f64),
    Named(NamedBase),
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub enum NamedBase {
    #[serde(rename = "e")]
    E,
}

impl Base {
    pub fn value(self) -> f64 {
        match self {
            Base::Number(b) => b,
            Base::Named(NamedBase::E) => std::f64::consts::E,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemBlock {
    pub kind: SystemKind,
    #[serde(rename = "M")]
    pub m: u64,
    pub d: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetBlock {
    pub positions: Vec<u32>,
    pub weights: Vec<f64>,
    #[serde(rename = "B")]
    pub base: Base,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Partition,
    Eigen,
    Full,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PressureBlock {
    pub s_min: f64,
    pub s_max: f64,
    pub points: usize,
    pub method: Method,
    pub level: usize,
    pub grid: usize,
}

impl Default for PressureBlock {
    fn default() -> Self {
        PressureBlock { s_min: 0.55, s_max: 1.3, points: 50, method: Method::Eigen, level: 3, grid: DEFAULT_GRID }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AofsBlock {
    pub s_min: f64,
    pub s_max: f64,
    pub points: usize,
}

impl Default for AofsBlock {
    fn default() -> Self {
        AofsBlock { s_min: 0.55, s_max: 1.0, points: 46 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DimBlock {
    pub tol: f64,
    pub method: Method,
    pub level: usize,
    pub grid: usize,
    pub bases: Vec<f64>,
}

impl Default for DimBlock {
    fn default() -> Self {
        DimBlock { tol: 1e-10, method: Method::Full, level: 3, grid: DEFAULT_GRID, bases: vec![2.0, 4.0, 8.0, 16.0] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoverMode {
    Exact,
    Blocks,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoverBlock {
    pub n_min: u32,
    pub n_max: u32,
    /// Offsets of the `s` grid around `s₀` when `s_min`/`s_max` are absent.
    pub s_min: Option<f64>,
    pub s_max: Option<f64>,
    pub points: usize,
    pub mode: CoverMode,
    pub delta: f64,
}

impl Default for CoverBlock {
    fn default() -> Self {
        CoverBlock { n_min: 8, n_max: 16, s_min: None, s_max: None, points: 11, mode: CoverMode::Exact, delta: 0.1 }
    }
}

impl CoverBlock {
    pub fn mode(&self) -> EnumerationMode {
        match self.mode {
            CoverMode::Exact => EnumerationMode::Exact,
            CoverMode::Blocks => EnumerationMode::BlockBound { delta: self.delta },
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CantorBlock {
    pub first: u64,
    pub stages: usize,
    /// Explicit stage indices; the square rule is used when empty.
    pub indices: Vec<u64>,
    #[serde(rename = "M")]
    pub m: Option<u64>,
    pub tail_free: usize,
    pub samples: usize,
    /// Materialize the node list of this stage.
    pub nodes_stage: Option<usize>,
}

impl Default for CantorBlock {
    fn default() -> Self {
        CantorBlock {
            first: 6,
            stages: 2,
            indices: Vec::new(),
            m: None,
            tail_free: 8,
            samples: 1000,
            nodes_stage: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default)]
    pub seed: u64,
    pub system: Option<SystemBlock>,
    pub target: Option<TargetBlock>,
    #[serde(default)]
    pub pressure: PressureBlock,
    #[serde(default)]
    pub aofs: AofsBlock,
    #[serde(default)]
    pub dim: DimBlock,
    #[serde(default)]
    pub coverscan: CoverBlock,
    #[serde(default)]
    pub cantor: CantorBlock,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

impl Default for RunConfig {
    fn default() -> Self {
        toml::from_str("").expect("empty config is valid")
    }
}

/// A configuration problem; exits with status 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| ConfigError(format!("reading {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())).into())
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| e.to_string())?;
        // surface SystemSpec / TargetSpec constraint violations as config errors
        if let Some(s) = &cfg.system {
            build_system(s).map_err(|e| format!("[system] {e}"))?;
        }
        if let Some(t) = &cfg.target {
            build_target(t).map_err(|e| format!("[target] {e}"))?;
        }
        Ok(cfg)
    }

    pub fn system(&self) -> anyhow::Result<SystemSpec> {
        match &self.system {
            Some(s) => Ok(build_system(s)?),
            None => bail!(ConfigError("missing [system] section".into())),
        }
    }

    pub fn target(&self) -> anyhow::Result<TargetSpec> {
        match &self.target {
            Some(t) => Ok(build_target(t)?),
            None => bail!(ConfigError("missing [target] section".into())),
        }
    }

    pub fn cantor_spec(&self, base: CantorSpec) -> CantorSpec {
        let c = &self.cantor;
        let rule = if c.indices.is_empty() { SparseRule::Square } else { SparseRule::Explicit(c.indices.clone()) };
        CantorSpec { first: c.first, rule, stages: c.stages, m: c.m.unwrap_or(base.m), tail_free: c.tail_free, ..base }
    }
}

fn build_system(s: &SystemBlock) -> gaussdim::Result<SystemSpec> {
    if s.kind != SystemKind::Power && s.d.is_some_and(|d| d != 2.0) {
        return Err(gaussdim::Error::param("d", format!("{} systems have d = 2", s.kind)));
    }
    SystemSpec::new(s.kind, s.d, s.m)
}

fn build_target(t: &TargetBlock) -> gaussdim::Result<TargetSpec> {
    TargetSpec::new(t.positions.clone(), t.weights.clone(), t.base.value())
}

pub fn source(method: Method, level: usize, grid: usize) -> PressureSource {
    match method {
        Method::Partition => PressureSource::Partition { level },
        Method::Eigen => PressureSource::Eigen { grid },
        Method::Full => PressureSource::Full { grid },
    }
}
