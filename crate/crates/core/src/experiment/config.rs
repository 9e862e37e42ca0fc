//! Flat `key = value` experiment configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Lists are
//! comma-separated. Recognized keys:
//!
//! | key | default |
//! |-----|---------|
//! | `dataset.source` | `csv` (`csv` or `blobs`) |
//! | `dataset.path` | required for `csv`, relative to the config file |
//! | `dataset.label_column` | `label` |
//! | `dataset.subsample` | none (all rows) |
//! | `dataset.seed` | `42` |
//! | `dataset.blobs.per_cluster` / `.clusters` / `.separation` / `.dim` | `30` / `3` / `10` / `2` |
//! | `k` | required |
//! | `affinity.method` | `local_scaling` (`local_scaling` or `fixed`) |
//! | `affinity.neighbor_index` | `7` |
//! | `affinity.sigma` | `1` |
//! | `affinity.self_loops` | `false` |
//! | `method` | `sc` (`sc`, `ssc_l1`, `ssc_mcp`, `ssc_scad`) |
//! | `penalty.lambda` | `1, 1e-1, …, 1e-6` |
//! | `penalty.beta` | `1, 1e-1, …, 1e-6` (MCP shape grid) |
//! | `penalty.a` | `3.7` (SCAD shape grid) |
//! | `penalty.rho_floor` | `1` |
//! | `solver.tau`, `.c`, `.kappa`, `.alpha`, `.epsilon_step`, `.gamma_first`, `.max_iters`, `.max_shrinks`, `.grad_tol` | solver defaults |
//! | `kmeans.restarts` | `100` |
//! | `kmeans.seed` | `0` |
//! | `kmeans.max_iters` | `300` |
//! | `output.report` / `output.trace` / `output.grid` | none |

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::clustering::{AffinityMethod, AffinityParams, DEFAULT_MAX_ITERS, DEFAULT_NEIGHBOR_INDEX};
use crate::error::{Error, Result};
use crate::penalties::{PenaltyKind, PenaltySpec, DEFAULT_RHO_FLOOR, SCAD_DEFAULT_A};
use crate::solver::SolverConfig;

use super::dataset::{gaussian_blobs, load_csv, Dataset};

pub const DEFAULT_DATASET_SEED: u64 = 42;
pub const DEFAULT_KMEANS_RESTARTS: usize = 100;

/// `{10^{-i} | i = 0, …, 6}`.
pub fn decade_grid() -> Vec<f64> {
    (0..=6).map(|i| 10f64.powi(-i)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Sc,
    SscL1,
    SscMcp,
    SscScad,
}

impl Method {
    pub fn key(self) -> &'static str {
        match self {
            Method::Sc => "sc",
            Method::SscL1 => "ssc_l1",
            Method::SscMcp => "ssc_mcp",
            Method::SscScad => "ssc_scad",
        }
    }

    /// Row label in rendered tables.
    pub fn display_name(self) -> &'static str {
        match self {
            Method::Sc => "SC",
            Method::SscL1 => "SSC(l1+Gr)",
            Method::SscMcp => "SSC(MCP+Gr)",
            Method::SscScad => "SSC(SCAD+Gr)",
        }
    }

    pub fn is_sparse(self) -> bool {
        self != Method::Sc
    }

    /// Name of the penalty shape parameter, if any.
    pub fn shape_name(self) -> Option<&'static str> {
        match self {
            Method::SscMcp => Some("beta"),
            Method::SscScad => Some("a"),
            _ => None,
        }
    }

    /// Penalty for one grid point; `shape` is β for MCP and `a` for SCAD.
    pub fn penalty(self, lambda: f64, shape: Option<f64>, rho_floor: f64) -> Result<Option<PenaltySpec<f64>>> {
        let need_shape = || {
            shape.ok_or_else(|| Error::Config(format!("method {} needs a shape parameter", self.key())))
        };
        let kind = match self {
            Method::Sc => return Ok(None),
            Method::SscL1 => PenaltyKind::L1,
            Method::SscMcp => PenaltyKind::Mcp { beta: need_shape()? },
            Method::SscScad => PenaltyKind::Scad { a: need_shape()? },
        };
        Ok(Some(PenaltySpec::new(kind, lambda)?.with_rho_floor(rho_floor)?))
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sc" => Ok(Method::Sc),
            "ssc_l1" => Ok(Method::SscL1),
            "ssc_mcp" => Ok(Method::SscMcp),
            "ssc_scad" => Ok(Method::SscScad),
            other => Err(Error::Config(format!(
                "unknown method '{other}' (expected sc, ssc_l1, ssc_mcp or ssc_scad)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum DataSource {
    Csv { path: PathBuf, label_column: String },
    Blobs { per_cluster: usize, clusters: usize, separation: f64, dim: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    #[serde(flatten)]
    pub source: DataSource,
    pub subsample: Option<usize>,
    pub seed: u64,
}

impl DatasetSpec {
    pub fn load(&self) -> Result<Dataset> {
        match &self.source {
            DataSource::Csv { path, label_column } => load_csv(path, label_column, self.subsample, self.seed),
            DataSource::Blobs {
                per_cluster,
                clusters,
                separation,
                dim,
            } => {
                if self.subsample.is_some() {
                    return Err(Error::Config("subsampling applies to csv datasets only".into()));
                }
                gaussian_blobs(*per_cluster, *clusters, *separation, *dim, self.seed)
            }
        }
    }

    /// Short dataset name: the file stem or `blobs`.
    pub fn name(&self) -> String {
        match &self.source {
            DataSource::Csv { path, .. } => path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string()),
            DataSource::Blobs { .. } => "blobs".into(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OutputPaths {
    pub report: Option<PathBuf>,
    pub trace: Option<PathBuf>,
    pub grid: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dataset: DatasetSpec,
    pub k: usize,
    pub affinity: AffinityParams,
    pub method: Method,
    pub lambda_grid: Vec<f64>,
    /// β grid for MCP, `a` grid for SCAD; unused otherwise.
    pub shape_grid: Vec<f64>,
    pub rho_floor: f64,
    pub solver: SolverConfig<f64>,
    pub kmeans_restarts: usize,
    pub kmeans_seed: u64,
    pub kmeans_max_iters: usize,
    #[serde(skip)]
    pub output: OutputPaths,
}

/// Mutable builder state while reading key/value pairs.
#[derive(Debug, Clone)]
struct Draft {
    base_dir: PathBuf,
    source: String,
    path: Option<PathBuf>,
    label_column: String,
    subsample: Option<usize>,
    seed: u64,
    per_cluster: usize,
    clusters: usize,
    separation: f64,
    dim: usize,
    k: Option<usize>,
    affinity_method: String,
    neighbor_index: usize,
    sigma: f64,
    self_loops: bool,
    method: Method,
    lambda_grid: Vec<f64>,
    beta_grid: Vec<f64>,
    a_grid: Vec<f64>,
    rho_floor: f64,
    solver: SolverConfig<f64>,
    kmeans_restarts: usize,
    kmeans_seed: u64,
    kmeans_max_iters: usize,
    output: OutputPaths,
}

impl Draft {
    fn new(base_dir: PathBuf) -> Self {
        Self {
            base_dir,
            source: "csv".into(),
            path: None,
            label_column: "label".into(),
            subsample: None,
            seed: DEFAULT_DATASET_SEED,
            per_cluster: 30,
            clusters: 3,
            separation: 10.0,
            dim: 2,
            k: None,
            affinity_method: "local_scaling".into(),
            neighbor_index: DEFAULT_NEIGHBOR_INDEX,
            sigma: 1.0,
            self_loops: false,
            method: Method::Sc,
            lambda_grid: decade_grid(),
            beta_grid: decade_grid(),
            a_grid: vec![SCAD_DEFAULT_A],
            rho_floor: DEFAULT_RHO_FLOOR,
            solver: SolverConfig::default(),
            kmeans_restarts: DEFAULT_KMEANS_RESTARTS,
            kmeans_seed: 0,
            kmeans_max_iters: DEFAULT_MAX_ITERS,
            output: OutputPaths::default(),
        }
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "dataset.source" => self.source = value.to_string(),
            "dataset.path" => self.path = Some(self.base_dir.join(value)),
            "dataset.label_column" => self.label_column = value.to_string(),
            "dataset.subsample" => {
                self.subsample = match value {
                    "" | "none" => None,
                    v => Some(parse(key, v)?),
                }
            }
            "dataset.seed" => self.seed = parse(key, value)?,
            "dataset.blobs.per_cluster" => self.per_cluster = parse(key, value)?,
            "dataset.blobs.clusters" => self.clusters = parse(key, value)?,
            "dataset.blobs.separation" => self.separation = parse(key, value)?,
            "dataset.blobs.dim" => self.dim = parse(key, value)?,
            "k" => self.k = Some(parse(key, value)?),
            "affinity.method" => self.affinity_method = value.to_string(),
            "affinity.neighbor_index" => self.neighbor_index = parse(key, value)?,
            "affinity.sigma" => self.sigma = parse(key, value)?,
            "affinity.self_loops" => self.self_loops = parse(key, value)?,
            "method" => self.method = value.parse()?,
            "penalty.lambda" => self.lambda_grid = parse_list(key, value)?,
            "penalty.beta" => self.beta_grid = parse_list(key, value)?,
            "penalty.a" => self.a_grid = parse_list(key, value)?,
            "penalty.rho_floor" => self.rho_floor = parse(key, value)?,
            "solver.tau" => self.solver.tau = parse(key, value)?,
            "solver.c" => self.solver.c = parse(key, value)?,
            "solver.kappa" => self.solver.kappa = parse(key, value)?,
            "solver.alpha" => self.solver.alpha = parse(key, value)?,
            "solver.epsilon_step" => self.solver.epsilon_step = parse(key, value)?,
            "solver.gamma_first" => self.solver.gamma_first = parse(key, value)?,
            "solver.max_iters" => self.solver.max_iters = parse(key, value)?,
            "solver.max_shrinks" => self.solver.max_shrinks = parse(key, value)?,
            "solver.grad_tol" => self.solver.grad_tol = parse(key, value)?,
            "kmeans.restarts" => self.kmeans_restarts = parse(key, value)?,
            "kmeans.seed" => self.kmeans_seed = parse(key, value)?,
            "kmeans.max_iters" => self.kmeans_max_iters = parse(key, value)?,
            "output.report" => self.output.report = Some(PathBuf::from(value)),
            "output.trace" => self.output.trace = Some(PathBuf::from(value)),
            "output.grid" => self.output.grid = Some(PathBuf::from(value)),
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    fn finish(self) -> Result<ExperimentConfig> {
        let source = match self.source.as_str() {
            "csv" => DataSource::Csv {
                path: self
                    .path
                    .ok_or_else(|| Error::Config("dataset.path is required for csv datasets".into()))?,
                label_column: self.label_column,
            },
            "blobs" => DataSource::Blobs {
                per_cluster: self.per_cluster,
                clusters: self.clusters,
                separation: self.separation,
                dim: self.dim,
            },
            other => return Err(Error::Config(format!("unknown dataset.source '{other}' (expected csv or blobs)"))),
        };
        let method = match self.affinity_method.as_str() {
            "local_scaling" => AffinityMethod::GaussianLocalScaling {
                neighbor_index: self.neighbor_index,
            },
            "fixed" => AffinityMethod::GaussianFixed { sigma: self.sigma },
            other => {
                return Err(Error::Config(format!(
                    "unknown affinity.method '{other}' (expected local_scaling or fixed)"
                )))
            }
        };
        let shape_grid = match self.method {
            Method::SscMcp => self.beta_grid,
            Method::SscScad => self.a_grid,
            _ => Vec::new(),
        };
        let cfg = ExperimentConfig {
            dataset: DatasetSpec {
                source,
                subsample: self.subsample,
                seed: self.seed,
            },
            k: self.k.ok_or_else(|| Error::Config("k is required".into()))?,
            affinity: AffinityParams {
                method,
                self_loops: self.self_loops,
            },
            method: self.method,
            lambda_grid: self.lambda_grid,
            shape_grid,
            rho_floor: self.rho_floor,
            solver: self.solver,
            kmeans_restarts: self.kmeans_restarts,
            kmeans_seed: self.kmeans_seed,
            kmeans_max_iters: self.kmeans_max_iters,
            output: self.output,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("cannot parse '{value}' for key '{key}'")))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

fn split_pair(line: &str) -> Result<(&str, &str)> {
    line.split_once('=')
        .map(|(k, v)| (k.trim(), v.trim()))
        .ok_or_else(|| Error::Config(format!("expected key=value, got '{line}'")))
}

impl ExperimentConfig {
    /// Parses config text, then applies `overrides` (`key=value` strings).
    /// Relative dataset paths resolve against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path, overrides: &[String]) -> Result<Self> {
        let mut draft = Draft::new(base_dir.to_path_buf());
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = split_pair(line).map_err(|e| Error::Config(format!("line {}: {e}", i + 1)))?;
            draft.set(k, v).map_err(|e| Error::Config(format!("line {}: {e}", i + 1)))?;
        }
        // overrides resolve dataset paths against the working directory
        draft.base_dir = PathBuf::new();
        for o in overrides {
            let (k, v) = split_pair(o)?;
            draft.set(k, v)?;
        }
        draft.finish()
    }

    pub fn from_file(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("")).to_path_buf();
        Self::parse(&text, &base, overrides)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::Config(format!("k must be at least 2, got {}", self.k)));
        }
        self.affinity.validate()?;
        self.solver.validate()?;
        if self.kmeans_restarts == 0 || self.kmeans_max_iters == 0 {
            return Err(Error::Config("kmeans.restarts and kmeans.max_iters must be positive".into()));
        }
        if !(self.rho_floor > 0.0) || !self.rho_floor.is_finite() {
            return Err(Error::Config("penalty.rho_floor must be positive".into()));
        }
        if self.method.is_sparse() {
            if self.lambda_grid.is_empty() {
                return Err(Error::Config("penalty.lambda grid is empty".into()));
            }
            if self.method.shape_name().is_some() && self.shape_grid.is_empty() {
                return Err(Error::Config("penalty shape grid is empty".into()));
            }
            for &l in &self.lambda_grid {
                if !(l >= 0.0) || !l.is_finite() {
                    return Err(Error::Config(format!("penalty.lambda entries must be finite and >= 0, got {l}")));
                }
            }
        }
        Ok(())
    }

    /// Grid points in deterministic order: λ outer, shape inner.
    pub fn grid_points(&self) -> Vec<GridPoint> {
        if !self.method.is_sparse() {
            return vec![GridPoint { lambda: None, shape: None }];
        }
        let mut out = Vec::new();
        for &lambda in &self.lambda_grid {
            if self.method.shape_name().is_some() {
                for &shape in &self.shape_grid {
                    out.push(GridPoint {
                        lambda: Some(lambda),
                        shape: Some(shape),
                    });
                }
            } else {
                out.push(GridPoint {
                    lambda: Some(lambda),
                    shape: None,
                });
            }
        }
        out
    }
}

/// Hyperparameters of one run; both `None` for plain SC.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub lambda: Option<f64>,
    pub shape: Option<f64>,
}
