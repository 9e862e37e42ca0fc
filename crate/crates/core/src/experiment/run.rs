use std::time::Instant;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clustering::{affinity, ari, kmeans, nmi, normalized_laplacian, row_normalize, sc_baseline, AffinityParams, KMeansConfig};
use crate::error::{Error, Result};
use crate::parametrization::{BasisMatrix, ParamPoint};
use crate::penalties::PenaltySpec;
use crate::solver::{self, SolverConfig, Termination};
use crate::ssc_model::{gram, SscProblem};
use crate::SscTrace64;

use super::config::{ExperimentConfig, GridPoint, Method};
use super::dataset::Dataset;

trait Staged<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> Staged<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| e.at_stage(stage))
    }
}

/// Mean and population standard deviation.
fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub nmi_mean: f64,
    pub nmi_std: f64,
    pub ari_mean: f64,
    pub ari_std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSummary {
    pub iterations: usize,
    pub termination: Termination,
    pub initial_grad_norm: f64,
    pub min_grad_norm: f64,
    pub final_grad_norm: f64,
    pub final_smoothed_value: f64,
    pub final_unsmoothed_value: f64,
    pub max_shrinks_used: usize,
    /// `‖UUᵀ − U0U0ᵀ‖_F` between the solver output and the warm start.
    pub subspace_shift: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KMeansSettings {
    pub restarts: usize,
    pub seed: u64,
    pub max_iters: usize,
}

/// Outcome of one clustering run with everything needed to reproduce it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringReport {
    pub dataset: String,
    pub provenance: String,
    pub dataset_seed: u64,
    pub n_points: usize,
    pub n_features: usize,
    pub k: usize,
    pub method: Method,
    pub params: GridPoint,
    pub penalty: Option<PenaltySpec<f64>>,
    pub affinity: AffinityParams,
    pub solver_config: Option<SolverConfig<f64>>,
    pub kmeans: KMeansSettings,
    pub metrics: MetricSummary,
    pub restart_nmi: Vec<f64>,
    pub restart_ari: Vec<f64>,
    /// Lowest-inertia k-means restart.
    pub best_restart: usize,
    pub best_labels: Vec<usize>,
    /// Smallest `k + 1` eigenvalues of the normalized Laplacian.
    pub spectrum_head: Vec<f64>,
    pub solver: Option<SolverSummary>,
    /// Rows of the embedding that were zero before row normalization.
    pub zero_rows: Vec<usize>,
    pub deviations: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_clock_secs: Option<f64>,
}

/// A report plus the solver trace for sparse methods.
#[derive(Debug, Clone)]
pub struct MethodRun {
    pub report: ClusteringReport,
    pub trace: Option<SscTrace64>,
    /// Final embedding `U` before row normalization.
    pub embedding: DMatrix<f64>,
}

/// Pieces shared by every grid point: the Laplacian and the SC warm start.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub laplacian: DMatrix<f64>,
    pub warm_start: DMatrix<f64>,
    pub spectrum: Vec<f64>,
}

pub fn prepare(cfg: &ExperimentConfig, data: &Dataset) -> Result<Prepared> {
    cfg.validate().stage("config")?;
    if cfg.k > data.len() {
        return Err(Error::Config(format!("k={} exceeds the {} data points", cfg.k, data.len())).at_stage("config"));
    }
    let w = affinity(&data.features, &cfg.affinity).stage("affinity")?;
    let laplacian = normalized_laplacian(&w).stage("laplacian")?;
    let (warm_start, spectrum) = sc_baseline(&laplacian, cfg.k).stage("eigensolver")?;
    Ok(Prepared {
        laplacian,
        warm_start,
        spectrum,
    })
}

fn deviations(cfg: &ExperimentConfig, data: &Dataset) -> Vec<String> {
    let mut out = vec![format!(
        "affinity built as {}; the original affinity recipe is not reproduced",
        cfg.affinity.describe()
    )];
    if cfg.method.is_sparse() {
        out.push("solver warm-started at the SC eigenvectors: S is their orthogonal completion and V starts at 0".into());
    }
    if matches!(cfg.method, Method::SscMcp | Method::SscScad) {
        out.push("penalty hyperparameters searched over the full (lambda, shape) Cartesian grid".into());
    }
    if cfg.dataset.subsample.is_some() {
        out.push(format!("dataset subsampled with seed {}: {}", cfg.dataset.seed, data.provenance));
    }
    out
}

/// Runs one method at one grid point on prepared data.
pub fn run_prepared(cfg: &ExperimentConfig, data: &Dataset, prep: &Prepared, point: GridPoint) -> Result<MethodRun> {
    let start = Instant::now();
    let (n, k) = (data.len(), cfg.k);
    let penalty = match point.lambda {
        Some(lambda) => cfg.method.penalty(lambda, point.shape, cfg.rho_floor).stage("config")?,
        None if cfg.method.is_sparse() => {
            return Err(Error::Config(format!("method {} needs a lambda", cfg.method)).at_stage("config"));
        }
        None => None,
    };

    let (embedding, trace, summary) = match penalty {
        None => (prep.warm_start.clone(), None, None),
        Some(p) => {
            let basis = BasisMatrix::select(n, Some(&prep.warm_start)).stage("basis selection")?;
            let problem = SscProblem::new(prep.laplacian.clone(), k, p, basis).stage("ssc model")?;
            let v0 = ParamPoint::zeros(n, k).stage("ssc model")?;
            let trace = solver::run(&problem, v0, &cfg.solver).stage("solver")?;
            let u = problem.subspace(&trace.final_point).stage("solver")?;
            let last_value = problem.unsmoothed_value(&trace.final_point).stage("solver")?;
            let records = &trace.records;
            let first = records.first().expect("nonempty trace");
            let last = records.last().expect("nonempty trace");
            let summary = SolverSummary {
                iterations: records.len(),
                termination: trace.termination,
                initial_grad_norm: first.grad_norm,
                min_grad_norm: trace.min_grad_norm().expect("nonempty trace"),
                final_grad_norm: last.grad_norm,
                final_smoothed_value: last.trial_value,
                final_unsmoothed_value: last_value,
                max_shrinks_used: records.iter().map(|r| r.shrinks).max().unwrap_or(0),
                subspace_shift: (gram(&u) - gram(&prep.warm_start)).norm(),
            };
            (u, Some(trace), Some(summary))
        }
    };

    let (points, zero_rows) = row_normalize(&embedding);
    let km_cfg = KMeansConfig {
        k,
        restarts: cfg.kmeans_restarts,
        seed: cfg.kmeans_seed,
        max_iters: cfg.kmeans_max_iters,
    };
    let km = kmeans(&points, &km_cfg).stage("kmeans")?;
    let mut restart_nmi = Vec::with_capacity(km.runs.len());
    let mut restart_ari = Vec::with_capacity(km.runs.len());
    for run in &km.runs {
        restart_nmi.push(nmi(&run.labels, &data.labels).stage("metrics")?);
        restart_ari.push(ari(&run.labels, &data.labels).stage("metrics")?);
    }
    let (nmi_mean, nmi_std) = mean_std(&restart_nmi);
    let (ari_mean, ari_std) = mean_std(&restart_ari);

    let report = ClusteringReport {
        dataset: cfg.dataset.name(),
        provenance: data.provenance.clone(),
        dataset_seed: cfg.dataset.seed,
        n_points: n,
        n_features: data.dim(),
        k,
        method: cfg.method,
        params: point,
        penalty,
        affinity: cfg.affinity,
        solver_config: cfg.method.is_sparse().then_some(cfg.solver),
        kmeans: KMeansSettings {
            restarts: cfg.kmeans_restarts,
            seed: cfg.kmeans_seed,
            max_iters: cfg.kmeans_max_iters,
        },
        metrics: MetricSummary {
            nmi_mean,
            nmi_std,
            ari_mean,
            ari_std,
        },
        restart_nmi,
        restart_ari,
        best_restart: km.best,
        best_labels: km.best_labels().to_vec(),
        spectrum_head: prep.spectrum.iter().take(k + 1).copied().collect(),
        solver: summary,
        zero_rows,
        deviations: deviations(cfg, data),
        wall_clock_secs: Some(start.elapsed().as_secs_f64()),
    };
    Ok(MethodRun {
        report,
        trace,
        embedding,
    })
}

/// Full pipeline for one grid point.
pub fn run_method(cfg: &ExperimentConfig, data: &Dataset, point: GridPoint) -> Result<MethodRun> {
    let prep = prepare(cfg, data)?;
    run_prepared(cfg, data, &prep, point)
}

/// One line of the grid table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub index: usize,
    pub lambda: Option<f64>,
    pub shape: Option<f64>,
    pub metrics: Option<MetricSummary>,
    pub iterations: Option<usize>,
    pub min_grad_norm: Option<f64>,
    pub final_grad_norm: Option<f64>,
    pub error: Option<String>,
    pub best: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub dataset: String,
    pub method: Method,
    pub shape_name: Option<String>,
    pub rows: Vec<GridRow>,
    pub best_index: usize,
    pub best: ClusteringReport,
}

#[derive(Debug, Clone)]
pub struct GridOutcome {
    pub report: GridReport,
    pub best_run: MethodRun,
}

/// `true` if `a` beats `b`: higher mean NMI, then higher mean ARI, then smaller λ.
fn better(a: &MethodRun, b: &MethodRun) -> bool {
    let (ma, mb) = (&a.report.metrics, &b.report.metrics);
    if ma.nmi_mean != mb.nmi_mean {
        return ma.nmi_mean > mb.nmi_mean;
    }
    if ma.ari_mean != mb.ari_mean {
        return ma.ari_mean > mb.ari_mean;
    }
    let la = a.report.params.lambda.unwrap_or(0.0);
    let lb = b.report.params.lambda.unwrap_or(0.0);
    la < lb
}

/// Runs every grid point concurrently and picks the best by mean NMI.
/// Failing points are recorded in the table and skipped.
pub fn grid_search(cfg: &ExperimentConfig, data: &Dataset) -> Result<GridOutcome> {
    let prep = prepare(cfg, data)?;
    let points = cfg.grid_points();
    let results: Vec<Result<MethodRun>> = points
        .par_iter()
        .map(|&p| run_prepared(cfg, data, &prep, p))
        .collect();

    let mut best: Option<usize> = None;
    for (i, r) in results.iter().enumerate() {
        if let Ok(run) = r {
            let replace = match best {
                None => true,
                Some(b) => better(run, results[b].as_ref().expect("best is ok")),
            };
            if replace {
                best = Some(i);
            }
        }
    }
    let best_index = best.ok_or_else(|| {
        let first = results
            .iter()
            .find_map(|r| r.as_ref().err())
            .map(|e| e.to_string())
            .unwrap_or_default();
        Error::Config(format!("every grid point failed; first error: {first}")).at_stage("grid search")
    })?;

    let rows = points
        .iter()
        .zip(&results)
        .enumerate()
        .map(|(index, (p, r))| match r {
            Ok(run) => GridRow {
                index,
                lambda: p.lambda,
                shape: p.shape,
                metrics: Some(run.report.metrics),
                iterations: run.report.solver.as_ref().map(|s| s.iterations),
                min_grad_norm: run.report.solver.as_ref().map(|s| s.min_grad_norm),
                final_grad_norm: run.report.solver.as_ref().map(|s| s.final_grad_norm),
                error: None,
                best: index == best_index,
            },
            Err(e) => GridRow {
                index,
                lambda: p.lambda,
                shape: p.shape,
                metrics: None,
                iterations: None,
                min_grad_norm: None,
                final_grad_norm: None,
                error: Some(e.to_string()),
                best: false,
            },
        })
        .collect();

    let best_run = results
        .into_iter()
        .nth(best_index)
        .expect("index in range")
        .expect("best is ok");
    Ok(GridOutcome {
        report: GridReport {
            dataset: cfg.dataset.name(),
            method: cfg.method,
            shape_name: cfg.method.shape_name().map(String::from),
            rows,
            best_index,
            best: best_run.report.clone(),
        },
        best_run,
    })
}
