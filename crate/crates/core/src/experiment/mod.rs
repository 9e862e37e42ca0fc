//! Experiment harness: datasets, configuration, single runs, grid search and
//! report rendering.

mod config;
mod dataset;
mod report;
mod run;

pub use config::{
    decade_grid, DataSource, DatasetSpec, ExperimentConfig, GridPoint, Method, OutputPaths, DEFAULT_DATASET_SEED,
    DEFAULT_KMEANS_RESTARTS,
};
pub use dataset::{gaussian_blobs, load_csv, Dataset};
pub use report::{
    cell, emit, emit_report, render_grid, render_grid_text, render_report, render_report_text, render_table, to_json,
    write_grid_csv, write_reports_csv, Format,
};
pub use run::{
    grid_search, prepare, run_method, run_prepared, ClusteringReport, GridOutcome, GridReport, GridRow, KMeansSettings,
    MethodRun, MetricSummary, Prepared, SolverSummary,
};
