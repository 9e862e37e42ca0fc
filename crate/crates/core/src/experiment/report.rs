use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

use super::run::{ClusteringReport, GridReport, MetricSummary};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
    Csv,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "text" => Ok(Format::Text),
            "csv" => Ok(Format::Csv),
            other => Err(Error::Config(format!("unknown format '{other}' (expected json, text or csv)"))),
        }
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// `"0.732 (0.000)"`.
pub fn cell(mean: f64, std: f64) -> String {
    format!("{mean:.3} ({std:.3})")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:e}")).unwrap_or_else(|| "-".into())
}

/// Method × dataset table of NMI and ARI cells, one row per method in order
/// of first appearance.
pub fn render_table(reports: &[&ClusteringReport]) -> String {
    let mut datasets: Vec<&str> = Vec::new();
    let mut methods = Vec::new();
    for r in reports {
        if !datasets.contains(&r.dataset.as_str()) {
            datasets.push(&r.dataset);
        }
        if !methods.contains(&r.method) {
            methods.push(r.method);
        }
    }
    let cell_w = 13;
    let name_w = methods
        .iter()
        .map(|m| m.display_name().len())
        .max()
        .unwrap_or(0)
        .max("method".len());

    let mut out = String::new();
    let _ = write!(out, "{:name_w$}", "");
    for d in &datasets {
        let _ = write!(out, " | {:^w$}", d, w = 2 * cell_w + 1);
    }
    out.push('\n');
    let _ = write!(out, "{:name_w$}", "method");
    for _ in &datasets {
        let _ = write!(out, " | {:^cell_w$} {:^cell_w$}", "NMI", "ARI");
    }
    out.push('\n');
    out.push_str(&"-".repeat(name_w + datasets.len() * (2 * cell_w + 4)));
    out.push('\n');
    for m in &methods {
        let _ = write!(out, "{:name_w$}", m.display_name());
        for d in &datasets {
            match reports.iter().find(|r| r.method == *m && r.dataset == *d) {
                Some(r) => {
                    let MetricSummary {
                        nmi_mean,
                        nmi_std,
                        ari_mean,
                        ari_std,
                    } = r.metrics;
                    let _ = write!(out, " | {:cell_w$} {:cell_w$}", cell(nmi_mean, nmi_std), cell(ari_mean, ari_std));
                }
                None => {
                    let _ = write!(out, " | {:^cell_w$} {:^cell_w$}", "-", "-");
                }
            }
        }
        out.push('\n');
    }
    out
}

/// Human-readable summary of one run.
pub fn render_report_text(r: &ClusteringReport) -> String {
    let mut out = render_table(&[r]);
    let _ = writeln!(out);
    let _ = writeln!(out, "dataset      {} ({} points, {} features, k={})", r.provenance, r.n_points, r.n_features, r.k);
    if let Some(lambda) = r.params.lambda {
        let _ = write!(out, "penalty      lambda={lambda:e}");
        if let (Some(shape), Some(name)) = (r.params.shape, r.method.shape_name()) {
            let _ = write!(out, " {name}={shape:e}");
        }
        out.push('\n');
    }
    let _ = writeln!(out, "affinity     {}", r.affinity.describe());
    let _ = writeln!(
        out,
        "k-means      {} restarts, seed {}, best restart {}",
        r.kmeans.restarts, r.kmeans.seed, r.best_restart
    );
    if let Some(s) = &r.solver {
        let _ = writeln!(
            out,
            "solver       {} iterations, grad norm {:.3e} -> {:.3e} (min {:.3e}), subspace shift {:.3e}",
            s.iterations, s.initial_grad_norm, s.final_grad_norm, s.min_grad_norm, s.subspace_shift
        );
    }
    if !r.zero_rows.is_empty() {
        let _ = writeln!(out, "zero rows    {:?}", r.zero_rows);
    }
    if let Some(t) = r.wall_clock_secs {
        let _ = writeln!(out, "wall clock   {t:.2} s");
    }
    for d in &r.deviations {
        let _ = writeln!(out, "deviation    {d}");
    }
    out
}

pub fn render_grid_text(g: &GridReport) -> String {
    let shape = g.shape_name.as_deref().unwrap_or("shape");
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>5} {:>10} {:>10} {:>13} {:>13} {:>10} {:>10}  status",
        "index", "lambda", shape, "NMI", "ARI", "min|grad|", "iters"
    );
    for row in &g.rows {
        let (nmi, ari) = match row.metrics {
            Some(m) => (cell(m.nmi_mean, m.nmi_std), cell(m.ari_mean, m.ari_std)),
            None => ("-".into(), "-".into()),
        };
        let status = match &row.error {
            Some(e) => format!("failed: {e}"),
            None if row.best => "best".into(),
            None => "ok".into(),
        };
        let _ = writeln!(
            out,
            "{:>5} {:>10} {:>10} {:>13} {:>13} {:>10} {:>10}  {}",
            row.index,
            fmt_opt(row.lambda),
            fmt_opt(row.shape),
            nmi,
            ari,
            row.min_grad_norm.map(|x| format!("{x:.3e}")).unwrap_or_else(|| "-".into()),
            row.iterations.map(|x| x.to_string()).unwrap_or_else(|| "-".into()),
            status
        );
    }
    out.push('\n');
    out.push_str(&render_report_text(&g.best));
    out
}

fn opt_field<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// One CSV row per report.
pub fn write_reports_csv<W: Write>(reports: &[&ClusteringReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "dataset", "method", "lambda", "shape", "nmi_mean", "nmi_std", "ari_mean", "ari_std", "iterations",
    ])?;
    for r in reports {
        w.write_record([
            r.dataset.clone(),
            r.method.key().to_string(),
            opt_field(r.params.lambda),
            opt_field(r.params.shape),
            r.metrics.nmi_mean.to_string(),
            r.metrics.nmi_std.to_string(),
            r.metrics.ari_mean.to_string(),
            r.metrics.ari_std.to_string(),
            opt_field(r.solver.as_ref().map(|s| s.iterations)),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// The full grid table as CSV.
pub fn write_grid_csv<W: Write>(g: &GridReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "index",
        "lambda",
        "shape",
        "nmi_mean",
        "nmi_std",
        "ari_mean",
        "ari_std",
        "iterations",
        "min_grad_norm",
        "final_grad_norm",
        "best",
        "error",
    ])?;
    for row in &g.rows {
        let m = row.metrics;
        w.write_record([
            row.index.to_string(),
            opt_field(row.lambda),
            opt_field(row.shape),
            opt_field(m.map(|m| m.nmi_mean)),
            opt_field(m.map(|m| m.nmi_std)),
            opt_field(m.map(|m| m.ari_mean)),
            opt_field(m.map(|m| m.ari_std)),
            opt_field(row.iterations),
            opt_field(row.min_grad_norm),
            opt_field(row.final_grad_norm),
            row.best.to_string(),
            row.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Renders a single-run report in `format`.
pub fn render_report(report: &ClusteringReport, format: Format) -> Result<String> {
    match format {
        Format::Json => to_json(report),
        Format::Text => Ok(render_report_text(report)),
        Format::Csv => {
            let mut buf = Vec::new();
            write_reports_csv(&[report], &mut buf)?;
            Ok(String::from_utf8(buf).expect("csv output is utf-8"))
        }
    }
}

/// Renders a grid report in `format`; CSV gives the per-point table.
pub fn render_grid(report: &GridReport, format: Format) -> Result<String> {
    match format {
        Format::Json => to_json(report),
        Format::Text => Ok(render_grid_text(report)),
        Format::Csv => {
            let mut buf = Vec::new();
            write_grid_csv(report, &mut buf)?;
            Ok(String::from_utf8(buf).expect("csv output is utf-8"))
        }
    }
}

/// Writes `rendered` to `path`, or to stdout when `path` is `None`.
pub fn emit(rendered: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(p, rendered)?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(rendered.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

/// Renders and writes a single-run report.
pub fn emit_report(report: &ClusteringReport, format: Format, path: Option<&Path>) -> Result<()> {
    emit(&render_report(report, format)?, path)
}
