use std::collections::HashMap;
use std::path::Path;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// Labelled point cloud, one point per feature row.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: DMatrix<f64>,
    pub labels: Vec<usize>,
    /// Original label strings, indexed by class id.
    pub label_names: Vec<String>,
    pub provenance: String,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn n_classes(&self) -> usize {
        self.label_names.len()
    }

    fn validate(&self) -> Result<()> {
        if self.labels.is_empty() {
            return Err(Error::Dataset("dataset has no rows".into()));
        }
        if let Some(pos) = self.features.iter().position(|x| !x.is_finite()) {
            let n = self.features.nrows();
            return Err(Error::Dataset(format!(
                "non-finite feature at row {}, column {}",
                pos % n + 1,
                pos / n + 1
            )));
        }
        Ok(())
    }
}

fn class_ids(raw: &[String]) -> (Vec<usize>, Vec<String>) {
    let mut ids = HashMap::new();
    let mut names = Vec::new();
    let labels = raw
        .iter()
        .map(|s| {
            *ids.entry(s.clone()).or_insert_with(|| {
                names.push(s.clone());
                names.len() - 1
            })
        })
        .collect();
    (labels, names)
}

/// Reads a CSV with a header row, numeric feature columns and one label
/// column; optionally keeps a seeded uniform subsample (in file order).
pub fn load_csv(path: &Path, label_column: &str, subsample: Option<usize>, seed: u64) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Dataset(format!("cannot open {}: {e}", path.display())))?;
    let headers = reader.headers()?.clone();
    let label_idx = headers
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| Error::Dataset(format!("label column '{label_column}' not found in {}", path.display())))?;
    let feature_cols: Vec<usize> = (0..headers.len()).filter(|&i| i != label_idx).collect();
    if feature_cols.is_empty() {
        return Err(Error::Dataset("no feature columns".into()));
    }

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut raw_labels = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record?;
        let line = r + 2;
        let mut row = Vec::with_capacity(feature_cols.len());
        for &c in &feature_cols {
            let cell = record.get(c).unwrap_or("");
            let x: f64 = cell.parse().map_err(|_| {
                Error::Dataset(format!(
                    "non-numeric feature '{cell}' at line {line}, column '{}'",
                    &headers[c]
                ))
            })?;
            row.push(x);
        }
        rows.push(row);
        raw_labels.push(record.get(label_idx).unwrap_or("").to_string());
    }

    let n = rows.len();
    let keep: Vec<usize> = match subsample {
        Some(m) if m > n => {
            return Err(Error::Dataset(format!("subsample size {m} exceeds {n} rows")));
        }
        Some(m) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut idx = rand::seq::index::sample(&mut rng, n, m).into_vec();
            idx.sort_unstable();
            idx
        }
        None => (0..n).collect(),
    };
    let d = feature_cols.len();
    let features = DMatrix::from_fn(keep.len(), d, |i, j| rows[keep[i]][j]);
    let kept_labels: Vec<String> = keep.iter().map(|&i| raw_labels[i].clone()).collect();
    let (labels, label_names) = class_ids(&kept_labels);
    let provenance = match subsample {
        Some(m) => format!("{} ({m} of {n} rows, seed {seed})", path.display()),
        None => path.display().to_string(),
    };
    let ds = Dataset {
        features,
        labels,
        label_names,
        provenance,
    };
    ds.validate()?;
    Ok(ds)
}

/// Isotropic Gaussian blobs with unit standard deviation whose centers sit on
/// a regular polygon with side `separation` (2-D, extra dimensions zero-mean).
pub fn gaussian_blobs(per_cluster: usize, clusters: usize, separation: f64, dim: usize, seed: u64) -> Result<Dataset> {
    if per_cluster == 0 || clusters == 0 || dim < 2 {
        return Err(Error::Dataset("blobs need per_cluster >= 1, clusters >= 1, dim >= 2".into()));
    }
    let radius = if clusters > 1 {
        separation / (2.0 * (std::f64::consts::PI / clusters as f64).sin())
    } else {
        0.0
    };
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = per_cluster * clusters;
    let mut features = DMatrix::zeros(n, dim);
    let mut labels = Vec::with_capacity(n);
    for c in 0..clusters {
        let angle = 2.0 * std::f64::consts::PI * c as f64 / clusters as f64;
        let center = [radius * angle.cos(), radius * angle.sin()];
        for p in 0..per_cluster {
            let row = c * per_cluster + p;
            for j in 0..dim {
                let offset = if j < 2 { center[j] } else { 0.0 };
                features[(row, j)] = offset + normal.sample(&mut rng);
            }
            labels.push(c);
        }
    }
    Ok(Dataset {
        features,
        labels,
        label_names: (0..clusters).map(|c| c.to_string()).collect(),
        provenance: format!("gaussian blobs ({clusters}x{per_cluster}, separation {separation}, dim {dim}, seed {seed})"),
    })
}
