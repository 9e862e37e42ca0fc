use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Default neighbor rank for local scaling.
pub const DEFAULT_NEIGHBOR_INDEX: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum AffinityMethod {
    /// `W_ij = exp(−‖ξᵢ − ξⱼ‖² / (σᵢσⱼ))`, `σᵢ` the distance to the
    /// `neighbor_index`-th nearest neighbor of `ξᵢ`.
    GaussianLocalScaling { neighbor_index: usize },
    /// `W_ij = exp(−‖ξᵢ − ξⱼ‖² / σ²)`.
    GaussianFixed { sigma: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffinityParams {
    #[serde(flatten)]
    pub method: AffinityMethod,
    pub self_loops: bool,
}

impl Default for AffinityParams {
    fn default() -> Self {
        Self {
            method: AffinityMethod::GaussianLocalScaling {
                neighbor_index: DEFAULT_NEIGHBOR_INDEX,
            },
            self_loops: false,
        }
    }
}

impl AffinityParams {
    pub fn validate(&self) -> Result<()> {
        match self.method {
            AffinityMethod::GaussianLocalScaling { neighbor_index } if neighbor_index == 0 => {
                Err(Error::Affinity("neighbor_index must be at least 1".into()))
            }
            AffinityMethod::GaussianFixed { sigma } if !(sigma > 0.0) || !sigma.is_finite() => {
                Err(Error::Affinity(format!("sigma must be positive, got {sigma}")))
            }
            _ => Ok(()),
        }
    }

    pub fn describe(&self) -> String {
        let base = match self.method {
            AffinityMethod::GaussianLocalScaling { neighbor_index } => {
                format!("gaussian kernel, local scaling (neighbor {neighbor_index})")
            }
            AffinityMethod::GaussianFixed { sigma } => format!("gaussian kernel, fixed sigma={sigma}"),
        };
        if self.self_loops {
            base + ", self loops"
        } else {
            base
        }
    }
}

fn squared_distances<T: Scalar>(data: &DMatrix<T>) -> DMatrix<T> {
    let n = data.nrows();
    let mut d2 = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let d = (data.row(i) - data.row(j)).norm_squared();
            d2[(i, j)] = d;
            d2[(j, i)] = d;
        }
    }
    d2
}

/// Affinity matrix of the rows of `data` (one point per row).
pub fn affinity<T: Scalar>(data: &DMatrix<T>, params: &AffinityParams) -> Result<DMatrix<T>> {
    params.validate()?;
    let n = data.nrows();
    if n < 2 {
        return Err(Error::Affinity(format!("need at least 2 points, got {n}")));
    }
    if let Some(idx) = data.iter().position(|x| !x.is_finite()) {
        return Err(Error::Affinity(format!("non-finite coordinate in point {}", idx % n)));
    }
    let d2 = squared_distances(data);
    let mut w = match params.method {
        AffinityMethod::GaussianLocalScaling { neighbor_index } => {
            if neighbor_index > n - 1 {
                return Err(Error::Affinity(format!(
                    "neighbor_index {neighbor_index} exceeds N-1 = {}",
                    n - 1
                )));
            }
            let mut sigma = Vec::with_capacity(n);
            for i in 0..n {
                let mut row: Vec<T> = (0..n).filter(|&j| j != i).map(|j| d2[(i, j)]).collect();
                row.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
                let s = row[neighbor_index - 1].sqrt();
                if !(s > T::zero()) {
                    return Err(Error::Affinity(format!(
                        "point {i} has {neighbor_index} coincident neighbors so its local scale is zero; \
                         add jitter or use the fixed-sigma method"
                    )));
                }
                sigma.push(s);
            }
            DMatrix::from_fn(n, n, |i, j| (-d2[(i, j)] / (sigma[i] * sigma[j])).exp())
        }
        AffinityMethod::GaussianFixed { sigma } => {
            let s2 = T::lit(sigma * sigma);
            d2.map(|d| (-d / s2).exp())
        }
    };
    let diag = if params.self_loops { T::one() } else { T::zero() };
    w.fill_diagonal(diag);
    Ok(w)
}

/// `L = I − D^{−1/2} W D^{−1/2}`.
pub fn normalized_laplacian<T: Scalar>(w: &DMatrix<T>) -> Result<DMatrix<T>> {
    let n = w.nrows();
    if w.ncols() != n {
        return Err(Error::dim("affinity matrix", "square", format!("{}x{}", n, w.ncols())));
    }
    if w.iter().any(|&x| !(x >= T::zero()) || !x.is_finite()) {
        return Err(Error::Affinity("affinity entries must be finite and nonnegative".into()));
    }
    let scale = T::one() + w.amax();
    if (w - w.transpose()).amax() > T::exact_tol() * scale {
        return Err(Error::Affinity("affinity matrix is not symmetric".into()));
    }
    let mut inv_sqrt_deg = Vec::with_capacity(n);
    for i in 0..n {
        let d = w.row(i).sum();
        if !(d > T::zero()) {
            return Err(Error::IsolatedPoint { index: i });
        }
        inv_sqrt_deg.push(T::one() / d.sqrt());
    }
    let half = T::lit(0.5);
    let mut l = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in j..n {
            let wij = (w[(i, j)] + w[(j, i)]) * half;
            let entry = -wij * inv_sqrt_deg[i] * inv_sqrt_deg[j];
            l[(i, j)] = entry;
            l[(j, i)] = entry;
        }
        l[(j, j)] += T::one();
    }
    Ok(l)
}

/// Eigenvectors of the `k` smallest eigenvalues of `L`, and the full
/// ascending spectrum.
///
/// Each eigenvector is signed so that its largest-magnitude entry is positive.
pub fn sc_baseline<T: Scalar>(l: &DMatrix<T>, k: usize) -> Result<(DMatrix<T>, Vec<T>)> {
    let n = l.nrows();
    if l.ncols() != n {
        return Err(Error::dim("Laplacian", "square", format!("{}x{}", n, l.ncols())));
    }
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!("k={k} must satisfy 1 <= k <= N={n}")));
    }
    let eig = SymmetricEigen::try_new(l.clone(), T::eps(), 0)
        .ok_or_else(|| Error::Numerical("symmetric eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .expect("finite eigenvalues")
            .then(a.cmp(&b))
    });
    let mut u = DMatrix::zeros(n, k);
    for (c, &idx) in order.iter().take(k).enumerate() {
        let mut col = eig.eigenvectors.column(idx).into_owned();
        let pivot = col.iamax();
        if col[pivot] < T::zero() {
            col.neg_mut();
        }
        u.set_column(c, &col);
    }
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    Ok((u, values))
}

/// Scales every nonzero row to unit length; returns the indices of zero rows,
/// which are left untouched.
pub fn row_normalize<T: Scalar>(u: &DMatrix<T>) -> (DMatrix<T>, Vec<usize>) {
    let mut out = u.clone();
    let mut zero_rows = Vec::new();
    for i in 0..u.nrows() {
        let norm = u.row(i).norm();
        if norm > T::zero() {
            out.row_mut(i).unscale_mut(norm);
        } else {
            zero_rows.push(i);
        }
    }
    (out, zero_rows)
}
