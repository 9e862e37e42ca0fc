//! Lloyd's k-means with k-means++ seeding and independent seeded restarts.
//!
//! Restart `r` draws from the ChaCha stream `r` of the configured seed, so
//! results do not depend on how restarts are scheduled across threads.
//! Assignment ties go to the lowest centroid index. A centroid left without
//! points is moved onto the point farthest from its own centroid.

use nalgebra::{DMatrix, RowDVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const DEFAULT_MAX_ITERS: usize = 300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansConfig {
    pub k: usize,
    pub restarts: usize,
    pub seed: u64,
    pub max_iters: usize,
}

impl KMeansConfig {
    pub fn new(k: usize, restarts: usize, seed: u64) -> Self {
        Self {
            k,
            restarts,
            seed,
            max_iters: DEFAULT_MAX_ITERS,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansRun<T> {
    pub labels: Vec<usize>,
    /// Within-cluster sum of squared distances at termination.
    pub inertia: T,
    pub iterations: usize,
    /// Inertia after every assignment step.
    pub inertia_history: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult<T> {
    pub runs: Vec<KMeansRun<T>>,
    /// Index of the run with the lowest inertia (first on ties).
    pub best: usize,
}

impl<T> KMeansResult<T> {
    pub fn best_labels(&self) -> &[usize] {
        &self.runs[self.best].labels
    }
}

fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    rng
}

fn sq_dist<T: Scalar>(points: &DMatrix<T>, i: usize, center: &RowDVector<T>) -> T {
    (points.row(i) - center).norm_squared()
}

fn plus_plus_seeds<T: Scalar>(points: &DMatrix<T>, k: usize, rng: &mut ChaCha8Rng) -> Vec<RowDVector<T>> {
    let n = points.nrows();
    let mut chosen = vec![rng.random_range(0..n)];
    let mut d2: Vec<f64> = (0..n)
        .map(|i| sq_dist(points, i, &points.row(chosen[0]).into_owned()).to_f64_lossy())
        .collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &w) in d2.iter().enumerate() {
                acc += w;
                if w > 0.0 && acc > target {
                    pick = Some(i);
                    break;
                }
            }
            // rounding can leave `target` just past the final partial sum
            pick.unwrap_or_else(|| d2.iter().rposition(|&w| w > 0.0).expect("positive total"))
        } else {
            (0..n).find(|i| !chosen.contains(i)).expect("k <= N")
        };
        chosen.push(next);
        let c = points.row(next).into_owned();
        for (i, slot) in d2.iter_mut().enumerate() {
            *slot = slot.min(sq_dist(points, i, &c).to_f64_lossy());
        }
    }
    chosen.into_iter().map(|i| points.row(i).into_owned()).collect()
}

fn assign<T: Scalar>(points: &DMatrix<T>, centers: &[RowDVector<T>], labels: &mut [usize]) -> T {
    let mut inertia = T::zero();
    for (i, label) in labels.iter_mut().enumerate() {
        let mut best = (0, sq_dist(points, i, &centers[0]));
        for (c, center) in centers.iter().enumerate().skip(1) {
            let d = sq_dist(points, i, center);
            if d < best.1 {
                best = (c, d);
            }
        }
        *label = best.0;
        inertia += best.1;
    }
    inertia
}

fn single_run<T: Scalar>(points: &DMatrix<T>, cfg: &KMeansConfig, restart: usize) -> KMeansRun<T> {
    let (n, dim) = points.shape();
    let mut rng = restart_rng(cfg.seed, restart);
    let mut centers = plus_plus_seeds(points, cfg.k, &mut rng);
    let mut labels = vec![usize::MAX; n];
    let mut previous = labels.clone();
    let mut history = Vec::new();
    let mut iterations = 0;

    for iter in 0..cfg.max_iters {
        iterations = iter + 1;
        let inertia = assign(points, &centers, &mut labels);
        history.push(inertia);
        if labels == previous {
            break;
        }
        previous.clone_from(&labels);

        let mut sums = vec![RowDVector::<T>::zeros(dim); cfg.k];
        let mut counts = vec![0usize; cfg.k];
        for (i, &l) in labels.iter().enumerate() {
            sums[l] += points.row(i);
            counts[l] += 1;
        }
        let mut taken = Vec::new();
        for c in 0..cfg.k {
            if counts[c] > 0 {
                centers[c] = &sums[c] / T::from_usize(counts[c]).unwrap();
                continue;
            }
            let far = (0..n)
                .filter(|i| !taken.contains(i))
                .map(|i| (i, sq_dist(points, i, &centers[labels[i]])))
                .fold(None, |best: Option<(usize, T)>, (i, d)| match best {
                    Some((_, bd)) if bd >= d => best,
                    _ => Some((i, d)),
                })
                .map(|(i, _)| i)
                .expect("k <= N leaves a candidate");
            taken.push(far);
            centers[c] = points.row(far).into_owned();
        }
    }

    let inertia = *history.last().expect("at least one iteration");
    KMeansRun {
        labels,
        inertia,
        iterations,
        inertia_history: history,
    }
}

/// Clusters the rows of `points`.
pub fn kmeans<T: Scalar>(points: &DMatrix<T>, cfg: &KMeansConfig) -> Result<KMeansResult<T>> {
    let n = points.nrows();
    if cfg.k == 0 || cfg.k > n {
        return Err(Error::InvalidParameter(format!("k-means: k={} must satisfy 1 <= k <= N={n}", cfg.k)));
    }
    if cfg.restarts == 0 || cfg.max_iters == 0 {
        return Err(Error::InvalidParameter("k-means: restarts and max_iters must be positive".into()));
    }
    if points.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("k-means: non-finite feature".into()));
    }
    let runs: Vec<KMeansRun<T>> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| single_run(points, cfg, r))
        .collect();
    let best = runs
        .iter()
        .enumerate()
        .fold(0, |best, (i, r)| if r.inertia < runs[best].inertia { i } else { best });
    Ok(KMeansResult { runs, best })
}
