//! Partition agreement scores.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

struct Contingency {
    n: f64,
    /// `(row class, column class, count)` with dense class indices.
    cells: Vec<(usize, usize, f64)>,
    rows: Vec<f64>,
    cols: Vec<f64>,
}

fn dense_classes(labels: &[usize]) -> (Vec<usize>, Vec<f64>) {
    let mut index: BTreeMap<usize, usize> = BTreeMap::new();
    for &l in labels {
        let next = index.len();
        index.entry(l).or_insert(next);
    }
    let mut counts = vec![0.0; index.len()];
    let dense = labels
        .iter()
        .map(|l| {
            let i = index[l];
            counts[i] += 1.0;
            i
        })
        .collect();
    (dense, counts)
}

fn contingency(a: &[usize], b: &[usize]) -> Result<Contingency> {
    if a.len() != b.len() {
        return Err(Error::LabelLength(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(Error::InvalidParameter("label vectors must be nonempty".into()));
    }
    let (da, rows) = dense_classes(a);
    let (db, cols) = dense_classes(b);
    let mut cells: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (&x, &y) in da.iter().zip(&db) {
        *cells.entry((x, y)).or_default() += 1.0;
    }
    Ok(Contingency {
        n: a.len() as f64,
        cells: cells.into_iter().map(|((x, y), c)| (x, y, c)).collect(),
        rows,
        cols,
    })
}

fn entropy(counts: &[f64], n: f64) -> f64 {
    -counts
        .iter()
        .map(|&c| {
            let p = c / n;
            p * p.ln()
        })
        .sum::<f64>()
}

/// Normalized mutual information `I(a;b) / sqrt(H(a) H(b))`, natural logs.
///
/// Two constant labelings score 1; a constant labeling against a
/// non-constant one scores 0.
pub fn nmi(a: &[usize], b: &[usize]) -> Result<f64> {
    let t = contingency(a, b)?;
    let ha = entropy(&t.rows, t.n);
    let hb = entropy(&t.cols, t.n);
    if t.rows.len() == 1 && t.cols.len() == 1 {
        return Ok(1.0);
    }
    if t.rows.len() == 1 || t.cols.len() == 1 {
        return Ok(0.0);
    }
    let mi: f64 = t
        .cells
        .iter()
        .map(|&(x, y, c)| (c / t.n) * (c * t.n / (t.rows[x] * t.cols[y])).ln())
        .sum();
    Ok((mi / (ha * hb).sqrt()).clamp(0.0, 1.0))
}

fn comb2(x: f64) -> f64 {
    x * (x - 1.0) / 2.0
}

/// Adjusted Rand index (Hubert and Arabie). Can be negative.
pub fn ari(a: &[usize], b: &[usize]) -> Result<f64> {
    let t = contingency(a, b)?;
    let index: f64 = t.cells.iter().map(|&(_, _, c)| comb2(c)).sum();
    let sum_a: f64 = t.rows.iter().map(|&c| comb2(c)).sum();
    let sum_b: f64 = t.cols.iter().map(|&c| comb2(c)).sum();
    let total = comb2(t.n);
    if total == 0.0 {
        return Ok(1.0);
    }
    let expected = sum_a * sum_b / total;
    let max = 0.5 * (sum_a + sum_b);
    if max == expected {
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}
