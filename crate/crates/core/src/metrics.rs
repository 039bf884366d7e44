//! Distance functions over dense and sparse vectors.
//!
//! No metric axioms are assumed anywhere downstream; these are just the
//! built-in choices. Sparse evaluation walks the union of supports in
//! increasing column order, so it performs the same additions as the dense
//! loop minus exact zeros and the two agree bit for bit.

use std::fmt;
use std::str::FromStr;

use crate::dataset::{Row, SparseRow};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    L1,
    L2,
    SquaredL2,
    /// `1 - <x, y> / (|x| |y|)`; 1 if exactly one side is the zero vector,
    /// 0 if both are.
    Cosine,
    /// `1 - |supp x ∩ supp y| / |supp x ∪ supp y|` over nonzero supports;
    /// 0 for two empty supports.
    Jaccard,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::L1,
        Metric::L2,
        Metric::SquaredL2,
        Metric::Cosine,
        Metric::Jaccard,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::L1 => "l1",
            Metric::L2 => "l2",
            Metric::SquaredL2 => "sqeuclidean",
            Metric::Cosine => "cosine",
            Metric::Jaccard => "jaccard",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                Error::invalid(format!(
                    "unknown metric {s:?} (expected l1, l2, sqeuclidean, cosine or jaccard)"
                ))
            })
    }
}

pub fn distance(metric: Metric, x: Row<'_>, y: Row<'_>) -> Result<f64> {
    match (x, y) {
        (Row::Dense(x), Row::Dense(y)) => {
            if x.len() != y.len() {
                return Err(Error::DimensionMismatch {
                    left: x.len(),
                    right: y.len(),
                });
            }
            Ok(dense_distance(metric, x, y))
        }
        (Row::Sparse(x), Row::Sparse(y)) => Ok(sparse_distance(metric, x, y)),
        _ => Err(Error::invalid("cannot mix dense and sparse rows")),
    }
}

/// Distance between equal-length dense vectors.
pub fn dense_distance(metric: Metric, x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    match metric {
        Metric::L1 => x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum(),
        Metric::L2 => squared_l2(x, y).sqrt(),
        Metric::SquaredL2 => squared_l2(x, y),
        Metric::Cosine => {
            let (mut dot, mut xx, mut yy) = (0.0, 0.0, 0.0);
            for (a, b) in x.iter().zip(y) {
                dot += a * b;
                xx += a * a;
                yy += b * b;
            }
            cosine_from_parts(dot, xx, yy)
        }
        Metric::Jaccard => {
            let (mut inter, mut union) = (0usize, 0usize);
            for (a, b) in x.iter().zip(y) {
                let (p, q) = (*a != 0.0, *b != 0.0);
                inter += (p && q) as usize;
                union += (p || q) as usize;
            }
            jaccard_from_counts(inter, union)
        }
    }
}

fn squared_l2(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

fn cosine_from_parts(dot: f64, xx: f64, yy: f64) -> f64 {
    match (xx == 0.0, yy == 0.0) {
        (true, true) => 0.0,
        (true, false) | (false, true) => 1.0,
        _ => (1.0 - dot / (xx.sqrt() * yy.sqrt())).clamp(0.0, 2.0),
    }
}

fn jaccard_from_counts(inter: usize, union: usize) -> f64 {
    if union == 0 {
        0.0
    } else {
        1.0 - inter as f64 / union as f64
    }
}

/// Distance between two sparse vectors of the same dimension.
pub fn sparse_distance(metric: Metric, x: &SparseRow, y: &SparseRow) -> f64 {
    match metric {
        Metric::L1 => merge_fold(x, y, 0.0, |acc, a, b| acc + (a - b).abs()),
        Metric::L2 => merge_fold(x, y, 0.0, |acc, a, b| acc + (a - b) * (a - b)).sqrt(),
        Metric::SquaredL2 => merge_fold(x, y, 0.0, |acc, a, b| acc + (a - b) * (a - b)),
        Metric::Cosine => {
            let (dot, xx, yy) = merge_fold(x, y, (0.0, 0.0, 0.0), |(d, p, q), a, b| {
                (d + a * b, p + a * a, q + b * b)
            });
            cosine_from_parts(dot, xx, yy)
        }
        Metric::Jaccard => {
            let inter = merge_fold(x, y, 0usize, |acc, a, b| acc + (a != 0.0 && b != 0.0) as usize);
            jaccard_from_counts(inter, x.nnz() + y.nnz() - inter)
        }
    }
}

/// Folds `f(acc, x_k, y_k)` over the union of supports in increasing `k`,
/// with zeros filled in for the missing side.
fn merge_fold<T>(x: &SparseRow, y: &SparseRow, init: T, mut f: impl FnMut(T, f64, f64) -> T) -> T {
    let (xi, xv) = (x.indices(), x.values());
    let (yi, yv) = (y.indices(), y.values());
    let (mut p, mut q) = (0, 0);
    let mut acc = init;
    while p < xi.len() || q < yi.len() {
        let take_x = q == yi.len() || (p < xi.len() && xi[p] <= yi[q]);
        let take_y = p == xi.len() || (q < yi.len() && yi[q] <= xi[p]);
        let a = if take_x { xv[p] } else { 0.0 };
        let b = if take_y { yv[q] } else { 0.0 };
        acc = f(acc, a, b);
        p += take_x as usize;
        q += take_y as usize;
    }
    acc
}
