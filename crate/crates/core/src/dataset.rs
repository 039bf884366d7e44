//! Point sets: loading, writing and synthetic generation.
//!
//! A [`PointSet`] is either a collection of vectors (dense or sparse) that is
//! paired with a [`Metric`](crate::metrics::Metric) by the oracle, or an
//! explicit distance matrix that need not be symmetric. Diagonal entries of a
//! matrix are never read.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::error::{Error, Result};
use crate::rng::{self, StreamRng};

#[derive(Debug, Clone, PartialEq)]
pub struct DenseRows {
    n: usize,
    d: usize,
    values: Vec<f64>,
}

impl DenseRows {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    pub fn dim(&self) -> usize {
        self.d
    }
}

/// One sparse vector: strictly increasing column indices and nonzero values.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseRow {
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl SparseRow {
    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseRows {
    d: usize,
    rows: Vec<SparseRow>,
}

impl SparseRows {
    pub fn row(&self, i: usize) -> &SparseRow {
        &self.rows[i]
    }

    pub fn dim(&self) -> usize {
        self.d
    }
}

/// Row-major `n x n` matrix of nonnegative distances.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    values: Vec<f64>,
}

impl DistanceMatrix {
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PointSet {
    Dense(DenseRows),
    Sparse(SparseRows),
    Matrix(DistanceMatrix),
}

/// Borrowed view of a single vector.
#[derive(Debug, Clone, Copy)]
pub enum Row<'a> {
    Dense(&'a [f64]),
    Sparse(&'a SparseRow),
}

impl PointSet {
    pub fn dense(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::invalid("a point set needs at least one point"));
        }
        let d = rows[0].len();
        if d == 0 {
            return Err(Error::invalid("dense points need at least one coordinate"));
        }
        let mut values = Vec::with_capacity(n * d);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::DimensionMismatch {
                    left: d,
                    right: row.len(),
                });
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("row {i}: non-finite value {v}")));
            }
            values.extend_from_slice(row);
        }
        Ok(PointSet::Dense(DenseRows { n, d, values }))
    }

    /// Sparse point set from `(column, value)` pairs per row.
    pub fn sparse(d: usize, rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::invalid("a point set needs at least one point"));
        }
        if d == 0 || d > u32::MAX as usize {
            return Err(Error::invalid(format!("unsupported dimension {d}")));
        }
        let rows = rows
            .into_iter()
            .enumerate()
            .map(|(i, entries)| {
                let mut row = SparseRow::default();
                for (col, value) in entries {
                    check_sparse_entry(&row, col, value, d)
                        .map_err(|m| Error::invalid(format!("row {i}: {m}")))?;
                    row.indices.push(col as u32);
                    row.values.push(value);
                }
                Ok(row)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PointSet::Sparse(SparseRows { d, rows }))
    }

    pub fn matrix(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::invalid("a point set needs at least one point"));
        }
        let mut values = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::invalid(format!(
                    "distance matrix is not square: row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::invalid(format!(
                        "distance ({i}, {j}) = {v} is not a finite nonnegative number"
                    )));
                }
            }
            values.extend_from_slice(row);
        }
        Ok(PointSet::Matrix(DistanceMatrix { n, values }))
    }

    pub fn len(&self) -> usize {
        match self {
            PointSet::Dense(p) => p.n,
            PointSet::Sparse(p) => p.rows.len(),
            PointSet::Matrix(m) => m.n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Vector dimension; `None` for an explicit matrix.
    pub fn dim(&self) -> Option<usize> {
        match self {
            PointSet::Dense(p) => Some(p.d),
            PointSet::Sparse(p) => Some(p.d),
            PointSet::Matrix(_) => None,
        }
    }

    /// Vector view of point `i`; `None` for an explicit matrix.
    pub fn row(&self, i: usize) -> Option<Row<'_>> {
        match self {
            PointSet::Dense(p) => Some(Row::Dense(p.row(i))),
            PointSet::Sparse(p) => Some(Row::Sparse(p.row(i))),
            PointSet::Matrix(_) => None,
        }
    }

    pub fn as_matrix(&self) -> Option<&DistanceMatrix> {
        match self {
            PointSet::Matrix(m) => Some(m),
            _ => None,
        }
    }

    /// Dense copy of a sparse point set (dense and matrix sets are cloned).
    pub fn to_dense(&self) -> PointSet {
        match self {
            PointSet::Sparse(p) => {
                let mut values = vec![0.0; p.rows.len() * p.d];
                for (i, row) in p.rows.iter().enumerate() {
                    for (&c, &v) in row.indices.iter().zip(&row.values) {
                        values[i * p.d + c as usize] = v;
                    }
                }
                PointSet::Dense(DenseRows {
                    n: p.rows.len(),
                    d: p.d,
                    values,
                })
            }
            other => other.clone(),
        }
    }

    /// Sparse copy of a dense point set, dropping zero coordinates.
    pub fn to_sparse(&self) -> PointSet {
        match self {
            PointSet::Dense(p) => {
                let rows = (0..p.n)
                    .map(|i| {
                        let mut row = SparseRow::default();
                        for (c, &v) in p.row(i).iter().enumerate() {
                            if v != 0.0 {
                                row.indices.push(c as u32);
                                row.values.push(v);
                            }
                        }
                        row
                    })
                    .collect();
                PointSet::Sparse(SparseRows { d: p.d, rows })
            }
            other => other.clone(),
        }
    }

    /// Copy of the points at `indices` (for a matrix, the induced submatrix).
    pub fn select(&self, indices: &[usize]) -> Result<PointSet> {
        let n = self.len();
        if let Some(&bad) = indices.iter().find(|&&i| i >= n) {
            return Err(Error::IndexOutOfRange { index: bad, n });
        }
        if indices.is_empty() {
            return Err(Error::invalid("selection is empty"));
        }
        Ok(match self {
            PointSet::Dense(p) => {
                let mut values = Vec::with_capacity(indices.len() * p.d);
                for &i in indices {
                    values.extend_from_slice(p.row(i));
                }
                PointSet::Dense(DenseRows {
                    n: indices.len(),
                    d: p.d,
                    values,
                })
            }
            PointSet::Sparse(p) => PointSet::Sparse(SparseRows {
                d: p.d,
                rows: indices.iter().map(|&i| p.rows[i].clone()).collect(),
            }),
            PointSet::Matrix(m) => {
                let k = indices.len();
                let mut values = Vec::with_capacity(k * k);
                for &i in indices {
                    values.extend(indices.iter().map(|&j| m.get(i, j)));
                }
                PointSet::Matrix(DistanceMatrix { n: k, values })
            }
        })
    }
}

fn check_sparse_entry(row: &SparseRow, col: usize, value: f64, d: usize) -> Result<(), String> {
    if col >= d {
        return Err(format!("index {col} out of range for dimension {d}"));
    }
    if let Some(&last) = row.indices.last() {
        if col as u32 <= last {
            return Err(format!("non-increasing index {col} after {last}"));
        }
    }
    if !value.is_finite() || value == 0.0 {
        return Err(format!("index {col}: value {value} must be finite and nonzero"));
    }
    Ok(())
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Lines with any trailing `\r` stripped, numbered from 1.
fn numbered_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
}

fn parse_number(token: &str, line: usize) -> Result<f64> {
    let token = token.trim();
    token
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::parse(line, format!("non-numeric field {token:?}")))
}

fn parse_csv_rows(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line_no, line) in numbered_lines(text) {
        let row = line
            .split(',')
            .map(|t| parse_number(t, line_no))
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::parse(
                    line_no,
                    format!(
                        "ragged row {line_no}: {} fields, expected {}",
                        row.len(),
                        first.len()
                    ),
                ));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::parse(1, "no rows"));
    }
    Ok(rows)
}

pub fn parse_dense_csv(text: &str) -> Result<PointSet> {
    PointSet::dense(parse_csv_rows(text)?)
}

pub fn parse_matrix_csv(text: &str) -> Result<PointSet> {
    let rows = parse_csv_rows(text)?;
    let n = rows.len();
    if rows[0].len() != n {
        return Err(Error::parse(
            1,
            format!("non-square matrix: {n} rows of {} columns", rows[0].len()),
        ));
    }
    for (i, row) in rows.iter().enumerate() {
        if let Some(j) = row.iter().position(|&v| v < 0.0) {
            return Err(Error::parse(
                i + 1,
                format!("negative entry {} in column {}", row[j], j + 1),
            ));
        }
    }
    PointSet::matrix(rows)
}

pub fn parse_sparse(text: &str) -> Result<PointSet> {
    let mut lines = numbered_lines(text);
    let (_, header) = lines.next().ok_or_else(|| Error::parse(1, "missing header"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let (n, d) = match fields.as_slice() {
        [n, d] => match (n.parse::<usize>(), d.parse::<usize>()) {
            (Ok(n), Ok(d)) if n >= 1 && d >= 1 => (n, d),
            _ => return Err(Error::parse(1, format!("bad header {header:?}"))),
        },
        _ => return Err(Error::parse(1, format!("header must be \"n d\", got {header:?}"))),
    };
    if d > u32::MAX as usize {
        return Err(Error::parse(1, format!("dimension {d} too large")));
    }

    let mut rows = Vec::with_capacity(n);
    for (line_no, line) in lines {
        if rows.len() == n {
            if line.trim().is_empty() {
                continue;
            }
            return Err(Error::parse(
                line_no,
                format!("header mismatch: more than {n} rows"),
            ));
        }
        let mut row = SparseRow::default();
        for token in line.split_whitespace() {
            let (idx, value) = token
                .split_once(':')
                .ok_or_else(|| Error::parse(line_no, format!("malformed token {token:?}")))?;
            let col: usize = idx
                .parse()
                .map_err(|_| Error::parse(line_no, format!("bad index {idx:?}")))?;
            let value = parse_number(value, line_no)?;
            check_sparse_entry(&row, col, value, d).map_err(|m| Error::parse(line_no, m))?;
            row.indices.push(col as u32);
            row.values.push(value);
        }
        rows.push(row);
    }
    if rows.len() != n {
        return Err(Error::parse(
            1,
            format!("header mismatch: declared {n} rows, found {}", rows.len()),
        ));
    }
    Ok(PointSet::Sparse(SparseRows { d, rows }))
}

pub fn load_dense_csv(path: impl AsRef<Path>) -> Result<PointSet> {
    parse_dense_csv(&read(path.as_ref())?)
}

pub fn load_sparse(path: impl AsRef<Path>) -> Result<PointSet> {
    parse_sparse(&read(path.as_ref())?)
}

pub fn load_matrix_csv(path: impl AsRef<Path>) -> Result<PointSet> {
    parse_matrix_csv(&read(path.as_ref())?)
}

fn csv_rows<'a>(rows: impl Iterator<Item = &'a [f64]>) -> String {
    let mut out = String::new();
    for row in rows {
        for (k, v) in row.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            write!(out, "{v}").unwrap();
        }
        out.push('\n');
    }
    out
}

/// Serialises a point set in its native format: dense CSV, sparse
/// `idx:value` lines or matrix CSV. Floats use the shortest representation
/// that parses back to the same value.
pub fn to_text(points: &PointSet) -> String {
    match points {
        PointSet::Dense(p) => csv_rows((0..p.n).map(|i| p.row(i))),
        PointSet::Matrix(m) => csv_rows((0..m.n).map(|i| m.row(i))),
        PointSet::Sparse(p) => {
            let mut out = format!("{} {}\n", p.rows.len(), p.d);
            for row in &p.rows {
                for (k, (c, v)) in row.indices.iter().zip(&row.values).enumerate() {
                    if k > 0 {
                        out.push(' ');
                    }
                    write!(out, "{c}:{v}").unwrap();
                }
                out.push('\n');
            }
            out
        }
    }
}

/// Parses text produced by [`to_text`] back, given the format of `like`.
pub fn parse_like(like: &PointSet, text: &str) -> Result<PointSet> {
    match like {
        PointSet::Dense(_) => parse_dense_csv(text),
        PointSet::Sparse(_) => parse_sparse(text),
        PointSet::Matrix(_) => parse_matrix_csv(text),
    }
}

pub fn write_points(points: &PointSet, path: impl AsRef<Path>) -> Result<()> {
    write(path.as_ref(), &to_text(points))
}

/// Rescales every vector so its entries sum to one. Entries must be
/// nonnegative; all-zero rows are left unchanged. Matrices are rejected.
pub fn normalize_rows(points: &PointSet) -> Result<PointSet> {
    let normalize = |values: &mut [f64], i: usize| -> Result<()> {
        if values.iter().any(|&v| v < 0.0) {
            return Err(Error::invalid(format!(
                "row {i} has negative entries and cannot be normalised"
            )));
        }
        let total: f64 = values.iter().sum();
        if total > 0.0 {
            values.iter_mut().for_each(|v| *v /= total);
        }
        Ok(())
    };
    match points {
        PointSet::Dense(p) => {
            let mut out = p.clone();
            for (i, chunk) in out.values.chunks_mut(p.d).enumerate() {
                normalize(chunk, i)?;
            }
            Ok(PointSet::Dense(out))
        }
        PointSet::Sparse(p) => {
            let mut out = p.clone();
            for (i, row) in out.rows.iter_mut().enumerate() {
                normalize(&mut row.values, i)?;
            }
            Ok(PointSet::Sparse(out))
        }
        PointSet::Matrix(_) => Err(Error::invalid("cannot normalise an explicit distance matrix")),
    }
}

/// Uniform subsample of `m` points without replacement, in increasing index
/// order. Returns the subset and the chosen indices.
pub fn subsample(points: &PointSet, m: usize, seed: u64) -> Result<(PointSet, Vec<usize>)> {
    let n = points.len();
    if m == 0 || m > n {
        return Err(Error::invalid(format!("cannot draw {m} of {n} points")));
    }
    let mut rng = rng::stream(seed, rng::STREAM_DATA);
    let mut chosen = index::sample(&mut rng, n, m).into_vec();
    chosen.sort_unstable();
    Ok((points.select(&chosen)?, chosen))
}

#[derive(Debug, Clone)]
pub struct AdversarialInstance {
    pub points: PointSet,
    /// The point whose distances are all zero, hence the medoid.
    pub planted: usize,
}

/// Hard instance for pure sampling: one planted point at distance zero from
/// everything, every other point at distance `n` from at least one partner.
pub fn gen_adversarial(n: usize, seed: u64) -> Result<AdversarialInstance> {
    if n < 3 {
        return Err(Error::invalid(format!("adversarial instance needs n >= 3, got {n}")));
    }
    let mut rng = rng::stream(seed, rng::STREAM_DATA);
    let planted = rng::uniform_below(&mut rng, n as u64) as usize;
    let mut values = vec![0.0; n * n];
    let far = n as f64;
    for j in (0..n).filter(|&j| j != planted) {
        let (lo, hi) = if j < planted { (j, planted) } else { (planted, j) };
        // uniform over [n] minus {planted, j}
        let mut k = rng::uniform_below(&mut rng, (n - 2) as u64) as usize;
        if k >= lo {
            k += 1;
        }
        if k >= hi {
            k += 1;
        }
        values[j * n + k] = far;
        values[k * n + j] = far;
    }
    Ok(AdversarialInstance {
        points: PointSet::Matrix(DistanceMatrix { n, values }),
        planted,
    })
}

#[derive(Debug, Clone)]
pub struct GaussianPriorInstance {
    pub points: PointSet,
    /// Per-point offsets; `d(i, j) = max(0, theta_i + theta_j + noise_ij)`.
    pub theta: Vec<f64>,
    /// Number of unordered pairs whose distance was clamped at zero.
    pub clamped: usize,
}

/// Symmetric distance matrix whose row means are approximately i.i.d.
/// `N(gamma, 1)`: `theta_i ~ N(gamma/2, 1/2)` plus symmetric pair noise
/// `N(0, noise_sd^2)`, clamped at zero.
pub fn gen_gaussian_prior(
    n: usize,
    gamma: f64,
    noise_sd: f64,
    seed: u64,
) -> Result<GaussianPriorInstance> {
    gen_gaussian_prior_with_spread(n, gamma, 0.5, noise_sd, seed)
}

/// [`gen_gaussian_prior`] with an explicit variance for `theta`. A variance
/// of zero makes every `theta_i` equal to `gamma / 2`.
pub fn gen_gaussian_prior_with_spread(
    n: usize,
    gamma: f64,
    theta_variance: f64,
    noise_sd: f64,
    seed: u64,
) -> Result<GaussianPriorInstance> {
    if n < 2 {
        return Err(Error::invalid(format!("gaussian-prior instance needs n >= 2, got {n}")));
    }
    if !(gamma.is_finite() && theta_variance >= 0.0 && noise_sd >= 0.0 && noise_sd.is_finite()) {
        return Err(Error::invalid("gamma must be finite; variance and noise_sd nonnegative"));
    }
    let mut rng = rng::stream(seed, rng::STREAM_DATA);
    let theta_dist = Normal::new(gamma / 2.0, theta_variance.sqrt())
        .map_err(|e| Error::invalid(e.to_string()))?;
    let theta: Vec<f64> = (0..n).map(|_| theta_dist.sample(&mut rng)).collect();
    let mut values = vec![0.0; n * n];
    let mut clamped = 0;
    for i in 0..n {
        for j in i + 1..n {
            let noise = if noise_sd > 0.0 {
                let z: f64 = StandardNormal.sample(&mut rng);
                noise_sd * z
            } else {
                0.0
            };
            let raw: f64 = theta[i] + theta[j] + noise;
            if raw < 0.0 {
                clamped += 1;
            }
            let v = raw.max(0.0);
            values[i * n + j] = v;
            values[j * n + i] = v;
        }
    }
    Ok(GaussianPriorInstance {
        points: PointSet::Matrix(DistanceMatrix { n, values }),
        theta,
        clamped,
    })
}

/// `n` points in `d` dimensions with i.i.d. standard normal coordinates.
pub fn gen_gaussian_points(n: usize, d: usize, seed: u64) -> Result<PointSet> {
    if n < 2 || d < 1 {
        return Err(Error::invalid(format!("gaussian points need n >= 2 and d >= 1, got n={n}, d={d}")));
    }
    let mut rng = rng::stream(seed, rng::STREAM_DATA);
    Ok(PointSet::Dense(DenseRows {
        n,
        d,
        values: sample_standard_normal(&mut rng, n * d),
    }))
}

fn sample_standard_normal(rng: &mut StreamRng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.sample(StandardNormal)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_force_row_means(m: &DistanceMatrix) -> Vec<f64> {
        (0..m.n)
            .map(|i| (0..m.n).filter(|&j| j != i).map(|j| m.get(i, j)).sum::<f64>() / (m.n - 1) as f64)
            .collect()
    }

    #[test]
    fn dense_csv_examples() {
        let p = parse_dense_csv("0,0\n3,4\n").unwrap();
        assert_eq!((p.len(), p.dim()), (2, Some(2)));
        let p = parse_dense_csv("1\n").unwrap();
        assert_eq!((p.len(), p.dim()), (1, Some(1)));
        let err = parse_dense_csv("1,2\n3\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        assert!(err.to_string().contains("ragged row 2"));
        let err = parse_dense_csv("1,2\n3,x\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn dense_csv_accepts_crlf_and_scientific_notation() {
        let p = parse_dense_csv("1e-3,2.5E2\r\n-4,0\r\n").unwrap();
        match p {
            PointSet::Dense(d) => assert_eq!(d.row(0), &[1e-3, 250.0]),
            _ => unreachable!(),
        }
    }

    #[test]
    fn sparse_examples() {
        let p = parse_sparse("2 4\n0:1.5 3:2\n\n").unwrap();
        let PointSet::Sparse(s) = &p else { panic!() };
        assert_eq!((s.rows.len(), s.d), (2, 4));
        assert_eq!(s.row(0).indices(), &[0, 3]);
        assert_eq!(s.row(1).nnz(), 0);

        let err = parse_sparse("1 2\n1:0.5 0:0.5\n").unwrap_err();
        assert!(err.to_string().contains("non-increasing"), "{err}");
        let err = parse_sparse("2 2\n0:1\n2:1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        assert!(err.to_string().contains("out of range"));
    }

    #[test]
    fn sparse_header_mismatch_and_bad_values() {
        assert!(parse_sparse("3 2\n0:1\n").is_err());
        assert!(parse_sparse("1 2\n0:1\n1:1\n").is_err());
        assert!(parse_sparse("1 2\n0:abc\n").is_err());
        assert!(parse_sparse("1 2\n0:0\n").is_err());
        assert!(parse_sparse("x 2\n").is_err());
        // trailing blank lines after the last row are tolerated
        assert!(parse_sparse("1 2\n0:1\n\n\n").is_ok());
    }

    #[test]
    fn matrix_examples() {
        let p = parse_matrix_csv("0,1\n2,0\n").unwrap();
        let m = p.as_matrix().unwrap();
        assert_eq!((m.get(0, 1), m.get(1, 0)), (1.0, 2.0));
        assert!(parse_matrix_csv("0,1\n1,0\n0,0\n").unwrap_err().to_string().contains("non-square"));
        assert!(parse_matrix_csv("0,-1\n1,0\n").unwrap_err().to_string().contains("negative"));
    }

    #[test]
    fn adversarial_n3_has_one_zero_row_and_far_partners() {
        for seed in 0..20 {
            let inst = gen_adversarial(3, seed).unwrap();
            let m = inst.points.as_matrix().unwrap();
            let zero_rows: Vec<usize> = (0..3)
                .filter(|&i| (0..3).all(|j| m.get(i, j) == 0.0 && m.get(j, i) == 0.0))
                .collect();
            assert_eq!(zero_rows, vec![inst.planted]);
            for j in (0..3).filter(|&j| j != inst.planted) {
                assert!((0..3).any(|k| m.get(j, k) == 3.0));
            }
        }
        assert!(gen_adversarial(2, 0).is_err());
    }

    #[test]
    fn adversarial_is_deterministic_and_planted_is_medoid() {
        let a = gen_adversarial(100, 7).unwrap();
        let b = gen_adversarial(100, 7).unwrap();
        assert_eq!(a.points, b.points);
        let means = brute_force_row_means(a.points.as_matrix().unwrap());
        let best = (0..100).min_by(|&x, &y| means[x].total_cmp(&means[y])).unwrap();
        assert_eq!(best, a.planted);
        for (j, row_max) in (0..100).map(|j| {
            let m = a.points.as_matrix().unwrap();
            (j, m.row(j).iter().cloned().fold(0.0, f64::max))
        }) {
            if j != a.planted {
                assert_eq!(row_max, 100.0);
            }
        }
    }

    #[test]
    fn gaussian_prior_degenerate_spread_gives_constant_matrix() {
        let inst = gen_gaussian_prior_with_spread(20, 6.0, 0.0, 0.0, 3).unwrap();
        let m = inst.points.as_matrix().unwrap();
        for i in 0..20 {
            for j in 0..20 {
                if i != j {
                    assert_eq!(m.get(i, j), 6.0);
                }
            }
        }
        assert_eq!(inst.clamped, 0);
    }

    #[test]
    fn gaussian_prior_row_means_near_gamma() {
        let inst = gen_gaussian_prior(500, 20.0, 1.0, 1).unwrap();
        assert_eq!(inst.clamped, 0);
        let means = brute_force_row_means(inst.points.as_matrix().unwrap());
        let n = means.len() as f64;
        let avg = means.iter().sum::<f64>() / n;
        let var = means.iter().map(|m| (m - avg).powi(2)).sum::<f64>() / (n - 1.0);
        let se = (var / n).sqrt();
        assert!((avg - 20.0).abs() <= 3.0 * se, "avg {avg} se {se}");
        assert!(gen_gaussian_prior(1, 20.0, 1.0, 0).is_err());
    }

    #[test]
    fn gaussian_points_examples() {
        assert_eq!(gen_gaussian_points(2, 3, 0).unwrap(), gen_gaussian_points(2, 3, 0).unwrap());
        let p = gen_gaussian_points(2, 1, 0).unwrap();
        assert_eq!((p.len(), p.dim()), (2, Some(1)));
        let PointSet::Dense(p) = gen_gaussian_points(1000, 50, 4).unwrap() else { panic!() };
        for c in 0..50 {
            let mean = (0..1000).map(|i| p.row(i)[c]).sum::<f64>() / 1000.0;
            assert!(mean.abs() < 3.0 / 1000f64.sqrt(), "coordinate {c}: {mean}");
        }
        assert!(gen_gaussian_points(1, 3, 0).is_err());
        assert!(gen_gaussian_points(3, 0, 0).is_err());
    }

    #[test]
    fn dense_sparse_conversion_and_selection() {
        let p = PointSet::dense(vec![vec![0.0, 2.0], vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let s = p.to_sparse();
        assert_eq!(s.to_dense(), p);
        let sub = p.select(&[2, 0]).unwrap();
        assert_eq!(sub, PointSet::dense(vec![vec![0.0, 0.0], vec![0.0, 2.0]]).unwrap());
        assert!(p.select(&[5]).is_err());
    }

    #[test]
    fn subsample_is_uniform_without_replacement() {
        let p = gen_gaussian_points(50, 2, 0).unwrap();
        let (sub, idx) = subsample(&p, 10, 5).unwrap();
        assert_eq!(sub.len(), 10);
        assert!(idx.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(subsample(&p, 10, 5).unwrap().1, idx);
        assert!(subsample(&p, 51, 5).is_err());
    }

    #[test]
    fn normalize_rows_sums_to_one() {
        let p = PointSet::dense(vec![vec![1.0, 3.0], vec![0.0, 0.0]]).unwrap();
        let PointSet::Dense(q) = normalize_rows(&p).unwrap() else { panic!() };
        assert_eq!(q.row(0), &[0.25, 0.75]);
        assert_eq!(q.row(1), &[0.0, 0.0]);
        assert!(normalize_rows(&PointSet::dense(vec![vec![-1.0]]).unwrap()).is_err());
    }

    fn finite() -> impl Strategy<Value = f64> {
        prop_oneof![-1e6..1e6f64, Just(0.0), -1e-300..1e-300f64]
    }

    proptest! {
        #[test]
        fn dense_round_trip(rows in (1usize..6, 1usize..5).prop_flat_map(|(n, d)| {
            proptest::collection::vec(proptest::collection::vec(finite(), d), n)
        })) {
            let p = PointSet::dense(rows).unwrap();
            prop_assert_eq!(parse_like(&p, &to_text(&p)).unwrap(), p.clone());
            let s = p.to_sparse();
            prop_assert_eq!(parse_like(&s, &to_text(&s)).unwrap(), s);
        }

        #[test]
        fn matrix_round_trip(n in 1usize..6, seed in 0u64..1000) {
            let inst = gen_gaussian_prior(n.max(2), 10.0, 1.0, seed).unwrap();
            let p = inst.points;
            prop_assert_eq!(parse_like(&p, &to_text(&p)).unwrap(), p.clone());
        }

        #[test]
        fn gaussian_prior_is_symmetric_nonnegative(n in 2usize..30, gamma in -2.0..20.0f64, seed in 0u64..1000) {
            let inst = gen_gaussian_prior(n, gamma, 1.0, seed).unwrap();
            let m = inst.points.as_matrix().unwrap();
            for i in 0..n {
                for j in 0..n {
                    prop_assert_eq!(m.get(i, j), m.get(j, i));
                    prop_assert!(m.get(i, j) >= 0.0);
                }
            }
        }
    }
}
