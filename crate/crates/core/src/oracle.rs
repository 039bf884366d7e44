//! Metered access to pairwise distances.
//!
//! Every distance the algorithms and the harness look at goes through a
//! [`DistanceOracle`], which counts evaluations exactly. Nothing is cached:
//! repeated draws of the same pair are evaluated and charged again.

use std::sync::atomic::{AtomicU64, Ordering};

use rand::RngCore;
use rayon::prelude::*;

use crate::dataset::PointSet;
use crate::error::{Error, Result};
use crate::metrics::{self, Metric};
use crate::rng;

/// Batches smaller than this are evaluated inline even with several workers.
const PARALLEL_MIN_BATCH: usize = 64;

#[derive(Debug)]
pub struct DistanceOracle<'a> {
    points: &'a PointSet,
    metric: Metric,
    evals: AtomicU64,
    workers: usize,
}

impl<'a> DistanceOracle<'a> {
    /// `metric` is ignored for explicit distance matrices.
    pub fn new(points: &'a PointSet, metric: Metric) -> Self {
        DistanceOracle {
            points,
            metric,
            evals: AtomicU64::new(0),
            workers: 1,
        }
    }

    /// Evaluate batches on the current rayon pool when `workers > 1`.
    /// Results are folded in index order, so they do not depend on `workers`.
    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &'a PointSet {
        self.points
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    pub fn eval_count(&self) -> u64 {
        self.evals.load(Ordering::Relaxed)
    }

    fn charge(&self, count: u64) {
        self.evals.fetch_add(count, Ordering::Relaxed);
    }

    #[inline]
    fn raw(&self, i: usize, j: usize) -> f64 {
        match self.points {
            PointSet::Matrix(m) => m.get(i, j),
            PointSet::Dense(p) => metrics::dense_distance(self.metric, p.row(i), p.row(j)),
            PointSet::Sparse(p) => metrics::sparse_distance(self.metric, p.row(i), p.row(j)),
        }
    }

    fn check_index(&self, i: usize) -> Result<()> {
        let n = self.n();
        if i >= n {
            Err(Error::IndexOutOfRange { index: i, n })
        } else {
            Ok(())
        }
    }

    /// `d(i, j)`, charged as one evaluation.
    pub fn distance(&self, i: usize, j: usize) -> Result<f64> {
        self.check_index(i)?;
        self.check_index(j)?;
        self.charge(1);
        Ok(self.raw(i, j))
    }

    /// `d(i, J)` with `J` uniform over the other points.
    pub fn sample_distance<R: RngCore + ?Sized>(&self, i: usize, rng: &mut R) -> Result<f64> {
        self.check_index(i)?;
        if self.n() < 2 {
            return Err(Error::invalid("sampling a distance needs at least two points"));
        }
        Ok(self.pull(i, rng))
    }

    #[inline]
    pub(crate) fn pull<R: RngCore + ?Sized>(&self, i: usize, rng: &mut R) -> f64 {
        let j = rng::uniform_other(rng, self.n(), i);
        self.charge(1);
        self.raw(i, j)
    }

    /// Appends `count` independent draws of `d(i, J)` to `out`. Partners are
    /// drawn sequentially from `rng`; only the evaluations may run in parallel.
    pub fn sample_batch<R: RngCore + ?Sized>(
        &self,
        i: usize,
        count: usize,
        rng: &mut R,
        out: &mut Vec<f64>,
    ) -> Result<()> {
        self.check_index(i)?;
        if self.n() < 2 {
            return Err(Error::invalid("sampling a distance needs at least two points"));
        }
        let n = self.n();
        let partners: Vec<usize> = (0..count).map(|_| rng::uniform_other(rng, n, i)).collect();
        self.charge(count as u64);
        if self.workers > 1 && count >= PARALLEL_MIN_BATCH {
            out.par_extend(partners.par_iter().map(|&j| self.raw(i, j)));
        } else {
            out.extend(partners.iter().map(|&j| self.raw(i, j)));
        }
        Ok(())
    }

    /// Exact mean distance from `i` to every other point, charged as `n - 1`
    /// evaluations. Zero for a single point.
    pub fn exact_mean(&self, i: usize) -> Result<f64> {
        self.check_index(i)?;
        let n = self.n();
        if n < 2 {
            return Ok(0.0);
        }
        self.charge((n - 1) as u64);
        let total: f64 = if self.workers > 1 && n >= PARALLEL_MIN_BATCH {
            let row: Vec<f64> = (0..n)
                .into_par_iter()
                .filter(|&j| j != i)
                .map(|j| self.raw(i, j))
                .collect();
            row.iter().sum()
        } else {
            (0..n).filter(|&j| j != i).map(|j| self.raw(i, j)).sum()
        };
        Ok(total / (n - 1) as f64)
    }
}
