use crate::error::{Error, Result};

use super::arm::ArmState;

/// How the global sub-Gaussian parameter is obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sigma {
    Fixed(f64),
    /// Estimated from `samples` draws at each of `points` random points;
    /// the cost is charged to the run.
    Estimate { points: usize, samples: usize },
}

impl Default for Sigma {
    fn default() -> Self {
        Sigma::Estimate {
            points: 1000,
            samples: 32,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Estimator {
    #[default]
    EmpiricalMean,
    Catoni,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BanditConfig {
    pub delta: f64,
    pub sigma: Sigma,
    /// `None` runs until the stopping rule fires.
    pub max_iterations: Option<u64>,
    pub estimator: Estimator,
    /// Samples drawn for the selected arm per iteration.
    pub batch: usize,
}

impl Default for BanditConfig {
    fn default() -> Self {
        BanditConfig {
            delta: 1e-3,
            sigma: Sigma::default(),
            max_iterations: None,
            estimator: Estimator::EmpiricalMean,
            batch: 1,
        }
    }
}

impl BanditConfig {
    /// The `delta = 2 / n^3` choice under which the sample-complexity bound
    /// holds with probability `1 - o(1)`.
    pub fn theorem_delta(n: usize) -> f64 {
        2.0 / (n as f64).powi(3)
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_sigma(mut self, sigma: Sigma) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn with_estimator(mut self, estimator: Estimator) -> Self {
        self.estimator = estimator;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::invalid(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        match self.sigma {
            Sigma::Fixed(s) if !(s > 0.0 && s.is_finite()) => {
                return Err(Error::invalid(format!("sigma must be positive, got {s}")));
            }
            Sigma::Estimate { points, samples } if points < 2 || samples < 2 => {
                return Err(Error::invalid("sigma estimation needs at least 2 points and 2 samples"));
            }
            _ => {}
        }
        if self.batch == 0 {
            return Err(Error::invalid("batch size must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// Confidence intervals separated, or an exact arm was selected again.
    Stopping,
    IterationCap,
    /// Evaluation budget exhausted (truncated runs and RAND).
    Budget,
    /// Every mean computed exactly (brute force).
    Exhaustive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MedoidResult {
    pub medoid_index: usize,
    pub mu_estimate: f64,
    /// All evaluations charged by the run, including sigma estimation.
    pub total_evaluations: u64,
    pub per_arm_pulls: Vec<u64>,
    pub stopped_by: StopReason,
    pub arms_final: Vec<ArmState>,
    /// Sampling iterations after initialisation.
    pub iterations: u64,
    pub sigma: Option<f64>,
    pub sigma_evaluations: u64,
}

impl MedoidResult {
    /// Evaluations excluding sigma estimation.
    pub fn search_evaluations(&self) -> u64 {
        self.total_evaluations - self.sigma_evaluations
    }

    pub fn evaluations_per_point(&self) -> f64 {
        self.total_evaluations as f64 / self.per_arm_pulls.len().max(1) as f64
    }
}
