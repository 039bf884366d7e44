use std::cmp::Ordering;
use std::collections::BTreeSet;

use rand::RngCore;

use crate::error::Result;
use crate::oracle::DistanceOracle;

use super::arm::ArmState;
use super::catoni::{catoni_estimate, catoni_radius, catoni_warmup};
use super::config::{BanditConfig, Estimator, MedoidResult, Sigma, StopReason};
use super::confidence::{estimate_sigma, radius};

/// Full adaptive search with the running-mean estimator, honouring
/// `config.estimator` (use [`meddit_catoni`] to force the robust variant).
pub fn meddit<R: RngCore + ?Sized>(
    oracle: &DistanceOracle<'_>,
    config: &BanditConfig,
    rng: &mut R,
) -> Result<MedoidResult> {
    Meddit::new(oracle, config).run(rng)
}

/// The search with Catoni mean estimates and a `ceil(4 ln(1/delta))` pull
/// warm-up per arm.
pub fn meddit_catoni<R: RngCore + ?Sized>(
    oracle: &DistanceOracle<'_>,
    config: &BanditConfig,
    rng: &mut R,
) -> Result<MedoidResult> {
    let config = config.clone().with_estimator(Estimator::Catoni);
    Meddit::new(oracle, &config).run(rng)
}

/// State of all arms, handed to observers after initialisation (iteration 0)
/// and after every iteration.
pub struct Snapshot<'s> {
    pub iteration: u64,
    pub arms: &'s [ArmState],
    pub min_ucb: f64,
}

impl Snapshot<'_> {
    /// Arms whose lower bound does not exceed the smallest upper bound, i.e.
    /// the arms that could still be the medoid. Always at least one.
    pub fn under_consideration(&self) -> usize {
        self.arms.iter().filter(|a| a.lcb() <= self.min_ucb).count()
    }
}

type Observer<'f> = dyn FnMut(&Snapshot<'_>) + 'f;

/// Configurable run of the search. Beyond the plain algorithm it supports
/// truncation at an evaluation budget with the stopping rule switched off,
/// and an observer hook.
pub struct Meddit<'o, 'a, 'f> {
    oracle: &'o DistanceOracle<'a>,
    config: &'o BanditConfig,
    budget: Option<u64>,
    observer: Option<&'f mut Observer<'f>>,
}

impl<'o, 'a, 'f> Meddit<'o, 'a, 'f> {
    pub fn new(oracle: &'o DistanceOracle<'a>, config: &'o BanditConfig) -> Self {
        Meddit {
            oracle,
            config,
            budget: None,
            observer: None,
        }
    }

    /// Ignore the stopping rule and end once `evaluations` distances (sigma
    /// estimation excluded) have been charged, returning the arm with the
    /// smallest mean estimate. An exact computation that would overrun the
    /// budget ends the run instead. Re-selecting an exact arm also ends it,
    /// since no further progress is possible.
    pub fn truncate_at(mut self, evaluations: u64) -> Self {
        self.budget = Some(evaluations);
        self
    }

    pub fn observe(mut self, observer: &'f mut Observer<'f>) -> Self {
        self.observer = Some(observer);
        self
    }

    pub fn run<R: RngCore + ?Sized>(mut self, rng: &mut R) -> Result<MedoidResult> {
        self.config.validate()?;
        let oracle = self.oracle;
        let n = oracle.n();
        if n == 1 {
            return Ok(MedoidResult {
                medoid_index: 0,
                mu_estimate: 0.0,
                total_evaluations: 0,
                per_arm_pulls: vec![0],
                stopped_by: StopReason::Stopping,
                arms_final: vec![ArmState {
                    pulls: 0,
                    mu_hat: 0.0,
                    radius: 0.0,
                    exact: true,
                    ..ArmState::new(0)
                }],
                iterations: 0,
                sigma: None,
                sigma_evaluations: 0,
            });
        }

        let start = oracle.eval_count();
        let sigma = match self.config.sigma {
            Sigma::Fixed(s) => s,
            Sigma::Estimate { points, samples } => estimate_sigma(oracle, points, samples, rng)?,
        };
        let sigma_evaluations = oracle.eval_count() - start;

        let mut arms = ArmSet::new(n, sigma, self.config);
        let mut charged: u64 = 0;
        let mut scratch = Vec::new();
        let exact_cost = (n - 1) as u64;

        let warmup = match self.config.estimator {
            Estimator::EmpiricalMean => 1,
            Estimator::Catoni => catoni_warmup(self.config.delta).max(1),
        };
        let init_pulls = warmup.min(n - 1);
        for i in 0..n {
            scratch.clear();
            oracle.sample_batch(i, init_pulls, rng, &mut scratch)?;
            charged += init_pulls as u64;
            arms.add_samples(i, &scratch)?;
        }
        if init_pulls < warmup {
            // too few partners for the estimator to be defined
            for i in 0..n {
                arms.make_exact(i, oracle.exact_mean(i)?);
                charged += exact_cost;
            }
        }
        self.notify(0, &arms);

        let mut iteration: u64 = 0;
        let (index, reason) = loop {
            if self.config.max_iterations.is_some_and(|cap| iteration >= cap) {
                break (arms.argmin_ucb(), StopReason::IterationCap);
            }
            let remaining = self.budget.map(|b| b.saturating_sub(charged));
            if remaining == Some(0) {
                break (arms.argmin_mean(), StopReason::Budget);
            }
            iteration += 1;

            let selected = arms.argmin_lcb();
            let pulls = arms.get(selected).pulls;
            if arms.get(selected).exact {
                break match self.budget {
                    None => (selected, StopReason::Stopping),
                    Some(_) => (arms.argmin_mean(), StopReason::Budget),
                };
            }
            if pulls < exact_cost {
                let mut count = self.config.batch.min((exact_cost - pulls) as usize) as u64;
                if let Some(r) = remaining {
                    count = count.min(r);
                }
                scratch.clear();
                oracle.sample_batch(selected, count as usize, rng, &mut scratch)?;
                charged += count;
                arms.add_samples(selected, &scratch)?;
            } else {
                if remaining.is_some_and(|r| r < exact_cost) {
                    break (arms.argmin_mean(), StopReason::Budget);
                }
                arms.make_exact(selected, oracle.exact_mean(selected)?);
                charged += exact_cost;
            }
            self.notify(iteration, &arms);

            if self.budget.is_none() {
                if let Some(best) = arms.separated() {
                    break (best, StopReason::Stopping);
                }
            }
        };

        let total_evaluations = oracle.eval_count() - start;
        debug_assert_eq!(total_evaluations, charged + sigma_evaluations);
        let arms_final = arms.into_arms();
        Ok(MedoidResult {
            medoid_index: index,
            mu_estimate: arms_final[index].mu_hat,
            total_evaluations,
            per_arm_pulls: arms_final.iter().map(|a| a.pulls).collect(),
            stopped_by: reason,
            arms_final,
            iterations: iteration,
            sigma: Some(sigma),
            sigma_evaluations,
        })
    }

    fn notify(&mut self, iteration: u64, arms: &ArmSet) {
        if let Some(observer) = self.observer.as_mut() {
            let snapshot = Snapshot {
                iteration,
                arms: &arms.arms,
                min_ucb: arms.get(arms.argmin_ucb()).ucb(),
            };
            observer(&snapshot);
        }
    }
}

/// Totally ordered bound value; bounds are never NaN.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Bound(f64);

impl Eq for Bound {}

impl PartialOrd for Bound {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Bound {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.partial_cmp(&other.0).expect("confidence bound is NaN")
    }
}

/// Arms plus ordered indexes of their lower and upper bounds. Ties resolve
/// to the lowest point index.
struct ArmSet<'c> {
    arms: Vec<ArmState>,
    by_lcb: BTreeSet<(Bound, usize)>,
    by_ucb: BTreeSet<(Bound, usize)>,
    samples: Vec<Vec<f64>>,
    sigma: f64,
    config: &'c BanditConfig,
}

impl<'c> ArmSet<'c> {
    fn new(n: usize, sigma: f64, config: &'c BanditConfig) -> Self {
        let keep_samples = config.estimator == Estimator::Catoni;
        ArmSet {
            arms: (0..n).map(ArmState::new).collect(),
            by_lcb: BTreeSet::new(),
            by_ucb: BTreeSet::new(),
            samples: if keep_samples { vec![Vec::new(); n] } else { Vec::new() },
            sigma,
            config,
        }
    }

    fn get(&self, i: usize) -> &ArmState {
        &self.arms[i]
    }

    fn unindex(&mut self, i: usize) {
        let arm = &self.arms[i];
        if arm.pulls > 0 {
            self.by_lcb.remove(&(Bound(arm.lcb()), i));
            self.by_ucb.remove(&(Bound(arm.ucb()), i));
        }
    }

    fn reindex(&mut self, i: usize) {
        let arm = &self.arms[i];
        self.by_lcb.insert((Bound(arm.lcb()), i));
        self.by_ucb.insert((Bound(arm.ucb()), i));
    }

    fn add_samples(&mut self, i: usize, draws: &[f64]) -> Result<()> {
        if draws.is_empty() {
            return Ok(());
        }
        self.unindex(i);
        let (sigma, delta) = (self.sigma, self.config.delta);
        let arm = &mut self.arms[i];
        arm.pulls += draws.len() as u64;
        for &x in draws {
            arm.sum_of_samples += x;
        }
        match self.config.estimator {
            Estimator::EmpiricalMean => {
                arm.mu_hat = arm.sum_of_samples / arm.pulls as f64;
                arm.radius = radius(sigma, delta, arm.pulls);
            }
            Estimator::Catoni => {
                let history = &mut self.samples[i];
                history.extend_from_slice(draws);
                if history.len() >= catoni_warmup(delta) {
                    arm.mu_hat = catoni_estimate(history, sigma, delta)?;
                    arm.radius = catoni_radius(sigma, delta, arm.pulls);
                } else {
                    arm.mu_hat = arm.sum_of_samples / arm.pulls as f64;
                    arm.radius = f64::INFINITY;
                }
            }
        }
        self.reindex(i);
        Ok(())
    }

    fn make_exact(&mut self, i: usize, mean: f64) {
        self.unindex(i);
        let n = self.arms.len() as u64;
        let arm = &mut self.arms[i];
        arm.mu_hat = mean;
        arm.radius = 0.0;
        arm.pulls = 2 * (n - 1);
        arm.exact = true;
        if let Some(history) = self.samples.get_mut(i) {
            *history = Vec::new();
        }
        self.reindex(i);
    }

    fn argmin_lcb(&self) -> usize {
        self.by_lcb.first().expect("no arms").1
    }

    fn argmin_ucb(&self) -> usize {
        self.by_ucb.first().expect("no arms").1
    }

    fn argmin_mean(&self) -> usize {
        let mut best = 0;
        for (i, arm) in self.arms.iter().enumerate().skip(1) {
            if arm.mu_hat < self.arms[best].mu_hat {
                best = i;
            }
        }
        best
    }

    /// The arm whose upper bound is strictly below every other lower bound.
    fn separated(&self) -> Option<usize> {
        let (Bound(ucb), best) = *self.by_ucb.first()?;
        let min_other_lcb = self
            .by_lcb
            .iter()
            .find(|&&(_, i)| i != best)
            .map(|&(Bound(l), _)| l)?;
        (ucb < min_other_lcb).then_some(best)
    }

    fn into_arms(self) -> Vec<ArmState> {
        self.arms
    }
}
