//! Monte Carlo harness for error-vs-budget curves, stopping statistics and
//! under-consideration traces. Output tables are plain CSV with fixed
//! headers.
//!
//! Trial `t` is seeded with `seed + t`; see [`crate::rng`] for the stream
//! layout. Trials run on the current rayon pool when `workers > 1` and are
//! collected in trial order, so every table is independent of the worker
//! count.

use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::bandit::{BanditConfig, Estimator, Meddit, MedoidResult, Sigma, Snapshot};
use crate::baselines::{brute_force_medoid, rand_medoid};
use crate::dataset::PointSet;
use crate::error::{Error, Result};
use crate::metrics::Metric;
use crate::oracle::DistanceOracle;
use crate::rng::{self, StreamRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Meddit,
    MedditCatoni,
    Rand,
    Brute,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Meddit => "meddit",
            Algorithm::MedditCatoni => "meddit-catoni",
            Algorithm::Rand => "rand",
            Algorithm::Brute => "brute",
        }
    }

    fn is_bandit(self) -> bool {
        matches!(self, Algorithm::Meddit | Algorithm::MedditCatoni)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Algorithm::Meddit,
            Algorithm::MedditCatoni,
            Algorithm::Rand,
            Algorithm::Brute,
        ]
        .into_iter()
        .find(|a| a.name() == s)
        .ok_or_else(|| {
            Error::invalid(format!(
                "unknown algorithm {s:?} (expected meddit, meddit-catoni, rand or brute)"
            ))
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorCurve {
    pub algorithm: String,
    pub dataset_id: String,
    pub budgets: Vec<u64>,
    pub error_rates: Vec<f64>,
    pub trials: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StoppingStats {
    pub dataset_id: String,
    pub delta: f64,
    pub trials: u64,
    pub avg_pulls_per_point: f64,
    pub max_pulls_per_point: u64,
    pub failures: u64,
    /// Search evaluations per trial, sigma estimation excluded.
    pub per_trial_evaluations: Vec<u64>,
    pub sigma: f64,
    pub sigma_evaluations: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsiderationTrace {
    /// `(iteration, arms under consideration)` for each checkpoint reached.
    pub checkpoints: Vec<(u64, u64)>,
    /// Iteration at which the run stopped.
    pub stopped_at: u64,
}

/// Sigma shared by all trials of a harness, with its one-off cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaEstimate {
    pub sigma: f64,
    pub evaluations: u64,
}

pub struct Harness<'a> {
    pub points: &'a PointSet,
    pub metric: Metric,
    pub dataset_id: String,
    pub config: BanditConfig,
    pub seed: u64,
    pub workers: usize,
}

impl<'a> Harness<'a> {
    pub fn new(points: &'a PointSet, metric: Metric, dataset_id: impl Into<String>) -> Self {
        Harness {
            points,
            metric,
            dataset_id: dataset_id.into(),
            config: BanditConfig::default(),
            seed: 0,
            workers: 1,
        }
    }

    pub fn with_config(mut self, config: BanditConfig) -> Self {
        self.config = config;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }

    fn oracle(&self) -> DistanceOracle<'a> {
        DistanceOracle::new(self.points, self.metric)
    }

    /// Brute-force medoid; its evaluations are not part of any table.
    pub fn truth(&self) -> Result<usize> {
        Ok(brute_force_medoid(&self.oracle().with_workers(self.workers))?.medoid_index)
    }

    pub fn resolve_sigma(&self) -> Result<SigmaEstimate> {
        match self.config.sigma {
            Sigma::Fixed(sigma) => Ok(SigmaEstimate {
                sigma,
                evaluations: 0,
            }),
            Sigma::Estimate { points, samples } => {
                let oracle = self.oracle();
                let mut rng = rng::stream(self.seed, rng::STREAM_SIGMA);
                let sigma = crate::bandit::estimate_sigma(&oracle, points, samples, &mut rng)?;
                Ok(SigmaEstimate {
                    sigma,
                    evaluations: oracle.eval_count(),
                })
            }
        }
    }

    fn bandit_config(&self, algorithm: Algorithm, sigma: f64) -> BanditConfig {
        let estimator = match algorithm {
            Algorithm::MedditCatoni => Estimator::Catoni,
            _ => Estimator::EmpiricalMean,
        };
        self.config
            .clone()
            .with_sigma(Sigma::Fixed(sigma))
            .with_estimator(estimator)
    }

    fn run_trials<T, F>(&self, trials: u64, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(u64) -> Result<T> + Sync,
    {
        if self.workers > 1 {
            (0..trials).into_par_iter().map(&f).collect()
        } else {
            (0..trials).map(f).collect()
        }
    }

    /// One truncated or budgeted run at `budget` pulls per point.
    fn budgeted_run(
        &self,
        algorithm: Algorithm,
        config: &BanditConfig,
        budget: u64,
        rng: &mut StreamRng,
    ) -> Result<MedoidResult> {
        let oracle = self.oracle();
        let n = self.points.len() as u64;
        match algorithm {
            Algorithm::Rand => rand_medoid(&oracle, budget as usize, rng),
            Algorithm::Brute => brute_force_medoid(&oracle),
            Algorithm::Meddit | Algorithm::MedditCatoni => Meddit::new(&oracle, config)
                .truncate_at(budget.saturating_mul(n))
                .run(rng),
        }
    }

    /// Error probability against `truth` at each per-point budget. Med-dit
    /// ignores its stopping rule and is cut off at `budget * n` evaluations.
    pub fn error_curve(
        &self,
        algorithm: Algorithm,
        budgets: &[u64],
        trials: u64,
        truth: usize,
    ) -> Result<ErrorCurve> {
        if trials == 0 {
            return Err(Error::invalid("need at least one trial"));
        }
        if budgets.contains(&0) {
            return Err(Error::invalid("budgets must be positive"));
        }
        let sigma = if algorithm.is_bandit() {
            self.resolve_sigma()?.sigma
        } else {
            1.0
        };
        let config = self.bandit_config(algorithm, sigma);
        let mut error_rates = Vec::with_capacity(budgets.len());
        for (k, &budget) in budgets.iter().enumerate() {
            let stream_id = rng::STREAM_BUDGET_BASE + k as u64;
            let wrong = self.run_trials(trials, |t| {
                let mut rng = rng::trial_stream(self.seed, t, stream_id);
                let r = self.budgeted_run(algorithm, &config, budget, &mut rng)?;
                Ok(r.medoid_index != truth)
            })?;
            let failures = wrong.iter().filter(|&&w| w).count();
            error_rates.push(failures as f64 / trials as f64);
        }
        Ok(ErrorCurve {
            algorithm: algorithm.name().to_string(),
            dataset_id: self.dataset_id.clone(),
            budgets: budgets.to_vec(),
            error_rates,
            trials,
        })
    }

    /// Full Med-dit runs with the stopping rule enabled.
    pub fn stopping_stats(&self, algorithm: Algorithm, trials: u64, truth: usize) -> Result<StoppingStats> {
        if trials == 0 {
            return Err(Error::invalid("need at least one trial"));
        }
        if !algorithm.is_bandit() {
            return Err(Error::invalid(format!("{algorithm} has no stopping rule")));
        }
        let n = self.points.len() as u64;
        let sigma = self.resolve_sigma()?;
        let config = self.bandit_config(algorithm, sigma.sigma);
        let outcomes = self.run_trials(trials, |t| {
            let mut rng = rng::trial_stream(self.seed, t, rng::STREAM_ALGORITHM);
            let oracle = self.oracle();
            let r = Meddit::new(&oracle, &config).run(&mut rng)?;
            debug_assert_eq!(r.total_evaluations, oracle.eval_count());
            Ok((r.search_evaluations(), r.medoid_index != truth))
        })?;
        let per_trial_evaluations: Vec<u64> = outcomes.iter().map(|o| o.0).collect();
        let total: u64 = per_trial_evaluations.iter().sum();
        Ok(StoppingStats {
            dataset_id: self.dataset_id.clone(),
            delta: self.config.delta,
            trials,
            avg_pulls_per_point: total as f64 / (trials * n) as f64,
            max_pulls_per_point: per_trial_evaluations.iter().map(|&e| e.div_ceil(n)).max().unwrap_or(0),
            failures: outcomes.iter().filter(|o| o.1).count() as u64,
            per_trial_evaluations,
            sigma: sigma.sigma,
            sigma_evaluations: sigma.evaluations,
        })
    }

    /// Number of arms under consideration at each requested iteration of a
    /// single run (trial 0). Checkpoints past the stopping iteration are
    /// omitted.
    pub fn consideration_trace(&self, algorithm: Algorithm, checkpoints: &[u64]) -> Result<ConsiderationTrace> {
        if !algorithm.is_bandit() {
            return Err(Error::invalid(format!("{algorithm} has no confidence intervals to trace")));
        }
        let mut wanted = checkpoints.to_vec();
        wanted.sort_unstable();
        wanted.dedup();
        let sigma = self.resolve_sigma()?.sigma;
        let config = self.bandit_config(algorithm, sigma);
        let oracle = self.oracle().with_workers(self.workers);
        let mut rng = rng::trial_stream(self.seed, 0, rng::STREAM_ALGORITHM);
        let mut recorded = Vec::new();
        let mut observer = |s: &Snapshot<'_>| {
            if wanted.binary_search(&s.iteration).is_ok() {
                recorded.push((s.iteration, s.under_consideration() as u64));
            }
        };
        let result = Meddit::new(&oracle, &config).observe(&mut observer).run(&mut rng)?;
        Ok(ConsiderationTrace {
            checkpoints: recorded,
            stopped_at: result.iterations,
        })
    }
}

/// Tables with a fixed CSV layout.
pub trait CsvTable: Sized {
    const HEADER: &'static str;

    fn to_csv(&self) -> Result<String>;

    fn from_csv(text: &str) -> Result<Self>;

    fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()?).map_err(|e| Error::io(path, e))
    }
}

fn check_field(name: &str) -> Result<&str> {
    if name.contains([',', '\n', '\r']) {
        Err(Error::invalid(format!("CSV field {name:?} contains a separator")))
    } else {
        Ok(name)
    }
}

/// Data rows of `text` after checking the header, split into fields.
fn csv_body<'t>(text: &'t str, header: &str, width: usize) -> Result<Vec<(usize, Vec<&'t str>)>> {
    let mut lines = text.lines().map(|l| l.strip_suffix('\r').unwrap_or(l));
    match lines.next() {
        Some(h) if h == header => {}
        other => return Err(Error::parse(1, format!("expected header {header:?}, got {other:?}"))),
    }
    lines
        .enumerate()
        .map(|(k, line)| {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != width {
                return Err(Error::parse(k + 2, format!("expected {width} fields, got {}", fields.len())));
            }
            Ok((k + 2, fields))
        })
        .collect()
}

fn field<T: FromStr>(value: &str, line: usize) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::parse(line, format!("cannot parse field {value:?}")))
}

impl CsvTable for ErrorCurve {
    const HEADER: &'static str = "algorithm,dataset,budget_per_point,error_rate,trials";

    fn to_csv(&self) -> Result<String> {
        if self.budgets.len() != self.error_rates.len() {
            return Err(Error::invalid("budgets and error rates differ in length"));
        }
        let (algorithm, dataset) = (check_field(&self.algorithm)?, check_field(&self.dataset_id)?);
        let mut out = format!("{}\n", Self::HEADER);
        for (b, e) in self.budgets.iter().zip(&self.error_rates) {
            writeln!(out, "{algorithm},{dataset},{b},{e},{}", self.trials).unwrap();
        }
        Ok(out)
    }

    fn from_csv(text: &str) -> Result<Self> {
        let rows = csv_body(text, Self::HEADER, 5)?;
        let mut curve = ErrorCurve {
            algorithm: String::new(),
            dataset_id: String::new(),
            budgets: Vec::new(),
            error_rates: Vec::new(),
            trials: 0,
        };
        for (line, f) in rows {
            curve.algorithm = f[0].to_string();
            curve.dataset_id = f[1].to_string();
            curve.budgets.push(field(f[2], line)?);
            curve.error_rates.push(field(f[3], line)?);
            curve.trials = field(f[4], line)?;
        }
        Ok(curve)
    }
}

impl CsvTable for StoppingStats {
    const HEADER: &'static str = "dataset,delta,trials,avg_pulls_per_point,max_pulls_per_point,failures";

    fn to_csv(&self) -> Result<String> {
        Ok(format!(
            "{}\n{},{},{},{},{},{}\n",
            Self::HEADER,
            check_field(&self.dataset_id)?,
            self.delta,
            self.trials,
            self.avg_pulls_per_point,
            self.max_pulls_per_point,
            self.failures
        ))
    }

    /// Only the tabulated fields are recovered; per-trial detail and sigma
    /// are left empty.
    fn from_csv(text: &str) -> Result<Self> {
        let rows = csv_body(text, Self::HEADER, 6)?;
        let [(line, f)] = rows.as_slice() else {
            return Err(Error::parse(2, format!("expected exactly one data row, got {}", rows.len())));
        };
        let line = *line;
        Ok(StoppingStats {
            dataset_id: f[0].to_string(),
            delta: field(f[1], line)?,
            trials: field(f[2], line)?,
            avg_pulls_per_point: field(f[3], line)?,
            max_pulls_per_point: field(f[4], line)?,
            failures: field(f[5], line)?,
            per_trial_evaluations: Vec::new(),
            sigma: f64::NAN,
            sigma_evaluations: 0,
        })
    }
}

impl CsvTable for ConsiderationTrace {
    const HEADER: &'static str = "iteration,under_consideration";

    fn to_csv(&self) -> Result<String> {
        let mut out = format!("{}\n", Self::HEADER);
        for (it, count) in &self.checkpoints {
            writeln!(out, "{it},{count}").unwrap();
        }
        Ok(out)
    }

    /// `stopped_at` is not part of the table and comes back as 0.
    fn from_csv(text: &str) -> Result<Self> {
        let checkpoints = csv_body(text, Self::HEADER, 2)?
            .into_iter()
            .map(|(line, f)| Ok((field(f[0], line)?, field(f[1], line)?)))
            .collect::<Result<_>>()?;
        Ok(ConsiderationTrace {
            checkpoints,
            stopped_at: 0,
        })
    }
}

/// Writes any harness table to `path`, replacing an existing file.
pub fn write_curve_csv(table: &impl CsvTable, path: impl AsRef<Path>) -> Result<()> {
    table.write_csv(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::gen_gaussian_points;
    use proptest::prelude::*;

    fn scalars(xs: &[f64]) -> PointSet {
        PointSet::dense(xs.iter().map(|&x| vec![x]).collect()).unwrap()
    }

    #[test]
    fn curve_csv_schema() {
        let curve = ErrorCurve {
            algorithm: "X".into(),
            dataset_id: "Y".into(),
            budgets: vec![1],
            error_rates: vec![0.5],
            trials: 2,
        };
        assert_eq!(
            curve.to_csv().unwrap(),
            "algorithm,dataset,budget_per_point,error_rate,trials\nX,Y,1,0.5,2\n"
        );
        let empty = ErrorCurve { budgets: vec![], error_rates: vec![], ..curve.clone() };
        assert_eq!(empty.to_csv().unwrap(), format!("{}\n", ErrorCurve::HEADER));
        let bad = ErrorCurve { dataset_id: "a,b".into(), ..curve };
        assert!(bad.to_csv().is_err());
    }

    #[test]
    fn files_are_overwritten() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        std::fs::write(&path, "garbage\n".repeat(100)).unwrap();
        let trace = ConsiderationTrace { checkpoints: vec![(0, 4), (10, 2)], stopped_at: 12 };
        write_curve_csv(&trace, &path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "iteration,under_consideration\n0,4\n10,2\n");
    }

    #[test]
    fn scalar_instance_saturates() {
        let p = scalars(&[0.0, 1.0, 10.0]);
        let h = Harness::new(&p, Metric::L1, "scalars").with_seed(3);
        let truth = h.truth().unwrap();
        assert_eq!(truth, 1);
        let curve = h.error_curve(Algorithm::Meddit, &[50], 50, truth).unwrap();
        assert_eq!(curve.error_rates, vec![0.0]);
        let stats = h.stopping_stats(Algorithm::Meddit, 100, truth).unwrap();
        assert_eq!(stats.failures, 0);
        assert!(stats.avg_pulls_per_point <= stats.max_pulls_per_point as f64);
    }

    #[test]
    fn rand_budget_one_errs_on_near_tie() {
        let p = scalars(&[0.0, 1.0, 1.05, 2.0, 2.1]);
        let h = Harness::new(&p, Metric::L1, "near-tie");
        let truth = h.truth().unwrap();
        let curve = h.error_curve(Algorithm::Rand, &[1], 200, truth).unwrap();
        assert!(curve.error_rates[0] > 0.0);
    }

    #[test]
    fn two_points_cost_at_most_four() {
        let p = scalars(&[0.0, 5.0]);
        let h = Harness::new(&p, Metric::L1, "pair").with_config(BanditConfig::default().with_sigma(Sigma::Fixed(1.0)));
        let stats = h.stopping_stats(Algorithm::Meddit, 10, 0).unwrap();
        assert!(stats.per_trial_evaluations.iter().all(|&e| e <= 4));
    }

    #[test]
    fn trace_bounds_and_final_count() {
        let p = gen_gaussian_points(200, 10, 3).unwrap();
        let h = Harness::new(&p, Metric::L1, "g");
        let first = h.consideration_trace(Algorithm::Meddit, &[0]).unwrap();
        assert_eq!(first.checkpoints.len(), 1);
        assert!(first.checkpoints[0].1 <= 200 && first.checkpoints[0].1 >= 1);
        let stop = first.stopped_at;
        let checkpoints: Vec<u64> = vec![0, stop / 4, stop / 2, stop, stop + 10];
        let trace = h.consideration_trace(Algorithm::Meddit, &checkpoints).unwrap();
        assert_eq!(trace.checkpoints.len(), 4);
        assert!(trace.checkpoints.iter().all(|&(_, c)| (1..=200).contains(&c)));
        assert_eq!(trace.checkpoints.last().unwrap(), &(stop, 1));
        assert!(h.consideration_trace(Algorithm::Rand, &[0]).is_err());
    }

    #[test]
    fn truncated_runs_charge_min_of_natural_and_budget() {
        let p = gen_gaussian_points(60, 5, 2).unwrap();
        let config = BanditConfig::default().with_sigma(Sigma::Fixed(3.0));
        let n = 60u64;
        for b in [1u64, 3, 10, 500] {
            let oracle = DistanceOracle::new(&p, Metric::L1);
            let r = Meddit::new(&oracle, &config).truncate_at(b * n).run(&mut rng::stream(0, 0)).unwrap();
            assert_eq!(r.total_evaluations, oracle.eval_count());
            assert!(r.total_evaluations <= b * n);
            // either the budget is spent, or an exact computation would not fit,
            // or the run converged on an exact arm
            let spent = r.total_evaluations == b * n;
            let exact_blocked = b * n - r.total_evaluations < n - 1;
            let converged = r.arms_final[r.medoid_index].exact;
            assert!(spent || exact_blocked || converged, "b={b}");
        }
    }

    #[test]
    fn workers_do_not_change_tables() {
        let p = gen_gaussian_points(120, 8, 6).unwrap();
        let run = |workers| {
            let h = Harness::new(&p, Metric::L2, "g").with_seed(9).with_workers(workers);
            let truth = h.truth().unwrap();
            (
                h.error_curve(Algorithm::Meddit, &[2, 8], 12, truth).unwrap().to_csv().unwrap(),
                h.error_curve(Algorithm::Rand, &[2, 8], 12, truth).unwrap().to_csv().unwrap(),
                h.stopping_stats(Algorithm::Meddit, 12, truth).unwrap(),
            )
        };
        let seq = run(1);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        assert_eq!(seq, pool.install(|| run(4)));
    }

    #[test]
    fn unknown_algorithm_name() {
        assert!("foo".parse::<Algorithm>().is_err());
        assert_eq!("meddit-catoni".parse::<Algorithm>().unwrap(), Algorithm::MedditCatoni);
    }

    proptest! {
        #[test]
        fn curve_round_trip(rows in proptest::collection::vec((1u64..10_000, 0u64..=500), 0..8), trials in 1u64..=500) {
            let curve = ErrorCurve {
                algorithm: "rand".into(),
                dataset_id: "ds".into(),
                budgets: rows.iter().map(|r| r.0).collect(),
                error_rates: rows.iter().map(|r| (r.1.min(trials)) as f64 / trials as f64).collect(),
                trials,
            };
            let back = ErrorCurve::from_csv(&curve.to_csv().unwrap()).unwrap();
            prop_assert_eq!(&back.budgets, &curve.budgets);
            prop_assert_eq!(&back.error_rates, &curve.error_rates);
            if !rows.is_empty() {
                prop_assert_eq!(back, curve);
            }
        }

        #[test]
        fn stats_round_trip(avg in 0.0..1e4f64, max in 0u64..100_000, failures in 0u64..100, delta in 1e-9..0.5f64) {
            let stats = StoppingStats {
                dataset_id: "d".into(), delta, trials: 100, avg_pulls_per_point: avg,
                max_pulls_per_point: max, failures, per_trial_evaluations: vec![], sigma: 1.0, sigma_evaluations: 0,
            };
            let back = StoppingStats::from_csv(&stats.to_csv().unwrap()).unwrap();
            prop_assert_eq!((back.delta, back.avg_pulls_per_point, back.max_pulls_per_point, back.failures),
                            (delta, avg, max, failures));
        }
    }
}
