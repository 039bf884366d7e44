//! Reference algorithms: exhaustive computation and fixed-budget sampling.

use rand::RngCore;

use crate::bandit::{ArmState, MedoidResult, StopReason};
use crate::error::{Error, Result};
use crate::oracle::DistanceOracle;

fn argmin(means: &[f64]) -> usize {
    let mut best = 0;
    for (i, &m) in means.iter().enumerate().skip(1) {
        if m < means[best] {
            best = i;
        }
    }
    best
}

/// Exact medoid from all `n(n - 1)` distances. Ties go to the lowest index.
pub fn brute_force_medoid(oracle: &DistanceOracle<'_>) -> Result<MedoidResult> {
    let n = oracle.n();
    let start = oracle.eval_count();
    let means = (0..n).map(|i| oracle.exact_mean(i)).collect::<Result<Vec<_>>>()?;
    let best = argmin(&means);
    let pulls = (n - 1) as u64;
    Ok(MedoidResult {
        medoid_index: best,
        mu_estimate: means[best],
        total_evaluations: oracle.eval_count() - start,
        per_arm_pulls: vec![pulls; n],
        stopped_by: StopReason::Exhaustive,
        arms_final: means
            .iter()
            .enumerate()
            .map(|(index, &mu)| ArmState {
                index,
                pulls,
                sum_of_samples: mu * pulls as f64,
                mu_hat: mu,
                radius: 0.0,
                exact: true,
            })
            .collect(),
        iterations: 0,
        sigma: None,
        sigma_evaluations: 0,
    })
}

/// RAND: `budget_per_point` with-replacement samples for every point, then
/// the smallest empirical mean. No stopping rule.
pub fn rand_medoid<R: RngCore + ?Sized>(
    oracle: &DistanceOracle<'_>,
    budget_per_point: usize,
    rng: &mut R,
) -> Result<MedoidResult> {
    let n = oracle.n();
    if n < 2 {
        return Err(Error::invalid("RAND needs at least two points"));
    }
    if budget_per_point == 0 {
        return Err(Error::invalid("RAND needs a budget of at least one sample per point"));
    }
    let start = oracle.eval_count();
    let mut draws = Vec::with_capacity(budget_per_point);
    let mut arms = Vec::with_capacity(n);
    for i in 0..n {
        draws.clear();
        oracle.sample_batch(i, budget_per_point, rng, &mut draws)?;
        let sum: f64 = draws.iter().sum();
        arms.push(ArmState {
            index: i,
            pulls: budget_per_point as u64,
            sum_of_samples: sum,
            mu_hat: sum / budget_per_point as f64,
            radius: f64::INFINITY,
            exact: false,
        });
    }
    let means: Vec<f64> = arms.iter().map(|a| a.mu_hat).collect();
    let best = argmin(&means);
    Ok(MedoidResult {
        medoid_index: best,
        mu_estimate: means[best],
        total_evaluations: oracle.eval_count() - start,
        per_arm_pulls: vec![budget_per_point as u64; n],
        stopped_by: StopReason::Budget,
        arms_final: arms,
        iterations: 0,
        sigma: None,
        sigma_evaluations: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{gen_adversarial, gen_gaussian_points, PointSet};
    use crate::metrics::Metric;
    use crate::rng::stream;

    fn scalars(xs: &[f64]) -> PointSet {
        PointSet::dense(xs.iter().map(|&x| vec![x]).collect()).unwrap()
    }

    #[test]
    fn brute_force_examples() {
        let p = scalars(&[0.0, 1.0, 10.0]);
        let oracle = DistanceOracle::new(&p, Metric::L1);
        let r = brute_force_medoid(&oracle).unwrap();
        assert_eq!((r.medoid_index, r.mu_estimate, r.total_evaluations), (1, 5.0, 6));

        let p = scalars(&[3.0]);
        let r = brute_force_medoid(&DistanceOracle::new(&p, Metric::L1)).unwrap();
        assert_eq!((r.medoid_index, r.total_evaluations), (0, 0));

        let inst = gen_adversarial(50, 3).unwrap();
        let r = brute_force_medoid(&DistanceOracle::new(&inst.points, Metric::L1)).unwrap();
        assert_eq!(r.medoid_index, inst.planted);
        assert_eq!(r.total_evaluations, 50 * 49);
    }

    #[test]
    fn brute_force_is_seed_independent() {
        let p = gen_gaussian_points(40, 3, 1).unwrap();
        let a = brute_force_medoid(&DistanceOracle::new(&p, Metric::L2)).unwrap();
        let b = brute_force_medoid(&DistanceOracle::new(&p, Metric::L2)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rand_with_large_budget_is_consistent() {
        let p = scalars(&[0.0, 1.0, 10.0]);
        let oracle = DistanceOracle::new(&p, Metric::L1);
        let hits = (0..100)
            .filter(|&s| rand_medoid(&oracle, 100_000, &mut stream(s, 0)).unwrap().medoid_index == 1)
            .count();
        assert!(hits >= 99);
    }

    #[test]
    fn rand_budget_one_two_points_and_ties() {
        let m = PointSet::matrix(vec![vec![0.0, 2.0], vec![1.0, 0.0]]).unwrap();
        let oracle = DistanceOracle::new(&m, Metric::L1);
        let r = rand_medoid(&oracle, 1, &mut stream(4, 0)).unwrap();
        assert_eq!(r.medoid_index, 1);
        assert_eq!(r, rand_medoid(&oracle, 1, &mut stream(4, 0)).unwrap());

        let flat = PointSet::matrix(vec![vec![1.0; 5]; 5]).unwrap();
        let oracle = DistanceOracle::new(&flat, Metric::L1);
        assert_eq!(rand_medoid(&oracle, 3, &mut stream(0, 0)).unwrap().medoid_index, 0);
    }

    #[test]
    fn rand_charges_exactly_n_times_budget() {
        let p = gen_gaussian_points(37, 2, 0).unwrap();
        let oracle = DistanceOracle::new(&p, Metric::L1);
        let r = rand_medoid(&oracle, 13, &mut stream(0, 0)).unwrap();
        assert_eq!(r.total_evaluations, 37 * 13);
        assert_eq!(oracle.eval_count(), 37 * 13);
        assert!(rand_medoid(&oracle, 0, &mut stream(0, 0)).is_err());
        let single = scalars(&[1.0]);
        assert!(rand_medoid(&DistanceOracle::new(&single, Metric::L1), 3, &mut stream(0, 0)).is_err());
    }

    #[test]
    fn rand_error_shrinks_with_budget() {
        let p = gen_gaussian_points(60, 4, 12).unwrap();
        let oracle = DistanceOracle::new(&p, Metric::L1);
        let truth = brute_force_medoid(&oracle).unwrap().medoid_index;
        let errors: Vec<usize> = [2usize, 8, 32, 128]
            .iter()
            .map(|&b| {
                (0..200)
                    .filter(|&s| rand_medoid(&oracle, b, &mut stream(s, 0)).unwrap().medoid_index != truth)
                    .count()
            })
            .collect();
        let inversions = errors.windows(2).filter(|w| w[1] > w[0]).count();
        assert!(inversions <= 1, "{errors:?}");
        assert!(errors[3] < errors[0], "{errors:?}");
    }
}
