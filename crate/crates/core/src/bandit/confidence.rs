use rand::seq::index;
use rand::RngCore;

use crate::error::{Error, Result};
use crate::oracle::DistanceOracle;

/// Lower bound on estimated sigma, returned when every sample is identical.
pub const SIGMA_FLOOR: f64 = 1e-12;

/// Sub-Gaussian confidence radius `sqrt(2 sigma^2 ln(2/delta) / pulls)`.
pub fn confidence_radius(sigma: f64, delta: f64, pulls: u64) -> Result<f64> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::invalid(format!("sigma must be positive, got {sigma}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!("delta must lie in (0, 1), got {delta}")));
    }
    if pulls == 0 {
        return Err(Error::invalid("confidence radius needs at least one pull"));
    }
    Ok(radius(sigma, delta, pulls))
}

#[inline]
pub(crate) fn radius(sigma: f64, delta: f64, pulls: u64) -> f64 {
    (2.0 * sigma * sigma * (2.0 / delta).ln() / pulls as f64).sqrt()
}

/// Estimates the sub-Gaussian parameter as the mean, over `points` randomly
/// chosen points (without replacement, clamped to `n`), of the sample
/// standard deviation of `samples` with-replacement distance draws.
pub fn estimate_sigma<R: RngCore + ?Sized>(
    oracle: &DistanceOracle<'_>,
    points: usize,
    samples: usize,
    rng: &mut R,
) -> Result<f64> {
    if points < 2 || samples < 2 {
        return Err(Error::invalid(format!(
            "sigma estimation needs at least 2 points and 2 samples, got {points} and {samples}"
        )));
    }
    let n = oracle.n();
    if n < 2 {
        return Err(Error::invalid("sigma estimation needs at least two points"));
    }
    let chosen = index::sample(rng, n, points.min(n));
    let mut draws = Vec::with_capacity(samples);
    let mut total_sd = 0.0;
    for i in chosen.iter() {
        draws.clear();
        oracle.sample_batch(i, samples, rng, &mut draws)?;
        let mean = draws.iter().sum::<f64>() / samples as f64;
        let var = draws.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (samples - 1) as f64;
        total_sd += var.sqrt();
    }
    Ok((total_sd / chosen.len() as f64).max(SIGMA_FLOOR))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::PointSet;
    use crate::metrics::Metric;
    use crate::rng::stream;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn radius_examples() {
        let delta = 2.0 / std::f64::consts::E.powi(2);
        assert!((confidence_radius(1.0, delta, 4).unwrap() - 1.0).abs() < 1e-12);
        let one = confidence_radius(1.0, 0.1, 1).unwrap();
        let four = confidence_radius(1.0, 0.1, 4).unwrap();
        assert!((one / four - 2.0).abs() < 1e-12);
        assert!(confidence_radius(1e-300, 0.1, 1).unwrap() < 1e-299);
    }

    #[test]
    fn radius_rejects_bad_domain() {
        assert!(confidence_radius(0.0, 0.1, 1).is_err());
        assert!(confidence_radius(1.0, 0.0, 1).is_err());
        assert!(confidence_radius(1.0, 1.0, 1).is_err());
        assert!(confidence_radius(1.0, 0.1, 0).is_err());
    }

    #[test]
    fn constant_distances_hit_the_floor() {
        let n = 10;
        let rows = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 0.0 } else { 4.0 }).collect())
            .collect();
        let m = PointSet::matrix(rows).unwrap();
        let oracle = DistanceOracle::new(&m, Metric::L1);
        let sigma = estimate_sigma(&oracle, 5, 8, &mut stream(0, 1)).unwrap();
        assert_eq!(sigma, SIGMA_FLOOR);
        assert_eq!(oracle.eval_count(), 40);
    }

    #[test]
    fn planted_unit_variance_rows() {
        let n = 400;
        let mut rng = stream(11, 2);
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        if i == j { 0.0 } else { 50.0 + z }
                    })
                    .collect()
            })
            .collect();
        let m = PointSet::matrix(rows).unwrap();
        let oracle = DistanceOracle::new(&m, Metric::L1);
        let sigma = estimate_sigma(&oracle, 200, 50, &mut stream(0, 1)).unwrap();
        assert!((0.8..=1.2).contains(&sigma), "{sigma}");
        assert_eq!(oracle.eval_count(), 200 * 50);
    }

    #[test]
    fn point_count_clamps_to_n() {
        let p = crate::dataset::gen_gaussian_points(7, 2, 0).unwrap();
        let oracle = DistanceOracle::new(&p, Metric::L2);
        estimate_sigma(&oracle, 1000, 3, &mut stream(0, 1)).unwrap();
        assert_eq!(oracle.eval_count(), 21);
        assert!(estimate_sigma(&oracle, 1, 3, &mut stream(0, 1)).is_err());
        assert!(estimate_sigma(&oracle, 3, 1, &mut stream(0, 1)).is_err());
    }
}
