//! Catoni's M-estimator: a robust mean with sub-Gaussian-like deviations
//! under a finite-variance assumption only.

use crate::error::{Error, Result};

/// Widest admissible influence function:
/// `ln(1 + x + x^2/2)` for `x >= 0` and `-ln(1 - x + x^2/2)` below.
pub fn psi(x: f64) -> f64 {
    if x >= 0.0 {
        (x + 0.5 * x * x).ln_1p()
    } else {
        -(-x + 0.5 * x * x).ln_1p()
    }
}

/// Warm-up pulls per arm, `ceil(4 ln(1/delta))`.
pub fn catoni_warmup(delta: f64) -> usize {
    (4.0 * (1.0 / delta).ln()).ceil() as usize
}

/// Deviation bound `2 sqrt(sigma^2 ln(2/delta) / pulls)`.
pub fn catoni_radius(sigma: f64, delta: f64, pulls: u64) -> f64 {
    2.0 * (sigma * sigma * (2.0 / delta).ln() / pulls as f64).sqrt()
}

/// Scale `alpha_delta` applied to centred samples inside `psi`. Defined only
/// for `count > 2 ln(1/delta)`.
pub fn catoni_alpha(count: usize, sigma: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!("delta must lie in (0, 1), got {delta}")));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::invalid(format!("sigma must be positive, got {sigma}")));
    }
    let log_inv = (1.0 / delta).ln();
    let t = count as f64;
    if t <= 2.0 * log_inv {
        return Err(Error::invalid(format!(
            "Catoni estimate needs more than {:.3} samples at delta={delta}, got {count}",
            2.0 * log_inv
        )));
    }
    let var = sigma * sigma;
    Ok((2.0 * log_inv / (t * (var + 2.0 * var * log_inv / (t - 2.0 * log_inv)))).sqrt())
}

/// Root of `sum_i psi(alpha (x_i - m)) = 0`, found by bisection on
/// `[min - 1, max + 1]` down to adjacent floating-point values.
pub fn catoni_estimate(samples: &[f64], sigma: f64, delta: f64) -> Result<f64> {
    let alpha = catoni_alpha(samples.len(), sigma, delta)?;
    Ok(bisect_root(samples, alpha))
}

pub(crate) fn influence_sum(samples: &[f64], alpha: f64, m: f64) -> f64 {
    samples.iter().map(|&x| psi(alpha * (x - m))).sum()
}

fn bisect_root(samples: &[f64], alpha: f64) -> f64 {
    let (min, max) = samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    // the sum is strictly decreasing in m: positive at lo, negative at hi
    let (mut lo, mut hi) = (min - 1.0, max + 1.0);
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return mid;
        }
        let f = influence_sum(samples, alpha, mid);
        if f == 0.0 {
            return mid;
        }
        if f > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}
