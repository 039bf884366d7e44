//! Exact medoid computation with high probability through adaptive,
//! bandit-style distance sampling.
//!
//! Every point is treated as an arm of a multi-armed bandit whose pulls are
//! distances to uniformly chosen other points. Upper/lower confidence bounds
//! steer the sampling budget towards the points that could still be the
//! medoid; points pulled often enough have their mean distance computed
//! exactly. Baselines (brute force and fixed-budget random sampling) and a
//! Monte Carlo harness for error-vs-budget experiments live alongside.
//!
//! ```
//! use meddit::{bandit, dataset::PointSet, metrics::Metric, oracle::DistanceOracle, rng};
//!
//! let points = PointSet::dense(vec![vec![0.0], vec![1.0], vec![10.0]]).unwrap();
//! let oracle = DistanceOracle::new(&points, Metric::L1);
//! let config = bandit::BanditConfig::default();
//! let result = bandit::meddit(&oracle, &config, &mut rng::stream(0, 0)).unwrap();
//! assert_eq!(result.medoid_index, 1);
//! ```

pub mod bandit;
pub mod baselines;
pub mod bench;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod metrics;
pub mod oracle;
pub mod rng;

pub use error::{Error, Result};
