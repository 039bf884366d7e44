//! Best-arm identification over points: the adaptive medoid search and its
//! confidence machinery.
//!
//! Each point `i` is an arm whose pulls are `d(i, J)` for uniformly drawn
//! `J != i`. An arm keeps a running mean and a confidence radius; the arm
//! with the smallest lower bound is pulled next, and an arm that has been
//! pulled `n - 1` times gets its mean computed exactly instead. The search
//! stops once one arm's upper bound is strictly below every other arm's
//! lower bound.

mod arm;
mod catoni;
mod config;
mod confidence;
mod meddit;

pub use arm::ArmState;
pub use catoni::{catoni_alpha, catoni_estimate, catoni_radius, catoni_warmup, psi};
pub use config::{BanditConfig, Estimator, MedoidResult, Sigma, StopReason};
pub use confidence::{confidence_radius, estimate_sigma, SIGMA_FLOOR};
pub use meddit::{meddit, meddit_catoni, Meddit, Snapshot};
