/// Running statistics of one arm (point).
#[derive(Debug, Clone, PartialEq)]
pub struct ArmState {
    pub index: usize,
    /// Distances charged to this arm; `2(n - 1)` once the mean is exact.
    pub pulls: u64,
    pub sum_of_samples: f64,
    pub mu_hat: f64,
    pub radius: f64,
    pub exact: bool,
}

impl ArmState {
    pub(crate) fn new(index: usize) -> Self {
        ArmState {
            index,
            pulls: 0,
            sum_of_samples: 0.0,
            mu_hat: 0.0,
            radius: f64::INFINITY,
            exact: false,
        }
    }

    pub fn lcb(&self) -> f64 {
        self.mu_hat - self.radius
    }

    pub fn ucb(&self) -> f64 {
        self.mu_hat + self.radius
    }
}
