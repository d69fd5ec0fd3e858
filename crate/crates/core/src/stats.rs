//! Streaming mean and standard error.

/// Welford accumulator. Values pushed in the same order give bit-identical
/// results.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Welford {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub fn push(&mut self, value: f64) {
        self.count += 1;
        let delta = value - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (value - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Sample variance (n - 1 denominator); zero for fewer than two values.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    /// Sample standard deviation over `sqrt(n)`.
    pub fn stderr(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            libm::sqrt(self.variance() / self.count as f64)
        }
    }
}

/// True when `estimate` exceeds `bound` by more than three standard errors,
/// the one-sided rule used for every Monte Carlo bound check.
pub fn exceeds(estimate: f64, stderr: f64, bound: f64) -> bool {
    estimate - 3.0 * stderr > bound
}
