//! Gaussian Thompson sampling over batch-frozen posteriors.
//!
//! Arm `i` is sampled from `N(sum_i / (1 + n_i), sigma2 / (1 + n_i))`, i.e. a
//! `N(0, sigma2)` prior updated with unit-variance observations. `n_i` and
//! `sum_i` are the statistics frozen at the last commit; rewards noted since
//! then sit in a pending buffer and stay invisible until the next commit.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Which rewards feed the posterior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Only rewards observed at cycle start and end steps.
    Skip,
    /// Every observed reward.
    Full,
}

impl Variant {
    pub fn as_str(&self) -> &'static str {
        match self {
            Variant::Skip => "skip",
            Variant::Full => "full",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    /// Cycle-based adaptive batches with growth factor `alpha > 1`.
    Batched { alpha: f64 },
    /// Feedback after every step.
    Classical,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyConfig {
    pub mode: Mode,
    pub sigma2: f64,
    pub variant: Variant,
}

impl PolicyConfig {
    pub fn batched(alpha: f64, sigma2: f64, variant: Variant) -> Result<Self> {
        let config = PolicyConfig {
            mode: Mode::Batched { alpha },
            sigma2,
            variant,
        };
        config.validate()?;
        Ok(config)
    }

    /// Per-step Thompson sampling; always uses every reward.
    pub fn classical(sigma2: f64) -> Result<Self> {
        let config = PolicyConfig {
            mode: Mode::Classical,
            sigma2,
            variant: Variant::Full,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if let Mode::Batched { alpha } = self.mode {
            if !(alpha > 1.0 && alpha.is_finite()) {
                return Err(Error::InvalidAlpha(alpha));
            }
        }
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(Error::InvalidSigma2(self.sigma2));
        }
        Ok(())
    }

    pub fn alpha(&self) -> Option<f64> {
        match self.mode {
            Mode::Batched { alpha } => Some(alpha),
            Mode::Classical => None,
        }
    }

    pub fn is_batched(&self) -> bool {
        matches!(self.mode, Mode::Batched { .. })
    }

    /// Whether `alpha <= 5 sigma2 / 4`, the regime covered by the regret and
    /// expected-batch guarantees. Other settings run but are flagged.
    pub fn theory_regime(&self) -> bool {
        match self.mode {
            Mode::Batched { alpha } => alpha <= 1.25 * self.sigma2,
            Mode::Classical => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorState {
    sigma2: f64,
    variant: Variant,
    frozen_counts: Vec<u64>,
    frozen_sums: Vec<f64>,
    pending_counts: Vec<u64>,
    pending_sums: Vec<f64>,
}

impl PosteriorState {
    pub fn new(arms: usize, sigma2: f64, variant: Variant) -> Self {
        PosteriorState {
            sigma2,
            variant,
            frozen_counts: vec![0; arms],
            frozen_sums: vec![0.0; arms],
            pending_counts: vec![0; arms],
            pending_sums: vec![0.0; arms],
        }
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn num_arms(&self) -> usize {
        self.frozen_counts.len()
    }

    pub fn posterior_mean(&self, arm: usize) -> f64 {
        self.frozen_sums[arm] / (1.0 + self.frozen_counts[arm] as f64)
    }

    pub fn posterior_variance(&self, arm: usize) -> f64 {
        self.sigma2 / (1.0 + self.frozen_counts[arm] as f64)
    }

    /// Draws one independent sample per arm into `out`, in arm order.
    pub fn sample_thetas_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        for (arm, theta) in out.iter_mut().enumerate() {
            let z: f64 = StandardNormal.sample(rng);
            *theta = self.posterior_mean(arm) + libm::sqrt(self.posterior_variance(arm)) * z;
        }
    }

    pub fn sample_thetas<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut out = vec![0.0; self.num_arms()];
        self.sample_thetas_into(rng, &mut out);
        out
    }

    /// Buffers the reward observed at this step.
    pub fn note_action(&mut self, arm: usize, reward: f64, is_cycle_boundary: bool) {
        if self.variant == Variant::Full || is_cycle_boundary {
            self.pending_counts[arm] += 1;
            self.pending_sums[arm] += reward;
        }
    }

    /// Folds pending statistics into the frozen ones.
    pub fn commit(&mut self) {
        for arm in 0..self.num_arms() {
            self.frozen_counts[arm] += core::mem::take(&mut self.pending_counts[arm]);
            self.frozen_sums[arm] += core::mem::take(&mut self.pending_sums[arm]);
        }
    }

    pub fn frozen_counts(&self) -> &[u64] {
        &self.frozen_counts
    }

    pub fn frozen_sums(&self) -> &[f64] {
        &self.frozen_sums
    }

    pub fn pending_counts(&self) -> &[u64] {
        &self.pending_counts
    }

    pub fn pending_sums(&self) -> &[f64] {
        &self.pending_sums
    }
}

/// Index of the largest sample; ties go to the lowest index.
///
/// # Panics
///
/// If `thetas` is empty or contains NaN.
pub fn select_action(thetas: &[f64]) -> usize {
    assert!(!thetas.is_empty(), "no arms to select from");
    let mut best = 0;
    for (i, &theta) in thetas.iter().enumerate() {
        assert!(!theta.is_nan(), "posterior sample for arm {i} is NaN");
        if theta > thetas[best] {
            best = i;
        }
    }
    best
}
