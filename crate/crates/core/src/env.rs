//! Reward environments: per-arm distributions, ground-truth means and gaps.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Reward distribution of a single arm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ArmSpec {
    Bernoulli { p: f64 },
    Gaussian { mean: f64, variance: f64 },
}

impl ArmSpec {
    pub fn bernoulli(p: f64) -> Result<Self> {
        let arm = ArmSpec::Bernoulli { p };
        arm.validate()?;
        Ok(arm)
    }

    pub fn gaussian(mean: f64, variance: f64) -> Result<Self> {
        let arm = ArmSpec::Gaussian { mean, variance };
        arm.validate()?;
        Ok(arm)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ArmSpec::Bernoulli { p } if !(0.0..=1.0).contains(&p) => {
                Err(Error::InvalidProbability(p))
            }
            ArmSpec::Gaussian { mean, .. } if !mean.is_finite() => Err(Error::InvalidMean(mean)),
            ArmSpec::Gaussian { variance, .. } if !(variance > 0.0 && variance.is_finite()) => {
                Err(Error::InvalidVariance(variance))
            }
            _ => Ok(()),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            ArmSpec::Bernoulli { p } => p,
            ArmSpec::Gaussian { mean, .. } => mean,
        }
    }

    pub fn std_dev(&self) -> f64 {
        match *self {
            ArmSpec::Bernoulli { p } => libm::sqrt(p * (1.0 - p)),
            ArmSpec::Gaussian { variance, .. } => libm::sqrt(variance),
        }
    }

    /// Support interval when the rewards are bounded.
    pub fn support(&self) -> Option<(f64, f64)> {
        match self {
            ArmSpec::Bernoulli { .. } => Some((0.0, 1.0)),
            ArmSpec::Gaussian { .. } => None,
        }
    }

    /// True when every reward lies in `[0, 1]`.
    pub fn is_unit_bounded(&self) -> bool {
        matches!(self.support(), Some((lo, hi)) if lo >= 0.0 && hi <= 1.0)
    }

    /// Draws one reward.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            // random::<f64>() lies in [0, 1), so p = 1 always pays and p = 0 never does.
            ArmSpec::Bernoulli { p } => {
                if rng.random::<f64>() < p {
                    1.0
                } else {
                    0.0
                }
            }
            ArmSpec::Gaussian { mean, variance } => {
                let z: f64 = StandardNormal.sample(rng);
                mean + libm::sqrt(variance) * z
            }
        }
    }
}

/// A validated bandit instance.
///
/// The best arm is the lowest-index maximiser of the means. Every arm tied
/// with it has a gap of exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentSpec {
    arms: Vec<ArmSpec>,
    means: Vec<f64>,
    gaps: Vec<f64>,
    best_arm: usize,
    bounded: bool,
}

impl EnvironmentSpec {
    pub fn new(arms: Vec<ArmSpec>) -> Result<Self> {
        if arms.len() < 2 {
            return Err(Error::TooFewArms(arms.len()));
        }
        for (i, arm) in arms.iter().enumerate() {
            arm.validate().map_err(|e| Error::arm(i, e))?;
        }
        let means: Vec<f64> = arms.iter().map(ArmSpec::mean).collect();
        let mut best_arm = 0;
        for (i, &m) in means.iter().enumerate() {
            if m > means[best_arm] {
                best_arm = i;
            }
        }
        let best = means[best_arm];
        let gaps = means.iter().map(|&m| best - m).collect();
        let bounded = arms.iter().all(ArmSpec::is_unit_bounded);
        Ok(EnvironmentSpec {
            arms,
            means,
            gaps,
            best_arm,
            bounded,
        })
    }

    pub fn arms(&self) -> &[ArmSpec] {
        &self.arms
    }

    pub fn num_arms(&self) -> usize {
        self.arms.len()
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    /// `best mean - mean_i` for every arm.
    pub fn gaps(&self) -> &[f64] {
        &self.gaps
    }

    pub fn best_arm(&self) -> usize {
        self.best_arm
    }

    /// True iff every arm's rewards lie in `[0, 1]`; the regret and batch
    /// theory is only checked on such environments.
    pub fn is_bounded(&self) -> bool {
        self.bounded
    }

    pub fn draw_reward<R: Rng + ?Sized>(&self, arm: usize, rng: &mut R) -> f64 {
        self.arms[arm].draw(rng)
    }
}
