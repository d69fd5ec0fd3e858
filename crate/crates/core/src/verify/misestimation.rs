//! Probability that a posterior sample lands on the wrong side of the
//! midpoint `(mu_best + mu_i) / 2` even though the arm has been through
//! `c sigma2 log T / gap_i^2` cycles. With `c = 32` both events have
//! probability at most `2 / T`.
//!
//! At desk-scale horizons that cycle threshold usually exceeds anything
//! reachable by step `t`; such checks are labelled vacuous. Smaller constants
//! give non-empty events but carry no claimed bound, so they are only
//! reported.

use alloc::format;
use alloc::vec::Vec;

use super::{CheckRow, Verdict};
use crate::error::{Error, Result};
use crate::sim::{replicate, run_episode_with, EpisodeObserver, Replicator, RunConfig, StepView};
use crate::stats::exceeds;

/// Smallest `c` for which the `2 / T` bound is claimed.
pub const THRESHOLD_CONSTANT: f64 = 32.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MisestimationParams {
    /// Step at which the events are evaluated; the horizon when `None`.
    pub at_step: Option<u64>,
    /// Constant `c` in the cycle threshold.
    pub constant: f64,
}

impl Default for MisestimationParams {
    fn default() -> Self {
        MisestimationParams {
            at_step: None,
            constant: THRESHOLD_CONSTANT,
        }
    }
}

struct EventObserver {
    at: u64,
    best: usize,
    arm: usize,
    midpoint: f64,
    threshold: f64,
    /// (best arm undershoots, suboptimal arm overshoots)
    events: (bool, bool),
}

impl EpisodeObserver for EventObserver {
    fn on_step(&mut self, step: &StepView<'_>) {
        if step.t != self.at {
            return;
        }
        let counts = &step.frozen.cycle_counts;
        self.events = (
            step.thetas[self.best] <= self.midpoint && counts[self.best] as f64 >= self.threshold,
            step.thetas[self.arm] > self.midpoint && counts[self.arm] as f64 >= self.threshold,
        );
    }
}

pub fn misestimation_check<R: Replicator + ?Sized>(
    config: &RunConfig,
    arm: usize,
    params: MisestimationParams,
    runner: &R,
) -> Result<Vec<CheckRow>> {
    config.validate()?;
    let env = &config.environment;
    if !env.is_bounded() {
        return Err(Error::UnboundedEnvironment);
    }
    if !config.policy.is_batched() {
        return Err(Error::RequiresBatched);
    }
    if config.policy.sigma2 < 1.0 {
        return Err(Error::InvalidParameter(format!(
            "sigma2 must be at least 1, got {}",
            config.policy.sigma2
        )));
    }
    if arm >= env.num_arms() || env.gaps()[arm] <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "arm {arm} is not a suboptimal arm"
        )));
    }
    if params.constant.is_nan() || params.constant <= 0.0 {
        return Err(Error::InvalidParameter("constant must be positive".into()));
    }
    let at = params.at_step.unwrap_or(config.horizon);
    if at == 0 || at > config.horizon {
        return Err(Error::InvalidParameter(format!(
            "step {at} outside 1..={}",
            config.horizon
        )));
    }

    let best = env.best_arm();
    let gap = env.gaps()[arm];
    let horizon = config.horizon as f64;
    let threshold = params.constant * config.policy.sigma2 * libm::log(horizon) / (gap * gap);
    let midpoint = 0.5 * (env.means()[best] + env.means()[arm]);

    let mut hits = (0u64, 0u64);
    replicate(
        runner,
        config.replications,
        |r| {
            let mut observer = EventObserver {
                at,
                best,
                arm,
                midpoint,
                threshold,
                events: (false, false),
            };
            run_episode_with(config, r, &mut observer)?;
            Ok(observer.events)
        },
        |_, (under, over)| {
            hits.0 += u64::from(under);
            hits.1 += u64::from(over);
        },
    )?;

    // Counts frozen before step t come from at most t - 1 steps.
    let vacuous = threshold > (at - 1) as f64;
    let asserted = params.constant >= THRESHOLD_CONSTANT;
    let bound = 2.0 / horizon;
    let n = config.replications as f64;
    let row = |check: &str, count: u64| {
        let freq = count as f64 / n;
        let stderr = libm::sqrt(freq * (1.0 - freq) / n);
        let verdict = if vacuous {
            Verdict::Vacuous
        } else if !asserted {
            Verdict::Reported
        } else if exceeds(freq, stderr, bound) {
            Verdict::Fail
        } else {
            Verdict::Pass
        };
        CheckRow {
            check: check.into(),
            parameters: format!(
                "arm={arm};t={at};T={};constant={};threshold={threshold};replications={}",
                config.horizon, params.constant, config.replications
            ),
            estimate: freq,
            stderr,
            bound,
            verdict,
            vacuous,
        }
    };
    Ok(alloc::vec![
        row("misestimation_best", hits.0),
        row("misestimation_suboptimal", hits.1),
    ])
}
