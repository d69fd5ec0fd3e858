//! Monte Carlo checks on the exponential process
//! `X_t = exp(lambda (S_i - mu_i M_i) - lambda^2 / 8 (1 + M_i))`, where `M_i`
//! and `S_i` are the cycle counts and cycle-boundary reward sums of arm `i`
//! at the last batch end before `t`. For rewards in `[0, 1]` it is a
//! supermartingale, so `E[X_t] <= 1`, and stopping it at the `j`-th
//! boundary visit of arm `i` gives the tail bound `exp(-2 x^2 / alpha)` on
//! `(S_i - mu_i M_i) / sqrt(1 + M_i)`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{CheckRow, Verdict};
use crate::error::{Error, Result};
use crate::sim::{replicate, run_episode_with, EpisodeObserver, Replicator, RunConfig, StepView};
use crate::stats::{exceeds, Welford};

fn require_theory_setting(config: &RunConfig, arm: usize) -> Result<f64> {
    config.validate()?;
    if !config.environment.is_bounded() {
        return Err(Error::UnboundedEnvironment);
    }
    let alpha = config.policy.alpha().ok_or(Error::RequiresBatched)?;
    if arm >= config.environment.num_arms() {
        return Err(Error::ArmOutOfRange {
            arm,
            arms: config.environment.num_arms(),
        });
    }
    Ok(alpha)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MartingaleEstimate {
    pub lambda: f64,
    pub arm: usize,
    pub checkpoints: Vec<u64>,
    pub means: Vec<f64>,
    pub stderrs: Vec<f64>,
    pub replications: u64,
}

impl MartingaleEstimate {
    /// `mean - 3 stderr <= 1` at every checkpoint.
    pub fn passed(&self) -> bool {
        self.means
            .iter()
            .zip(&self.stderrs)
            .all(|(&m, &s)| !exceeds(m, s, 1.0))
    }

    pub fn rows(&self) -> Vec<CheckRow> {
        self.checkpoints
            .iter()
            .zip(self.means.iter().zip(&self.stderrs))
            .map(|(&t, (&m, &s))| CheckRow {
                check: "supermartingale".into(),
                parameters: format!(
                    "arm={};lambda={};t={t};replications={}",
                    self.arm, self.lambda, self.replications
                ),
                estimate: m,
                stderr: s,
                bound: 1.0,
                verdict: if exceeds(m, s, 1.0) {
                    Verdict::Fail
                } else {
                    Verdict::Pass
                },
                vacuous: false,
            })
            .collect()
    }
}

struct MartingaleObserver<'a> {
    arm: usize,
    mean_reward: f64,
    lambdas: &'a [f64],
    checkpoints: &'a [u64],
    next: usize,
    values: Vec<f64>,
}

impl EpisodeObserver for MartingaleObserver<'_> {
    fn on_step(&mut self, step: &StepView<'_>) {
        if self.checkpoints.get(self.next) != Some(&step.t) {
            return;
        }
        let m = step.frozen.cycle_counts[self.arm] as f64;
        let s = step.frozen.boundary_sums[self.arm];
        for &lambda in self.lambdas {
            let exponent = lambda * (s - self.mean_reward * m) - lambda * lambda / 8.0 * (1.0 + m);
            self.values.push(libm::exp(exponent));
        }
        self.next += 1;
    }
}

/// Estimates `E[X_t]` for every `lambda` at every checkpoint over
/// `config.replications` episodes. Checkpoints must be increasing and within
/// the horizon.
pub fn supermartingale_check<R: Replicator + ?Sized>(
    config: &RunConfig,
    arm: usize,
    lambdas: &[f64],
    checkpoints: &[u64],
    runner: &R,
) -> Result<Vec<MartingaleEstimate>> {
    require_theory_setting(config, arm)?;
    if checkpoints.is_empty()
        || checkpoints[0] == 0
        || checkpoints.windows(2).any(|w| w[0] >= w[1])
        || checkpoints[checkpoints.len() - 1] > config.horizon
    {
        return Err(Error::InvalidParameter(format!(
            "checkpoints {checkpoints:?} must increase within 1..={}",
            config.horizon
        )));
    }
    let mean_reward = config.environment.means()[arm];
    let width = lambdas.len();
    let mut acc = vec![Welford::default(); width * checkpoints.len()];
    replicate(
        runner,
        config.replications,
        |r| {
            let mut observer = MartingaleObserver {
                arm,
                mean_reward,
                lambdas,
                checkpoints,
                next: 0,
                values: Vec::with_capacity(width * checkpoints.len()),
            };
            run_episode_with(config, r, &mut observer)?;
            Ok(observer.values)
        },
        |_, values| {
            for (a, v) in acc.iter_mut().zip(values) {
                a.push(v);
            }
        },
    )?;
    Ok(lambdas
        .iter()
        .enumerate()
        .map(|(l, &lambda)| {
            let acc = &acc;
            let column = || (0..checkpoints.len()).map(move |c| acc[c * width + l]);
            MartingaleEstimate {
                lambda,
                arm,
                checkpoints: checkpoints.to_vec(),
                means: column().map(|a| a.mean()).collect(),
                stderrs: column().map(|a| a.stderr()).collect(),
                replications: config.replications,
            }
        })
        .collect())
}

struct StoppedObserver {
    arm: usize,
    visit: u64,
    mean_reward: f64,
    seen: u64,
    statistic: Option<f64>,
}

impl EpisodeObserver for StoppedObserver {
    fn on_step(&mut self, step: &StepView<'_>) {
        if step.arm != self.arm || !step.cycle_boundary || self.statistic.is_some() {
            return;
        }
        self.seen += 1;
        if self.seen == self.visit {
            let m = step.frozen.cycle_counts[self.arm] as f64;
            let s = step.frozen.boundary_sums[self.arm];
            self.statistic = Some((s - self.mean_reward * m) / libm::sqrt(1.0 + m));
        }
    }
}

/// Frequency over episodes of `(S_i - mu_i M_i) / sqrt(1 + M_i) > x`
/// (upper tail) and `< -x` (lower tail), with the statistics frozen at the
/// last batch end before arm `arm`'s `visit`-th cycle-boundary play.
/// Episodes where that play never happens count as the event not occurring.
pub fn stopped_tail_check<R: Replicator + ?Sized>(
    config: &RunConfig,
    arm: usize,
    visit: u64,
    xs: &[f64],
    runner: &R,
) -> Result<Vec<CheckRow>> {
    let alpha = require_theory_setting(config, arm)?;
    if visit < 2 {
        return Err(Error::InvalidParameter(format!(
            "visit index must exceed 1, got {visit}"
        )));
    }
    if let Some(x) = xs.iter().find(|x| x.is_nan() || **x < 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tail levels must be non-negative, got {x}"
        )));
    }
    let mean_reward = config.environment.means()[arm];
    let mut statistics = Vec::with_capacity(config.replications as usize);
    replicate(
        runner,
        config.replications,
        |r| {
            let mut observer = StoppedObserver {
                arm,
                visit,
                mean_reward,
                seen: 0,
                statistic: None,
            };
            run_episode_with(config, r, &mut observer)?;
            Ok(observer.statistic)
        },
        |_, z| statistics.push(z),
    )?;

    let n = statistics.len() as f64;
    let regime = config.policy.theory_regime();
    let mut rows = Vec::with_capacity(2 * xs.len());
    for &x in xs {
        let bound = libm::exp(-2.0 * x * x / alpha);
        for (name, hits) in [
            (
                "stopped_tail_upper",
                statistics.iter().flatten().filter(|&&z| z > x).count(),
            ),
            (
                "stopped_tail_lower",
                statistics.iter().flatten().filter(|&&z| z < -x).count(),
            ),
        ] {
            let freq = hits as f64 / n;
            let stderr = libm::sqrt(freq * (1.0 - freq) / n);
            rows.push(CheckRow {
                check: name.into(),
                parameters: format!(
                    "arm={arm};visit={visit};x={x};alpha={alpha};theory_regime={regime};replications={}",
                    config.replications
                ),
                estimate: freq,
                stderr,
                bound,
                verdict: if exceeds(freq, stderr, bound) { Verdict::Fail } else { Verdict::Pass },
                vacuous: false,
            });
        }
    }
    Ok(rows)
}
