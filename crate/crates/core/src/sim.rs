//! Seeded episodes and Monte Carlo aggregation.
//!
//! One step of an episode: sample a theta per arm from the frozen posterior,
//! play the argmax, draw its reward, buffer the reward, update the cycle
//! counts, and, in batched mode, close the batch when a cycle end brings some
//! arm to its limit. Rewards are drawn at action time and stay buffered until
//! the commit, which is indistinguishable from revealing them at the batch
//! end.
//!
//! Every step draws `K` standard normals and then one reward from the
//! replication's stream, in that order.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use crate::cycle::{batch_bound, CycleBatchState, CycleEvent};
use crate::env::EnvironmentSpec;
use crate::error::{Error, Result};
use crate::policy::{select_action, Mode, PolicyConfig, PosteriorState, Variant};
use crate::rng::replication_stream;
use crate::stats::Welford;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub environment: EnvironmentSpec,
    pub policy: PolicyConfig,
    pub horizon: u64,
    pub replications: u64,
    pub master_seed: u64,
    /// Record every `trace_stride`-th step (the final step is always kept).
    pub trace_stride: u64,
}

impl RunConfig {
    /// One replication, seed 0, every step recorded.
    pub fn new(environment: EnvironmentSpec, policy: PolicyConfig, horizon: u64) -> Self {
        RunConfig {
            environment,
            policy,
            horizon,
            replications: 1,
            master_seed: 0,
            trace_stride: 1,
        }
    }

    pub fn with_replications(mut self, replications: u64) -> Self {
        self.replications = replications;
        self
    }

    pub fn with_seed(mut self, master_seed: u64) -> Self {
        self.master_seed = master_seed;
        self
    }

    pub fn with_stride(mut self, trace_stride: u64) -> Self {
        self.trace_stride = trace_stride;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.policy.validate()?;
        if self.horizon < 2 {
            return Err(Error::HorizonTooShort(self.horizon));
        }
        if self.replications == 0 {
            return Err(Error::NoReplications);
        }
        if self.trace_stride == 0 {
            return Err(Error::ZeroStride);
        }
        Ok(())
    }

    /// Steps at which traces and curves are recorded.
    pub fn recorded_steps(&self) -> Vec<u64> {
        let mut steps: Vec<u64> = (1..=self.horizon / self.trace_stride)
            .map(|i| i * self.trace_stride)
            .collect();
        if steps.last() != Some(&self.horizon) {
            steps.push(self.horizon);
        }
        steps
    }

    fn is_recorded(&self, t: u64) -> bool {
        t % self.trace_stride == 0 || t == self.horizon
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub t: u64,
    pub action: usize,
    /// `sum_i gap_i * N_i(t)`.
    pub pseudo_regret: f64,
    /// Batch containing step `t`.
    pub batch_index: u64,
}

/// Cycle counts `M_i` and cycle-boundary reward sums `S_i` at a batch end.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySnapshot {
    /// Batch end step (0 before the first batch ends).
    pub end: u64,
    pub cycle_counts: Vec<u64>,
    pub boundary_sums: Vec<f64>,
}

impl BoundarySnapshot {
    fn empty(arms: usize) -> Self {
        BoundarySnapshot {
            end: 0,
            cycle_counts: vec![0; arms],
            boundary_sums: vec![0.0; arms],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub replication: u64,
    pub horizon: u64,
    pub points: Vec<TracePoint>,
    pub actions: Vec<usize>,
    /// `N_i(T)`.
    pub pulls: Vec<u64>,
    pub final_regret: f64,
    /// `B(T)`; equals `T` in classical mode, where every step is a batch.
    pub batch_count: u64,
    pub completed_cycles: u64,
    /// One snapshot per completed batch, in order (batched mode only).
    pub batches: Vec<BoundarySnapshot>,
}

impl RunTrace {
    pub fn batch_ends(&self) -> Vec<u64> {
        self.batches.iter().map(|b| b.end).collect()
    }

    /// `M_i(T_(B(T)-1))`: counts at the last batch end strictly before `T`.
    pub fn counts_before_final_batch(&self) -> Vec<u64> {
        let before = self
            .batches
            .iter()
            .take_while(|b| b.end < self.horizon)
            .last();
        match before {
            Some(b) => b.cycle_counts.clone(),
            None => vec![0; self.pulls.len()],
        }
    }

    /// Cumulative pseudo-regret after every step.
    pub fn regret_curve(&self, env: &EnvironmentSpec) -> Vec<f64> {
        regret_curve(&self.actions, env.gaps())
    }
}

/// Running sum of `gaps[a_s]` over an action sequence.
pub fn regret_curve(actions: &[usize], gaps: &[f64]) -> Vec<f64> {
    actions
        .iter()
        .scan(0.0, |acc, &a| {
            *acc += gaps[a];
            Some(*acc)
        })
        .collect()
}

/// What an observer sees after the action at step `t` has been recorded but
/// before any batch ending at `t` is applied.
#[derive(Debug)]
pub struct StepView<'a> {
    pub t: u64,
    pub arm: usize,
    pub reward: f64,
    pub thetas: &'a [f64],
    pub cycle_boundary: bool,
    pub batch_index: u64,
    /// `M_i` and `S_i` at the last batch end before `t`, i.e. the statistics
    /// the skip-variant posterior was sampled from.
    pub frozen: &'a BoundarySnapshot,
}

pub trait EpisodeObserver {
    fn on_step(&mut self, step: &StepView<'_>);
}

impl EpisodeObserver for () {
    fn on_step(&mut self, _: &StepView<'_>) {}
}

pub fn run_episode(config: &RunConfig, replication: u64) -> Result<RunTrace> {
    run_episode_with(config, replication, &mut ())
}

/// Runs replication `replication` of `config`, reporting every step to
/// `observer`. The result depends only on the config and the replication
/// index.
pub fn run_episode_with<O: EpisodeObserver + ?Sized>(
    config: &RunConfig,
    replication: u64,
    observer: &mut O,
) -> Result<RunTrace> {
    config.validate()?;
    let env = &config.environment;
    let arms = env.num_arms();
    let gaps = env.gaps();
    let horizon = config.horizon;
    let violation = |detail: String| Error::InvariantViolation {
        seed: config.master_seed,
        replication,
        detail,
    };

    let mut rng = replication_stream(config.master_seed, replication);
    let mut posterior = PosteriorState::new(arms, config.policy.sigma2, config.policy.variant);
    let mut cycles = CycleBatchState::new(arms);
    let mut thetas = vec![0.0; arms];
    let mut boundary_sums = vec![0.0; arms];
    let mut frozen = BoundarySnapshot::empty(arms);
    let mut pulls = vec![0u64; arms];
    let mut actions = Vec::with_capacity(horizon as usize);
    let mut points = Vec::new();
    let mut batches = Vec::new();

    for t in 1..=horizon {
        posterior.sample_thetas_into(&mut rng, &mut thetas);
        let arm = select_action(&thetas);
        let reward = env.draw_reward(arm, &mut rng);
        let event = cycles.record_action(t, arm)?;
        let boundary = event.is_boundary();
        if boundary {
            boundary_sums[arm] += reward;
        }
        posterior.note_action(arm, reward, boundary);
        pulls[arm] += 1;
        actions.push(arm);

        let batch_index = match config.policy.mode {
            Mode::Batched { .. } => cycles.batch_index(),
            Mode::Classical => t,
        };
        observer.on_step(&StepView {
            t,
            arm,
            reward,
            thetas: &thetas,
            cycle_boundary: boundary,
            batch_index,
            frozen: &frozen,
        });
        if config.is_recorded(t) {
            points.push(TracePoint {
                t,
                action: arm,
                pseudo_regret: pseudo_regret(&pulls, gaps),
                batch_index,
            });
        }

        match config.policy.mode {
            Mode::Batched { alpha } => {
                if !matches!(event, CycleEvent::Closed(_)) {
                    continue;
                }
                if let Some(i) = cycles.overshoot() {
                    return Err(violation(format!(
                        "arm {i} cycle count {} passed its limit {} at step {t}",
                        cycles.cycle_counts()[i],
                        cycles.limits()[i]
                    )));
                }
                if cycles.batch_should_end() {
                    let summary = cycles.end_batch(t, alpha);
                    posterior.commit();
                    if posterior.variant() == Variant::Skip
                        && posterior.frozen_counts() != summary.cycle_counts.as_slice()
                    {
                        return Err(violation(format!(
                            "posterior counts {:?} differ from cycle counts {:?} at batch end {t}",
                            posterior.frozen_counts(),
                            summary.cycle_counts
                        )));
                    }
                    frozen = BoundarySnapshot {
                        end: t,
                        cycle_counts: summary.cycle_counts,
                        boundary_sums: boundary_sums.clone(),
                    };
                    batches.push(frozen.clone());
                }
            }
            Mode::Classical => {
                posterior.commit();
                frozen.end = t;
                frozen.cycle_counts.copy_from_slice(cycles.cycle_counts());
                frozen.boundary_sums.copy_from_slice(&boundary_sums);
            }
        }
    }

    let total: u64 = pulls.iter().sum();
    if total != horizon {
        return Err(violation(format!(
            "pull counts sum to {total}, not {horizon}"
        )));
    }
    let batch_count = match config.policy.mode {
        Mode::Batched { .. } => cycles.batch_count(horizon),
        Mode::Classical => horizon,
    };
    let trace = RunTrace {
        replication,
        horizon,
        final_regret: pseudo_regret(&pulls, gaps),
        points,
        actions,
        pulls,
        batch_count,
        completed_cycles: cycles.completed_cycles(),
        batches,
    };

    if let Mode::Batched { alpha } = config.policy.mode {
        // The ceiling's log term is negative below K steps; it is only
        // meaningful (and only claimed) from T = K on.
        if horizon >= arms as u64 {
            let bound = batch_bound(arms, alpha, horizon);
            if trace.batch_count as f64 > bound {
                return Err(violation(format!(
                    "B(T) = {} exceeds 1 + K + K log_alpha(T/K) = {bound}",
                    trace.batch_count
                )));
            }
        }
        let counted: u64 = trace.counts_before_final_batch().iter().sum();
        if counted > horizon {
            return Err(violation(format!(
                "cycle counts before the final batch sum to {counted} > T = {horizon}"
            )));
        }
    }
    Ok(trace)
}

fn pseudo_regret(pulls: &[u64], gaps: &[f64]) -> f64 {
    pulls.iter().zip(gaps).map(|(&n, &g)| g * n as f64).sum()
}

/// Maps a function over replication indices, in index order.
///
/// Implementations may run the calls in parallel but must return results in
/// the order of `range`.
pub trait Replicator {
    fn map_range<T, F>(&self, range: Range<u64>, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send;
}

/// Runs replications one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Replicator for Sequential {
    fn map_range<T, F>(&self, range: Range<u64>, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send,
    {
        range.map(f).collect()
    }
}

const CHUNK: u64 = 256;

/// Runs `count` replications through `runner` in fixed chunks and folds the
/// results in index order, so the outcome does not depend on how the runner
/// schedules work. Stops at the first error.
pub fn replicate<R, T, F, G>(runner: &R, count: u64, f: F, mut fold: G) -> Result<()>
where
    R: Replicator + ?Sized,
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
    G: FnMut(u64, T),
{
    let mut start = 0;
    while start < count {
        let end = (start + CHUNK).min(count);
        for (offset, result) in runner.map_range(start..end, &f).into_iter().enumerate() {
            fold(start + offset as u64, result?);
        }
        start = end;
    }
    Ok(())
}

/// Replication-averaged results of one policy on one environment.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateResult {
    pub policy: PolicyConfig,
    pub horizon: u64,
    pub replications: u64,
    /// Recorded steps of the curve.
    pub times: Vec<u64>,
    pub mean_regret: Vec<f64>,
    pub stderr_regret: Vec<f64>,
    pub mean_final_regret: f64,
    pub stderr_final_regret: f64,
    pub mean_batches: f64,
    pub max_batches: u64,
    pub mean_cycles: f64,
    /// Mean `N_i(T)` per arm.
    pub mean_pulls: Vec<f64>,
}

struct ReplicationSummary {
    regret: Vec<f64>,
    final_regret: f64,
    batches: u64,
    cycles: u64,
    pulls: Vec<u64>,
}

/// Runs every replication of `config` and averages them. An invariant
/// violation in any replication aborts the whole run with that error.
pub fn run_monte_carlo<R: Replicator + ?Sized>(
    config: &RunConfig,
    runner: &R,
) -> Result<AggregateResult> {
    config.validate()?;
    let times = config.recorded_steps();
    let arms = config.environment.num_arms();
    let mut curve = vec![Welford::default(); times.len()];
    let mut final_regret = Welford::default();
    let mut batches = Welford::default();
    let mut cycles = Welford::default();
    let mut pulls = vec![Welford::default(); arms];
    let mut max_batches = 0;

    replicate(
        runner,
        config.replications,
        |r| {
            let trace = run_episode(config, r)?;
            Ok(ReplicationSummary {
                regret: trace.points.iter().map(|p| p.pseudo_regret).collect(),
                final_regret: trace.final_regret,
                batches: trace.batch_count,
                cycles: trace.completed_cycles,
                pulls: trace.pulls,
            })
        },
        |_, summary| {
            for (acc, &value) in curve.iter_mut().zip(&summary.regret) {
                acc.push(value);
            }
            final_regret.push(summary.final_regret);
            batches.push(summary.batches as f64);
            cycles.push(summary.cycles as f64);
            for (acc, &n) in pulls.iter_mut().zip(&summary.pulls) {
                acc.push(n as f64);
            }
            max_batches = max_batches.max(summary.batches);
        },
    )?;

    Ok(AggregateResult {
        policy: config.policy,
        horizon: config.horizon,
        replications: config.replications,
        times,
        mean_regret: curve.iter().map(Welford::mean).collect(),
        stderr_regret: curve.iter().map(Welford::stderr).collect(),
        mean_final_regret: final_regret.mean(),
        stderr_final_regret: final_regret.stderr(),
        mean_batches: batches.mean(),
        max_batches,
        mean_cycles: cycles.mean(),
        mean_pulls: pulls.iter().map(Welford::mean).collect(),
    })
}
