//! Cycle tracking and adaptive batch scheduling.
//!
//! Cycle `k` starts at `C_b(k)` (step 1 for the first cycle, the step after
//! the previous cycle's end otherwise) and ends at the first later step whose
//! action differs from the one before it. The start step and the end step are
//! the cycle's *boundary* steps; each adds one to the cycle count `M_i` of the
//! arm played there.
//!
//! Batch `j` carries limits `U_(i,j)`. At every cycle end the batch closes if
//! some arm has `M_i == U_(i,j)`; the next limits are then
//! `max(1, ceil(alpha * M_i))`. Everything here is a function of the action
//! sequence alone.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// A cycle that has just closed. Times are 1-based steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClosedCycle {
    /// 1-based cycle number.
    pub index: u64,
    pub start: u64,
    pub end: u64,
    pub first_arm: usize,
    pub last_arm: usize,
}

/// Outcome of recording one action.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CycleEvent {
    /// The step opened a new cycle.
    Opened,
    /// A repeat of the cycle's first arm.
    Continued,
    Closed(ClosedCycle),
}

impl CycleEvent {
    /// Whether the step is a cycle start or end.
    pub fn is_boundary(&self) -> bool {
        !matches!(self, CycleEvent::Continued)
    }
}

/// Snapshot taken when a batch closes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchSummary {
    /// 1-based batch number `j`.
    pub index: u64,
    /// End step `T_j`.
    pub end: u64,
    /// `M_i(T_j)` for every arm.
    pub cycle_counts: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleBatchState {
    current_cycle_start: u64,
    cycle_first_action: Option<usize>,
    last_action: Option<usize>,
    last_step: u64,
    m: Vec<u64>,
    m_at_last_batch_end: Vec<u64>,
    limits: Vec<u64>,
    batch_ends: Vec<u64>,
    batch_index: u64,
    completed_cycles: u64,
}

impl CycleBatchState {
    pub fn new(arms: usize) -> Self {
        CycleBatchState {
            current_cycle_start: 1,
            cycle_first_action: None,
            last_action: None,
            last_step: 0,
            m: vec![0; arms],
            m_at_last_batch_end: vec![0; arms],
            limits: vec![1; arms],
            batch_ends: Vec::new(),
            batch_index: 1,
            completed_cycles: 0,
        }
    }

    pub fn num_arms(&self) -> usize {
        self.m.len()
    }

    /// Records action `arm` at step `t`, which must follow the previous step.
    pub fn record_action(&mut self, t: u64, arm: usize) -> Result<CycleEvent> {
        if t != self.last_step + 1 {
            return Err(Error::StepOutOfOrder {
                expected: self.last_step + 1,
                got: t,
            });
        }
        if arm >= self.m.len() {
            return Err(Error::ArmOutOfRange {
                arm,
                arms: self.m.len(),
            });
        }
        let event = if t == self.current_cycle_start {
            self.m[arm] += 1;
            self.cycle_first_action = Some(arm);
            CycleEvent::Opened
        } else if self.last_action != Some(arm) {
            self.m[arm] += 1;
            self.completed_cycles += 1;
            let closed = ClosedCycle {
                index: self.completed_cycles,
                start: self.current_cycle_start,
                end: t,
                first_arm: self.cycle_first_action.unwrap_or(arm),
                last_arm: arm,
            };
            self.current_cycle_start = t + 1;
            self.cycle_first_action = None;
            CycleEvent::Closed(closed)
        } else {
            CycleEvent::Continued
        };
        self.last_action = Some(arm);
        self.last_step = t;
        Ok(event)
    }

    /// Batch-end predicate, evaluated right after a cycle closes: some arm's
    /// cycle count has reached its limit for the current batch.
    pub fn batch_should_end(&self) -> bool {
        self.m.iter().zip(&self.limits).any(|(m, u)| m == u)
    }

    /// First arm whose cycle count has passed its limit, if any. Never
    /// happens when the predicate is checked at every cycle end.
    pub fn overshoot(&self) -> Option<usize> {
        self.m.iter().zip(&self.limits).position(|(m, u)| m > u)
    }

    /// Closes the current batch at step `t` and sets the next limits.
    pub fn end_batch(&mut self, t: u64, alpha: f64) -> BatchSummary {
        debug_assert!(alpha > 1.0);
        let summary = BatchSummary {
            index: self.batch_index,
            end: t,
            cycle_counts: self.m.clone(),
        };
        self.batch_ends.push(t);
        self.m_at_last_batch_end.copy_from_slice(&self.m);
        for (limit, &m) in self.limits.iter_mut().zip(&self.m) {
            *limit = next_limit(alpha, m);
        }
        self.batch_index += 1;
        summary
    }

    /// `B(t)`: the number of batches intersecting `[1, t]`, counting a batch
    /// still in progress.
    pub fn batch_count(&self, t: u64) -> u64 {
        self.batch_ends.partition_point(|&end| end < t) as u64 + 1
    }

    /// Number of the batch currently open.
    pub fn batch_index(&self) -> u64 {
        self.batch_index
    }

    pub fn current_cycle_start(&self) -> u64 {
        self.current_cycle_start
    }

    pub fn cycle_first_action(&self) -> Option<usize> {
        self.cycle_first_action
    }

    pub fn last_action(&self) -> Option<usize> {
        self.last_action
    }

    pub fn last_step(&self) -> u64 {
        self.last_step
    }

    /// Current cycle counts `M_i(t)`.
    pub fn cycle_counts(&self) -> &[u64] {
        &self.m
    }

    /// `M_i` at the most recent batch end (zero before the first one).
    pub fn counts_at_last_batch_end(&self) -> &[u64] {
        &self.m_at_last_batch_end
    }

    /// Limits `U_(i,j)` of the open batch.
    pub fn limits(&self) -> &[u64] {
        &self.limits
    }

    /// Completed batch end times `T_1 < T_2 < ...`.
    pub fn batch_ends(&self) -> &[u64] {
        &self.batch_ends
    }

    pub fn completed_cycles(&self) -> u64 {
        self.completed_cycles
    }
}

/// `max(1, ceil(alpha * m))`.
///
/// A product within one ulp of an integer is taken to be that integer, so
/// representation error cannot push e.g. `2 * 4` up to 9.
pub fn next_limit(alpha: f64, m: u64) -> u64 {
    let product = alpha * m as f64;
    let nearest = libm::round(product);
    let ulp = f64::from_bits(product.to_bits() + 1) - product;
    let ceiling = if (product - nearest).abs() <= ulp {
        nearest
    } else {
        libm::ceil(product)
    };
    (ceiling as u64).max(1)
}

/// The deterministic batch ceiling `1 + K + K log_alpha(T / K)`.
pub fn batch_bound(arms: usize, alpha: f64, horizon: u64) -> f64 {
    let k = arms as f64;
    1.0 + k + k * libm::log(horizon as f64 / k) / libm::log(alpha)
}
