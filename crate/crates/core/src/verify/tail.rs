//! Standard normal upper tail `Q(x) = P(X >= x)` and its inverse.

use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};

/// `Q(x) = erfc(x / sqrt 2) / 2`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

const BRACKET: f64 = 40.0;
const MAX_BISECTIONS: u32 = 200;

/// The `x` with `Q(x) = p`, by bisection on `[-40, 40]`.
///
/// Bisection runs until the bracket can no longer shrink, which leaves the
/// result within a couple of ulps of the root of the floating-point `Q`.
pub fn q_inverse(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::ProbabilityDomain(p));
    }
    // Q is decreasing: Q(lo) >= p >= Q(hi).
    let (mut lo, mut hi) = (-BRACKET, BRACKET);
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if q_function(mid) >= p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Lower and upper bounds of the Gaussian tail sandwich at `delta > 0`:
/// `(1/d - 1/d^3) phi(d) <= Q(d) <= phi(d) / d`, `phi` the standard density.
pub fn tail_sandwich(delta: f64) -> (f64, f64) {
    let density = libm::exp(-0.5 * delta * delta) / libm::sqrt(2.0 * PI);
    let lower = (1.0 / delta - 1.0 / (delta * delta * delta)) * density;
    let upper = density / delta;
    (lower, upper)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailPoint {
    pub delta: f64,
    pub lower: f64,
    pub q: f64,
    pub upper: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailCheckReport {
    pub points: Vec<TailPoint>,
}

impl TailCheckReport {
    pub fn passed(&self) -> bool {
        self.points.iter().all(|p| p.holds)
    }
}

/// Evaluates the sandwich at `delta_k = max * k / n`, `k = 1..=n`.
///
/// `slack` is the relative allowance for rounding at each side.
pub fn check_tail_sandwich(n: usize, max: f64, slack: f64) -> TailCheckReport {
    let points = (1..=n)
        .map(|k| {
            let delta = max * k as f64 / n as f64;
            let (lower, upper) = tail_sandwich(delta);
            let q = q_function(delta);
            let holds = lower <= q + slack * q && q <= upper + slack * upper;
            TailPoint {
                delta,
                lower,
                q,
                upper,
                holds,
            }
        })
        .collect();
    TailCheckReport { points }
}

/// Scans `grid` (increasing) for the inverse-tail bound
/// `Q^-1(1/x) >= sqrt(4/3 log x)` and returns the smallest grid point from
/// which it holds at every later grid point, or `None` if it fails at the
/// last point.
pub fn inverse_tail_threshold(grid: &[f64]) -> Result<Option<f64>> {
    let mut threshold = None;
    for &x in grid {
        let holds = q_inverse(1.0 / x)? >= libm::sqrt(4.0 / 3.0 * libm::log(x));
        match (holds, threshold) {
            (true, None) => threshold = Some(x),
            (false, _) => threshold = None,
            _ => {}
        }
    }
    Ok(threshold)
}
