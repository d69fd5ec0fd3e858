//! Hoeffding's lemma: `E[exp(lambda (X - E X))] <= exp(lambda^2 (b - a)^2 / 8)`
//! for `X` supported on `[a, b]`.

use alloc::format;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{CheckRow, Verdict};
use crate::env::ArmSpec;
use crate::error::{Error, Result};
use crate::stats::Welford;

/// Two-sided 99% normal quantile.
const Z99: f64 = 2.5758293035489004;

pub fn hoeffding_bound(lambda: f64, width: f64) -> f64 {
    libm::exp(lambda * lambda * width * width / 8.0)
}

/// `E[exp(lambda (X - p))]` for `X ~ Bernoulli(p)`, from the two support points.
pub fn centered_bernoulli_mgf(p: f64, lambda: f64) -> f64 {
    p * libm::exp(lambda * (1.0 - p)) + (1.0 - p) * libm::exp(-lambda * p)
}

/// Exact centred MGF and its bound, for bounded arms.
pub fn hoeffding_mgf_exact(arm: &ArmSpec, lambda: f64) -> Result<(f64, f64)> {
    match *arm {
        ArmSpec::Bernoulli { p } => Ok((
            centered_bernoulli_mgf(p, lambda),
            hoeffding_bound(lambda, 1.0),
        )),
        ArmSpec::Gaussian { .. } => Err(Error::UnboundedEnvironment),
    }
}

/// Monte Carlo estimate of the centred MGF at each `lambda`, from `samples`
/// draws of `arm` (the same draws for every lambda). Passes unless the lower
/// edge of the 99% interval lies above the bound.
pub fn hoeffding_mgf_check(
    arm: &ArmSpec,
    lambdas: &[f64],
    samples: u64,
    seed: u64,
) -> Result<Vec<CheckRow>> {
    let (lo, hi) = arm.support().ok_or(Error::UnboundedEnvironment)?;
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be positive".into()));
    }
    let mean = arm.mean();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = alloc::vec![Welford::default(); lambdas.len()];
    for _ in 0..samples {
        let x = arm.draw(&mut rng);
        for (a, &lambda) in acc.iter_mut().zip(lambdas) {
            a.push(libm::exp(lambda * (x - mean)));
        }
    }
    Ok(lambdas
        .iter()
        .zip(&acc)
        .map(|(&lambda, a)| {
            let bound = hoeffding_bound(lambda, hi - lo);
            let lower_edge = a.mean() - Z99 * a.stderr();
            CheckRow {
                check: "hoeffding_mgf".into(),
                parameters: format!("arm={arm:?};lambda={lambda};samples={samples}"),
                estimate: a.mean(),
                stderr: a.stderr(),
                bound,
                verdict: if lower_edge > bound {
                    Verdict::Fail
                } else {
                    Verdict::Pass
                },
                vacuous: false,
            }
        })
        .collect())
}
