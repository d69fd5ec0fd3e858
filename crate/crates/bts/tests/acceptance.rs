//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any fails.
//!
//! Every stochastic criterion runs with a fixed master seed, so the outcome
//! is reproducible.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use bts::Parallel;
use bts_core::cycle::batch_bound;
use bts_core::verify::{self, Verdict};
use bts_core::{
    run_episode, run_monte_carlo, AggregateResult, ArmSpec, CycleBatchState, CycleEvent,
    EnvironmentSpec, PolicyConfig, RunConfig, Variant,
};

const SEED: u64 = 20210601;

type Check = Result<String, String>;
type Criterion = Box<dyn FnOnce() -> Check>;

fn sim<T>(r: bts_core::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn bernoulli(ps: &[f64]) -> EnvironmentSpec {
    EnvironmentSpec::new(ps.iter().map(|&p| ArmSpec::bernoulli(p).unwrap()).collect()).unwrap()
}

fn gaussian_unit(means: &[f64]) -> EnvironmentSpec {
    EnvironmentSpec::new(
        means
            .iter()
            .map(|&m| ArmSpec::gaussian(m, 1.0).unwrap())
            .collect(),
    )
    .unwrap()
}

fn two_arm() -> EnvironmentSpec {
    bernoulli(&[0.75, 0.25])
}

/// The four regret-comparison environments.
fn panels() -> Vec<(&'static str, EnvironmentSpec)> {
    vec![
        ("bern_k2", two_arm()),
        ("bern_k5", bernoulli(&[0.75, 0.25, 0.25, 0.25, 0.25])),
        ("gauss_k2", gaussian_unit(&[1.0, 0.0])),
        ("gauss_k5", gaussian_unit(&[1.0, 0.0, 0.0, 0.0, 0.0])),
    ]
}

fn batched(alpha: f64, variant: Variant) -> PolicyConfig {
    PolicyConfig::batched(alpha, 1.0, variant).unwrap()
}

fn monte_carlo(
    env: &EnvironmentSpec,
    policy: PolicyConfig,
    horizon: u64,
    reps: u64,
) -> Result<AggregateResult, String> {
    let config = RunConfig::new(env.clone(), policy, horizon)
        .with_replications(reps)
        .with_seed(SEED)
        .with_stride(horizon);
    sim(run_monte_carlo(&config, &Parallel))
}

fn c1_cycle_semantics() -> Check {
    let mut state = CycleBatchState::new(3);
    let mut closed = Vec::new();
    for (i, &arm) in [0, 0, 1, 0, 2, 1, 1].iter().enumerate() {
        if let CycleEvent::Closed(c) = sim(state.record_action(i as u64 + 1, arm))? {
            closed.push((c.start, c.end));
        }
    }
    let open = state.current_cycle_start();
    let detail = format!("closed {closed:?}, open cycle starts at {open}");
    if closed == [(1, 3), (4, 5)] && open == 6 && state.last_step() == 7 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c2_batch_ceiling() -> Check {
    let envs = [
        (2, two_arm()),
        (5, bernoulli(&[0.75, 0.25, 0.25, 0.25, 0.25])),
    ];
    let reps = 640;
    let (mut episodes, mut violations, mut tightest) = (0u64, 0u64, f64::INFINITY);
    for (k, env) in &envs {
        for alpha in [1.00001, 1.25, 1.5, 2.0] {
            for horizon in [1_000u64, 10_000] {
                let ceiling = batch_bound(*k, alpha, horizon);
                for (variant, seed) in [(Variant::Skip, SEED), (Variant::Full, SEED + 1)] {
                    let config = RunConfig::new(env.clone(), batched(alpha, variant), horizon)
                        .with_replications(reps / 2)
                        .with_seed(seed)
                        .with_stride(horizon);
                    let mut local = Vec::new();
                    sim(bts_core::sim::replicate(
                        &Parallel,
                        config.replications,
                        |r| run_episode(&config, r).map(|t| t.batch_count),
                        |_, b| local.push(b),
                    ))?;
                    for b in local {
                        episodes += 1;
                        violations += u64::from(b as f64 > ceiling);
                        tightest = tightest.min(ceiling - b as f64);
                    }
                }
            }
        }
    }
    let detail =
        format!("{episodes} episodes, {violations} violations, smallest slack {tightest:.3}");
    if episodes >= 10_000 && violations == 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c3_two_arm_structure() -> Check {
    // M_i(T_j) = 2^(j-1). Batch 1 closes after one cycle and batch j >= 2
    // adds 2^(j-2) cycles, so 2^(j-1) cycles have completed by T_j.
    let config = RunConfig::new(two_arm(), batched(2.0, Variant::Skip), 10_000).with_seed(SEED);
    let mut batches_checked = 0;
    for r in 0..100 {
        let trace = sim(run_episode(&config, r))?;
        let mut state = CycleBatchState::new(2);
        let mut cycles_at_end = Vec::new();
        for (i, &a) in trace.actions.iter().enumerate() {
            let t = i as u64 + 1;
            if matches!(sim(state.record_action(t, a))?, CycleEvent::Closed(_))
                && state.batch_should_end()
            {
                state.end_batch(t, 2.0);
                cycles_at_end.push(state.completed_cycles());
            }
        }
        if trace.batches.len() < 3 {
            return Err(format!(
                "replication {r}: only {} batches",
                trace.batches.len()
            ));
        }
        for (j, batch) in trace.batches.iter().enumerate() {
            let power = 1u64 << j;
            let in_batch = cycles_at_end[j] - if j == 0 { 0 } else { cycles_at_end[j - 1] };
            let expected_in_batch = if j == 0 { 1 } else { power / 2 };
            if batch.cycle_counts != [power, power]
                || cycles_at_end[j] != power
                || in_batch != expected_in_batch
            {
                return Err(format!(
                    "replication {r} batch {}: M = {:?}, {} cycles in batch, {} total",
                    j + 1,
                    batch.cycle_counts,
                    in_batch,
                    cycles_at_end[j]
                ));
            }
            batches_checked += 1;
        }
    }
    Ok(format!(
        "100 episodes, {batches_checked} batches with M_i(T_j) = 2^(j-1)"
    ))
}

fn c4_reduced_comparison() -> Check {
    let env = two_arm();
    let (horizon, reps) = (10_000, 200);
    let classical = monte_carlo(&env, PolicyConfig::classical(1.0).unwrap(), horizon, reps)?;
    let near_one = monte_carlo(&env, batched(1.00001, Variant::Full), horizon, reps)?;
    let doubling = monte_carlo(&env, batched(2.0, Variant::Full), horizon, reps)?;
    let rel = (near_one.mean_final_regret - classical.mean_final_regret).abs()
        / classical.mean_final_regret;
    let ratio = doubling.mean_final_regret / classical.mean_final_regret;
    let ceiling = batch_bound(2, 2.0, horizon);
    let detail = format!(
        "regret classical {:.3}, alpha 1.00001 {:.3} (rel diff {:.3}), alpha 2 {:.3} (ratio {:.3}); \
         mean batches alpha 1.00001 {:.2}, alpha 2 {:.2} (ceiling {:.2})",
        classical.mean_final_regret,
        near_one.mean_final_regret,
        rel,
        doubling.mean_final_regret,
        ratio,
        near_one.mean_batches,
        doubling.mean_batches,
        ceiling
    );
    let ok = rel <= 0.2
        && ratio <= 2.5
        && near_one.mean_batches < 40.0
        && doubling.mean_batches < ceiling
        && doubling.mean_batches < 60.0;
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

const HORIZONS: [u64; 3] = [1_000, 10_000, 100_000];

/// Alpha = 2, full variant, 200 replications at each horizon.
fn horizon_sweep(env: &EnvironmentSpec) -> Result<Vec<AggregateResult>, String> {
    HORIZONS
        .iter()
        .map(|&t| monte_carlo(env, batched(2.0, Variant::Full), t, 200))
        .collect()
}

fn c5_log_scaling(sweep: &[AggregateResult]) -> Check {
    let scaled: Vec<f64> = sweep
        .iter()
        .map(|r| r.mean_final_regret / (r.horizon as f64).ln())
        .collect();
    let spread = scaled.iter().cloned().fold(f64::MIN, f64::max)
        / scaled.iter().cloned().fold(f64::MAX, f64::min);
    let growth = sweep[2].mean_final_regret / sweep[0].mean_final_regret;
    let detail = format!(
        "regret/log T = {:.3?} (max/min {spread:.3}); R(1e5)/R(1e3) = {growth:.3}",
        scaled
    );
    if spread < 2.0 && growth < 10.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c6_batch_growth(sweep: &[AggregateResult]) -> Check {
    let growth = sweep[2].mean_batches - sweep[0].mean_batches;
    // Going from T to 100 T raises the ceiling by K log_alpha(100).
    let allowance = 2.0 * 100f64.ln() / 2f64.ln();
    let mut per_env = BTreeMap::new();
    for (name, env) in panels() {
        let batches = if name == "bern_k2" {
            sweep[2].mean_batches
        } else {
            monte_carlo(&env, batched(2.0, Variant::Full), 100_000, 200)?.mean_batches
        };
        per_env.insert(name, batches);
    }
    let max = per_env.values().cloned().fold(f64::MIN, f64::max);
    let min = per_env.values().cloned().fold(f64::MAX, f64::min);
    // Reported only: the spread between environments with the same K.
    let same_k = |a: &str, b: &str| (per_env[a] - per_env[b]).abs();
    let detail = format!(
        "mean B: {:.2?} at T = {HORIZONS:?}; B(1e5) - B(1e3) = {growth:.2} (allowed [0, {allowance:.2}]); \
         alpha 2 at T = 1e5 by environment {per_env:.2?}, spread {:.2} (allowed 5; K=2 pair {:.2}, K=5 pair {:.2})",
        sweep.iter().map(|r| r.mean_batches).collect::<Vec<_>>(),
        max - min,
        same_k("bern_k2", "gauss_k2"),
        same_k("bern_k5", "gauss_k5"),
    );
    if (0.0..=allowance).contains(&growth) && max - min <= 5.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c7_tail_sandwich() -> Check {
    let report = verify::check_tail_sandwich(1000, 8.0, 1e-12);
    let failing = report.points.iter().filter(|p| !p.holds).count();
    let detail = format!(
        "{} grid points on (0, 8], {failing} outside the sandwich",
        report.points.len()
    );
    if report.points.len() == 1000 && failing == 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c8_hoeffding() -> Check {
    let mut worst = f64::MIN;
    let mut evaluated = 0;
    for k in 1..=9 {
        let arm = ArmSpec::bernoulli(k as f64 / 10.0).unwrap();
        for step in -500..=500 {
            let lambda = step as f64 / 100.0;
            let (mgf, bound) = sim(verify::hoeffding_mgf_exact(&arm, lambda))?;
            worst = worst.max(mgf / bound);
            evaluated += 1;
        }
    }
    let detail = format!("{evaluated} (p, lambda) pairs, max mgf / bound = {worst:.6}");
    if worst <= 1.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c9_supermartingale() -> Check {
    let config = RunConfig::new(two_arm(), batched(2.0, Variant::Skip), 2000)
        .with_replications(10_000)
        .with_seed(SEED);
    let lambdas = [-1.0, -0.25, 0.0, 0.25, 1.0];
    let estimates = sim(verify::supermartingale_check(
        &config,
        1,
        &lambdas,
        &[100, 500, 2000],
        &Parallel,
    ))?;
    let mut parts = Vec::new();
    let mut ok = true;
    for e in &estimates {
        if e.lambda == 0.0 {
            ok &= e.means.iter().all(|&m| m == 1.0);
        } else {
            ok &= e.passed();
        }
        let worst = e
            .means
            .iter()
            .zip(&e.stderrs)
            .map(|(m, s)| m - 3.0 * s)
            .fold(f64::MIN, f64::max);
        parts.push(format!("lambda {}: max mean - 3se {worst:.4}", e.lambda));
    }
    let detail = parts.join("; ");
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c10_stopped_tail() -> Check {
    let config = RunConfig::new(two_arm(), batched(2.0, Variant::Skip), 5000)
        .with_replications(10_000)
        .with_seed(SEED);
    let rows = sim(verify::stopped_tail_check(
        &config,
        1,
        4,
        &[0.5, 1.0, 2.0],
        &Parallel,
    ))?;
    let detail = rows
        .iter()
        .map(|r| {
            format!(
                "{} {}: {:.4} vs {:.4}",
                r.check,
                r.parameters.split(';').nth(2).unwrap_or(""),
                r.estimate,
                r.bound
            )
        })
        .collect::<Vec<_>>()
        .join("; ");
    if rows.iter().all(|r| r.verdict == Verdict::Pass) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

const DETERMINISM_CONFIG: &str = r#"
master_seed = 314

[[experiment]]
name = "bern"
horizon = 3000
replications = 600
trace_stride = 100
arms = [{ kind = "bernoulli", p = 0.75 }, { kind = "bernoulli", p = 0.25 }, { kind = "bernoulli", p = 0.6 }]

[[experiment.policy]]
policy = "batched_ts"
alpha = [1.00001, 2.0]

[[experiment.policy]]
policy = "batched_ts"
alpha = 1.5
variant = "skip"

[[experiment.policy]]
policy = "classical_ts"

[[experiment]]
name = "gauss"
horizon = 2000
replications = 300
trace_stride = 250
arms = [{ kind = "gaussian", mean = 1.0, variance = 1.0 }, { kind = "gaussian", mean = 0.0, variance = 1.0 }]

[[experiment.policy]]
policy = "batched_ts"
alpha = 1.25

[verify]
replications = 600
martingale_horizon = 500
checkpoints = [100, 500]
tail_horizon = 500
misestimation_horizon = 300
misestimation_steps = [300]
mgf_samples = 5000
"#;

fn files_under(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![root.to_owned()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path
                    .strip_prefix(root)
                    .unwrap()
                    .to_string_lossy()
                    .into_owned();
                files.insert(rel, fs::read(&path).unwrap());
            }
        }
    }
    files
}

fn c11_thread_determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = dir.path().join("cfg.toml");
    fs::write(&config, DETERMINISM_CONFIG).map_err(|e| e.to_string())?;
    let run = |threads: &str| -> Result<BTreeMap<String, Vec<u8>>, String> {
        let out = dir.path().join(format!("out{threads}"));
        for extra in [&[][..], &["--verify"][..]] {
            let status = Command::new(env!("CARGO_BIN_EXE_bts"))
                .arg("--config")
                .arg(&config)
                .arg("--out")
                .arg(&out)
                .args(["--threads", threads])
                .args(extra)
                .output()
                .map_err(|e| e.to_string())?;
            if !status.status.success() {
                return Err(format!(
                    "bts exited with {:?}: {}",
                    status.status,
                    String::from_utf8_lossy(&status.stderr)
                ));
            }
        }
        Ok(files_under(&out))
    };
    let one = run("1")?;
    let eight = run("8")?;
    let differing: Vec<&String> = one
        .keys()
        .filter(|k| one.get(*k) != eight.get(*k))
        .collect();
    let detail = format!(
        "{} CSV files compared, {} differ {differing:?}",
        one.len(),
        differing.len()
    );
    if one.len() >= 10 && one.keys().eq(eight.keys()) && differing.is_empty() {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn main() -> ExitCode {
    let sweep = horizon_sweep(&two_arm());
    let from_sweep = |f: fn(&[AggregateResult]) -> Check| -> Criterion {
        let sweep = sweep.clone();
        Box::new(move || f(&sweep?))
    };
    let criteria: Vec<(&str, Criterion)> = vec![
        (
            "cycle semantics on the worked example",
            Box::new(c1_cycle_semantics),
        ),
        ("deterministic batch ceiling", Box::new(c2_batch_ceiling)),
        (
            "K=2, alpha=2 batch structure",
            Box::new(c3_two_arm_structure),
        ),
        (
            "reduced two-arm Bernoulli comparison",
            Box::new(c4_reduced_comparison),
        ),
        ("log T regret scaling", from_sweep(c5_log_scaling)),
        (
            "batch count growth and stability",
            from_sweep(c6_batch_growth),
        ),
        ("Gaussian tail sandwich", Box::new(c7_tail_sandwich)),
        ("Hoeffding MGF bound", Box::new(c8_hoeffding)),
        ("supermartingale expectation", Box::new(c9_supermartingale)),
        ("stopped tail bound", Box::new(c10_stopped_tail)),
        ("thread-count determinism", Box::new(c11_thread_determinism)),
    ];

    let mut failed = 0;
    for (i, (name, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let (tag, detail) = match check() {
            Ok(detail) => ("PASS", detail),
            Err(detail) => {
                failed += 1;
                ("FAIL", detail)
            }
        };
        println!(
            "{tag} {:>2} {name} [{:.1}s]: {detail}",
            i + 1,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", 11 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
