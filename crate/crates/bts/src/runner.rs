use std::fs::{self, File};
use std::io::BufWriter;
use std::ops::Range;
use std::path::{Path, PathBuf};

use bts_core::verify::{self, CheckRow, MisestimationParams, Verdict};
use bts_core::{run_episode, run_monte_carlo, AggregateResult, ArmSpec, Replicator};
use rayon::prelude::*;

use crate::config::{ConfigError, ExperimentFile, VerifySettings};
use crate::output;

/// Spreads replications over the current rayon pool. Results come back in
/// index order, so output does not depend on the pool size.
#[derive(Debug, Clone, Copy, Default)]
pub struct Parallel;

impl Replicator for Parallel {
    fn map_range<T, F>(&self, range: Range<u64>, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send,
    {
        range.into_par_iter().map(f).collect()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}", path = .path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}", path = .path.display())]
    Csv { path: PathBuf, source: csv::Error },
    #[error(transparent)]
    Simulation(#[from] bts_core::Error),
    #[error("{failed} verification check(s) failed")]
    ChecksFailed { failed: usize },
}

impl RunError {
    /// 2 when a run or check broke an asserted bound, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Simulation(bts_core::Error::InvariantViolation { .. })
            | RunError::ChecksFailed { .. } => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Options {
    /// Overrides the file's `output_dir`.
    pub out_dir: Option<PathBuf>,
    /// Overrides the file's `master_seed`.
    pub seed: Option<u64>,
    /// Run only the experiment with this name.
    pub experiment: Option<String>,
}

impl Options {
    pub fn out_dir(&self, file: &ExperimentFile) -> PathBuf {
        self.out_dir
            .clone()
            .unwrap_or_else(|| file.output_dir.clone())
    }

    pub fn seed(&self, file: &ExperimentFile) -> u64 {
        self.seed.unwrap_or(file.master_seed)
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub name: String,
    pub results: Vec<AggregateResult>,
}

fn create(path: &Path) -> Result<BufWriter<File>, RunError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| RunError::Io {
            path: path.to_owned(),
            source,
        })
}

fn write_csv<F>(path: &Path, write: F) -> Result<(), RunError>
where
    F: FnOnce(BufWriter<File>) -> csv::Result<()>,
{
    write(create(path)?).map_err(|source| RunError::Csv {
        path: path.to_owned(),
        source,
    })
}

/// Runs every selected experiment and writes, under `<out>/<name>/`:
/// `aggregate.csv`, `curves.csv`, and for each policy the trace and batch
/// table of replication 0.
pub fn run_experiments<R: Replicator + ?Sized>(
    file: &ExperimentFile,
    options: &Options,
    runner: &R,
) -> Result<Vec<ExperimentReport>, RunError> {
    let selected: Vec<_> = match &options.experiment {
        Some(name) => vec![file.experiment(name)?],
        None => file.experiments.iter().collect(),
    };
    let seed = options.seed(file);
    let out = options.out_dir(file);
    let mut reports = Vec::with_capacity(selected.len());
    for experiment in selected {
        let dir = out.join(&experiment.name);
        fs::create_dir_all(&dir).map_err(|source| RunError::Io {
            path: dir.clone(),
            source,
        })?;
        let mut results = Vec::with_capacity(experiment.policies.len());
        for &policy in &experiment.policies {
            let config = experiment.run_config(policy, seed);
            results.push(run_monte_carlo(&config, runner)?);

            let trace = run_episode(&config, 0)?;
            let label = output::policy_label(&policy);
            write_csv(&dir.join(format!("trace_{label}.csv")), |w| {
                output::write_trace_csv(&trace, w)
            })?;
            if policy.is_batched() {
                let arms = experiment.environment.num_arms();
                write_csv(&dir.join(format!("batches_{label}.csv")), |w| {
                    output::write_batches_csv(&trace.batches, arms, w)
                })?;
            }
        }
        write_csv(&dir.join("aggregate.csv"), |w| {
            output::write_aggregate_csv(&results, w)
        })?;
        write_csv(&dir.join("curves.csv"), |w| {
            output::write_curves_csv(&results, w)
        })?;
        reports.push(ExperimentReport {
            name: experiment.name.clone(),
            results,
        });
    }
    Ok(reports)
}

fn deterministic_row(
    check: &str,
    parameters: String,
    estimate: f64,
    bound: f64,
    holds: bool,
) -> CheckRow {
    CheckRow {
        check: check.to_owned(),
        parameters,
        estimate,
        stderr: 0.0,
        bound,
        verdict: if holds { Verdict::Pass } else { Verdict::Fail },
        vacuous: false,
    }
}

fn closed_form_checks(settings: &VerifySettings, seed: u64) -> bts_core::Result<Vec<CheckRow>> {
    let mut rows = Vec::new();

    // Worst ratio across the grid: lower / Q and Q / upper never exceed 1.
    let (n, max, slack) = (1000, 8.0, 1e-12);
    let report = verify::check_tail_sandwich(n, max, slack);
    let worst = report
        .points
        .iter()
        .map(|p| (p.lower / p.q).max(p.q / p.upper))
        .fold(f64::NEG_INFINITY, f64::max);
    rows.push(deterministic_row(
        "tail_sandwich",
        format!("points={n};max={max};slack={slack}"),
        worst,
        1.0,
        report.passed(),
    ));

    let grid: Vec<f64> = (1..=240).map(|k| 10f64.powf(0.05 * k as f64)).collect();
    let threshold = verify::inverse_tail_threshold(&grid)?;
    rows.push(deterministic_row(
        "inverse_tail_threshold",
        "grid=10^(0.05k);k=1..240".to_owned(),
        threshold.unwrap_or(f64::INFINITY),
        grid[grid.len() - 1],
        threshold.is_some(),
    ));

    let lambdas: Vec<f64> = (-20..=20).map(|k| k as f64 * 0.25).collect();
    for k in 1..=9 {
        let p = k as f64 / 10.0;
        let arm = ArmSpec::bernoulli(p)?;
        let mut worst = f64::NEG_INFINITY;
        for &lambda in &lambdas {
            let (mgf, bound) = verify::hoeffding_mgf_exact(&arm, lambda)?;
            worst = worst.max(mgf / bound);
        }
        rows.push(deterministic_row(
            "hoeffding_mgf_exact",
            format!("p={p};lambda=-5..5;step=0.25"),
            worst,
            1.0,
            worst <= 1.0,
        ));
    }
    for p in [0.5, 0.9] {
        let mc_lambdas: Vec<f64> = (-5..=5).map(f64::from).collect();
        rows.extend(verify::hoeffding_mgf_check(
            &ArmSpec::bernoulli(p)?,
            &mc_lambdas,
            settings.mgf_samples,
            seed,
        )?);
    }
    Ok(rows)
}

/// Runs the verification suite described by `settings` and returns its
/// report rows. Failed checks are reported in the rows, not as errors.
pub fn run_verification<R: Replicator + ?Sized>(
    settings: &VerifySettings,
    seed: u64,
    runner: &R,
) -> bts_core::Result<Vec<CheckRow>> {
    let mut rows = closed_form_checks(settings, seed)?;

    let config = settings.run_config(settings.martingale_horizon, seed)?;
    for estimate in verify::supermartingale_check(
        &config,
        settings.arm,
        &settings.lambdas,
        &settings.checkpoints,
        runner,
    )? {
        rows.extend(estimate.rows());
    }

    let config = settings.run_config(settings.tail_horizon, seed)?;
    rows.extend(verify::stopped_tail_check(
        &config,
        settings.arm,
        settings.tail_visit,
        &settings.tail_levels,
        runner,
    )?);

    let config = settings.run_config(settings.misestimation_horizon, seed)?;
    for &constant in &settings.misestimation_constants {
        for &step in &settings.misestimation_steps {
            let params = MisestimationParams {
                at_step: Some(step),
                constant,
            };
            rows.extend(verify::misestimation_check(
                &config,
                settings.arm,
                params,
                runner,
            )?);
        }
    }
    Ok(rows)
}

/// Runs the verification suite and writes `<out>/verification.csv`.
pub fn verify_to_file<R: Replicator + ?Sized>(
    file: &ExperimentFile,
    options: &Options,
    runner: &R,
) -> Result<Vec<CheckRow>, RunError> {
    let rows = run_verification(&file.verify, options.seed(file), runner)?;
    let out = options.out_dir(file);
    fs::create_dir_all(&out).map_err(|source| RunError::Io {
        path: out.clone(),
        source,
    })?;
    write_csv(&out.join("verification.csv"), |w| {
        output::write_verification_csv(&rows, w)
    })?;
    Ok(rows)
}
