use std::path::PathBuf;
use std::process::ExitCode;

use bts::output::policy_label;
use bts::runner::{self, Options, Parallel, RunError};
use bts::ExperimentFile;
use clap::Parser;

/// Batched Thompson sampling experiments and verification checks.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Args {
    /// Experiment file (TOML)
    #[arg(long)]
    config: PathBuf,

    /// Output directory; overrides `output_dir` in the file
    #[arg(long)]
    out: Option<PathBuf>,

    /// Master seed; overrides `master_seed` in the file
    #[arg(long)]
    seed: Option<u64>,

    /// Run only the named experiment
    #[arg(long)]
    experiment: Option<String>,

    /// Worker threads (default: one per core)
    #[arg(long)]
    threads: Option<usize>,

    /// Run the verification suite instead of the experiments
    #[arg(long)]
    verify: bool,
}

fn run(args: Args) -> Result<(), RunError> {
    let file = ExperimentFile::from_path(&args.config)?;
    let options = Options {
        out_dir: args.out,
        seed: args.seed,
        experiment: args.experiment,
    };
    if args.verify {
        let rows = runner::verify_to_file(&file, &options, &Parallel)?;
        for row in &rows {
            println!(
                "{:<26} {:<9} {}",
                row.check,
                row.verdict.as_str(),
                row.parameters
            );
        }
        println!(
            "wrote {}",
            options.out_dir(&file).join("verification.csv").display()
        );
        let failed = rows.iter().filter(|r| r.verdict.is_failure()).count();
        return if failed > 0 {
            Err(RunError::ChecksFailed { failed })
        } else {
            Ok(())
        };
    }
    for report in runner::run_experiments(&file, &options, &Parallel)? {
        println!("{}", report.name);
        for r in &report.results {
            println!(
                "  {:<28} regret {:>10.3} +- {:<8.3} batches {:>10.2} (max {})",
                policy_label(&r.policy),
                r.mean_final_regret,
                r.stderr_final_regret,
                r.mean_batches,
                r.max_batches
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Some(threads) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
