use std::path::Path;

use bts::config::ExperimentFile;
use bts_core::{Mode, Variant};

fn repo_config(name: &str) -> ExperimentFile {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name);
    ExperimentFile::from_path(&path).unwrap()
}

#[test]
fn full_recipe_expands_to_five_runs_per_panel() {
    let file = repo_config("regret_grid.toml");
    assert_eq!(file.experiments.len(), 4);
    for exp in &file.experiments {
        assert_eq!((exp.horizon, exp.replications), (100_000, 1000));
        assert_eq!(exp.policies.len(), 5);
        let alphas: Vec<f64> = exp.policies.iter().filter_map(|p| p.alpha()).collect();
        assert_eq!(alphas, [1.00001, 1.25, 1.5, 2.0]);
        assert_eq!(exp.policies[4].mode, Mode::Classical);
        assert!(exp
            .policies
            .iter()
            .all(|p| p.sigma2 == 1.0 && p.variant == Variant::Full));
    }
    let arms: Vec<usize> = file
        .experiments
        .iter()
        .map(|e| e.environment.num_arms())
        .collect();
    assert_eq!(arms, [2, 5, 2, 5]);
    assert!(!file.experiments[2].environment.is_bounded());
}

#[test]
fn quick_recipe_parses() {
    let file = repo_config("quick.toml");
    assert_eq!(file.experiments.len(), 4);
    assert_eq!(file.verify.replications, 2000);
}

#[test]
fn alpha_below_one_is_rejected_with_position() {
    let text = r#"
master_seed = 1

[[experiment]]
name = "x"
horizon = 1000
replications = 10
arms = [{ kind = "bernoulli", p = 0.5 }, { kind = "bernoulli", p = 0.4 }]

[[experiment.policy]]
policy = "batched_ts"
alpha = 0.9
"#;
    let err = ExperimentFile::from_toml(text).unwrap_err();
    assert!(err.contains("alpha must exceed 1"), "{err}");
    assert!(err.contains("line 10"), "{err}");
}

#[test]
fn missing_file_and_unknown_experiment() {
    let err = ExperimentFile::from_path(Path::new("/nonexistent/cfg.toml")).unwrap_err();
    assert!(err.to_string().contains("/nonexistent/cfg.toml"));
    let file = repo_config("quick.toml");
    assert!(file.experiment("bern_k5").is_ok());
    assert!(file.experiment("nope").is_err());
}
