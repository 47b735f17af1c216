use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use qdeploy::pipeline::{baseline_random, prepare, read_json_reports, run_experiment, ExperimentConfig};
use qdeploy::rl::compute_reward;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/toy4").join(name)
}

fn quick(out: &Path, extra: &[(&str, &str)]) -> Vec<(String, String)> {
    let mut v: Vec<(String, String)> = [
        ("iterations", "30"),
        ("hidden", "16"),
        ("twirls", "4"),
        ("twirl_shots", "1024"),
        ("backend", "mixture"),
    ]
    .iter()
    .chain(extra)
    .map(|(k, v)| (k.to_string(), v.to_string()))
    .collect();
    v.push(("output".into(), out.to_string_lossy().into_owned()));
    v
}

#[test]
fn two_schemes_give_two_rows_and_one_curve() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::load_with(fixture("toy4.cfg"), &quick(dir.path(), &[("schemes", "quest,rl3")])).unwrap();
    let run = run_experiment(&cfg).unwrap();
    assert_eq!(run.outcomes.len(), 2);
    let csv = std::fs::read_to_string(dir.path().join("reports.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    let curves = std::fs::read_to_string(dir.path().join("curves_rl3.csv")).unwrap();
    assert_eq!(curves.lines().next(), Some("episode,loss,max_q,episode_reward"));
    assert_eq!(curves.lines().count(), 31);
    assert!(!dir.path().join("curves_quest.csv").exists());
    for s in ["quest", "rl3"] {
        assert!(dir.path().join(s).join("selection.csv").is_file());
        assert!(dir.path().join(s).join("circuit.txt").is_file());
    }

    for r in read_json_reports(dir.path().join("reports.json")).unwrap() {
        let w = cfg.weights_for(r.scheme.parse().unwrap());
        assert!((r.reward - compute_reward(r.fairness, r.accuracy, w)).abs() < 1e-12);
        assert_eq!(r.space_size, run.experiment.space_size);
        assert_eq!(r.config_hash, cfg.hash());
        assert!((0.0..=1.0).contains(&r.accuracy) && (0.0..=1.0).contains(&r.fairness));
    }
    let expected: u128 = run.experiment.lists.iter().map(|l| l.len() as u128).product();
    assert_eq!(run.experiment.space_size, expected);
}

#[test]
fn warm_cache_changes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let over = quick(dir.path(), &[("schemes", "quest,random,rl2")]);
    let cfg = ExperimentConfig::load_with(fixture("toy4_qmlp.cfg"), &over).unwrap();
    let cold = run_experiment(&cfg).unwrap();
    assert!(!cold.experiment.cache_hit);
    let first = std::fs::read(dir.path().join("reports.csv")).unwrap();
    let warm = run_experiment(&cfg).unwrap();
    assert!(warm.experiment.cache_hit);
    assert_eq!(std::fs::read(dir.path().join("reports.csv")).unwrap(), first);
    assert_eq!(cold.experiment.lists, warm.experiment.lists);
    let rl2 = &warm.outcomes[2].report;
    assert_eq!((rl2.alpha, rl2.beta), (0.4, 0.5));
}

#[test]
fn search_beats_random_selection_on_average() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::load_with(fixture("toy4.cfg"), &quick(dir.path(), &[("schemes", "rl3"), ("iterations", "60")])).unwrap();
    let run = run_experiment(&cfg).unwrap();
    let e = &run.experiment;
    let w = cfg.weights_for(cfg.schemes[0]);
    let mean_random: f64 = (0..5)
        .map(|s| {
            let c = e.circuit_for(&baseline_random(&e.lists, s)).unwrap();
            e.evaluate("random", &c, w, Instant::now()).unwrap().reward
        })
        .sum::<f64>()
        / 5.0;
    assert!(run.outcomes[0].report.reward >= mean_random, "{} < {mean_random}", run.outcomes[0].report.reward);
}

#[test]
fn csv_dataset_and_fitted_model_load() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::load_with(fixture("toy4_qmlp.cfg"), &quick(dir.path(), &[])).unwrap();
    let e = prepare(&cfg).unwrap();
    assert_eq!(e.data.train.len(), 48);
    assert_eq!(e.data.test.len(), 48);
    assert_eq!(e.data.groups.len(), 3);
    assert_eq!(e.model.num_qubits, 4);
}

fn cli(args: &[&str], out: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_qdeploy"))
        .args(args)
        .env("QNN_DEPLOY_OUT", out)
        .output()
        .unwrap()
}

#[test]
fn cli_verbs_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let cfg = fixture("toy4.cfg");
    let cfg = cfg.to_str().unwrap();
    let fast = ["--set", "iterations=10", "--set", "hidden=8", "--set", "twirls=2", "--set", "backend=mixture"];

    let mut deploy = vec!["deploy", cfg, "--scheme", "quest,rl1", "--seed", "3"];
    deploy.extend(fast);
    let r = cli(&deploy, &out);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    assert!(out.join("reports.csv").is_file());
    assert!(out.join("curves_rl1.csv").is_file());

    let mut report = vec!["report", cfg, "--format", "csv", "--scheme", "quest,rl1", "--seed", "3"];
    report.extend(fast);
    let r = cli(&report, &out);
    assert_eq!(String::from_utf8(r.stdout).unwrap(), std::fs::read_to_string(out.join("reports.csv")).unwrap());

    let r = cli(&["synthesize", cfg, "--device", "hex20a"], &out);
    assert!(r.status.success());
    assert!(String::from_utf8_lossy(&r.stdout).contains("space size"));

    let r = cli(&["evaluate", cfg], &out);
    assert!(String::from_utf8_lossy(&r.stdout).contains("trained"));

    let r = cli(&["fairness-scan", cfg], &out);
    assert!(r.status.success());
    assert!(out.join("fairness/lipschitz_device.csv").is_file());

    assert_eq!(cli(&["deploy", cfg, "--set", "s_blk=7"], &out).status.code(), Some(2));
    assert_eq!(cli(&["deploy", "/no/such/file.cfg"], &out).status.code(), Some(2));
    assert_eq!(cli(&["synthesize", cfg, "--set", "k_max=0", "--set", "eps_syn=1e-6"], &out).status.code(), Some(3));

    let line = dir.path().join("line.toml");
    std::fs::write(
        &line,
        "name = \"line4\"\nnum_qubits = 4\ncoupling_edges = [[0, 1], [1, 2], [2, 3]]\ncnot_error = [0.01, 0.01, 0.01]\n",
    )
    .unwrap();
    let r = cli(&["evaluate", cfg, "--device", line.to_str().unwrap()], &out);
    assert_eq!(r.status.code(), Some(4), "{}", String::from_utf8_lossy(&r.stderr));
}
