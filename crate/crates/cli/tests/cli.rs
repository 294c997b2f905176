//! End-to-end checks of the command-line surface: config handling, CSV
//! diagnostics, output files, and determinism of reruns.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pqlwcr"))
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("binary runs");
    assert!(
        out.status.success(),
        "command {:?} failed:\n{}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn run_err(args: &[&str]) -> String {
    let out = bin().args(args).output().expect("binary runs");
    assert!(
        !out.status.success(),
        "command {:?} unexpectedly succeeded",
        args
    );
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write(path: &Path, content: &str) {
    std::fs::write(path, content).unwrap();
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

fn tiny_config(dir: &Path) -> PathBuf {
    let path = dir.join("config.txt");
    write(
        &path,
        "example = 3\nn = 60\np = 8\nrho = 0.5\nmethods = pql_wcr, naive_lasso\n\
         replications = 2\nk = 5\nmaster_seed = 9\nlambda_grid = 15\n",
    );
    path
}

#[test]
fn simulate_writes_one_summary_row_per_method() {
    let dir = tempfile::tempdir().unwrap();
    let config = tiny_config(dir.path());
    let out = dir.path().join("out");
    run_ok(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    let summary = read(&out.join("summary.csv"));
    let lines: Vec<&str> = summary.lines().collect();
    assert_eq!(lines.len(), 3, "header plus one row per method:\n{summary}");
    assert!(lines[1].contains("pql_wcr"));
    assert!(lines[2].contains("naive_lasso"));
    assert!(out.join("records_ex3_p8_rho0.5_pql_wcr.jsonl").exists());
    assert!(out.join("manifest.json").exists());
    let manifest = read(&out.join("manifest.json"));
    assert!(manifest.contains("\"master_seed\": 9"), "{manifest}");
}

#[test]
fn simulate_rerun_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let config = tiny_config(dir.path());
    let out1 = dir.path().join("a");
    let out2 = dir.path().join("b");
    for out in [&out1, &out2] {
        run_ok(&[
            "simulate",
            "--config",
            config.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
    }
    for name in [
        "summary.csv",
        "summary.txt",
        "records_ex3_p8_rho0.5_pql_wcr.jsonl",
        "records_ex3_p8_rho0.5_naive_lasso.jsonl",
    ] {
        assert_eq!(
            read(&out1.join(name)),
            read(&out2.join(name)),
            "{name} differs"
        );
    }
}

#[test]
fn simulate_rejects_unknown_config_key() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.txt");
    write(&config, "example = 1\np = 10\nrho = 0.5\nreplicas = 3\n");
    let err = run_err(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert!(err.contains("replicas"), "{err}");
}

#[test]
fn fit_on_exported_dataset_selects_the_true_covariates() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.txt");
    write(
        &config,
        "example = 3\nn = 200\np = 20\nrho = 0.5\nmethods = pql_wcr\nreplications = 1\n\
         k = 1\nmaster_seed = 21\nlambda_grid = 10\nexport_data = true\n",
    );
    let out = dir.path().join("out");
    run_ok(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    let data = out.join("dataset_ex3_p20_rho0.5_rep0.csv");
    let fit_out = dir.path().join("fit");
    run_ok(&[
        "fit",
        "--data",
        data.to_str().unwrap(),
        "--family",
        "gaussian",
        "--k",
        "25",
        "--seed",
        "3",
        "--out",
        fit_out.to_str().unwrap(),
    ]);
    let selected = read(&fit_out.join("selected.txt"));
    let names: Vec<&str> = selected.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(names, vec!["x1", "x2", "x3", "x4"], "selected:\n{selected}");
}

#[test]
fn fit_single_observation_with_saturating_grid_selects_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("one.csv");
    write(&data, "cluster,y,x1\nA,1,1\n");
    let out = dir.path().join("fit");
    run_ok(&[
        "fit",
        "--data",
        data.to_str().unwrap(),
        "--family",
        "gaussian",
        "--k",
        "3",
        "--lambda-grid",
        "1",
        "--agg-lambda",
        "0",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(read(&out.join("selected.txt")), "# pqlwcr.selected.v1\n");
    let estimates = read(&out.join("estimates.csv"));
    assert!(
        estimates.lines().nth(1).unwrap().contains(",x1,0,"),
        "{estimates}"
    );
}

#[test]
fn fit_with_one_resample_equals_the_single_tuned_fit() {
    // singleton clusters make resampling vacuous, so k = 1 with no
    // aggregation shrinkage must reproduce the plain tuned fit
    use pqlwcr::penalty::PenaltyKind;
    use pqlwcr::solver::{tune_lambda, LambdaGrid, SolverOptions};
    use rand::{Rng, SeedableRng};

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
    let mut csv = String::from("cluster,y,x1,x2,x3\n");
    let mut builder = pqlwcr::LongitudinalDataset::builder(3);
    for i in 0..80 {
        let x: Vec<f64> = (0..3)
            .map(|_| {
                let u: f64 = rng.gen_range(f64::EPSILON..1.0);
                let v: f64 = rng.gen_range(0.0..1.0);
                (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
            })
            .collect();
        let y = 1.2 * x[0] - 0.8 * x[2] + 0.3 * x[1].signum();
        csv.push_str(&format!("c{i},{y},{},{},{}\n", x[0], x[1], x[2]));
        builder.push_cluster(&[y], &x).unwrap();
    }
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.csv");
    write(&data, &csv);
    let out = dir.path().join("fit");
    run_ok(&[
        "fit",
        "--data",
        data.to_str().unwrap(),
        "--family",
        "gaussian",
        "--k",
        "1",
        "--agg-lambda",
        "0",
        "--lambda-grid",
        "12",
        "--out",
        out.to_str().unwrap(),
    ]);

    let dataset = builder.build().unwrap();
    let opts = SolverOptions {
        lambda_grid: LambdaGrid::Auto {
            len: 12,
            min_ratio: 0.01,
        },
        ..SolverOptions::default()
    };
    let reference = tune_lambda(
        &dataset.full_view(),
        pqlwcr::ModelFamily::GaussianIdentity,
        PenaltyKind::Scad { a: 3.7 },
        &opts,
    )
    .unwrap();

    let estimates = read(&out.join("estimates.csv"));
    for (line, expected) in estimates.lines().skip(1).zip(&reference.beta) {
        let est: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
        assert_eq!(est, *expected, "line: {line}");
    }
}

#[test]
fn fit_runs_on_binary_data() {
    use pqlwcr::datagen::{gen_dataset, ScenarioConfig, ScenarioKind};
    use rand::SeedableRng;

    let config = ScenarioConfig::new(ScenarioKind::BinaryNoIcs, 120, 5, 0.5).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(44);
    let gen = gen_dataset(&config, &mut rng).unwrap();
    let mut csv = String::from("cluster,y,x1,x2,x3,x4,x5\n");
    for i in 0..gen.dataset.n_clusters() {
        for j in 0..gen.dataset.cluster_size(i) {
            csv.push_str(&format!("c{i},{}", gen.dataset.response(i, j)));
            for v in gen.dataset.covariate_row(i, j) {
                csv.push_str(&format!(",{v}"));
            }
            csv.push('\n');
        }
    }
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.csv");
    write(&data, &csv);
    let out = dir.path().join("fit");
    run_ok(&[
        "fit",
        "--data",
        data.to_str().unwrap(),
        "--family",
        "binomial",
        "--k",
        "10",
        "--seed",
        "6",
        "--out",
        out.to_str().unwrap(),
    ]);
    let estimates = read(&out.join("estimates.csv"));
    assert_eq!(estimates.lines().count(), 6, "{estimates}");
}

#[test]
fn fit_rejects_non_binary_response_for_binomial() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.csv");
    write(&data, "cluster,y,x1\nA,0,0.5\nA,2,0.25\n");
    let err = run_err(&[
        "fit",
        "--data",
        data.to_str().unwrap(),
        "--family",
        "binomial",
        "--k",
        "2",
    ]);
    assert!(err.contains("0 or 1"), "{err}");
}

#[test]
fn malformed_csv_reports_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.csv");
    write(&data, "cluster,y,x1\nA,1,0.5\nB,1\n");
    let err = run_err(&["describe", "--data", data.to_str().unwrap()]);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn describe_reports_shape_and_suppresses_screen_for_single_cluster() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.csv");
    write(&data, "cluster,y,x1\nA,1,0.5\nA,2,0.25\n");
    let out = run_ok(&["describe", "--data", data.to_str().unwrap()]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("n = 1 clusters"), "{text}");
    assert!(text.contains("skipped"), "{text}");
}

#[test]
fn describe_histogram_matches_gated_design_distribution() {
    // sizes of the informative continuous design occur with rates near
    // 9/16, 3/8, 1/16
    use pqlwcr::datagen::{gen_dataset, ScenarioConfig, ScenarioKind};
    use rand::SeedableRng;

    let config = ScenarioConfig::new(ScenarioKind::ContinuousIcs, 2000, 4, 0.5).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(33);
    let gen = gen_dataset(&config, &mut rng).unwrap();
    let mut csv = String::from("cluster,y,x1,x2,x3,x4\n");
    for i in 0..gen.dataset.n_clusters() {
        for j in 0..gen.dataset.cluster_size(i) {
            csv.push_str(&format!("c{i},{}", gen.dataset.response(i, j)));
            for v in gen.dataset.covariate_row(i, j) {
                csv.push_str(&format!(",{v}"));
            }
            csv.push('\n');
        }
    }
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.csv");
    write(&data, &csv);
    let out = run_ok(&["describe", "--data", data.to_str().unwrap(), "--seed", "1"]);
    let text = String::from_utf8_lossy(&out.stdout);
    let share = |size: usize| -> f64 {
        let line = text
            .lines()
            .find(|l| l.trim_start().starts_with(&format!("{size}:")))
            .unwrap_or_else(|| panic!("no histogram line for {size} in:\n{text}"));
        line.split('(')
            .nth(1)
            .unwrap()
            .trim_end_matches(')')
            .parse()
            .unwrap()
    };
    assert!((share(2) - 9.0 / 16.0).abs() < 0.04, "{text}");
    assert!((share(4) - 3.0 / 8.0).abs() < 0.04, "{text}");
    assert!((share(15) - 1.0 / 16.0).abs() < 0.03, "{text}");
}

#[test]
fn describe_screen_covers_zero_without_informative_sizes() {
    use pqlwcr::datagen::{gen_dataset, ScenarioConfig, ScenarioKind};
    use rand::SeedableRng;

    let config = ScenarioConfig::new(ScenarioKind::ContinuousNoIcs, 400, 4, 0.5).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(35);
    let gen = gen_dataset(&config, &mut rng).unwrap();
    let mut csv = String::from("cluster,y,x1,x2,x3,x4\n");
    for i in 0..gen.dataset.n_clusters() {
        for j in 0..gen.dataset.cluster_size(i) {
            csv.push_str(&format!("c{i},{}", gen.dataset.response(i, j)));
            for v in gen.dataset.covariate_row(i, j) {
                csv.push_str(&format!(",{v}"));
            }
            csv.push('\n');
        }
    }
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.csv");
    write(&data, &csv);
    let out = run_ok(&["describe", "--data", data.to_str().unwrap(), "--seed", "2"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("interval covers 0"), "{text}");
}
