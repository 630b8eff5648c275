use std::path::Path;
use std::process::{Command, Output};

fn galor(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_galor"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("failed to launch galor")
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "status {:?}\nstdout:\n{}\nstderr:\n{}",
        out.status,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn simulate(dir: &Path) {
    ok(&galor(dir, &["simulate", "--study", "1", "--n", "300", "--seed", "7", "--out", "data.csv"]));
}

fn short_fit(dir: &Path, model: &str, extra: &[&str]) -> String {
    let mut args = vec![
        "fit", "--data", "data.csv", "--quantile", "0.25", "--model", model, "--draws", "300", "--burnin", "100",
        "--cut2", "2", "--seed", "3", "--out-dir", "fit",
    ];
    args.extend_from_slice(extra);
    ok(&galor(dir, &args))
}

#[test]
fn simulate_then_fit_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path());
    assert!(dir.path().join("manifest.json").exists());
    let text = short_fit(dir.path(), "fbqror", &[]);
    assert!(text.contains("AIC"), "{text}");
    for suffix in ["chain.csv", "summary.json", "summary.txt", "summary.csv"] {
        assert!(dir.path().join("fit").join(format!("fbqror_q0.25.{suffix}")).exists(), "missing {suffix}");
    }
    let chain = std::fs::read_to_string(dir.path().join("fit/fbqror_q0.25.chain.csv")).unwrap();
    let mut lines = chain.lines();
    assert_eq!(
        lines.next().unwrap(),
        "iter,beta_1,beta_2,beta_3,sigma,gamma,delta_1,loglik"
    );
    assert_eq!(lines.count(), 300);
    let manifest = std::fs::read_to_string(dir.path().join("fit/manifest.json")).unwrap();
    assert!(manifest.contains("\"seed\": 3"), "{manifest}");
}

#[test]
fn same_seed_reproduces_the_chain() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        simulate(d.path());
        short_fit(d.path(), "fbqror", &[]);
    }
    let read = |d: &tempfile::TempDir| std::fs::read(d.path().join("fit/fbqror_q0.25.chain.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    let data = |d: &tempfile::TempDir| std::fs::read(d.path().join("data.csv")).unwrap();
    assert_eq!(data(&a), data(&b));
}

#[test]
fn quantile_outside_unit_interval_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path());
    for q in ["1.5", "0", "1"] {
        let out = galor(dir.path(), &["fit", "--data", "data.csv", "--quantile", q, "--draws", "10"]);
        assert_eq!(out.status.code(), Some(2), "quantile {q}");
        assert!(!dir.path().join("fit").exists());
    }
}

#[test]
fn malformed_arguments_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(galor(dir.path(), &["simulate", "--study", "3"]).status.code(), Some(2));
    assert_eq!(galor(dir.path(), &["fit"]).status.code(), Some(2));
    assert_eq!(galor(dir.path(), &["dist", "--p0", "0.5", "--gamma", "5"]).status.code(), Some(2));
    assert_eq!(galor(dir.path(), &["dist", "--p0", "0.5", "--grid", "1:0:5"]).status.code(), Some(2));
}

#[test]
fn missing_data_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = galor(dir.path(), &["fit", "--data", "absent.csv", "--quantile", "0.5"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bad_config_file_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path());
    std::fs::write(dir.path().join("run.toml"), "draws = 10\nunknown_key = 1\n").unwrap();
    let out = galor(dir.path(), &["fit", "--data", "data.csv", "--config", "run.toml"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path());
    std::fs::write(
        dir.path().join("run.toml"),
        "quantiles = [0.5]\ndraws = 50\nburnin = 10\ncut2 = 2.0\nseed = 1\n",
    )
    .unwrap();
    ok(&galor(
        dir.path(),
        &["fit", "--data", "data.csv", "--config", "run.toml", "--draws", "120", "--out-dir", "fit"],
    ));
    let chain = std::fs::read_to_string(dir.path().join("fit/fbqror_q0.5.chain.csv")).unwrap();
    assert_eq!(chain.lines().count(), 121);
}

#[test]
fn compare_and_effects_read_fit_outputs() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path());
    short_fit(dir.path(), "fbqror", &[]);
    short_fit(dir.path(), "bqror", &[]);
    let text = ok(&galor(
        dir.path(),
        &[
            "compare",
            "--summaries",
            "fit/fbqror_q0.25.summary.json",
            "fit/bqror_q0.25.summary.json",
            "--out",
            "cmp.csv",
        ],
    ));
    assert!(text.contains("preferred by AIC"), "{text}");
    let csv = std::fs::read_to_string(dir.path().join("cmp.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3, "{csv}");

    ok(&galor(
        dir.path(),
        &[
            "effects", "--chain", "fit/fbqror_q0.25.chain.csv", "--data", "data.csv", "--covariate", "x1", "--from",
            "0.2", "--to", "0.8", "--out", "eff.csv",
        ],
    ));
    let eff = std::fs::read_to_string(dir.path().join("eff.csv")).unwrap();
    let deltas: Vec<f64> = eff.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(deltas.len(), 4);
    assert!(deltas.iter().sum::<f64>().abs() < 1e-9);
}

#[test]
fn dist_prints_pdf_and_cdf() {
    let dir = tempfile::tempdir().unwrap();
    let text = ok(&galor(dir.path(), &["dist", "--p0", "0.25", "--gamma", "0.5", "--grid", "-1:1:3"]));
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 3);
    // the quantile-fixed law puts mass p0 below mu
    assert!((rows[1][2] - 0.25).abs() < 1e-12);
    assert!(rows.windows(2).all(|w| w[1][2] > w[0][2]));
}

#[test]
fn a_quantile_reproduces_alone_or_in_a_batch() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path());
    let common = ["--data", "data.csv", "--draws", "150", "--burnin", "20", "--cut2", "2", "--seed", "5"];
    let mut alone = vec!["fit", "--quantile", "0.5", "--out-dir", "alone"];
    alone.extend_from_slice(&common);
    ok(&galor(dir.path(), &alone));
    let mut batch = vec!["fit", "--quantile", "0.25", "--quantile", "0.5", "--out-dir", "batch"];
    batch.extend_from_slice(&common);
    ok(&galor(dir.path(), &batch));
    let read = |sub: &str| std::fs::read(dir.path().join(sub).join("fbqror_q0.5.chain.csv")).unwrap();
    assert_eq!(read("alone"), read("batch"));
    let mut twice = vec!["fit", "--quantile", "0.5", "--quantile", "0.5"];
    twice.extend_from_slice(&common);
    assert_eq!(galor(dir.path(), &twice).status.code(), Some(2));
}

#[test]
fn compare_lays_out_six_fits_by_quantile() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path());
    for model in ["fbqror", "bqror"] {
        ok(&galor(
            dir.path(),
            &[
                "fit", "--data", "data.csv", "--model", model, "--draws", "120", "--burnin", "20", "--cut2", "2",
                "--out-dir", "six",
            ],
        ));
    }
    let mut args = vec!["compare".to_string(), "--summaries".to_string()];
    for model in ["fbqror", "bqror"] {
        for q in ["0.25", "0.5", "0.75"] {
            args.push(format!("six/{model}_q{q}.summary.json"));
        }
    }
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    let text = ok(&galor(dir.path(), &refs));
    let header = text.lines().find(|l| l.starts_with("(lnL, AIC, BIC)")).expect(&text);
    assert!(header.contains("quantile 0.25") && header.contains("quantile 0.75"));
    let rows: Vec<&str> = text.lines().filter(|l| (l.starts_with("fbqror ") || l.starts_with("bqror ")) && l.contains('(')).collect();
    assert_eq!(rows.len(), 2, "{text}");
    assert!(rows.iter().all(|r| r.matches('(').count() == 3));
}
