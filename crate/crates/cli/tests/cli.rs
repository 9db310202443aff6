use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use srm_core::data::{load_prices_csv, log_returns, read_structured, NaiveDate, ReportBody, ReportDoc};
use srm_core::distributions::{sample, ModelSpec};
use srm_core::kernel::KernelEstimatorConfig;
use srm_core::riskmeasure::{kernel_srm, RiskSpectrum};
use srm_core::rng::SeedPath;

fn srm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_srm"))
        .args(args)
        .env_remove("SRM_SEED")
        .output()
        .expect("binary runs")
}

fn stdout_doc(out: &Output) -> ReportDoc {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("structured report on stdout")
}

/// Daily closes starting at 100 whose log returns are `returns`.
fn write_prices(dir: &Path, name: &str, returns: &[f64]) -> PathBuf {
    let path = dir.join(name);
    let mut text = String::from("Date,Close\n");
    let mut day = NaiveDate::from_ymd_opt(2000, 1, 3).unwrap();
    let mut p = 100.0f64;
    text.push_str(&format!("{day},{p}\n"));
    for r in returns {
        day = day.succ_opt().unwrap();
        p *= r.exp();
        text.push_str(&format!("{day},{p}\n"));
    }
    std::fs::write(&path, text).unwrap();
    path
}

fn estimates(doc: &ReportDoc) -> &[srm_core::riskmeasure::EstimateReport] {
    match &doc.body {
        ReportBody::Estimates(rs) => rs,
        other => panic!("unexpected body {other:?}"),
    }
}

#[test]
fn constant_prices_give_zero() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_prices(dir.path(), "flat.csv", &[0.0; 40]);
    let out = srm(&["estimate", "--input", path.to_str().unwrap(), "--format", "structured", "--clt"]);
    let doc = stdout_doc(&out);
    let r = &estimates(&doc)[0];
    assert_eq!(r.point, 0.0);
    assert_eq!(r.sd, Some(0.0));
    assert_eq!(r.n, 40);
}

#[test]
fn cli_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let draws = sample(&ModelSpec::standard_normal(), 250, SeedPath::new(5, 0)).unwrap().values;
    let path = write_prices(dir.path(), "normal.csv", &draws);
    let out = srm(&["estimate", "--input", path.to_str().unwrap(), "--spectrum", "exp:5", "--format", "structured"]);
    let doc = stdout_doc(&out);

    let returns = log_returns(&load_prices_csv(&path, "Date", "Close").unwrap().prices).unwrap();
    let lib = kernel_srm(&returns.values, &RiskSpectrum::exponential(5.0).unwrap(), &KernelEstimatorConfig::default())
        .unwrap();
    let cli = &estimates(&doc)[0];
    assert_eq!(cli.point, lib.point);
    assert_eq!(cli.bandwidth, lib.bandwidth);
    let p = doc.provenance.expect("provenance");
    assert_eq!(p.config["estimate"]["spectrum"][0]["beta"], 5.0);
}

#[test]
fn missing_column_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_prices(dir.path(), "p.csv", &[0.01, -0.02]);
    let out = srm(&["estimate", "--input", path.to_str().unwrap(), "--close-col", "Adj Close"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Adj Close"));

    let out = srm(&["estimate", "--input", dir.path().join("absent.csv").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sign_and_units_flags() {
    let dir = tempfile::tempdir().unwrap();
    let draws: Vec<f64> = sample(&ModelSpec::standard_normal(), 100, SeedPath::new(6, 0)).unwrap().values;
    let path = write_prices(dir.path(), "p.csv", &draws);
    let run = |extra: &[&str]| {
        let mut args = vec!["estimate", "--input", path.to_str().unwrap(), "--format", "structured"];
        args.extend_from_slice(extra);
        estimates(&stdout_doc(&srm(&args)))[0].point
    };
    let loss = run(&[]);
    assert!(loss > 0.0);
    let shown = run(&["--sign", "return", "--units", "percent"]);
    assert!((shown + 100.0 * loss).abs() <= 1e-12 * shown.abs());
}

#[test]
fn table1_is_deterministic_and_records_oracle_seed() {
    let dir = tempfile::tempdir().unwrap();
    let files: Vec<PathBuf> = (0..2).map(|k| dir.path().join(format!("t{k}.json"))).collect();
    for f in &files {
        let out = srm(&[
            "table1", "--models", "normal,garch", "--n", "30", "--beta", "1", "--replicates", "100", "--format",
            "structured", "--out", f.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        assert!(String::from_utf8_lossy(&out.stderr).contains("[2/2]"));
    }
    assert_eq!(std::fs::read(&files[0]).unwrap(), std::fs::read(&files[1]).unwrap());
    let doc = read_structured(&files[0]).unwrap();
    let ReportBody::Table1(t) = &doc.body else { panic!("not a table") };
    assert_eq!(t.cells.len(), 2);
    let garch = t.cell(&ModelSpec::default_garch(), 30, 1.0).unwrap();
    let oracle = garch.oracle_seed.expect("garch truth is simulated");
    assert!(garch.truth_approximate);
    assert!(doc.provenance.unwrap().seeds.contains(&oracle.master));
    assert!(t.cell(&ModelSpec::standard_normal(), 30, 1.0).unwrap().oracle_seed.is_none());
}

#[test]
fn table2_smoke_and_intervals() {
    let dir = tempfile::tempdir().unwrap();
    let draws: Vec<f64> = sample(&ModelSpec::Normal { location: 0.0, scale: 0.01 }, 200, SeedPath::new(7, 0))
        .unwrap()
        .values;
    let path = write_prices(dir.path(), "ftse.csv", &draws);
    let (out_path, iv_path) = (dir.path().join("t2.csv"), dir.path().join("t3.csv"));
    let out = srm(&[
        "table2", "--input", path.to_str().unwrap(), "--beta", "1", "--replicates", "200", "--sign", "return",
        "--bandwidth", "scale-equivariant", "--out", out_path.to_str().unwrap(), "--intervals-out",
        iv_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let t2 = std::fs::read_to_string(&out_path).unwrap();
    let t3 = std::fs::read_to_string(&iv_path).unwrap();
    assert!(t2.contains("instrument,beta=1\nftse,-"), "{t2}");
    assert!(t2.contains("daily %"));
    assert!(t3.contains("ftse,[-"), "{t3}");
    let cell = t2.lines().find(|l| l.starts_with("ftse")).unwrap();
    let sd: f64 = cell.split('(').nth(1).unwrap().trim_end_matches(')').parse().unwrap();
    assert!(sd > 0.0);
}

#[test]
fn seed_env_and_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "replicates = 20\nmodel = t:4\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_srm"))
        .args(["simulate-mse", "--replicates", "500", "--format", "structured", "--config", cfg.to_str().unwrap()])
        .env("SRM_SEED", "77")
        .output()
        .unwrap();
    let doc = stdout_doc(&out);
    let ReportBody::MseRatios(rs) = &doc.body else { panic!("not mse") };
    assert_eq!(rs[0].replicates, 20);
    assert_eq!(rs[0].model, ModelSpec::student_t(4.0).unwrap());
    assert_eq!(rs[0].master_seed, 77);
    assert_eq!(doc.provenance.unwrap().seeds, vec![77]);
}

#[test]
fn help_lists_protocol_defaults() {
    let text = |cmd: &str| String::from_utf8(srm(&[cmd, "--help"]).stdout).unwrap();
    assert!(text("table1").contains("[default: 1000]"));
    assert!(text("bootstrap").contains("[default: 10000]"));
    let t2 = text("table2");
    assert!(t2.contains("[default: 1 5 10 20 100 200]"));
    assert!(t2.contains("[default: 0.9]"));
    for flag in ["--input", "--date-col", "--close-col", "--seed", "--sign", "--format", "--out", "--bandwidth"] {
        assert!(t2.contains(flag), "{flag}");
    }
    let est = text("estimate");
    for flag in ["--spectrum", "--estimator", "--bandwidth", "--ci-level", "--config"] {
        assert!(est.contains(flag), "{flag}");
    }
}

#[test]
fn theory_check_reports() {
    let out = srm(&["theory-check", "--check", "distance", "--n", "100,400", "--seeds", "5", "--format", "structured"]);
    let doc = stdout_doc(&out);
    let ReportBody::Decay(rs) = &doc.body else { panic!("not decay") };
    assert_eq!(rs[0].ns, vec![100, 400]);
    let out = srm(&["theory-check", "--check", "bounds", "--n", "400", "--seeds", "3", "--lambda", "0.2"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("fail_6"));
}
