use std::path::Path;
use std::process::{Command, Output};

fn qensemble(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qensemble")).args(args).output().expect("binary runs")
}

fn qensemble_env(args: &[&str], threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qensemble"))
        .args(args)
        .env("QENSEMBLE_THREADS", threads)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

#[test]
fn no_arguments_prints_usage_and_fails() {
    let o = qensemble(&[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("Usage"));
}

#[test]
fn help_exits_cleanly() {
    let o = qensemble(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("selftest"));
}

#[test]
fn unknown_scenario_is_a_validation_error() {
    assert_eq!(qensemble(&["teleport"]).status.code(), Some(1));
}

#[test]
fn unknown_key_is_rejected() {
    let o = qensemble(&["ensemble", "--set", "bogus=1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("bogus"));
}

#[test]
fn unknown_key_in_config_file_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "energy = 1\nenergie = 2\n").unwrap();
    let o = qensemble(&["ensemble", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("energie"));
}

#[test]
fn malformed_value_is_rejected() {
    assert_eq!(qensemble(&["well", "--set", "n_x=many"]).status.code(), Some(1));
    assert_eq!(qensemble(&["eraser", "--set", "n_phi"]).status.code(), Some(1));
}

#[test]
fn missing_config_file_is_a_validation_error() {
    assert_eq!(qensemble(&["bomb", "--config", "/nonexistent/run.cfg"]).status.code(), Some(1));
}

#[test]
fn ensemble_upper_wavenumbers_follow_potential() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ensemble.csv");
    let o = qensemble(&["ensemble", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (header, rows) = read_csv(&out);
    assert!(header.iter().all(|h| h.contains(" [") && h.ends_with(']')), "{header:?}");
    let v = header.iter().position(|h| h.starts_with("V ")).unwrap();
    let k_hi = header.iter().position(|h| h.starts_with("k_hi ")).unwrap();
    let mut seen: Vec<(f64, f64)> = Vec::new();
    for row in &rows {
        let pair = (row[v].parse().unwrap(), row[k_hi].parse().unwrap());
        if !seen.contains(&pair) {
            seen.push(pair);
        }
    }
    let expected = [(-3.0, 2.0), (0.0, 1.0), (0.5, 0.5f64.sqrt())];
    assert_eq!(seen.len(), expected.len());
    for ((v, k), (ve, ke)) in seen.iter().zip(expected) {
        assert_eq!(*v, ve);
        assert!((k - ke).abs() <= 1e-12 * ke, "{k} vs {ke}");
    }
}

#[test]
fn single_mode_density_is_flat() {
    let o = qensemble(&["spread", "--set", "packet=single_mode", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let rho = r.headers().unwrap().iter().position(|h| h.starts_with("rho ")).unwrap();
    let mut n = 0;
    for rec in r.records() {
        let x: f64 = rec.unwrap()[rho].parse().unwrap();
        assert!((x - 1.0).abs() <= 4.0 * f64::EPSILON, "{x}");
        n += 1;
    }
    assert!(n > 0);
}

#[test]
fn floats_carry_seventeen_significant_digits() {
    let o = qensemble(&["eraser"]);
    let text = stdout(&o);
    let field = text.lines().nth(1).unwrap().split(',').next().unwrap();
    let mantissa = field.split('e').next().unwrap().trim_start_matches('-').replace('.', "");
    assert_eq!(mantissa.len(), 17, "{field}");
}

#[test]
fn same_seed_gives_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    for (scenario, ext) in [("bomb", "csv"), ("bomb", "json"), ("collapse", "json"), ("well", "csv")] {
        let a = dir.path().join(format!("a.{ext}"));
        let b = dir.path().join(format!("b.{ext}"));
        assert_eq!(qensemble_env(&[scenario, "--seed", "11", "--out", a.to_str().unwrap()], "0").status.code(), Some(0));
        assert_eq!(qensemble_env(&[scenario, "--seed", "11", "--out", b.to_str().unwrap()], "1").status.code(), Some(0));
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap(), "{scenario}.{ext}");
    }
}

#[test]
fn different_seeds_change_the_sampled_counts() {
    let a = stdout(&qensemble(&["bomb", "--seed", "1"]));
    let b = stdout(&qensemble(&["bomb", "--seed", "2"]));
    assert_ne!(a, b);
}

#[test]
fn json_output_has_schema_and_units() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.json");
    let o = qensemble(&["collapse", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["scenario"], "collapse");
    let columns = v["columns"].as_array().unwrap();
    assert!(columns.iter().all(|c| !c["unit"].as_str().unwrap().is_empty()));
    let rows = v["rows"].as_array().unwrap();
    assert!(rows.iter().all(|r| r.as_array().unwrap().len() == columns.len()));
    assert!(v["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));
}

#[test]
fn si_units_require_explicit_constants() {
    assert_eq!(qensemble(&["ensemble", "--set", "units=si"]).status.code(), Some(1));
    let o = qensemble(&[
        "ensemble",
        "--set",
        "units=si",
        "--set",
        "mass=9.1093837015e-31",
        "--set",
        "hbar=1.054571817e-34",
        "--set",
        "energy=1.602176634e-19",
        "--set",
        "potentials=0",
        "--set",
        "r_max=1e-8",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn invalid_thread_count_is_rejected() {
    assert_eq!(qensemble_env(&["eraser"], "lots").status.code(), Some(1));
}

#[test]
fn injected_fault_is_a_numerical_failure() {
    let o = qensemble(&["spread", "--inject-fault", "dispersion"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("oracle mismatch"));
}

#[test]
fn selftest_passes_and_is_deterministic() {
    let a = qensemble(&["selftest"]);
    assert_eq!(a.status.code(), Some(0), "{}", stdout(&a));
    let text = stdout(&a);
    for n in 1..=11 {
        assert!(text.contains(&format!("PASS criterion {n} ")), "criterion {n}\n{text}");
    }
    assert!(!text.contains("FAIL"));
    let b = qensemble_env(&["selftest"], "2");
    assert_eq!(text, stdout(&b));
}

#[test]
fn selftest_catches_injected_fault() {
    let o = qensemble(&["selftest", "--inject-fault", "dispersion"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("FAIL criterion 4 "));
}

#[test]
fn selftest_takes_no_parameters() {
    assert_eq!(qensemble(&["selftest", "--set", "energy=1"]).status.code(), Some(1));
}

#[test]
fn unbalanced_splitter_runs_cleanly() {
    for r in ["0", "0.3", "0.9", "1"] {
        let o = qensemble(&["bomb", "--set", &format!("reflectivity={r}"), "--set", "trials=20000"]);
        assert_eq!(o.status.code(), Some(0), "R={r}: {}", stderr(&o));
    }
}
