//! End-to-end runs of the `rough-heston` binary.

use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rough-heston"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn smile_reruns_are_byte_identical() {
    let args = [
        "smile",
        "--paths",
        "500",
        "--steps",
        "50",
        "--seed",
        "11",
        "--set",
        "maturities=0.005",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(!text.contains('\r'));
    let header = text.lines().next().unwrap();
    assert_eq!(
        header,
        "maturity,x,sigma_hat,sigma_higher_order,sigma_mc,mc_stderr,note"
    );
    assert_eq!(text.lines().count(), 12);
}

#[test]
fn no_mc_flag_drops_columns() {
    let o = run(&["smile", "--no-mc", "--set", "maturities=0.00005"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(
        text.lines().next().unwrap(),
        "maturity,x,sigma_hat,sigma_higher_order,note"
    );
    // the x = 0 row carries σ̂ = √V₀
    assert!(text.contains("5.000000000000e-5,0.000000000000e0,2.000000000000e-1,"));
}

#[test]
fn malformed_config_reports_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.cfg");
    std::fs::write(&path, "alpha = 0.7\n# comment\nnu = fast\n").unwrap();
    let o = run(&["smile", "--no-mc", "--params", path.to_str().unwrap()]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3"), "{err}");
    assert!(err.contains("`nu`"), "{err}");

    std::fs::write(&path, "alpha = 0.7\nkappa = 2\n").unwrap();
    let o = run(&["rate", "--params", path.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));

    let o = run(&["smile", "--preset", "nonsense"]);
    assert!(!o.status.success());
}

#[test]
fn invalid_parameters_fail_cleanly() {
    let o = run(&["rate", "--set", "rho=1.5"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("rho"));
}

#[test]
fn rate_output_to_file_in_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rate.json");
    let o = run(&[
        "rate",
        "--set",
        "p_points=6",
        "--set",
        "table_steps=500",
        "--format",
        "json",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["columns"][0], "p");
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2 * 6 - 1 + 2);
    assert_eq!(rows[0][4], "p_minus");
    assert!(rows[0][1].is_null());
    assert!(v["meta"]["critical"]["t_star_plus"].as_f64().unwrap() > 30.0);
}

#[test]
fn largetime_rho_zero_is_symmetric_about_one_half() {
    // with ρ = 0, V(p) = V(1 − p)
    let o = run(&[
        "largetime",
        "--set",
        "lambda=2",
        "--set",
        "theta=0.05",
        "--set",
        "nu=0.4",
        "--set",
        "rho=0",
        "--set",
        "p_points=4",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').filter_map(|c| c.parse().ok()).collect())
        .collect();
    let (p, v) = (0, 3);
    for r in &rows {
        let mirror = rows.iter().find(|s| (s[p] - (1.0 - r[p])).abs() < 1e-9);
        if let Some(s) = mirror {
            assert!((s[v] - r[v]).abs() < 1e-12);
        }
    }
}

#[test]
fn mc_writes_binary_samples() {
    let dir = tempfile::tempdir().unwrap();
    let samples = dir.path().join("samples.bin");
    let assignment = format!("samples={}", samples.display());
    let o = run(&[
        "mc",
        "--paths",
        "64",
        "--steps",
        "20",
        "--set",
        "maturities=0.25",
        "--set",
        assignment.as_str(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let bytes = std::fs::read(Path::new(&samples)).unwrap();
    assert_eq!(&bytes[..8], b"RHSAMP01");
    let rows = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    assert_eq!(rows, 64);
}

#[test]
fn show_config_round_trips() {
    let o = run(&["h0", "--preset", "fig5", "--show-config"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("alpha = 0.5"));
    assert!(text.contains("quad_points = 1600"));
}
