use std::path::PathBuf;
use std::process::{Command, Output};

use isoest::mc::mc_fidelity_par;
use isoest_core::estimation::optimal_fidelity;
use isoest_core::oracle::{mc_fidelity, McConfig};

fn isoest(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_isoest")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("valid JSON")
}

/// Parses CSV output into a header and rows of raw fields.
fn csv_table(o: &Output) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(o.stdout.as_slice());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("isoest-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn fidelity_examples() {
    for (args, expect) in [
        (["--n", "10", "--d", "1", "--D", "2"], 11.0 / 12.0),
        (["--n", "1", "--d", "2", "--D", "3"], 0.3125),
        (["--n", "2", "--d", "2", "--D", "2"], (3.0 + 5f64.sqrt()) / 8.0),
    ] {
        let o = isoest(&[&["fidelity"][..], &args[..]].concat());
        assert!(o.status.success());
        let v = json(&o);
        assert!((v["fidelity"].as_f64().unwrap() - expect).abs() < 1e-12);
        assert!(v["consistent"].as_bool().unwrap());
        assert!(v["iterations"].as_u64().is_some());
        assert!(v["jensen_bound"].as_f64().unwrap() >= v["fidelity"].as_f64().unwrap());
    }
    let o = isoest(&["fidelity", "--n", "2", "--d", "2", "--D", "2", "--format", "csv"]);
    let (header, rows) = csv_table(&o);
    assert_eq!(header[..4], ["n", "d", "D", "fidelity"]);
    assert_eq!(rows.len(), 1);
}

#[test]
fn invalid_input_exits_with_one() {
    for args in [
        &["fidelity", "--n", "0", "--d", "2", "--D", "3"][..],
        &["fidelity", "--n", "3", "--d", "3", "--D", "2"],
        &["fidelity", "--n", "3", "--d", "2"],
        &["scan", "--d", "2", "--D", "3", "--n-min", "9", "--n-max", "4"],
        &["cost", "--strategy", "teleport", "--d", "2", "--D", "3", "--n", "50"],
        &["queries", "--d", "2", "--D", "3", "--eps", "1.5"],
        &["hnks", "--d", "1"],
        &["nonsense"],
    ] {
        let o = isoest(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn scan_columns() {
    let o = isoest(&["scan", "--d", "2", "--D", "3", "--n", "50,100,200"]);
    assert!(o.status.success());
    let (h, rows) = csv_table(&o);
    for name in ["n", "fidelity", "infidelity", "n_infidelity", "n2_infidelity", "richardson"] {
        column(&h, name);
    }
    let rc = column(&h, "richardson");
    assert!(!rows[0][rc].is_empty() && !rows[1][rc].is_empty() && rows[2][rc].is_empty());

    let o = isoest(&["scan", "--d", "1", "--D", "3", "--n-min", "1", "--n-max", "40", "--n-step", "3"]);
    let (h, rows) = csv_table(&o);
    let (nc, ic) = (column(&h, "n"), column(&h, "infidelity"));
    for r in &rows {
        let n: f64 = r[nc].parse().unwrap();
        let inf: f64 = r[ic].parse().unwrap();
        assert!((inf - 2.0 / (n + 3.0)).abs() < 1e-12);
    }

    let o = isoest(&["scan", "--d", "2", "--D", "2", "--n", "100,200", "--schedule", "widest"]);
    let (h, rows) = csv_table(&o);
    let c = column(&h, "n2_infidelity");
    let (a, b): (f64, f64) = (rows[0][c].parse().unwrap(), rows[1][c].parse().unwrap());
    assert!(a > 0.0 && b > 0.0 && b / a < 1.1);
    let ac = column(&h, "achieved");
    assert!(rows.iter().all(|r| !r[ac].is_empty()));
}

fn slope_from_stderr(o: &Output) -> f64 {
    let text = String::from_utf8(o.stderr.clone()).unwrap();
    let line = text.lines().find(|l| l.starts_with("fit:")).expect("fit line");
    line.split_whitespace().find_map(|w| w.strip_prefix("slope=")).unwrap().parse().unwrap()
}

#[test]
fn cost_slopes() {
    let range = ["--n-min", "50", "--n-max", "400", "--points", "8"];
    for (strategy, big_d, target) in [("est", "3", 3.5), ("pbt", "3", 2.5), ("est", "2", 1.5)] {
        let o = isoest(&[&["cost", "--strategy", strategy, "--d", "2", "--D", big_d][..], &range[..]].concat());
        assert!(o.status.success());
        let (h, rows) = csv_table(&o);
        assert_eq!(h, ["eps", "n", "N", "cost_bits"]);
        assert_eq!(rows.len(), 8);
        let slope = slope_from_stderr(&o);
        assert!((slope - target).abs() <= 0.2 * target, "{strategy} D={big_d}: {slope}");
    }
    let o = isoest(&["cost", "--d", "2", "--D", "3", "--n", "50,100", "--t", "0.5", "--format", "json"]);
    let v = json(&o);
    assert_eq!(v["rows"][0]["N"].as_u64(), Some(7));
    assert_eq!(v["rows"][1]["N"].as_u64(), Some(10));
    assert!(v["fit"]["slope"].as_f64().is_some());

    let o = isoest(&["cost", "--d", "2", "--D", "3", "--n", "50", "--qubits"]);
    let (h, rows) = csv_table(&o);
    assert_eq!(h, ["eps", "n", "N", "cost_bits", "cost_qubits"]);
    let (bits, qubits): (f64, f64) = (rows[0][3].parse().unwrap(), rows[0][4].parse().unwrap());
    assert_eq!(bits / 2.0, qubits);
}

#[test]
fn oracle_examples_and_replay() {
    for (n, big_d) in [("1", "3"), ("2", "2")] {
        let o = isoest(&["oracle", "--n", n, "--d", "2", "--D", big_d, "--samples", "100000"]);
        assert!(o.status.success());
        let v = json(&o);
        assert!(v["sigma_distance"].as_f64().unwrap() <= 3.0);
        assert_eq!(v["seed"].as_u64(), Some(0xC0FFEE));
        for key in ["mean", "std_error", "samples", "exact"] {
            assert!(!v[key].is_null(), "{key}");
        }
    }
    let (a, b) = (scratch("a.json"), scratch("b.json"));
    for path in [&a, &b] {
        let o = isoest(&["oracle", "--n", "2", "--d", "2", "--D", "3", "--samples", "5000", "--seed", "0x2a", "--out"]
            .iter()
            .copied()
            .chain([path.to_str().unwrap()])
            .collect::<Vec<_>>());
        assert!(o.status.success());
        assert!(o.stdout.is_empty());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let o = isoest(&["oracle", "--n", "3", "--d", "2", "--D", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("budget"));
}

#[test]
fn parallel_oracle_matches_sequential() {
    let f = optimal_fidelity(2, 2, 3).unwrap();
    let cfg = McConfig::new(3_001, 9);
    assert_eq!(mc_fidelity_par(&f.eigvector, 2, 2, 3, &cfg).unwrap(), mc_fidelity(&f.eigvector, 2, 2, 3, &cfg).unwrap());
}

#[test]
fn hnks_output() {
    for d in ["2", "3", "4"] {
        let o = isoest(&["hnks", "--d", d]);
        assert!(o.status.success());
        let v = json(&o);
        assert!(v["isometry_max_abs"].as_f64().unwrap() <= 1e-14);
        assert!(v["unitary_expected_residual"].as_f64().unwrap() <= 1e-12);
        assert_eq!(v["thetas"].as_array().unwrap().len(), 20);
    }
    let v = json(&isoest(&["hnks", "--d", "3"]));
    let h = &v["unitary_h"];
    assert_eq!(h[3][2][1].as_f64(), Some(1.0));
    assert_eq!(h[2][3][1].as_f64(), Some(-1.0));
    // A one-point grid at θ = 0 gives the same operator.
    let single = json(&isoest(&["hnks", "--d", "2", "--points", "1"]));
    let full = json(&isoest(&["hnks", "--d", "2"]));
    assert_eq!(single["unitary_h"], full["unitary_h"]);
}

#[test]
fn query_counts() {
    let o = isoest(&["queries", "--d", "2", "--D", "3", "--eps", "0.01"]);
    let (h, rows) = csv_table(&o);
    assert_eq!(rows[0][column(&h, "n_classical")], "200");
    let o = isoest(&["queries", "--d", "1", "--D", "2", "--eps", "0.1"]);
    let (h, rows) = csv_table(&o);
    assert_eq!(rows[0][column(&h, "n_classical")], "10");

    let o = isoest(&["queries", "--d", "2", "--D", "3"]);
    let (h, rows) = csv_table(&o);
    assert_eq!(rows.len(), 4);
    let slope: f64 = rows[0][column(&h, "slope_quantum")].parse().unwrap();
    assert!((slope - 0.5).abs() <= 0.05, "{slope}");
}

#[test]
fn output_is_byte_identical_across_runs() {
    let args = ["cost", "--strategy", "pbt", "--d", "2", "--D", "3", "--n-min", "60", "--n-max", "300", "--points", "5"];
    assert_eq!(stdout(&isoest(&args)), stdout(&isoest(&args)));
    let path = scratch("scan.csv");
    let path_str = path.to_str().unwrap();
    let o = isoest(&["scan", "--d", "3", "--D", "4", "--n-min", "10", "--n-max", "30", "--out", path_str]);
    assert!(o.status.success());
    let first = std::fs::read(&path).unwrap();
    isoest(&["scan", "--d", "3", "--D", "4", "--n-min", "10", "--n-max", "30", "--out", path_str]);
    assert_eq!(first, std::fs::read(&path).unwrap());
    assert!(first.starts_with(b"n,fidelity,"));
}
