use std::path::Path;
use std::process::{Command, Output};

use backcom::emit::{write_csv, write_json, CSV_HEADER};
use backcom::scenario::{run_scenario, ResultRow, RunSettings, Scenario, SweepSpec};
use backcom_core::analytic;
use backcom_core::simulator::SimOptions;
use backcom_core::topology::SystemConfig;

fn backcom(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_backcom"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn error_json(out: &Output) -> serde_json::Value {
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr.clone()).unwrap();
    assert_eq!(err.trim_end().lines().count(), 1, "{err}");
    serde_json::from_str(err.trim_end()).unwrap()
}

fn settings(trials: u64) -> RunSettings {
    RunSettings {
        trials,
        seed: 7,
        workers: 2,
        opts: SimOptions::default(),
    }
}

fn sample_row() -> ResultRow {
    ResultRow {
        scenario: "two_link_sync".into(),
        param: "rho".into(),
        param_value: 0.30000000000000004,
        metric: "tag_ber".into(),
        analytic: 1.2345678901234567e-4,
        mc_mean: 1.3e-4,
        mc_stderr: 3.605551275463989e-6,
        n_trials: 10_000_000,
        seed: 42,
    }
}

#[test]
fn rho_grid_gives_four_metrics_per_point() {
    let out = backcom(&["--scenario", "two_link_sync", "--trials", "2000", "--sweep", "rho=0.1:0.9:9"]);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], CSV_HEADER.join(","));
    assert_eq!(lines.len(), 37);
    assert!(lines.iter().all(|l| l.split(',').count() == 9));
    let metrics: Vec<&str> = lines[1..].iter().map(|l| l.split(',').nth(3).unwrap()).collect();
    for (i, m) in ["reader_ber", "tag_ber", "etr", "outage"].iter().enumerate() {
        assert!(metrics[9 * i..9 * (i + 1)].iter().all(|x| x == m));
    }
}

#[test]
fn async_etr_analytic_is_flat_in_beta() {
    let spec: SweepSpec = "beta=0:0.9:10".parse().unwrap();
    let rows = run_scenario(Scenario::TwoLinkAsync, &SystemConfig::two_link_defaults(), Some(&spec), &settings(500)).unwrap();
    let etr: Vec<f64> = rows.iter().filter(|r| r.metric == "etr").map(|r| r.analytic).collect();
    assert_eq!(etr.len(), 10);
    assert!(etr.iter().all(|&v| v.to_bits() == etr[0].to_bits()));
}

#[test]
fn analytic_column_is_the_library_value() {
    let spec: SweepSpec = "rho=0.2,0.6".parse().unwrap();
    let base = SystemConfig::two_link_defaults();
    let rows = run_scenario(Scenario::TwoLinkSync, &base, Some(&spec), &settings(100)).unwrap();
    for r in &rows {
        let mut cfg = base.clone();
        cfg.reflection = r.param_value;
        let direct = match r.metric.as_str() {
            "reader_ber" => analytic::reader_ber_sync(&cfg),
            "tag_ber" => analytic::tag_ber(&cfg),
            "etr" => analytic::etr(&cfg),
            "outage" => analytic::outage(&cfg),
            m => panic!("unexpected metric {m}"),
        }
        .unwrap();
        assert_eq!(r.analytic.to_bits(), direct.to_bits(), "{}", r.metric);
    }
    let k = run_scenario(Scenario::KLink, &base, Some(&"K=3".parse().unwrap()), &settings(100)).unwrap();
    let cfg3 = SystemConfig::symmetric_defaults(3);
    assert_eq!(k[0].analytic, analytic::reader_ber_klink(&cfg3).unwrap());
    assert_eq!(k[1].analytic, analytic::tag_ber_klink(&cfg3).unwrap());
}

#[test]
fn no_sweep_is_one_point() {
    let rows = run_scenario(Scenario::KLink, &SystemConfig::symmetric_defaults(3), None, &settings(100)).unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.param == "none" && r.param_value == 0.0));
}

#[test]
fn unknown_scenario_is_a_one_line_error() {
    let err = error_json(&backcom(&["--scenario", "three_link"]));
    assert_eq!(err["error"], "scenario");
    let msg = err["message"].as_str().unwrap();
    for s in ["two_link_sync", "two_link_async", "k_link"] {
        assert!(msg.contains(s), "{msg}");
    }
}

#[test]
fn bad_inputs_name_the_problem() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[system]\nrho = 0.5\neta = 2.0\n").unwrap();
    let err = error_json(&backcom(&["--scenario", "two_link_sync", "--config", cfg.to_str().unwrap()]));
    assert_eq!(err["error"], "config");
    assert!(err["message"].as_str().unwrap().contains("system.eta"));

    let err = error_json(&backcom(&["--scenario", "two_link_async", "--set", "N=5", "--set", "beta=0.5"]));
    assert_eq!(err["error"], "config");
    assert!(err["message"].as_str().unwrap().contains("system.N"));

    let err = error_json(&backcom(&["--scenario", "k_link", "--sweep", "rho=0.1", "--sweep", "N=10"]));
    assert_eq!(err["error"], "sweep");

    let err = error_json(&backcom(&["--scenario", "k_link", "--sweep", "rho=0.5:1.5:3"]));
    assert!(err["message"].as_str().unwrap().contains("system.rho"));

    let err = error_json(&backcom(&["--scenario", "k_link", "--trials", "lots"]));
    assert_eq!(err["error"], "usage");

    let unwritable = dir.path().join("missing").join("out.csv");
    let err = error_json(&backcom(&["--scenario", "k_link", "--trials", "10", "--out", unwritable.to_str().unwrap()]));
    assert_eq!(err["error"], "io");
}

#[test]
fn one_row_is_two_csv_lines() {
    let mut buf = Vec::new();
    write_csv(&[sample_row()], &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], "scenario,param,param_value,metric,analytic,mc_mean,mc_stderr,n_trials,seed");
    assert_eq!(
        lines[1],
        "two_link_sync,rho,3.0000000000000004e-1,tag_ber,1.2345678901234567e-4,1.3e-4,3.605551275463989e-6,10000000,42"
    );
    let parsed: f64 = lines[1].split(',').nth(4).unwrap().parse().unwrap();
    assert_eq!(parsed, sample_row().analytic);
}

#[test]
fn json_round_trip_is_exact() {
    let mut other = sample_row();
    other.metric = "etr".into();
    other.analytic = 2.220446049250313e-16;
    let rows = vec![sample_row(), other];
    let mut buf = Vec::new();
    write_json(&rows, &mut buf).unwrap();
    let back: Vec<ResultRow> = serde_json::from_slice(&buf).unwrap();
    assert_eq!(back, rows);
}

fn run_to(path: &Path, workers: &str) -> Vec<u8> {
    let out = backcom(&[
        "--scenario",
        "two_link_async",
        "--trials",
        "20000",
        "--seed",
        "11",
        "--sweep",
        "beta=0,0.5",
        "--workers",
        workers,
        "--out",
        path.to_str().unwrap(),
    ]);
    stdout(&out);
    std::fs::read(path).unwrap()
}

#[test]
fn output_does_not_depend_on_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let a = run_to(&dir.path().join("a.csv"), "1");
    let b = run_to(&dir.path().join("b.csv"), "3");
    assert_eq!(a, b);
}
