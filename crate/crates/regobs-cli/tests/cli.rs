//! End-to-end tests of the `regobs` binary: exit codes, file formats, and
//! agreement with directly computed oracles.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nalgebra::DVector;
use regobs_core::{
    build_basis, simulate_output, Convention, DomainSpec, Point, Sensor, SensorSuite,
    SpectralState, TimeGrid,
};

fn regobs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_regobs"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn regobs_with_threads(args: &[&str], threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_regobs"))
        .args(args)
        .env("REGOBS_THREADS", threads)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

fn code(output: &Output) -> i32 {
    output.status.code().expect("no signal")
}

fn stdout_json(output: &Output) -> serde_json::Value {
    serde_json::from_slice(&output.stdout).expect("stdout is JSON")
}

const BLIND_PROBE: &str = r#"{
  "schema": 1,
  "domain": {"interval": {"length": 1.0}},
  "basis": {"n": 10},
  "sensors": [{"label": "probe", "kind": "pointwise", "point": 0.5}],
  "initial_state": {"mode": 1},
  "time": {"horizon": 0.1, "samples": 5}
}"#;

#[test]
fn strategic_exit_codes_follow_the_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let blind = write_config(dir.path(), "blind.json", BLIND_PROBE);
    let out = regobs(&["strategic", "--config", blind.to_str().unwrap()]);
    assert_eq!(code(&out), 1, "midpoint probe misses even modes");
    let report = stdout_json(&out);
    assert_eq!(report["strategic"], serde_json::json!(false));
    assert_eq!(report["method"], serde_json::json!("rank"));

    let seeing = BLIND_PROBE.replace("0.5}", "0.3183098861837907}");
    let seeing = write_config(dir.path(), "seeing.json", &seeing);
    let out = regobs(&["strategic", "--config", seeing.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "probe at 1/pi sees all ten modes");
}

#[test]
fn malformed_configs_exit_two_without_reports() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), "bad.json", "{\"schema\": 1, \"domain\":");
    let out = regobs(&["strategic", "--config", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(out.stdout.is_empty(), "no report on config errors");

    let typo = BLIND_PROBE.replace("\"initial_state\"", "\"initial_stat\"");
    let typo = write_config(dir.path(), "typo.json", &typo);
    let out = regobs(&["strategic", "--config", typo.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("initial_stat"),
        "config errors name the offending field: {stderr}"
    );

    let missing = dir.path().join("nope.json");
    let out = regobs(&["strategic", "--config", missing.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
}

#[test]
fn simulate_csv_matches_direct_computation_bit_for_bit() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "sim.json", BLIND_PROBE);
    let csv_path = dir.path().join("traj.csv");
    let out = regobs(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        csv_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);

    let text = fs::read_to_string(&csv_path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t,y_1");

    let domain = DomainSpec::Interval { length: 1.0 };
    let basis = build_basis(&domain, None, 10, Convention::Laplacian).unwrap();
    let suite =
        SensorSuite::new(vec![Sensor::pointwise("probe", Point::D1(0.5)).unwrap()]).unwrap();
    let x0 = SpectralState::mode(basis, 0).unwrap();
    let grid = TimeGrid::uniform(0.1, 5).unwrap();
    let expected = simulate_output(&x0, &suite, &grid).unwrap();

    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 5, "one row per sample");
    for (s, row) in rows.iter().enumerate() {
        let fields: Vec<f64> = row.split(',').map(|f| f.parse().unwrap()).collect();
        assert_eq!(fields.len(), 2);
        assert_eq!(fields[0].to_bits(), expected.times[s].to_bits());
        assert_eq!(fields[1].to_bits(), expected.values[(0, s)].to_bits());
    }
}

#[test]
fn simulate_blind_mode_outputs_zero_and_two_sensors_make_three_columns() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"{
  "schema": 1,
  "domain": {"interval": {"length": 1.0}},
  "basis": {"n": 6},
  "sensors": [
    {"label": "probe", "kind": "pointwise", "point": 0.5},
    {"label": "patch", "kind": "zone", "support": {"interval": {"a": 0.6, "b": 0.8}}}
  ],
  "initial_state": {"mode": 4},
  "time": {"horizon": 0.01, "samples": 4}
}"#;
    let config = write_config(dir.path(), "two.json", config);
    let out = regobs(&["simulate", "--config", config.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t,y_1,y_2");
    for row in lines {
        let fields: Vec<f64> = row.split(',').map(|f| f.parse().unwrap()).collect();
        assert_eq!(fields.len(), 3);
        assert!(
            fields[1].abs() < 1e-12,
            "mode 4 is silent at the midpoint probe"
        );
        assert!(fields[2].abs() > 1e-6, "the off-center zone hears mode 4");
    }
}

fn sweep_config(n: usize) -> String {
    format!(
        r#"{{
  "schema": 1,
  "domain": {{"interval": {{"length": 1.0}}}},
  "basis": {{"n": {n}}},
  "sensors": [{{"label": "probe", "kind": "pointwise", "point": 0.5}}],
  "sweep": {{"sensor": 0, "axes": [{{"coord": 0, "start": 0.1, "stop": 0.9, "steps": 9}}]}}
}}"#
    )
}

fn sweep_verdicts(csv: &str) -> Vec<(f64, bool)> {
    csv.lines()
        .skip(1)
        .map(|row| {
            let fields: Vec<&str> = row.split(',').collect();
            (
                fields[0].parse::<f64>().unwrap(),
                fields[1].parse::<u8>().unwrap() == 1,
            )
        })
        .collect()
}

#[test]
fn sweep_matches_integer_hit_enumeration() {
    let dir = tempfile::tempdir().unwrap();
    for (n, expect_strategic) in [
        // Blind placements have some j ≤ N with j·b an integer; at N=9 the
        // first killing index for b ∈ {0.1, 0.3, 0.7, 0.9} is j=10, outside
        // the basis, so those four points become strategic.
        (9usize, vec![0.1, 0.3, 0.7, 0.9]),
        (10, vec![]),
    ] {
        let config = write_config(dir.path(), &format!("sweep{n}.json"), &sweep_config(n));
        let csv_path = dir.path().join(format!("sweep{n}.csv"));
        let out = regobs(&[
            "sweep",
            "--config",
            config.to_str().unwrap(),
            "--out",
            csv_path.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0);
        let rows = sweep_verdicts(&fs::read_to_string(&csv_path).unwrap());
        assert_eq!(rows.len(), 9);
        let strategic: Vec<f64> = rows
            .iter()
            .filter(|(_, v)| *v)
            .map(|(b, _)| (b * 10.0).round() / 10.0)
            .collect();
        assert_eq!(strategic, expect_strategic, "truncation {n}");

        let summary = stdout_json(&out);
        assert_eq!(summary["points"], serde_json::json!(9));
        assert_eq!(
            summary["strategic_points"],
            serde_json::json!(expect_strategic.len())
        );
    }
}

#[test]
fn sweep_output_is_independent_of_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "sweep.json", &sweep_config(9));
    let one = dir.path().join("one.csv");
    let many = dir.path().join("many.csv");
    let out = regobs_with_threads(
        &[
            "sweep",
            "--config",
            config.to_str().unwrap(),
            "--out",
            one.to_str().unwrap(),
        ],
        "1",
    );
    assert_eq!(code(&out), 0);
    let out = regobs_with_threads(
        &[
            "sweep",
            "--config",
            config.to_str().unwrap(),
            "--out",
            many.to_str().unwrap(),
        ],
        "5",
    );
    assert_eq!(code(&out), 0);
    assert_eq!(
        fs::read(&one).unwrap(),
        fs::read(&many).unwrap(),
        "worker count must not change the table"
    );
}

#[test]
fn sweep_rejects_empty_grids_and_out_of_domain_points() {
    let dir = tempfile::tempdir().unwrap();
    let empty = sweep_config(9).replace(
        r#""axes": [{"coord": 0, "start": 0.1, "stop": 0.9, "steps": 9}]"#,
        r#""axes": []"#,
    );
    let empty = write_config(dir.path(), "empty.json", &empty);
    let out = regobs(&["sweep", "--config", empty.to_str().unwrap()]);
    assert_eq!(code(&out), 2);

    let outside = sweep_config(9).replace("\"stop\": 0.9", "\"stop\": 1.4");
    let outside = write_config(dir.path(), "outside.json", &outside);
    let out = regobs(&["sweep", "--config", outside.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("domain"), "names the failure: {stderr}");
}

#[test]
fn reconstruct_round_trips_through_csv() {
    let dir = tempfile::tempdir().unwrap();
    let traj = dir.path().join("traj.csv");
    let config = format!(
        r#"{{
  "schema": 1,
  "domain": {{"interval": {{"length": 1.0}}}},
  "basis": {{"n": 4}},
  "sensors": [
    {{"label": "probe", "kind": "pointwise", "point": 0.3}},
    {{"label": "patch", "kind": "zone", "support": {{"interval": {{"a": 0.55, "b": 0.8}}}}}}
  ],
  "time": {{"horizon": 0.05, "samples": 48}},
  "initial_state": {{"coefficients": [0.7, -0.4, 0.25, 0.1]}},
  "reconstruct": {{
    "trajectory": "{traj}",
    "ground_truth": {{"coefficients": [0.7, -0.4, 0.25, 0.1]}}
  }}
}}"#,
        traj = traj.display()
    );
    let config = write_config(dir.path(), "recon.json", &config);
    let out = regobs(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        traj.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let out = regobs(&["reconstruct", "--config", config.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let report = stdout_json(&out);
    let recovered: Vec<f64> = report["coefficients"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    let truth = [0.7, -0.4, 0.25, 0.1];
    for (r, t) in recovered.iter().zip(truth) {
        assert!((r - t).abs() < 1e-8, "recovered {r} vs {t}");
    }
    assert!(report["residual"].as_f64().unwrap() < 1e-9);
    let on_region = report["global_error_on_region"].as_f64().unwrap();
    let on_domain = report["global_error_on_domain"].as_f64().unwrap();
    assert!(on_region <= on_domain * (1.0 + 1e-9) + 1e-15);
}

#[test]
fn reconstruct_refuses_uninformative_data() {
    let dir = tempfile::tempdir().unwrap();
    let traj = dir.path().join("zero.csv");
    let config = format!(
        r#"{{
  "schema": 1,
  "domain": {{"interval": {{"length": 1.0}}}},
  "basis": {{"n": 4}},
  "sensors": [{{"label": "probe", "kind": "pointwise", "point": 0.5}}],
  "time": {{"horizon": 0.05, "samples": 8}},
  "initial_state": {{"mode": 4}},
  "reconstruct": {{"trajectory": "{traj}"}}
}}"#,
        traj = traj.display()
    );
    let config = write_config(dir.path(), "blind.json", &config);
    let out = regobs(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        traj.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let out = regobs(&["reconstruct", "--config", config.to_str().unwrap()]);
    assert_eq!(code(&out), 2, "a blind probe cannot determine the state");
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("underdetermined"), "{stderr}");
}

#[test]
fn reconstruct_rejects_mismatched_trajectories() {
    let dir = tempfile::tempdir().unwrap();
    let traj = dir.path().join("traj.csv");
    fs::write(&traj, "t,y_1,y_2\n0.0,1.0,2.0\n").unwrap();
    let config = format!(
        r#"{{
  "schema": 1,
  "domain": {{"interval": {{"length": 1.0}}}},
  "basis": {{"n": 4}},
  "sensors": [{{"label": "probe", "kind": "pointwise", "point": 0.3}}],
  "reconstruct": {{"trajectory": "{traj}"}}
}}"#,
        traj = traj.display()
    );
    let config = write_config(dir.path(), "mismatch.json", &config);
    let out = regobs(&["reconstruct", "--config", config.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("2 output columns"), "{stderr}");
}

#[test]
fn counterexample_defaults_report_both_verdicts() {
    let out = regobs(&["counterexample"]);
    assert_eq!(code(&out), 0);
    let report = stdout_json(&out);
    assert_eq!(report["alpha"], serde_json::json!(0.25));
    assert_eq!(report["global"]["strategic"], serde_json::json!(false));
    assert_eq!(
        report["even_rule_modes"],
        serde_json::json!([4, 8, 12, 16, 20])
    );
    assert_eq!(report["tan_instance"]["equal"], serde_json::json!(false));

    let out = regobs(&["counterexample", "--alpha", "0.6", "--b", "0.5"]);
    assert_eq!(code(&out), 2, "window leaving the domain is a usage error");
}

#[test]
fn method_flag_overrides_the_config_default() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"{
  "schema": 1,
  "domain": {"interval": {"length": 1.0}},
  "region": {"interval": {"a": 0.2, "b": 0.7}},
  "basis": {"n": 12, "n_region": 6},
  "sensors": [{"label": "probe", "kind": "pointwise", "point": 0.5}],
  "time": {"horizon": 1.0, "samples": 16}
}"#;
    let config = write_config(dir.path(), "regional.json", config);
    let out = regobs(&["strategic", "--config", config.to_str().unwrap()]);
    let gramian_report = stdout_json(&out);
    assert_eq!(
        gramian_report["method"],
        serde_json::json!("gramian"),
        "regional questions default to the gramian route"
    );
    let out = regobs(&[
        "strategic",
        "--config",
        config.to_str().unwrap(),
        "--method",
        "rank",
    ]);
    let rank_report = stdout_json(&out);
    assert_eq!(rank_report["method"], serde_json::json!("rank"));
    assert_eq!(rank_report["truncation"], serde_json::json!(6));
}

#[test]
fn trajectory_floats_round_trip_exactly() {
    let value = -7.324208222247161e-1f64;
    let printed = format!("{value:.16e}");
    assert_eq!(printed.parse::<f64>().unwrap().to_bits(), value.to_bits());

    let x0 = DVector::from_vec(vec![0.33, -0.71]);
    let domain = DomainSpec::Interval { length: 1.0 };
    let basis = build_basis(&domain, None, 2, Convention::Laplacian).unwrap();
    let suite =
        SensorSuite::new(vec![Sensor::pointwise("probe", Point::D1(0.41)).unwrap()]).unwrap();
    let state = SpectralState::new(basis, x0).unwrap();
    let grid = TimeGrid::uniform(0.2, 7).unwrap();
    let traj = simulate_output(&state, &suite, &grid).unwrap();
    for s in 0..traj.times.len() {
        let printed = format!("{:.16e}", traj.values[(0, s)]);
        assert_eq!(
            printed.parse::<f64>().unwrap().to_bits(),
            traj.values[(0, s)].to_bits()
        );
    }
}
