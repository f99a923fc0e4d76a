//! End-to-end CLI tests: exit codes, artifact shapes, config-file
//! precedence, and the date plumbing around the library.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use chrono::{Duration, NaiveDate};
use serde_json::{json, Value};

use farrlaw::idea::IdeaParams;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_farrlaw"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap_or(-1)
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&read(path)).unwrap_or_else(|e| panic!("parse {}: {e}", path.display()))
}

fn data_rows(csv: &str) -> Vec<&str> {
    csv.lines().skip(1).collect()
}

struct Workspace {
    _dir: tempfile::TempDir,
    root: PathBuf,
}

impl Workspace {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().to_path_buf();
        Workspace { _dir: dir, root }
    }

    fn write(&self, name: &str, content: &str) -> String {
        let path = self.root.join(name);
        std::fs::write(&path, content).unwrap();
        path.to_str().unwrap().to_string()
    }

    fn out(&self) -> String {
        self.root.join("out").to_str().unwrap().to_string()
    }

    fn artifact(&self, name: &str) -> PathBuf {
        self.root.join("out").join(name)
    }
}

fn idea_csv(r0: f64, d: f64, n: u32, scale: f64) -> String {
    let p = IdeaParams::new(r0, d).unwrap();
    let mut csv = String::from("generation,incidence\n");
    for t in 1..=n {
        csv.push_str(&format!("{t},{}\n", scale * p.incidence(t).unwrap()));
    }
    csv
}

fn two_wave_csv() -> String {
    let first = IdeaParams::new(2.0, 0.15).unwrap();
    let second = IdeaParams::new(2.2, 0.12).unwrap();
    let mut csv = String::from("generation,incidence\n");
    for t in 1..=10u32 {
        csv.push_str(&format!("{t},{}\n", 300.0 * first.incidence(t).unwrap()));
    }
    for t in 1..=8u32 {
        csv.push_str(&format!("{},{}\n", t + 10, 600.0 * second.incidence(t).unwrap()));
    }
    csv
}

#[test]
fn fit_aggregates_dated_incident_counts() {
    let ws = Workspace::new();
    let origin = NaiveDate::from_ymd_opt(2020, 3, 1).unwrap();
    let mut csv = String::from("date,count\n");
    for day in 0..28 {
        csv.push_str(&format!("{},2\n", origin + Duration::days(day)));
    }
    let input = ws.write("daily.csv", &csv);
    let out = run(&[
        "fit",
        "--input",
        &input,
        "--kind",
        "incident",
        "--generation-interval",
        "7",
        "--origin",
        "2020-03-01",
        "--method",
        "log_linear",
        "--out-dir",
        &ws.out(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let curve = read(&ws.artifact("fit_curve.csv"));
    let rows = data_rows(&curve);
    assert_eq!(rows.len(), 4, "weekly bins: {curve}");
    assert!(rows[0].starts_with("1,14,"), "first row: {}", rows[0]);
    assert!(rows[3].starts_with("4,14,"), "last row: {}", rows[3]);
}

#[test]
fn fit_projection_has_horizon_rows() {
    let ws = Workspace::new();
    let input = ws.write("idea.csv", &idea_csv(2.0, 0.1, 8, 1.0));
    let out = run(&[
        "fit",
        "--input",
        &input,
        "--horizon",
        "3",
        "--out-dir",
        &ws.out(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let projection = read(&ws.artifact("fit_projection.csv"));
    let rows = data_rows(&projection);
    assert_eq!(rows.len(), 3);
    assert!(rows[0].starts_with("9,"));
    assert!(rows[2].starts_with("11,"));

    let params = read_json(&ws.artifact("fit_params.json"));
    assert!((params["r0"].as_f64().unwrap() - 2.0).abs() < 1e-6);
    assert!((params["d"].as_f64().unwrap() - 0.1).abs() < 1e-6);
    assert_eq!(params["method"], "nonlinear_refine");
}

#[test]
fn fit_missing_file_exits_2_and_names_path() {
    // The sidecar is written before the input is opened, so this run
    // still needs a scratch out-dir to stay hermetic.
    let ws = Workspace::new();
    let out = run(&[
        "fit",
        "--input",
        "/no/such/file.csv",
        "--out-dir",
        &ws.out(),
    ]);
    assert_eq!(code(&out), 2);
    assert!(
        stderr(&out).contains("/no/such/file.csv"),
        "stderr: {}",
        stderr(&out)
    );
}

#[test]
fn fit_unfittable_data_exits_3() {
    let ws = Workspace::new();
    let input = ws.write("zeros.csv", "generation,incidence\n1,0\n2,0\n3,0\n4,0\n");
    let out = run(&["fit", "--input", &input, "--out-dir", &ws.out()]);
    assert_eq!(code(&out), 3, "stderr: {}", stderr(&out));
}

#[test]
fn fit_without_input_exits_1() {
    let out = run(&["fit"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("--input"), "stderr: {}", stderr(&out));
}

#[test]
fn unknown_config_key_exits_1() {
    let ws = Workspace::new();
    let config = ws.write("config.json", r#"{"inptu": "typo.csv"}"#);
    let out = run(&["fit", "--config", &config]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("inptu"), "stderr: {}", stderr(&out));
}

#[test]
fn flags_override_config_file() {
    let ws = Workspace::new();
    let input = ws.write("idea.csv", &idea_csv(2.0, 0.1, 8, 1.0));
    let config = ws.write(
        "config.json",
        &json!({
            "input": input,
            "method": "log_linear",
            "out_dir": ws.out(),
            "prefix": "cfg",
        })
        .to_string(),
    );

    let out = run(&["fit", "--config", &config]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let params = read_json(&ws.artifact("cfg_params.json"));
    assert_eq!(params["method"], "log_linear");

    let out = run(&["fit", "--config", &config, "--method", "nonlinear_refine"]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let params = read_json(&ws.artifact("cfg_params.json"));
    assert_eq!(params["method"], "nonlinear_refine");
    let sidecar = read_json(&ws.artifact("cfg_config.json"));
    assert_eq!(sidecar["method"], "nonlinear_refine");
    assert_eq!(sidecar["command"], "fit");
}

#[test]
fn sidecar_replays_as_config_file() {
    let ws = Workspace::new();
    let input = ws.write("idea.csv", &idea_csv(2.0, 0.1, 8, 1.0));
    let out = run(&[
        "fit",
        "--input",
        &input,
        "--horizon",
        "3",
        "--out-dir",
        &ws.out(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));

    let sidecar = ws.artifact("fit_config.json");
    let replay_dir = ws.root.join("replay");
    let out = run(&[
        "fit",
        "--config",
        sidecar.to_str().unwrap(),
        "--out-dir",
        replay_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    for name in ["fit_params.json", "fit_curve.csv", "fit_projection.csv"] {
        assert_eq!(
            read(&ws.artifact(name)),
            read(&replay_dir.join(name)),
            "replayed {name} differs"
        );
    }
}

#[test]
fn config_for_other_command_exits_1() {
    let ws = Workspace::new();
    let input = ws.write("idea.csv", &idea_csv(2.0, 0.1, 8, 1.0));
    let config = ws.write(
        "config.json",
        &json!({"command": "farr", "input": input}).to_string(),
    );
    let out = run(&["fit", "--config", &config, "--out-dir", &ws.out()]);
    assert_eq!(code(&out), 1, "stderr: {}", stderr(&out));
    assert!(
        stderr(&out).contains("`farr`"),
        "stderr names the mismatched command: {}",
        stderr(&out)
    );
}

#[test]
fn farr_survives_reporting_correction() {
    let ws = Workspace::new();
    let origin = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
    let cumulative = [10, 30, 70, 150, 140, 200, 260, 300, 330, 350];
    let mut csv = String::from("date,count\n");
    for (day, total) in cumulative.iter().enumerate() {
        csv.push_str(&format!("{},{total}\n", origin + Duration::days(day as i64)));
    }
    let input = ws.write("cumulative.csv", &csv);
    let out = run(&[
        "farr",
        "--input",
        &input,
        "--kind",
        "cumulative",
        "--generation-interval",
        "1",
        "--origin",
        "2020-01-01",
        "--out-dir",
        &ws.out(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));

    let k_csv = read(&ws.artifact("farr_k.csv"));
    let rows = data_rows(&k_csv);
    assert_eq!(rows.len(), 6, "k rows: {k_csv}");
    let invalid = rows.iter().filter(|r| r.ends_with(",false")).count();
    let valid = rows.iter().filter(|r| r.ends_with(",true")).count();
    assert_eq!(invalid, 4, "k table: {k_csv}");
    assert_eq!(valid, 2, "k table: {k_csv}");

    let pooled = read_json(&ws.artifact("farr_pooled.json"));
    assert!(pooled["geometric_mean"].is_object());
    assert_eq!(pooled["geometric_mean"]["n_estimates"], 2);
}

#[test]
fn farr_two_waves_alarm_with_dates() {
    let ws = Workspace::new();
    let input = ws.write("waves.csv", &two_wave_csv());
    let out = run(&[
        "farr",
        "--input",
        &input,
        "--origin",
        "2020-01-01",
        "--generation-interval",
        "7",
        "--out-dir",
        &ws.out(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));

    let alarms = read_json(&ws.artifact("farr_alarms.json"));
    let list = alarms["alarms"].as_array().unwrap();
    assert!(!list.is_empty(), "no alarms: {alarms}");
    let origin = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
    for alarm in list {
        let t_start = alarm["t_start"].as_i64().unwrap();
        assert!((8..=12).contains(&t_start), "alarm at {t_start}");
        assert!(alarm["k"].as_f64().unwrap() > 1.0);
        let expected = (origin + Duration::days(7 * t_start)).to_string();
        assert_eq!(alarm["date"].as_str().unwrap(), expected);
    }
}

#[test]
fn farr_short_series_exits_2() {
    let ws = Workspace::new();
    let input = ws.write("short.csv", "generation,incidence\n1,5\n2,4\n3,3\n");
    let out = run(&["farr", "--input", &input, "--out-dir", &ws.out()]);
    assert_eq!(code(&out), 2, "stderr: {}", stderr(&out));
}

#[test]
fn farr_bad_confidence_exits_1() {
    let ws = Workspace::new();
    let input = ws.write("idea.csv", &idea_csv(2.0, 0.1, 8, 1.0));
    let out = run(&[
        "farr",
        "--input",
        &input,
        "--confidence-level",
        "1.2",
        "--out-dir",
        &ws.out(),
    ]);
    assert_eq!(code(&out), 1, "stderr: {}", stderr(&out));
}

#[test]
fn incident_input_rejects_negative_counts() {
    let ws = Workspace::new();
    let input = ws.write(
        "negative.csv",
        "date,count\n2020-01-01,5\n2020-01-02,-3\n2020-01-03,4\n",
    );
    let out = run(&[
        "fit",
        "--input",
        &input,
        "--kind",
        "incident",
        "--generation-interval",
        "1",
        "--origin",
        "2020-01-01",
        "--out-dir",
        &ws.out(),
    ]);
    assert_eq!(code(&out), 2, "stderr: {}", stderr(&out));
}

#[test]
fn simulate_artifact_shapes() {
    let ws = Workspace::new();
    let out = run(&[
        "simulate",
        "--r0",
        "2",
        "--rho",
        "0.9",
        "--generations",
        "10",
        "--out-dir",
        &ws.out(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));

    let trajectory = read(&ws.artifact("simulate_trajectory.csv"));
    assert_eq!(data_rows(&trajectory).len(), 11, "generations 0..=10");
    let overlay = read(&ws.artifact("simulate_overlay.csv"));
    let overlay_rows = data_rows(&overlay);
    assert_eq!(overlay_rows.len(), 10, "generations 1..=10");
    assert!(overlay_rows[0].starts_with("1,"));

    let summary = read_json(&ws.artifact("simulate_summary.json"));
    assert!(summary["depleted_at"].is_null());
    assert!((summary["k"].as_f64().unwrap() - 0.81).abs() < 1e-12);
    assert!(summary["attack_fraction"].as_f64().unwrap() > 0.0);
}

#[test]
fn simulate_invalid_rho_exits_1() {
    let out = run(&["simulate", "--r0", "2", "--rho", "1.5"]);
    assert_eq!(code(&out), 1, "stderr: {}", stderr(&out));
}

#[test]
fn sweep_grid_row_count() {
    let ws = Workspace::new();
    let out = run(&[
        "sweep",
        "--r0-min",
        "2",
        "--r0-max",
        "3",
        "--r0-steps",
        "2",
        "--rho-min",
        "0.8",
        "--rho-max",
        "0.9",
        "--rho-steps",
        "2",
        "--generations",
        "6",
        "--out-dir",
        &ws.out(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let csv = read(&ws.artifact("sweep_sweep.csv"));
    assert_eq!(data_rows(&csv).len(), 4, "2x2 grid: {csv}");
}

// The (r0=1, rho=1) cell is a fixed point of the mapping up to the i0/N
// susceptible deficit, so its distance is tiny but not exactly zero.
#[test]
fn sweep_fixed_point_cell_is_tiny() {
    let ws = Workspace::new();
    let out = run(&[
        "sweep",
        "--r0-min",
        "1",
        "--r0-max",
        "1",
        "--r0-steps",
        "1",
        "--rho-min",
        "1",
        "--rho-max",
        "1",
        "--rho-steps",
        "1",
        "--out-dir",
        &ws.out(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let csv = read(&ws.artifact("sweep_sweep.csv"));
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 1);
    let delta: f64 = rows[0].split(',').nth(2).unwrap().parse().unwrap();
    assert!(delta < 1e-5, "fixed-point delta {delta}");
}

#[test]
fn sweep_without_grid_exits_1() {
    let out = run(&["sweep", "--rho-min", "0.5", "--rho-max", "1", "--rho-steps", "3"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("r0"), "stderr: {}", stderr(&out));
}

#[test]
fn sweep_config_file_grids() {
    let ws = Workspace::new();
    let config = ws.write(
        "sweep.json",
        &json!({
            "r0_grid": [1.5, 2.5],
            "rho_grid": [0.7, 0.9],
            "generations": 6,
            "out_dir": ws.out(),
        })
        .to_string(),
    );
    let out = run(&["sweep", "--config", &config]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let csv = read(&ws.artifact("sweep_sweep.csv"));
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 4);
    assert!(rows[0].starts_with("1.5,0.7,"));
    let sidecar = read_json(&ws.artifact("sweep_config.json"));
    assert_eq!(sidecar["r0_grid"], json!([1.5, 2.5]));
}

#[test]
fn json_format_switches_table_artifacts() {
    let ws = Workspace::new();
    let input = ws.write("idea.csv", &idea_csv(2.0, 0.1, 8, 100.0));

    let out = run(&[
        "farr",
        "--input",
        &input,
        "--format",
        "json",
        "--out-dir",
        &ws.out(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let k_rows = read_json(&ws.artifact("farr_k.json"));
    let k_rows = k_rows.as_array().unwrap();
    assert_eq!(k_rows.len(), 5);
    assert_eq!(k_rows[0]["valid"], json!(true));
    assert!(k_rows[0]["k"].as_f64().is_some());
    assert!(read_json(&ws.artifact("farr_kd.json")).is_array());

    let out = run(&[
        "fit",
        "--input",
        &input,
        "--format",
        "json",
        "--out-dir",
        &ws.out(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let curve = read_json(&ws.artifact("fit_curve.json"));
    assert_eq!(curve.as_array().unwrap().len(), 8);

    let out = run(&[
        "sweep",
        "--r0-min",
        "2",
        "--r0-max",
        "3",
        "--r0-steps",
        "2",
        "--rho-min",
        "0.8",
        "--rho-max",
        "0.9",
        "--rho-steps",
        "2",
        "--generations",
        "6",
        "--format",
        "json",
        "--out-dir",
        &ws.out(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let sweep = read_json(&ws.artifact("sweep_sweep.json"));
    assert!(sweep["depletion_fraction"].is_array());
    assert_eq!(sweep["r0_grid"], json!([2.0, 3.0]));
}

#[test]
fn first_generation_reindexes_series() {
    let ws = Workspace::new();
    let p = IdeaParams::new(2.0, 0.1).unwrap();
    let mut csv = String::from("generation,incidence\n");
    for t in 1..=8u32 {
        csv.push_str(&format!("{},{}\n", t + 4, p.incidence(t).unwrap()));
    }
    let input = ws.write("offset.csv", &csv);

    let out = run(&["fit", "--input", &input, "--out-dir", &ws.out()]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let curve = read(&ws.artifact("fit_curve.csv"));
    assert!(data_rows(&curve)[0].starts_with("5,"), "kept file indices");

    let out = run(&[
        "fit",
        "--input",
        &input,
        "--first-generation",
        "1",
        "--out-dir",
        &ws.out(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let curve = read(&ws.artifact("fit_curve.csv"));
    assert!(data_rows(&curve)[0].starts_with("1,"), "reindexed to 1");
    let params = read_json(&ws.artifact("fit_params.json"));
    assert!((params["r0"].as_f64().unwrap() - 2.0).abs() < 1e-6);
}

#[test]
fn help_exits_0() {
    let out = run(&["--help"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("fit"));
    assert!(text.contains("sweep"));
}
