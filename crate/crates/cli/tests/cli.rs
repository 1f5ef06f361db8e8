use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("qexpect-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(dir: &Path, file: &str, text: &str) -> PathBuf {
    let path = dir.join(file);
    std::fs::write(&path, text).unwrap();
    path
}

fn scenario(file: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(file)
}

fn run<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    Command::new(env!("CARGO_BIN_EXE_qexpect")).args(args).env_remove("QEXPECT_THREADS").output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

const MARKET: &str = r#"{
  "version": 1,
  "states": { "s": { "angle": 0.7 } },
  "hamiltonians": { "h": { "preset": "rabi", "omega": 0.4 } },
  "market": {
    "seed": 9,
    "impact": IMPACT,
    "periods": 8,
    "populations": [ { "name": "q", "count": 300, "state": "s" } ],
    "news": [ { "hamiltonian": "h", "duration": 1.0 } ]
  }
}"#;

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(code(&run(["--help"])), 0);
    let v = run(["--version"]);
    assert_eq!(code(&v), 0);
    assert!(stdout(&v).starts_with("qexpect "));
}

#[test]
fn unknown_subcommand_is_usage_error() {
    let out = run(["frobnicate"]);
    assert_eq!(code(&out), 64);
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn malformed_json_is_parse_error() {
    let dir = scratch("parse");
    let path = write(&dir, "bad.json", "{\"version\": 1,\n  \"states\": {");
    let out = run([Path::new("born"), &path]);
    assert_eq!(code(&out), 2);
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));
}

#[test]
fn missing_file_is_io_error() {
    assert_eq!(code(&run(["born", "/nonexistent/qexpect.json"])), 2);
}

#[test]
fn non_hermitian_hamiltonian_names_entry() {
    let dir = scratch("hermitian");
    let path = write(
        &dir,
        "h.json",
        r#"{"version": 1,
            "states": {"s": {"angle": 0}},
            "observables": {"z": {"angle": 0}},
            "hamiltonians": {"h": {"matrix": [[[1, 0], [2, 0]], [[0, 0], [1, 0]]]}},
            "evolve": {"state": "s", "hamiltonian": "h", "observable": "z", "t": 1}}"#,
    );
    let out = run([Path::new("evolve"), &path]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("hamiltonians.h.matrix"));
}

#[test]
fn version_mismatch_is_validation_error() {
    let dir = scratch("version");
    let path = write(&dir, "v.json", r#"{"version": 2}"#);
    let out = run([Path::new("born"), &path]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("version"));
}

#[test]
fn missing_section_is_reported() {
    let out = run([Path::new("evolve"), &scenario("two_basis.json")]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("evolve"));
}

#[test]
fn invalid_thread_count_is_rejected() {
    let out = Command::new(env!("CARGO_BIN_EXE_qexpect"))
        .args([Path::new("born"), &scenario("two_basis.json")])
        .env("QEXPECT_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(code(&out), 64);
}

#[test]
fn evolve_flags_override_config() {
    let out = run([Path::new("evolve"), &scenario("rabi.json"), Path::new("--t"), Path::new("0.5"), Path::new("--grid"), Path::new("3")]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,p(1),p(-1)");
    assert_eq!(lines.len(), 4);
    assert!(lines[3].starts_with("0.500000000000,"));
    let p: f64 = lines[3].split(',').nth(1).unwrap().parse().unwrap();
    assert!((p - 0.5f64.cos().powi(2)).abs() < 1e-12);
}

#[test]
fn ensemble_is_reproducible() {
    let args = [Path::new("ensemble"), &scenario("two_basis.json"), Path::new("--n"), Path::new("100000"), Path::new("--seed"), Path::new("42")];
    let a = run(args);
    let b = run(args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).starts_with("outcome,empirical,analytic,deviation\n"));
}

#[test]
fn zero_impact_keeps_price_constant() {
    let dir = scratch("lambda0");
    let path = write(&dir, "m.json", &MARKET.replace("IMPACT", "0.0"));
    let out = run([Path::new("simulate-market"), &path]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let mut rows = 0;
    for line in text.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols[1], "100.000000000000");
        assert_eq!(cols[4], "100.000000000000");
        rows += 1;
    }
    assert_eq!(rows, 8);
}

#[test]
fn out_flag_writes_file_instead_of_stdout() {
    let dir = scratch("out");
    let path = write(&dir, "m.json", &MARKET.replace("IMPACT", "0.05"));
    let csv = dir.join("path.csv");
    let out = run([Path::new("simulate-market"), &path, Path::new("--out"), &csv]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let direct = run([Path::new("simulate-market"), &path]);
    assert_eq!(std::fs::read(&csv).unwrap(), direct.stdout);
}

#[test]
fn halt_prints_partial_path_and_exits_three() {
    let dir = scratch("halt");
    let config = r#"{
      "version": 1,
      "states": { "down": { "angle": 1.5707963267948966 } },
      "hamiltonians": { "none": { "preset": "zero" } },
      "market": {
        "impact": 0.6,
        "periods": 5,
        "populations": [ { "count": 10, "state": "down" } ],
        "news": [ { "hamiltonian": "none", "duration": 1.0 } ]
      }
    }"#;
    let path = write(&dir, "halt.json", &config.replace("0.6", "2.0"));
    let out = run([Path::new("simulate-market"), &path]);
    assert_eq!(code(&out), 3);
    assert_eq!(stdout(&out).lines().count(), 1);

    let path = write(&dir, "decay.json", config);
    let out = run([Path::new("simulate-market"), &path]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("\n5,"));
}

#[test]
fn run_report_replays_identically() {
    let dir = scratch("replay");
    let report_path = dir.join("report.json");
    let out = run([Path::new("simulate-market"), &scenario("market.json"), Path::new("--seed"), Path::new("77"), Path::new("--report"), &report_path]);
    assert_eq!(code(&out), 0);
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(report["seed"], 77);
    assert_eq!(report["config"]["market"]["seed"], 77);
    assert!(report["wall_clock_seconds"].as_f64().unwrap() >= 0.0);

    let replay_config = write(&dir, "replay.json", &serde_json::to_string(&report["config"]).unwrap());
    let replay_report = dir.join("replay_report.json");
    let again = run([Path::new("simulate-market"), &replay_config, Path::new("--report"), &replay_report]);
    assert_eq!(again.stdout, out.stdout);
    let replayed: Value = serde_json::from_str(&std::fs::read_to_string(&replay_report).unwrap()).unwrap();
    assert_eq!(replayed["results"], report["results"]);
    assert_eq!(replayed["config"], report["config"]);
}

#[test]
fn shipped_scenarios_all_run() {
    let cases: [(&str, &[&str]); 4] = [
        ("two_basis.json", &["born", "interference", "order-effect", "uncertainty", "ensemble"]),
        ("qutrit.json", &["born"]),
        ("rabi.json", &["evolve"]),
        ("market.json", &["simulate-market"]),
    ];
    for (file, commands) in cases {
        for cmd in commands {
            let out = run([Path::new(cmd), &scenario(file)]);
            assert_eq!(code(&out), 0, "{cmd} {file}: {}", String::from_utf8_lossy(&out.stderr));
            assert!(out.stderr.is_empty());
            assert!(stdout(&out).ends_with('\n'));
        }
    }
}
