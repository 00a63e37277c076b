use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pdsch_bench::harness::strip_timing;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pdsch-bench"))
}

fn app() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../apps/pdsch.app")
}

fn run(args: &[&str]) -> Output {
    bin()
        .args(args)
        .env_remove("PDSCH_BENCH_CONFIG")
        .env_remove("PDSCH_BENCH_FIXTURES")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn hash_line(o: &Output) -> String {
    stdout(o).lines().find(|l| l.starts_with("sink_hash")).unwrap().to_string()
}

#[test]
fn run_is_deterministic() {
    let app = app();
    let app = app.to_str().unwrap();
    let a = run(&["run", app, "--iters", "10", "--seed", "7"]);
    let b = run(&["run", app, "--iters", "10", "--seed", "7"]);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(b.status.code(), Some(0));
    assert_eq!(hash_line(&a), hash_line(&b));
    let c = run(&["run", app, "--iters", "10", "--seed", "8"]);
    assert_ne!(hash_line(&a), hash_line(&c));
}

#[test]
fn run_writes_cost_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let app = app();
    let o = run(&["run", app.to_str().unwrap(), "--iters", "2", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let cost = std::fs::read_to_string(dir.path().join("cost.csv")).unwrap();
    assert!(cost.lines().any(|l| l.starts_with("run,dec,2,")));
    let m: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["command"], "run");
    assert_eq!(m["seed"], 1);
    assert_eq!(m["params"]["iters"], 2);
    assert_eq!(m["fixtures"]["mcs_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn malformed_app_names_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.app");
    std::fs::write(&path, "module a { lib = \"null_sink\" }\nmodule b { lib = }\n").unwrap();
    let o = run(&["run", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bad.app:2:18"), "{}", stderr(&o));
}

#[test]
fn invalid_graph_is_a_validation_failure() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cycle.app");
    std::fs::write(
        &path,
        "module a { lib = \"scramble\" }\nmodule b { lib = \"scramble\" }\nconnect a.out -> b.in\nconnect b.out -> a.in\n",
    )
    .unwrap();
    let o = run(&["run", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("cycle"), "{}", stderr(&o));
}

#[test]
fn saturated_bler_conformance_fails() {
    let o = run(&["conformance", "--bler", "--mcs", "5", "--snr", "-20", "--blocks", "200"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("bler 1.0000"), "{}", stdout(&o));
}

#[test]
fn noiseless_bler_conformance_passes() {
    let o = run(&["conformance", "--bler", "--mcs", "12", "--snr", "noiseless", "--blocks", "100"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn ber_conformance_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "conformance", "--ber", "--qm", "2", "--snr", "4,6,8", "--out", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(stdout(&o).lines().filter(|l| l.ends_with("pass")).count(), 3);
    assert!(dir.path().join("conformance.json").exists());
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(run(&[]).status.code(), Some(1));
    assert_eq!(run(&["conformance", "--snr", "1"]).status.code(), Some(1));
    assert_eq!(run(&["conformance", "--bler", "--snr", "1"]).status.code(), Some(1));
    assert_eq!(run(&["sweep", "--mcs", "0..40", "--snr", "1", "--out", "x"]).status.code(), Some(1));
    assert_eq!(run(&["sweep", "--mcs", "0", "--snr", "loud", "--out", "x"]).status.code(), Some(1));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
}

#[test]
fn sweep_report_and_manifest_replay() {
    let root = tempfile::tempdir().unwrap();
    let first = root.path().join("first");
    let o = run(&[
        "sweep", "--mcs", "0..2", "--snr", "-4,noiseless", "--iters", "1,5", "--blocks", "100", "--seed", "3",
        "--out", first.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for f in ["results.csv", "cost.csv", "fig3.svg", "fig4a.svg", "fig4b.svg", "manifest.json"] {
        assert!(first.join(f).exists(), "{f}");
    }
    let results = std::fs::read_to_string(first.join("results.csv")).unwrap();
    assert_eq!(results.lines().count(), 1 + 3 * 2 * 2);

    let replay = root.path().join("replay");
    let manifest = first.join("manifest.json");
    let o = run(&["sweep", "--from-manifest", manifest.to_str().unwrap(), "--out", replay.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let again = std::fs::read_to_string(replay.join("results.csv")).unwrap();
    assert_eq!(strip_timing(&results), strip_timing(&again));

    let report = root.path().join("report");
    let o = run(&["report", "--in", first.to_str().unwrap(), "--out", report.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(std::fs::read_to_string(report.join("results.csv")).unwrap(), results);
    assert_eq!(
        std::fs::read_to_string(report.join("cost.csv")).unwrap(),
        std::fs::read_to_string(first.join("cost.csv")).unwrap()
    );
    assert_eq!(
        std::fs::read_to_string(report.join("fig3.svg")).unwrap(),
        std::fs::read_to_string(first.join("fig3.svg")).unwrap()
    );
}

#[test]
fn config_file_sets_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("short.conf");
    std::fs::write(&conf, "blocks = 100\nseed = 9\n").unwrap();
    let out = dir.path().join("out");
    let o = run(&[
        "--config", conf.to_str().unwrap(), "sweep", "--mcs", "0", "--snr", "noiseless", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let m: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["seed"], 9);
    assert_eq!(m["params"]["blocks"], 100);
    assert_eq!(m["params"]["iterations"], serde_json::json!([5]));

    std::fs::write(&conf, "blocks = many\n").unwrap();
    let o = run(&["--config", conf.to_str().unwrap(), "sweep", "--mcs", "0", "--snr", "0", "--out", "x"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn fixture_directory_override() {
    let dir = tempfile::tempdir().unwrap();
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures");
    for f in ["mcs_table.csv", "tbs_6prb.csv"] {
        std::fs::copy(fixtures.join(f), dir.path().join(f)).unwrap();
    }
    let out = dir.path().join("out");
    let o = bin()
        .args(["sweep", "--mcs", "0", "--snr", "noiseless", "--blocks", "100", "--out", out.to_str().unwrap()])
        .env("PDSCH_BENCH_FIXTURES", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let m: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["fixtures"]["dir"], dir.path().to_str().unwrap());

    // a table that no longer loads is a validation failure
    std::fs::write(dir.path().join("tbs_6prb.csv"), "itbs,n_prb,tbs\n0,6,16\n").unwrap();
    let o = bin()
        .args(["sweep", "--mcs", "0", "--snr", "0", "--out", out.to_str().unwrap()])
        .env("PDSCH_BENCH_FIXTURES", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}
