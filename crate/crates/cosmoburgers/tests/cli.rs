//! End-to-end runs of the command-line binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use cosmoburgers::output::read_table;
use tempfile::TempDir;

fn cosmoburgers(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cosmoburgers"))
        .current_dir(dir)
        .env_remove("COSMOBURGERS_OUT")
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    fs::write(dir.join(name), text).unwrap();
    name.to_string()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn zero_run_writes_one_csv_per_checkpoint() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(
        tmp.path(),
        "zero.toml",
        "[grid]\ncells = 16\n[initial]\npreset = \"zero\"\n[output]\ncheckpoints = [2.0]\ntau_end = 4.0\n",
    );
    let out = cosmoburgers(tmp.path(), &["run", "--config", &cfg, "--out", "res"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let res = tmp.path().join("res");
    let mut names: Vec<String> = fs::read_dir(&res)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(
        names,
        ["manifest.json", "snapshot_000.csv", "snapshot_001.csv"]
    );

    let first = read_table(&res.join("snapshot_000.csv")).unwrap();
    assert_eq!(first.columns, ["y", "v", "w"]);
    assert_eq!(first.meta("tau").unwrap().parse::<f64>().unwrap(), 2.0);
    assert!(first.column("v").unwrap().iter().all(|&v| v == 0.0));
    let last = read_table(&res.join("snapshot_001.csv")).unwrap();
    assert_eq!(last.meta("tau").unwrap().parse::<f64>().unwrap(), 4.0);

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(res.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["status"], "ok");
    assert_eq!(manifest["snapshots"].as_array().unwrap().len(), 2);
}

#[test]
fn output_directory_comes_from_the_environment() {
    let tmp = TempDir::new().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_cosmoburgers"))
        .current_dir(tmp.path())
        .env("COSMOBURGERS_OUT", "from_env")
        .args(["run", "--preset", "zero", "--grid", "8", "--tau-end", "1.5"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(tmp.path().join("from_env/manifest.json").exists());
    assert!(tmp.path().join("from_env/snapshot_000.csv").exists());
}

#[test]
fn configuration_errors_exit_with_2_and_name_the_line() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "bad.toml", "[grid]\ncells = 16\nsells = 3\n");
    let out = cosmoburgers(tmp.path(), &["run", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));

    let cfg = write(tmp.path(), "kappa.toml", "[background]\nkappa = -1.0\n");
    let out = cosmoburgers(tmp.path(), &["run", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));

    let out = cosmoburgers(tmp.path(), &["run", "--preset", "nonsense"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn exhausted_step_budget_exits_with_4() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(
        tmp.path(),
        "budget.toml",
        "[grid]\ncells = 32\n[output]\ntau_end = 8.0\nmax_steps = 3\n",
    );
    let out = cosmoburgers(tmp.path(), &["run", "--config", &cfg, "--out", "res"]);
    assert_eq!(out.status.code(), Some(4), "{}", stderr(&out));
    let manifest = fs::read_to_string(tmp.path().join("res/manifest.json")).unwrap();
    assert!(manifest.contains("budget-exceeded"));
    assert!(tmp.path().join("res/last_good.csv").exists());
}

#[test]
fn blow_up_is_a_numerical_abort() {
    let tmp = TempDir::new().unwrap();
    let rows: String = (0..8).map(|j| format!("{j},1e200\n")).collect();
    write(tmp.path(), "huge.csv", &format!("y,v\n{rows}"));
    let cfg = write(
        tmp.path(),
        "huge.toml",
        "[background]\nregime = \"flat\"\n[grid]\ncells = 8\n[initial]\ntable = \"huge.csv\"\n[output]\ntau_end = 2.0\n",
    );
    let out = cosmoburgers(tmp.path(), &["run", "--config", &cfg, "--out", "res"]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    let manifest = fs::read_to_string(tmp.path().join("res/manifest.json")).unwrap();
    assert!(manifest.contains("aborted"));
}

#[test]
fn homogeneous_table_matches_closed_form() {
    let tmp = TempDir::new().unwrap();
    let out = cosmoburgers(
        tmp.path(),
        &["homogeneous", "--v0", "0.8", "--taus", "1,2", "--out", "h"],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let table = read_table(&tmp.path().join("h/homogeneous.csv")).unwrap();
    let v = table.column("v").unwrap();
    assert!((v[0] - 0.8).abs() < 1e-15);
    assert!((v[1] - 0.316_227_766_016_838).abs() < 1e-12, "{}", v[1]);

    let out = cosmoburgers(
        tmp.path(),
        &["homogeneous", "--v0", "-0.8", "--taus", "2", "--out", "m"],
    );
    assert!(out.status.success());
    let m = read_table(&tmp.path().join("m/homogeneous.csv")).unwrap();
    assert_eq!(m.column("v").unwrap()[0], -v[1]);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let args = |out: &'static str| {
        [
            "run",
            "--preset",
            "paper2d",
            "--grid",
            "24",
            "--tau-end",
            "3",
            "--out",
            out,
        ]
    };
    assert!(cosmoburgers(tmp.path(), &args("a")).status.success());
    assert!(cosmoburgers(tmp.path(), &args("b")).status.success());
    let a = fs::read(tmp.path().join("a/snapshot_000.csv")).unwrap();
    let b = fs::read(tmp.path().join("b/snapshot_000.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn converge_writes_a_table() {
    let tmp = TempDir::new().unwrap();
    let out = cosmoburgers(
        tmp.path(),
        &[
            "converge",
            "--preset",
            "sine1d_b",
            "--regime",
            "flat",
            "--tau-end",
            "1.5",
            "--grids",
            "25,50,100",
            "--out",
            "c",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let table = read_table(&tmp.path().join("c/converge.csv")).unwrap();
    let l1 = table.column("l1").unwrap();
    assert_eq!(l1.len(), 3);
    assert_eq!(l1[2], 0.0);
    assert!(l1[0] > l1[1]);
}

#[test]
fn contracting_tau_end_accepts_a_leading_minus() {
    let tmp = TempDir::new().unwrap();
    let out = cosmoburgers(
        tmp.path(),
        &[
            "run",
            "--regime",
            "contracting",
            "--grid",
            "32",
            "--tau-end",
            "-0.5",
            "--out",
            "c",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let table = read_table(&tmp.path().join("c/snapshot_000.csv")).unwrap();
    assert_eq!(table.meta("regime"), Some("contracting"));
}
