use std::path::Path;
use std::process::{Command, Output};

fn muskatlab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_muskatlab"))
        .args(args)
        .current_dir(dir)
        .env("MUSKATLAB_THREADS", "2")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const RUN: &str = r#"
[run]
dim = 1
n = 64
mu1 = 0.1
mu2 = 0.01
t_final = 0.05
probes = { kind = "uniform", count = 4 }

[initial]
kind = "random_smooth"
seed = 3
max_mode = 5
amplitude = 0.5
"#;

fn write(dir: &Path, name: &str, text: &str) -> String {
    std::fs::write(dir.join(name), text).unwrap();
    name.to_string()
}

#[test]
fn empty_battery_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "empty.toml", "");
    let o = muskatlab(&["battery", &cfg, "--out", "out"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("0 experiments, 0 failed"));
    assert!(dir.path().join("out/summary.txt").exists());
}

#[test]
fn parse_errors_exit_two_with_a_position() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "[run]\nn = 64\nmu1 = \"x\"\n");
    let o = muskatlab(&["battery", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bad.toml:3:"), "{}", stderr(&o));
}

#[test]
fn invalid_fields_are_named() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{RUN}\n[[experiment]]\nkind = \"scaling\"\nparams = {{ lambda = 3 }}\n");
    let cfg = write(dir.path(), "bad.toml", &text);
    let o = muskatlab(&["battery", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("params.lambda"), "{}", stderr(&o));
}

#[test]
fn battery_writes_results_and_repeats_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!(
        "{RUN}\n[[experiment]]\nkind = \"max_principle\"\nname = \"max_principle\"\n\n[[experiment]]\nkind = \"stability\"\nname = \"stability\"\n"
    );
    let cfg = write(dir.path(), "battery.toml", &text);
    let a = muskatlab(&["battery", &cfg, "--out", "a"], dir.path());
    let b = muskatlab(&["battery", &cfg, "--out", "b", "--workers", "1"], dir.path());
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(b.status.code(), Some(0), "{}", stderr(&b));
    assert_eq!(stdout(&a), stdout(&b));
    assert!(stderr(&a).contains("report-only"));
    for name in ["max_principle", "stability"] {
        let exp = dir.path().join("a").join(name);
        assert!(exp.join("manifest.json").exists());
        assert!(exp.join("plot.py").exists());
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("a/stability/manifest.json")).unwrap()).unwrap();
    let gain = manifest["verdicts"]
        .as_array()
        .unwrap()
        .iter()
        .find(|v| v["id"] == "gain_bound")
        .unwrap();
    assert_eq!(gain["hard"], false);
}

#[test]
fn failing_hard_assertion_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{RUN}\n[[experiment]]\nkind = \"stability\"\nname = \"stab\"\n");
    let cfg = write(dir.path(), "battery.toml", &text);
    let cal = r#"{"version": 1, "margin": 1.25, "command": "test",
        "constants": {"stability_gain/stab": {"value": 1e-9, "max_measured": 1e-9, "samples": 1, "context": {}}}}"#;
    let cal = write(dir.path(), "cal.json", cal);
    let o = muskatlab(&["battery", &cfg, "--calibration", &cal], dir.path());
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn calibrate_writes_a_versioned_file() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{RUN}\n[[experiment]]\nkind = \"stability\"\nname = \"stability\"\n");
    let cfg = write(dir.path(), "battery.toml", &text);
    let o = muskatlab(&["calibrate", &cfg, "--out", "cal.json"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let cal: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("cal.json")).unwrap()).unwrap();
    assert_eq!(cal["version"], 1);
    assert_eq!(cal["margin"], 1.25);
    let c = &cal["constants"]["stability_gain/stability"];
    let (value, measured) = (c["value"].as_f64().unwrap(), c["max_measured"].as_f64().unwrap());
    assert!((value - 1.25 * measured).abs() <= 1e-15 * value);

    let o = muskatlab(&["battery", &cfg, "--calibration", "cal.json"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn run_writes_series_and_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.toml", RUN);
    let o = muskatlab(&["run", "--config", &cfg, "--out", "r"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for f in ["series.csv", "initial.msk", "final.msk", "manifest.json", "plot.py"] {
        assert!(dir.path().join("r").join(f).exists(), "{f}");
    }
    let csv = std::fs::read_to_string(dir.path().join("r/series.csv")).unwrap();
    let header = csv.lines().find(|l| !l.starts_with('#')).unwrap();
    assert!(header.starts_with("t,"), "{header}");

    let o = muskatlab(&["norms", "--snapshot", "r/final.msk", "--sobolev", "0.5,1"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(report.is_object());
}

#[test]
fn decompose_writes_both_parts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.toml", RUN);
    let o = muskatlab(&["decompose", "--config", &cfg, "--sigma", "0.05", "--evolve", "--out", "d"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for f in ["rough.msk", "smooth.msk", "decomposition.json", "lipschitz.csv"] {
        assert!(dir.path().join("d").join(f).exists(), "{f}");
    }
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("d/decomposition.json")).unwrap()).unwrap();
    assert!(report["sigma_achieved"].as_f64().unwrap() <= 0.05);
}

#[test]
fn single_experiment_commands_write_a_result_directory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.toml", RUN);
    let o = muskatlab(&["stability", "--config", &cfg, "--out", "s"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(dir.path().join("s/stability/manifest.json").exists());
    let o = muskatlab(&["continuation", "--config", &cfg, "--out", "c"], dir.path());
    assert!(o.status.code().is_some_and(|c| c <= 1), "{}", stderr(&o));
    assert!(dir.path().join("c/continuation/manifest.json").exists());
}
