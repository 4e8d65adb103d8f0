use std::collections::BTreeMap;

use muskatlab::calibration::{CalibratedConstant, Calibration, CALIBRATION_VERSION};
use muskatlab::{exit_code, run_battery, run_experiment, summary_table, Document, ExperimentSpec, RunResult};

/// Small base run shared by the tests below.
const BASE: &str = r#"
[run]
dim = 1
n = 64
mu1 = 0.1
mu2 = 0.01
t_final = 0.1
probes = { kind = "uniform", count = 5 }
"#;

fn specs(entries: &str) -> Vec<ExperimentSpec> {
    Document::parse(&format!("{BASE}\n{entries}"), "test")
        .unwrap()
        .resolve()
        .unwrap()
}

fn one(entry: &str) -> ExperimentSpec {
    specs(entry).remove(0)
}

fn series(r: &RunResult, name: &str, col: &str) -> Vec<f64> {
    let s = &r.series.iter().find(|(n, _)| n == name).unwrap().1;
    s.column(col).unwrap()
}

fn finished(r: &RunResult) {
    assert!(r.passed(), "{}: {:?} {:?}", r.manifest.name, r.hard_failures(), r.manifest.notes);
}

#[test]
fn every_kind_reports_verdicts() {
    let doc = Document::parse(muskatlab::DEFAULT_BATTERY, "default").unwrap();
    for mut spec in doc.resolve().unwrap() {
        if spec.kind.id() != "quadrature_order" {
            spec.run.n = spec.run.n.min(64);
        }
        spec.run.t_final = 0.02;
        if spec.params.cm_samples.is_some() {
            spec.params.cm_samples = Some(1000);
        }
        if spec.kind.id() == "linear_decay" {
            spec.params.modes = Some(vec![1, 2]);
        }
        let r = run_experiment(&spec, None);
        assert!(!r.verdicts.is_empty(), "{} has no verdicts", spec.name);
    }
}

#[test]
fn constant_data_has_zero_drift() {
    let r = run_experiment(
        &one(r#"
[[experiment]]
kind = "max_principle"
data = [{ kind = "constant", value = 0.3 }]
"#),
        None,
    );
    finished(&r);
    assert!(series(&r, "data_0", "max").iter().all(|&v| v == 0.3));
    assert!(series(&r, "data_0", "min").iter().all(|&v| v == 0.3));
}

#[test]
fn sign_flip_swaps_max_and_min() {
    let r = run_experiment(
        &one(r#"
[[experiment]]
kind = "max_principle"
data = [
  { kind = "random_smooth", seed = 5, max_mode = 6, amplitude = 0.5 },
  { kind = "random_smooth", seed = 5, max_mode = 6, amplitude = -0.5 },
]
"#),
        None,
    );
    finished(&r);
    let max_a = series(&r, "data_0", "max");
    let min_b: Vec<f64> = series(&r, "data_1", "min").iter().map(|v| -v).collect();
    assert_eq!(max_a, min_b);
}

#[test]
fn zero_data_meets_the_l2_bound_with_equality() {
    let r = run_experiment(
        &one(r#"
[[experiment]]
kind = "l2_growth"
run = { mu2 = "l2_limit" }
data = [{ kind = "constant", value = 0.0 }]
"#),
        None,
    );
    finished(&r);
    assert!(r.verdict("l2_bound").unwrap().hard);
    assert!(series(&r, "data_0", "l2").iter().all(|&v| v == 0.0));
}

#[test]
fn l2_bound_is_not_armed_above_the_limit() {
    let r = run_experiment(
        &one(r#"
[[experiment]]
kind = "l2_growth"
run = { mu1 = 0.01, mu2 = 0.01 }
"#),
        None,
    );
    assert!(!r.verdict("l2_bound").unwrap().hard);
}

#[test]
fn reflected_monotone_data_gives_the_same_lipschitz_series() {
    let r = run_experiment(
        &one(r#"
[[experiment]]
kind = "monotone_2d"
data = [
  { kind = "monotone", slope = 1.5, ripple = 0.5, k = 2, phase = 0.3 },
  { kind = "monotone", slope = -1.5, ripple = -0.5, k = 2, phase = -0.3 },
]
"#),
        None,
    );
    finished(&r);
    let a = series(&r, "data_0", "lip");
    let b = series(&r, "data_1", "lip");
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() <= 1e-12 * x.abs(), "{x} vs {y}");
    }
}

#[test]
fn constant_profiles_pass_degenerately() {
    for kind in ["monotone_2d", "small_slope"] {
        let r = run_experiment(
            &one(&format!(
                r#"
[[experiment]]
kind = "{kind}"
data = [{{ kind = "constant", value = 0.0 }}]
"#
            )),
            None,
        );
        finished(&r);
        assert!(series(&r, "data_0", "lip").iter().all(|&v| v == 0.0));
    }
}

#[test]
fn smooth_data_has_no_initial_singularity() {
    let r = run_experiment(
        &one(r#"
[[experiment]]
kind = "smoothing"
run = { probes = { kind = "geometric", first = 1e-4, count = 8 } }
params = { refine = false }
data = [{ kind = "cosine", k = 1, amplitude = 0.1 }]
"#),
        None,
    );
    finished(&r);
    let t = series(&r, "data_0", "t");
    let s = series(&r, "data_0", "smoothing");
    let g = series(&r, "data_0", "grad_holder_0.5");
    // S(t) = t |grad f(t)|_{C^1/2} with a bounded second factor
    assert!(s[0] <= t[0] * g[0] * (1.0 + 1e-12));
    assert!(s[0] < 1e-3 * s[s.len() - 1]);
}

#[test]
fn doubling_the_horizon_keeps_the_common_supremum() {
    let run = |t_final: f64, times: &str| {
        run_experiment(
            &one(&format!(
                r#"
[[experiment]]
kind = "smoothing"
run = {{ t_final = {t_final}, step = {{ mode = "fixed", dt = 1e-3 }}, probes = {{ kind = "times", times = {times} }} }}
params = {{ refine = false, window = [0.01, 0.05] }}
data = [{{ kind = "kink", amplitude = 0.5, cells = 2 }}]
"#
            )),
            None,
        )
    };
    let short = run(0.05, "[0.01, 0.02, 0.05]");
    let long = run(0.1, "[0.01, 0.02, 0.05, 0.1]");
    finished(&short);
    finished(&long);
    let a = short.manifest.statistics["data_0_sup"];
    let b = long.manifest.statistics["data_0_sup"];
    assert!((a - b).abs() <= 1e-12 * a, "{a} vs {b}");
}

#[test]
fn zero_perturbation_gives_a_zero_gain_series() {
    let r = run_experiment(
        &one(r#"
[[experiment]]
kind = "stability"
params = { deltas = [0.0] }
"#),
        None,
    );
    for (name, s) in r.series.iter().filter(|(n, _)| n.starts_with("gain_")) {
        let g = s.column("gain_0").unwrap();
        assert!(g.iter().all(|&v| v == 0.0), "{name}: {g:?}");
    }
    assert!(r.verdict("delta_independence").is_none());
}

#[test]
fn missing_calibration_makes_the_gain_report_only() {
    let r = run_experiment(&one("[[experiment]]\nkind = \"stability\"\nname = \"stab\""), None);
    let v = r.verdict("gain_bound").unwrap();
    assert!(!v.hard);
    assert_eq!(v.threshold, f64::MAX);
    assert_eq!(exit_code(std::slice::from_ref(&r)), 0);
}

#[test]
fn a_tight_calibrated_constant_fails_hard() {
    let spec = one("[[experiment]]\nkind = \"stability\"\nname = \"stab\"");
    let mut constants = BTreeMap::new();
    constants.insert(
        "stability_gain/stab".to_string(),
        CalibratedConstant {
            value: 1e-9,
            max_measured: 1e-9,
            samples: 1,
            context: BTreeMap::new(),
        },
    );
    let cal = Calibration {
        version: CALIBRATION_VERSION,
        margin: 1.25,
        command: "test".into(),
        constants,
    };
    let r = run_experiment(&spec, Some(&cal));
    let v = r.verdict("gain_bound").unwrap();
    assert!(v.hard && !v.pass);
    assert_eq!(exit_code(std::slice::from_ref(&r)), 1);
}

#[test]
fn unit_lambda_reproduces_the_run() {
    let r = run_experiment(
        &one(r#"
[[experiment]]
kind = "scaling"
params = { lambda = 1 }
"#),
        None,
    );
    finished(&r);
    assert_eq!(r.manifest.statistics["correspondence_error"], 0.0);
    assert_eq!(r.manifest.statistics["oracle_error"], 0.0);
}

#[test]
fn single_entry_schedule_passes_trivially() {
    let r = run_experiment(
        &one(r#"
[[experiment]]
kind = "continuation"
params = { schedule = [[0.1, 0.01]], with_exact = false }
"#),
        None,
    );
    finished(&r);
    let report = &r.manifest.records["report"];
    assert_eq!(report["differences"].as_array().unwrap().len(), 0);
}

#[test]
fn empty_battery_has_an_empty_summary() {
    let results = run_battery(&[], None, 2).unwrap();
    assert!(results.is_empty());
    assert_eq!(exit_code(&results), 0);
    assert!(summary_table(&results).contains("0 experiments"));
}

#[test]
fn repeated_battery_gives_the_same_summary() {
    let s = specs(
        r#"
[[experiment]]
kind = "max_principle"

[[experiment]]
kind = "stability"

[[experiment]]
kind = "scaling"
"#,
    );
    let a = summary_table(&run_battery(&s, None, 1).unwrap());
    let b = summary_table(&run_battery(&s, None, 2).unwrap());
    assert_eq!(a, b);
}
