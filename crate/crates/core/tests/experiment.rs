//! Config parsing, sweep execution and table output.

use std::fs;

use gtsfde::experiment::{
    run_experiment, write_outputs, ExperimentConfig, ExperimentError, RunnerOptions, TABLE_HEADER,
};

const SPATIAL: &str = r#"
example = "1"
[params]
gamma = [0.5]
alpha = [1.5]
b = [1.0]
p = [0.7]
[sweep]
axis = "spatial"
m = 128
n = [8, 16, 32]
"#;

fn quiet() -> RunnerOptions {
    RunnerOptions {
        timings: false,
        repetitions: Some(1),
    }
}

fn config_error(text: &str) -> String {
    match ExperimentConfig::from_toml_str(text) {
        Err(e @ ExperimentError::Config(_)) => {
            assert_eq!(e.exit_code(), 2);
            e.to_string()
        }
        other => panic!("expected a config error, got {other:?}"),
    }
}

#[test]
fn invalid_configs_are_config_errors() {
    config_error(&SPATIAL.replace("n = [8, 16, 32]", "n = []"));
    config_error(&SPATIAL.replace("n = [8, 16, 32]", "n = [16, 8]"));
    config_error(&SPATIAL.replace("n = [8, 16, 32]", "n = [4, 8]"));
    config_error(&SPATIAL.replace("gamma = [0.5]", "gamma = [1.5]"));
    config_error(&SPATIAL.replace("b = [1.0]", "b = [0.0]"));
    config_error(&SPATIAL.replace("example = \"1\"", "example = \"custom\""));
    let msg = config_error(&format!("{SPATIAL}\nunknown_key = 3\n"));
    assert!(msg.contains("unknown_key"), "{msg}");
}

#[test]
fn spatial_sweep_converges_at_second_order() {
    let cfg = ExperimentConfig::from_toml_str(SPATIAL).unwrap();
    let report = run_experiment(&cfg, &quiet()).unwrap();
    assert_eq!(report.rows.len(), 3);
    assert!(report.rows[0].rate_inf.is_none());
    for r in &report.rows[1..] {
        let rate = r.rate_inf.unwrap();
        assert!((1.7..2.3).contains(&rate), "rate {rate}");
        assert!(r.wall_s.is_none());
    }
}

#[test]
fn tables_have_fixed_header_and_are_reproducible() {
    let cfg = ExperimentConfig::from_toml_str(SPATIAL).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let mut tables = Vec::new();
    for _ in 0..2 {
        let report = run_experiment(&cfg, &quiet()).unwrap();
        let files = write_outputs(&report, dir.path(), "spatial", true).unwrap();
        assert!(files.plot.is_some() && files.w2_curve.is_some());
        tables.push(fs::read_to_string(&files.table).unwrap());
    }
    assert_eq!(tables[0], tables[1]);
    let mut lines = tables[0].lines();
    assert_eq!(lines.next().unwrap(), TABLE_HEADER.join(","));
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first.len(), TABLE_HEADER.len());
    assert_eq!(first[10], "", "first row has no rate");
    // err_inf carries at least six significant digits.
    let mantissa = first[9].split('e').next().unwrap();
    assert!(mantissa.replace(['.', '-'], "").len() >= 6, "{}", first[9]);
}

#[test]
fn single_point_sweep_has_no_rates() {
    let text = SPATIAL.replace("n = [8, 16, 32]", "n = [16]");
    let cfg = ExperimentConfig::from_toml_str(&text).unwrap();
    let report = run_experiment(&cfg, &quiet()).unwrap();
    assert_eq!(report.rows.len(), 1);
    assert!(report.rows[0].rate_inf.is_none() && report.rows[0].rate_l2.is_none());
}

#[test]
fn compare_mode_reports_agreement() {
    let text = SPATIAL
        .replace("example = \"1\"", "example = \"A1\"\nscheme = \"compare\"")
        .replace("m = 128", "m = 64");
    let cfg = ExperimentConfig::from_toml_str(&text).unwrap();
    let report = run_experiment(&cfg, &quiet()).unwrap();
    assert_eq!(report.comparisons.len(), 3);
    assert_eq!(report.disagreements().count(), 0);
    let dir = tempfile::tempdir().unwrap();
    let files = write_outputs(&report, dir.path(), "cmp", false).unwrap();
    assert!(files.comparison.is_some());
}

#[test]
fn custom_problem_runs_from_expressions() {
    let text = r#"
example = "custom"
[params]
gamma = [0.5]
alpha = [2.0]
b = [0.0]
p = [0.5]
[sweep]
axis = "temporal"
n = 256
m = [8, 16]
[custom]
x_left = 0.0
x_right = 1.0
weighting = "classical"
xi = "1"
source = "sin(PI*x) * (2 * t^(2-gamma) / 1.329340388179137 + PI^2 * t^2)"
initial = "0"
exact = "t^2 * sin(PI*x)"
"#;
    let cfg = ExperimentConfig::from_toml_str(text).unwrap();
    let report = run_experiment(&cfg, &quiet()).unwrap();
    let rate = report.rows[1].rate_inf.unwrap();
    assert!((1.3..1.7).contains(&rate), "rate {rate}");
}
