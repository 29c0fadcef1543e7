//! Pipeline IO contracts: determinism, TV bounds, degenerate cases,
//! error surfacing.

use std::path::Path;

use netdyn_cli::experiment::ExperimentSpec;
use netdyn_cli::pipeline::{run_compare, run_simulate, run_solve, Overrides};
use tempfile::TempDir;

fn spec(text: &str) -> ExperimentSpec {
    toml::from_str(text).unwrap()
}

fn ov(dir: &TempDir) -> Overrides {
    Overrides {
        seed: None,
        grid_step: None,
        out_dir: dir.path().to_path_buf(),
    }
}

const SIR_DOC: &str = r#"
schema_version = 1
name = "t"
[model]
name = "sir"
[model.params]
beta = 1.0
gamma = 0.5
[graph]
n = 60
[graph.theta]
3 = 1.0
[init]
[init.q]
S = 0.9
I = 0.1
[run]
t_end = 2.0
grid_step = 0.5
replicas = 40
seed = 5
"#;

#[test]
fn identical_specs_produce_byte_identical_outputs() {
    let s = spec(SIR_DOC);
    let d1 = TempDir::new().unwrap();
    let d2 = TempDir::new().unwrap();
    let p1 = run_simulate(&s, Path::new("."), &ov(&d1), true).unwrap();
    let p2 = run_simulate(&s, Path::new("."), &ov(&d2), true).unwrap();
    assert_eq!(p1.len(), p2.len());
    for (a, b) in p1.iter().zip(&p2) {
        assert_eq!(
            std::fs::read(a).unwrap(),
            std::fs::read(b).unwrap(),
            "{} differs",
            a.file_name().unwrap().to_string_lossy()
        );
    }
}

#[test]
fn tv_values_live_in_the_unit_interval() {
    let s = spec(SIR_DOC);
    let d = TempDir::new().unwrap();
    run_compare(&s, Path::new("."), &ov(&d), true).unwrap();
    let text = std::fs::read_to_string(d.path().join("t_tv.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "time,tv_ode,tv_meanfield");
    for line in lines {
        for cell in line.split(',').skip(1) {
            let v: f64 = cell.parse().unwrap();
            assert!((0.0..=1.0).contains(&v), "TV {v} out of range");
        }
    }
}

#[test]
fn zero_rates_give_zero_tv_up_to_monte_carlo_noise() {
    let doc = SIR_DOC.replace("beta = 1.0", "beta = 0.0").replace("gamma = 0.5", "gamma = 0.0");
    let s = spec(&doc);
    let d = TempDir::new().unwrap();
    run_compare(&s, Path::new("."), &ov(&d), false).unwrap();
    let text = std::fs::read_to_string(d.path().join("t_tv.csv")).unwrap();
    for line in text.lines().skip(1) {
        let v: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!(v < 0.05, "TV {v} too large for frozen dynamics");
    }
}

#[test]
fn doubling_replicas_shrinks_standard_errors_like_root_two() {
    let d1 = TempDir::new().unwrap();
    let d2 = TempDir::new().unwrap();
    let base = SIR_DOC.replace("replicas = 40", "replicas = 200");
    let doubled = SIR_DOC.replace("replicas = 40", "replicas = 400");
    run_simulate(&spec(&base), Path::new("."), &ov(&d1), false).unwrap();
    run_simulate(&spec(&doubled), Path::new("."), &ov(&d2), false).unwrap();
    let read = |d: &TempDir| -> Vec<f64> {
        std::fs::read_to_string(d.path().join("t_marginals_stderr.csv"))
            .unwrap()
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
            .collect()
    };
    let a = read(&d1);
    let b = read(&d2);
    // Compare the aggregate stderr mass; cell-wise ratios are noisy.
    let sum_a: f64 = a.iter().sum();
    let sum_b: f64 = b.iter().sum();
    let ratio = sum_a / sum_b;
    assert!(
        (ratio - 2f64.sqrt()).abs() < 0.2 * 2f64.sqrt(),
        "stderr ratio {ratio}, expected ≈ √2"
    );
}

#[test]
fn pure_death_solution_is_the_exponential() {
    // θ = δ_0: isolated vertices, all initially infected, recovering at
    // rate 1. The I-marginal column must be e^{-t}.
    let doc = r#"
schema_version = 1
name = "death"
[model]
name = "sir"
[model.params]
beta = 1.0
gamma = 1.0
[graph]
[graph.theta]
0 = 1.0
[init]
[init.q]
I = 1.0
[run]
t_end = 3.0
grid_step = 0.5
seed = 1
"#;
    let s = spec(doc);
    let d = TempDir::new().unwrap();
    run_solve(&s, Path::new("."), &ov(&d), false, false).unwrap();
    let text = std::fs::read_to_string(d.path().join("death_ode_marginals.csv")).unwrap();
    for line in text.lines().skip(1) {
        let mut cells = line.split(',');
        let t: f64 = cells.next().unwrap().parse().unwrap();
        let state = cells.next().unwrap();
        let p: f64 = cells.next().unwrap().parse().unwrap();
        if state == "I" {
            assert!((p - (-t).exp()).abs() < 1e-7, "I({t}) = {p}");
        }
    }
}

#[test]
fn theta_from_an_edge_list_matches_the_graph() {
    // K4 is 3-regular: the derived degree distribution must be δ_3.
    let dir = TempDir::new().unwrap();
    let graph_path = dir.path().join("k4.txt");
    std::fs::write(&graph_path, "4 6\n0 1\n0 2\n0 3\n1 2\n1 3\n2 3\n").unwrap();
    let doc = r#"
schema_version = 1
name = "k4"
[model]
name = "sir"
[model.params]
beta = 1.0
gamma = 0.5
[graph]
edge_list = "k4.txt"
[init]
[init.q]
S = 0.9
I = 0.1
[run]
t_end = 1.0
grid_step = 0.5
seed = 1
"#;
    let s = spec(doc);
    let theta = s.theta(dir.path()).unwrap();
    assert_eq!(theta.prob(3), 1.0);
    assert_eq!(theta.d_max(), 3);
}

#[test]
fn malformed_documents_are_rejected_with_context() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "schema_version = 1\nname = 3\n").unwrap();
    let err = ExperimentSpec::load(&path).unwrap_err().to_string();
    assert!(err.contains("bad.toml"), "error lacks file context: {err}");

    std::fs::write(&path, "this is not TOML [").unwrap();
    assert!(ExperimentSpec::load(&path).is_err());
}
