use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_treeshift")).args(args).output().expect("spawn treeshift")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn spectrum_values(out: &Output) -> Vec<f64> {
    stdout(out)
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn trees_lists_six_codes_for_order_six() {
    let out = run(&["trees", "--n", "6"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 6);
    assert_eq!(text.lines().next(), Some("0,1,1,1,1,1"));
}

#[test]
fn trees_handles_single_vertex_and_rejects_large_oracle() {
    let out = run(&["trees", "--n", "1"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "0\n");
    assert_eq!(run(&["trees", "--n", "13", "--oracle"]).status.code(), Some(2));
}

#[test]
fn oracle_and_fast_enumeration_agree() {
    let fast = run(&["trees", "--n", "8", "--format", "json"]);
    let oracle = run(&["trees", "--n", "8", "--oracle", "--format", "json"]);
    let mut a: Vec<Vec<u32>> = serde_json::from_slice(&fast.stdout).unwrap();
    let mut b: Vec<Vec<u32>> = serde_json::from_slice(&oracle.stdout).unwrap();
    a.sort();
    b.sort();
    assert_eq!(a.len(), 23);
    assert_eq!(a, b);
}

#[test]
fn poset_of_order_four_is_one_edge() {
    let out = run(&["poset", "--n", "4"]);
    assert!(out.status.success());
    let dot = stdout(&out);
    assert_eq!(dot.matches("label=").count(), 2);
    assert_eq!(dot.matches("->").count(), 1);
}

#[test]
fn poset_json_has_path_source_and_star_sink() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("gts6.json");
    let out = run(&["poset", "--n", "6", "--format", "json", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let nodes: Vec<Vec<u32>> = serde_json::from_value(v["nodes"].clone()).unwrap();
    let covers: Vec<(usize, usize)> = serde_json::from_value(v["covers"].clone()).unwrap();
    let star = nodes.iter().position(|c| c == &[0, 1, 1, 1, 1, 1]).unwrap();
    let path_tree = nodes.iter().position(|c| c == &[0, 1, 2, 3, 1, 2]).unwrap();
    let sources: Vec<usize> = (0..nodes.len()).filter(|&i| covers.iter().all(|&(_, u)| u != i)).collect();
    let sinks: Vec<usize> = (0..nodes.len()).filter(|&i| covers.iter().all(|&(l, _)| l != i)).collect();
    assert_eq!(sources, vec![path_tree]);
    assert_eq!(sinks, vec![star]);
}

#[test]
fn star_spectrum_at_q_one() {
    let out = run(&["spectrum", "0,1,1,1,1,1", "--q", "1"]);
    assert!(out.status.success());
    let values = spectrum_values(&out);
    let expected = [6.0, 1.0, 1.0, 1.0, 1.0, 0.0];
    for (v, e) in values.iter().zip(expected) {
        assert!((v - e).abs() < 1e-9, "{values:?}");
    }
}

#[test]
fn exponential_distance_spectrum_of_an_edge() {
    let values = spectrum_values(&run(&["spectrum", "0,1", "--matrix", "ed", "--q", "0.5"]));
    assert!((values[0] - 1.5).abs() < 1e-12 && (values[1] - 0.5).abs() < 1e-12);
}

#[test]
fn spectrum_accepts_non_canonical_codes_and_complex_parameters() {
    let a = spectrum_values(&run(&["spectrum", "0,1,2,1,1", "--q", "0.5"]));
    let b = spectrum_values(&run(&["spectrum", "0,1,1,1,2", "--q", "0.5"]));
    assert_eq!(a, b);
    // |q| = 1 on the unit circle: 0 is an eigenvalue.
    let c = spectrum_values(&run(&["spectrum", "0,1,2", "--matrix", "qtlap", "--qt", "0.6,0.8"]));
    assert!(c.iter().any(|v| v.abs() < 1e-12));
    assert_eq!(run(&["spectrum", "0,1"]).status.code(), Some(2));
    assert_eq!(run(&["spectrum", "0,2", "--q", "1"]).status.code(), Some(2));
}

#[test]
fn charpoly_small_cases() {
    assert_eq!(stdout(&run(&["charpoly", "0,1"])), "x^2 - 2*x - q^2 + 1\n");
    assert_eq!(stdout(&run(&["charpoly", "0,1,1", "--deleted", "0"])), "x^2 - 2*x + 1\n");
    assert_eq!(stdout(&run(&["charpoly", "0"])), "x + q^2 - 1\n");
}

#[test]
fn aux_curve_vanishes_with_the_polynomial() {
    let out = run(&["aux-curve", "0,1,2", "--vertex", "0", "--q", "0.5", "--from", "0", "--to", "2", "--steps", "4"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().next(), Some("x,f,f_minor,aux"));
    assert_eq!(text.lines().count(), 6);
    // aux(q, 0) = 0 for every tree.
    let first: Vec<f64> = text.lines().nth(1).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert!(first[3].abs() < 1e-12);
}

#[test]
fn verify_exit_codes() {
    assert_eq!(run(&["verify", "table1"]).status.code(), Some(0));
    assert_eq!(run(&["verify", "identities", "--n", "6"]).status.code(), Some(0));
    assert_eq!(run(&["verify", "bogus"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "structural", "--q", "0"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "structural", "--n", "12"]).status.code(), Some(2));
}

#[test]
fn injected_star_below_path_is_caught() {
    let out = run(&["verify", "monotonicity", "--n", "6", "--inject-cover", "0,1,1,1,1,1", "0,1,2,3,1,2"]);
    assert_eq!(out.status.code(), Some(1));
    let dump: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(!dump[0]["failures"].as_array().unwrap().is_empty());
}

#[test]
fn verify_json_is_reproducible() {
    let args = ["verify", "solvers", "--n", "6", "--seed", "7", "--format", "json", "--jobs", "2"];
    let strip = |out: Output| {
        let mut v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        for r in v["reports"].as_array_mut().unwrap() {
            r["elapsed_ms"] = serde_json::Value::Null;
        }
        v
    };
    let a = strip(run(&args));
    assert_eq!(a["passed"], true);
    assert_eq!(a, strip(run(&args)));
}
