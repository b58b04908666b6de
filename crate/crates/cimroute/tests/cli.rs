use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use cimroute::format::{load_instance, parse_ising, parse_qubo};
use cimroute::solver::RoutingProblem;
use cimroute_core::network::generate_instance;
use cimroute_core::{GeneratorConfig, Normalization, PenaltyScheme, RadioConfig, ScalarWeights};

fn cimroute(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cimroute"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) {
    let out = cimroute(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn csv_rows(p: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(p).unwrap();
    let mut rows = vec![r.headers().unwrap().iter().map(String::from).collect()];
    rows.extend(
        r.records()
            .map(|x| x.unwrap().iter().map(String::from).collect()),
    );
    rows
}

#[test]
fn generated_instance_matches_library_generator() {
    let dir = tempfile::tempdir().unwrap();
    ok(&[
        "generate",
        "--nodes",
        "15",
        "--seed",
        "9",
        "--out",
        s(dir.path()),
    ]);
    let loaded = load_instance(&dir.path().join("instance.txt")).unwrap();
    let direct = generate_instance(&GeneratorConfig::reference(15, 9)).unwrap();
    assert_eq!(loaded, direct);
    let config: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("config.json")).unwrap()).unwrap();
    assert_eq!(config["instances"][0]["edges"], direct.edge_count());
}

#[test]
fn batch_generation_names_files_by_index() {
    let dir = tempfile::tempdir().unwrap();
    ok(&[
        "generate",
        "--nodes",
        "8",
        "--count",
        "3",
        "--out",
        s(dir.path()),
    ]);
    for i in 0..3 {
        assert!(dir.path().join(format!("instance_{i:03}.txt")).exists());
    }
    assert!(!dir.path().join("instance.txt").exists());
}

#[test]
fn solve_writes_solutions_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("g");
    ok(&[
        "generate",
        "--nodes",
        "10",
        "--seed",
        "2",
        "--out",
        s(&inst),
    ]);
    let out = dir.path().join("solve");
    let instance = inst.join("instance.txt");
    ok(&[
        "solve",
        "--instance",
        s(&instance),
        "--runs",
        "6",
        "--trace",
        "250",
        "--out",
        s(&out),
    ]);
    let sol = csv_rows(&out.join("solutions.csv"));
    assert_eq!(sol.len(), 7);
    let energy = sol[0].iter().position(|h| h == "energy").unwrap();
    let energies: Vec<f64> = sol[1..]
        .iter()
        .map(|r| r[energy].parse().unwrap())
        .collect();
    assert!(
        energies.windows(2).all(|w| w[0] <= w[1]),
        "lowest energy first"
    );
    // Four trace points per restart at 250-step intervals over 1000 steps.
    assert_eq!(csv_rows(&out.join("trace.csv")).len(), 1 + 6 * 4);
}

#[test]
fn export_round_trips_through_the_text_formats() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("g");
    ok(&["generate", "--nodes", "9", "--seed", "4", "--out", s(&inst)]);
    let out = dir.path().join("export");
    let instance = inst.join("instance.txt");
    ok(&[
        "export",
        "--instance",
        s(&instance),
        "--weights",
        "0.2,0.3,0.5",
        "--penalties",
        "auto",
        "--out",
        s(&out),
    ]);
    let q = parse_qubo(&fs::read_to_string(out.join("qubo.txt")).unwrap()).unwrap();
    let ising = parse_ising(&fs::read_to_string(out.join("ising.txt")).unwrap()).unwrap();
    let p = RoutingProblem::build(
        load_instance(&instance).unwrap(),
        &RadioConfig::default(),
        ScalarWeights::new(0.2, 0.3, 0.5).unwrap(),
        Normalization::Max,
        &PenaltyScheme::Auto,
    )
    .unwrap();
    assert_eq!(q.dimension(), p.qubo.model.dimension());
    let n = q.dimension();
    for m in 0..64u64 {
        let x: Vec<bool> = (0..n)
            .map(|v| (m.wrapping_mul(0x9e37_79b9) >> (v % 60)) & 1 == 1)
            .collect();
        let spins = cimroute_core::ising::spins_from_binary(&x);
        let want = p.qubo.model.energy(&x).unwrap();
        assert_eq!(q.energy(&x).unwrap(), want);
        assert!((ising.energy(&spins).unwrap() - want).abs() <= 1e-9 * want.abs().max(1.0));
    }
    assert_eq!(csv_rows(&out.join("variables.csv")).len(), n + 1);
}

#[test]
fn oracle_reports_frontier_and_optimum() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("g");
    ok(&[
        "generate",
        "--nodes",
        "12",
        "--seed",
        "1",
        "--out",
        s(&inst),
    ]);
    let out = dir.path().join("oracle");
    let instance = inst.join("instance.txt");
    ok(&[
        "oracle",
        "--instance",
        s(&instance),
        "--objectives",
        "loss,ber",
        "--out",
        s(&out),
    ]);
    assert!(csv_rows(&out.join("frontier.csv")).len() > 1);
    assert_eq!(csv_rows(&out.join("optimum.csv")).len(), 2);
    let config: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("config.json")).unwrap()).unwrap();
    assert_eq!(config["weights"], serde_json::json!([0.5, 0.5, 0.0]));
}

#[test]
fn experiment_omits_wall_time_unless_asked() {
    let dir = tempfile::tempdir().unwrap();
    let base = [
        "experiment",
        "--nodes",
        "6",
        "--samples",
        "2",
        "--runs",
        "3",
        "--iterations",
        "200",
    ];
    let plain = dir.path().join("plain");
    let mut args = base.to_vec();
    args.extend(["--out", s(&plain)]);
    ok(&args);
    let timed = dir.path().join("timed");
    let mut args = base.to_vec();
    args.extend(["--wall-time", "--out", s(&timed)]);
    ok(&args);
    let header = |p: &Path| csv_rows(&p.join("records.csv"))[0].clone();
    assert!(!header(&plain).contains(&"wall_time".to_string()));
    assert!(header(&timed).contains(&"wall_time".to_string()));
    assert_eq!(csv_rows(&plain.join("records.csv")).len(), 1 + 2 * 3);
    assert_eq!(csv_rows(&plain.join("summary.csv")).len(), 2);
}

#[test]
fn malformed_instance_reports_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    fs::write(
        &bad,
        "nodes 2 edges 1 source 0 dest 1\nn 0 0 0 1e-12\nn 1 1 0 1e-12\ne 0 5\n",
    )
    .unwrap();
    let out = cimroute(&["solve", "--instance", s(&bad), "--out", s(dir.path())]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("line 4") && err.contains("unknown node id 5"),
        "{err}"
    );
}

#[test]
fn unreachable_destination_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("cut.txt");
    fs::write(
        &bad,
        "nodes 3 edges 1 source 0 dest 2\nn 0 0 0 1e-12\nn 1 1 0 1e-12\nn 2 2 0 1e-12\ne 0 1\n",
    )
    .unwrap();
    let out = cimroute(&["oracle", "--instance", s(&bad), "--out", s(dir.path())]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unreachable"));
}

#[test]
fn bad_arguments_fail_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["experiment", "--weights", "0.5,0.6,0.1"],
        vec!["experiment", "--penalties", "1,2"],
        vec!["experiment", "--nodes", "ten"],
        vec!["experiment", "--trace", "0"],
    ] {
        let mut args = args.clone();
        args.extend(["--out", s(dir.path())]);
        let out = cimroute(&args);
        assert!(!out.status.success(), "{args:?} should fail");
        assert!(!out.stderr.is_empty());
    }
}
