//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::Rng;

use cimroute::harness::{run_experiment, ExperimentConfig, ParetoFlag, WeightSpec};
use cimroute::output::write_experiment_frontiers;
use cimroute::solver::RoutingProblem;
use cimroute_core::cim::{self, CimConfig};
use cimroute_core::ising::{qubo_to_ising, spins_from_binary};
use cimroute_core::network::generate_instance;
use cimroute_core::objectives::{ber_from_snr, path_loss};
use cimroute_core::oracle::{brute_force_qubo, scalar_optimum, values_match, ObjectiveSet};
use cimroute_core::qubo::{build_qubo, default_penalties, PenaltyConfig};
use cimroute_core::route::Scoring;
use cimroute_core::seed;
use cimroute_core::{
    EdgeObjectives, GeneratorConfig, IsingModel, Normalization, PenaltyScheme, RadioConfig,
    ScalarWeights,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn scoring(g: &cimroute_core::NetworkInstance, w: ScalarWeights) -> Scoring {
    let objs = EdgeObjectives::compute(g, &RadioConfig::default()).unwrap();
    Scoring::new(objs, w, Normalization::Max).unwrap()
}

fn random_weights<R: Rng>(rng: &mut R) -> ScalarWeights {
    let a: f64 = rng.random();
    let b: f64 = rng.random::<f64>() * (1.0 - a);
    ScalarWeights::new(a, b, (1.0 - a - b).max(0.0)).unwrap()
}

fn qubo_ising_equivalence() -> Outcome {
    let mut rng = seed::rng(1);
    let (mut models, mut worst, mut tried, mut largest) = (0, 0.0f64, 0u64, 0);
    while models < 50 {
        tried += 1;
        let n = rng.random_range(4..9);
        let g = generate_instance(&GeneratorConfig::reference(n, tried)).unwrap();
        let sc = scoring(&g, random_weights(&mut rng));
        let pen = PenaltyConfig::new(
            rng.random_range(0.5..5.0),
            rng.random_range(0.5..5.0),
            rng.random_range(0.5..10.0),
        )
        .unwrap();
        let rq = build_qubo(&g, &sc.costs.costs, &pen).unwrap();
        let dim = rq.model.dimension();
        if dim > 14 {
            continue;
        }
        largest = largest.max(dim);
        let ising = qubo_to_ising(&rq.model);
        for mask in 0u32..1 << dim {
            let x: Vec<bool> = (0..dim).map(|i| mask >> i & 1 == 1).collect();
            let eq = rq.model.energy(&x).unwrap();
            let ei = ising.energy(&spins_from_binary(&x)).unwrap();
            worst = worst.max((eq - ei).abs() / eq.abs().max(1.0));
        }
        models += 1;
    }
    check(
        worst <= 1e-9,
        format!("{models} models up to dimension {largest}, worst relative gap {worst:e}"),
    )
}

fn penalty_correctness() -> Outcome {
    let mut rng = seed::rng(2);
    let (mut checked, mut agreed, mut seed) = (0, 0, 0u64);
    while checked < 30 {
        seed += 1;
        let g =
            generate_instance(&GeneratorConfig::reference(rng.random_range(4..7), seed)).unwrap();
        if g.edge_count() > 12 {
            continue;
        }
        let sc = scoring(&g, random_weights(&mut rng));
        let rq = build_qubo(&g, &sc.costs.costs, &default_penalties(&sc.costs.costs)).unwrap();
        let (x, e) = brute_force_qubo(&rq.model).unwrap();
        let best = scalar_optimum(&g, &sc).unwrap();
        let picked: Vec<usize> = (0..x.len())
            .filter(|&v| x[v])
            .map(|v| rq.map.edge(v))
            .collect();
        let sol = sc.evaluate(&g, &picked).unwrap();
        let same_indicator = rq.map.indicator(&best.edges).unwrap() == x;
        // Equal-cost paths may tie; the minimizer must then be a path of the same value.
        let tie = sol.is_simple_path && values_match(sol.scalar_value, best.scalar_value);
        if values_match(e, best.scalar_value) && (same_indicator || tie) {
            agreed += 1;
        }
        checked += 1;
    }
    check(agreed == 30, format!("{agreed}/{checked} instances agree"))
}

fn objective_formulas() -> Outcome {
    let radio = RadioConfig::default();
    let unit = path_loss(
        radio.carrier_wavelength / (4.0 * std::f64::consts::PI),
        &radio,
    )
    .unwrap();
    let defaults = radio.path_loss_exponent == 2.7
        && radio.transmit_power == 50.0
        && radio.carrier_wavelength == 1.2
        && radio.modulation_order == 4;
    let mut rng = seed::rng(3);
    let mut bad = 0;
    for _ in 0..10_000 {
        // Log-uniform SNR over twelve decades.
        let a = 10f64.powf(rng.random_range(-6.0..6.0));
        let b = 10f64.powf(rng.random_range(-6.0..6.0));
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let (p_lo, p_hi) = (ber_from_snr(lo), ber_from_snr(hi));
        let bounded = p_lo > 0.0 && p_lo < 0.5 && p_hi > 0.0 && p_hi < 0.5;
        if !bounded || p_hi > p_lo || (lo < hi && p_hi == p_lo && p_lo > 1e-300) {
            bad += 1;
        }
    }
    check(
        unit == 1.0 && defaults && bad == 0,
        format!("unit-distance loss {unit}, radio defaults {defaults}, {bad} bad BER evaluations"),
    )
}

fn exhaustive_min(m: &IsingModel) -> f64 {
    let n = m.dimension();
    (0u32..1 << n)
        .map(|mask| {
            let s: Vec<i8> = (0..n)
                .map(|i| if mask >> i & 1 == 1 { 1 } else { -1 })
                .collect();
            m.energy(&s).unwrap()
        })
        .fold(f64::INFINITY, f64::min)
}

fn ground_state_recovery() -> Outcome {
    let mut rng = seed::rng(4);
    let mut hits = 0;
    for trial in 0..20u64 {
        let n = rng.random_range(4..=8);
        let mut couplings = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                couplings.push((i, j, rng.random_range(-1.0..1.0)));
            }
        }
        let field = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let m = IsingModel::new(n, &couplings, field, 0.0).unwrap();
        let cfg = CimConfig {
            seed: trial,
            noise_amplitude: 0.3,
            ..Default::default()
        };
        let out = cim::solve(&m, &cfg, 50).unwrap();
        let best = out.best().map_or(f64::INFINITY, |r| r.energy);
        if (best - exhaustive_min(&m)).abs() <= 1e-9 {
            hits += 1;
        }
    }
    check(
        hits * 10 >= 20 * 9,
        format!("{hits}/20 models reach the ground state"),
    )
}

fn single_objective_feasibility() -> Outcome {
    let cfg = ExperimentConfig {
        node_counts: vec![10],
        samples_per_size: 40,
        runs_per_sample: 50,
        ..Default::default()
    };
    let r = run_experiment(&cfg).map_err(|e| e.to_string())?;
    let row = &r.summary[0];
    let pf = row.p_feasible().unwrap_or(0.0);
    let po = row.p_optimal_given_feasible().unwrap_or(0.0);
    check(
        pf >= 0.7 && po >= 0.9,
        format!(
            "{} runs, flow-feasible {pf:.4}, optimal given feasible {po:.4}",
            row.records
        ),
    )
}

fn pareto_subset() -> Outcome {
    let active = ObjectiveSet::parse("loss,ber").map_err(|e| e.to_string())?;
    let cfg = ExperimentConfig {
        node_counts: vec![20],
        samples_per_size: 10,
        runs_per_sample: 50,
        weights: WeightSpec::Fixed(ScalarWeights::new(0.5, 0.5, 0.0).unwrap()),
        active: Some(active),
        ..Default::default()
    };
    let r = run_experiment(&cfg).map_err(|e| e.to_string())?;
    let mut fronts = BTreeMap::new();
    for s in &r.samples {
        let Some(f) = &s.frontier else {
            return Err(format!("oracle unavailable for sample {}", s.sample));
        };
        if f.is_empty() {
            return Err(format!("empty frontier for sample {}", s.sample));
        }
        fronts.insert(s.sample, f);
    }
    let simple = r
        .records
        .iter()
        .filter(|x| x.solution.as_ref().is_some_and(|s| s.is_simple_path))
        .count();
    let (mut flagged, mut violations) = (0, 0);
    for rec in r
        .records
        .iter()
        .filter(|x| x.pareto_optimal == ParetoFlag::Member)
    {
        flagged += 1;
        let sol = rec.solution.as_ref().unwrap();
        let v = sol.objective_values.as_array();
        let front = fronts[&rec.sample];
        let dominated = front
            .iter()
            .any(|m| active.dominates(&m.objective_values.as_array(), &v));
        let listed = front.iter().any(|m| m.edges == sol.edges);
        if dominated || !listed || !sol.is_simple_path {
            violations += 1;
        }
    }
    let mut csv = Vec::new();
    write_experiment_frontiers(&mut csv, &r).map_err(|e| e.to_string())?;
    let rows = String::from_utf8(csv)
        .unwrap()
        .lines()
        .count()
        .saturating_sub(1);
    check(
        violations == 0 && rows > 0,
        format!(
            "{} runs, {simple} simple paths, {flagged} flagged, {violations} violations, \
             {rows} frontier rows exported",
            r.records.len()
        ),
    )
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len().is_multiple_of(2) {
        0.5 * (v[m - 1] + v[m])
    } else {
        v[m]
    }
}

fn sweep_scaling() -> Outcome {
    let time_at = |n: usize| {
        let mut times = Vec::new();
        let mut edges = 0;
        for s in 0..10u64 {
            let g = generate_instance(&GeneratorConfig::reference(n, 900 + s)).unwrap();
            edges += g.edge_count();
            let p = RoutingProblem::build(
                g,
                &RadioConfig::default(),
                ScalarWeights::new(0.0, 0.0, 1.0).unwrap(),
                Normalization::Max,
                &PenaltyScheme::PathScaled(PenaltyScheme::DEFAULT_PATH_FACTOR),
            )
            .unwrap();
            let cfg = CimConfig {
                seed: s,
                ..Default::default()
            };
            let t = Instant::now();
            cim::solve(&p.ising, &cfg, 5).unwrap();
            times.push(t.elapsed().as_secs_f64());
        }
        (median(times), edges as f64 / 10.0)
    };
    // Warm caches before timing.
    time_at(10);
    let (t10, e10) = time_at(10);
    let (t30, e30) = time_at(30);
    let ratio = t30 / t10;
    check(
        ratio <= 15.0,
        format!("mean edges {e10:.0} -> {e30:.0}, median time ratio {ratio:.2}"),
    )
}

fn read_dir(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect()
}

fn run_cli(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_cimroute"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!(
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        ))
    }
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let inst_dir = tmp.path().join("inst");
    let inst_dir = inst_dir.to_str().unwrap();
    run_cli(&["generate", "--nodes", "8", "--seed", "3", "--out", inst_dir])?;
    let instance = format!("{inst_dir}/instance.txt");
    let cases: Vec<Vec<&str>> = vec![
        vec!["generate", "--nodes", "12", "--count", "3"],
        vec![
            "solve",
            "--instance",
            &instance,
            "--runs",
            "8",
            "--trace",
            "100",
        ],
        vec![
            "experiment",
            "--nodes",
            "6,8",
            "--samples",
            "3",
            "--runs",
            "4",
            "--iterations",
            "300",
            "--weights",
            "sweep",
            "--objectives",
            "loss,hops",
            "--trace",
            "100",
        ],
        vec![
            "oracle",
            "--instance",
            &instance,
            "--objectives",
            "loss,ber",
        ],
        vec![
            "export",
            "--instance",
            &instance,
            "--weights",
            "0.2,0.3,0.5",
        ],
    ];
    let mut compared = 0;
    for (i, case) in cases.iter().enumerate() {
        let out = tmp.path().join(format!("run{i}"));
        let mut args = case.clone();
        args.extend(["--seed", "42", "--out", out.to_str().unwrap()]);
        run_cli(&args)?;
        let first = read_dir(&out);
        std::fs::remove_dir_all(&out).map_err(|e| e.to_string())?;
        run_cli(&args)?;
        let second = read_dir(&out);
        if first.is_empty() || first != second {
            return Err(format!("{} output differs between runs", case[0]));
        }
        compared += first.len();
    }
    check(
        true,
        format!(
            "{} subcommands, {compared} files byte-identical",
            cases.len()
        ),
    )
}

fn main() {
    let criteria: [Criterion; 8] = [
        (
            "QUBO and Ising energies agree exhaustively",
            qubo_ising_equivalence,
        ),
        (
            "default penalties make the path optimum the QUBO minimum",
            penalty_correctness,
        ),
        ("objective formulas and radio defaults", objective_formulas),
        (
            "CIM recovers small Ising ground states",
            ground_state_recovery,
        ),
        (
            "single-objective feasibility and optimality",
            single_objective_feasibility,
        ),
        (
            "Pareto-flagged runs lie on the oracle frontier",
            pareto_subset,
        ),
        ("solve time scales with edge count", sweep_scaling),
        ("CLI output is deterministic", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = f();
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("PASS criterion {}: {name} ({d}; {secs:.1}s)", i + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL criterion {}: {name} ({d}; {secs:.1}s)", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
