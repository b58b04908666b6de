use cimroute_core::cim::{CimConfig, CimSimulator, CouplingOperator};
use cimroute_core::ising::qubo_to_ising;
use cimroute_core::network::generate_instance;
use cimroute_core::objectives::scalarize;
use cimroute_core::qubo::build_qubo;
use cimroute_core::{
    EdgeObjectives, GeneratorConfig, IsingModel, Normalization, PenaltyScheme, RadioConfig,
    ScalarWeights,
};

fn routing_model(n: usize, seed: u64) -> IsingModel {
    let g = generate_instance(&GeneratorConfig::reference(n, seed)).unwrap();
    let objs = EdgeObjectives::compute(&g, &RadioConfig::default()).unwrap();
    let w = ScalarWeights::new(0.3, 0.3, 0.4).unwrap();
    let costs = scalarize(&objs, &w, Normalization::Max).unwrap().costs;
    let pen = PenaltyScheme::PathScaled(PenaltyScheme::DEFAULT_PATH_FACTOR).resolve(&costs, n);
    qubo_to_ising(&build_qubo(&g, &costs, &pen).unwrap().model)
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

#[test]
fn annealing_lowers_median_energy() {
    let mut improved = 0;
    let instances = 24;
    for seed in 0..instances {
        let model = routing_model(10, 500 + seed);
        let cfg = CimConfig {
            seed,
            ..Default::default()
        };
        let sim = CimSimulator::new(&model, &cfg).unwrap();
        let (mut early, mut late) = (Vec::new(), Vec::new());
        for r in 0..15 {
            sim.run_restart_traced(r, 50, |p| {
                if p.step == 50 {
                    early.push(p.energy);
                }
                if p.step == cfg.iterations {
                    late.push(p.energy);
                }
            })
            .unwrap();
        }
        if median(late) <= median(early) {
            improved += 1;
        }
    }
    assert!(improved >= instances * 9 / 10, "{improved}/{instances}");
}

#[test]
fn coupling_storage_is_linear_in_edges() {
    let mut ratios = Vec::new();
    for n in [10, 20, 30, 40] {
        let g = generate_instance(&GeneratorConfig::reference(n, 9)).unwrap();
        let op = CouplingOperator::new(&routing_model(n, 9), 1.0);
        ratios.push(op.stored_terms() as f64 / g.edge_count() as f64);
    }
    // Each variable appears in at most three squared terms.
    assert!(ratios.iter().all(|&r| r <= 3.0), "{ratios:?}");
}

#[test]
fn trace_reports_every_interval() {
    let model = routing_model(10, 1);
    let cfg = CimConfig::default();
    let sim = CimSimulator::new(&model, &cfg).unwrap();
    let mut steps = Vec::new();
    let run = sim.run_restart_traced(0, 100, |p| steps.push(p)).unwrap();
    assert_eq!(steps.len(), 10);
    assert_eq!(steps.last().unwrap().energy, run.energy);
    assert!(steps.windows(2).all(|w| w[1].pump > w[0].pump));
}
