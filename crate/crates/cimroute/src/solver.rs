//! Single-instance pipeline: objectives, QUBO, Ising model and parallel CIM
//! restarts.

use rayon::prelude::*;

use cimroute_core::cim::{CimConfig, CimOutcome, CimRun, CimSimulator, TracePoint};
use cimroute_core::ising::qubo_to_ising;
use cimroute_core::objectives::Normalization;
use cimroute_core::qubo::{build_qubo, RoutingQubo};
use cimroute_core::route::{decode, Scoring};
use cimroute_core::{
    EdgeObjectives, IsingModel, NetworkInstance, PenaltyConfig, PenaltyScheme, RadioConfig, Result,
    RouteSolution, ScalarWeights,
};

/// Everything derived from one instance under one weight setting.
#[derive(Debug, Clone)]
pub struct RoutingProblem {
    pub instance: NetworkInstance,
    pub scoring: Scoring,
    pub penalties: PenaltyConfig,
    pub qubo: RoutingQubo,
    pub ising: IsingModel,
}

impl RoutingProblem {
    pub fn build(
        instance: NetworkInstance,
        radio: &RadioConfig,
        weights: ScalarWeights,
        normalization: Normalization,
        penalties: &PenaltyScheme,
    ) -> Result<Self> {
        let objectives = EdgeObjectives::compute(&instance, radio)?;
        let scoring = Scoring::new(objectives, weights, normalization)?;
        Self::from_scoring(instance, scoring, penalties)
    }

    pub fn from_scoring(
        instance: NetworkInstance,
        scoring: Scoring,
        penalties: &PenaltyScheme,
    ) -> Result<Self> {
        let penalties = penalties.resolve(&scoring.costs.costs, instance.node_count());
        let qubo = build_qubo(&instance, &scoring.costs.costs, &penalties)?;
        let ising = qubo_to_ising(&qubo.model);
        Ok(Self {
            instance,
            scoring,
            penalties,
            qubo,
            ising,
        })
    }

    pub fn decode(&self, spins: &[i8]) -> Result<RouteSolution> {
        decode(spins, &self.qubo.map, &self.instance, &self.scoring)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RestartTrace {
    pub restart: usize,
    pub points: Vec<TracePoint>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SolveOutput {
    pub outcome: CimOutcome,
    /// One entry per restart in restart order; empty unless tracing.
    pub traces: Vec<RestartTrace>,
}

/// Runs restarts on the rayon pool. Results are identical to
/// [`cimroute_core::cim::solve`] for the same inputs.
pub fn solve_parallel(
    model: &IsingModel,
    config: &CimConfig,
    restarts: usize,
    trace_every: Option<usize>,
) -> Result<SolveOutput> {
    if restarts < 1 {
        return Err(cimroute_core::Error::InvalidConfig(
            "restarts must be at least 1".into(),
        ));
    }
    let sim = CimSimulator::new(model, config)?;
    let every = trace_every.unwrap_or(0);
    let per_restart: Vec<(usize, Result<CimRun>, Vec<TracePoint>)> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut points = Vec::new();
            let run = sim.run_restart_traced(r, every, |p| points.push(p));
            (r, run, points)
        })
        .collect();
    let mut traces = Vec::new();
    let mut results = Vec::with_capacity(restarts);
    for (restart, run, points) in per_restart {
        if every > 0 {
            traces.push(RestartTrace { restart, points });
        }
        results.push((restart, run));
    }
    Ok(SolveOutput {
        outcome: CimOutcome::collect(results),
        traces,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use cimroute_core::cim;
    use cimroute_core::network::generate_instance;
    use cimroute_core::GeneratorConfig;

    #[test]
    fn parallel_matches_sequential() {
        let g = generate_instance(&GeneratorConfig::reference(10, 3)).unwrap();
        let p = RoutingProblem::build(
            g,
            &RadioConfig::default(),
            ScalarWeights::new(0.0, 0.0, 1.0).unwrap(),
            Normalization::Max,
            &PenaltyScheme::PathScaled(PenaltyScheme::DEFAULT_PATH_FACTOR),
        )
        .unwrap();
        let cfg = CimConfig {
            seed: 11,
            noise_amplitude: 0.05,
            ..Default::default()
        };
        let par = solve_parallel(&p.ising, &cfg, 8, Some(100)).unwrap();
        let seq = cim::solve(&p.ising, &cfg, 8).unwrap();
        assert_eq!(par.outcome, seq);
        assert_eq!(par.traces.len(), 8);
        assert!(par.traces.iter().all(|t| t.points.len() == 10));
        assert!(solve_parallel(&p.ising, &cfg, 0, None).is_err());
    }
}
