//! Experiment driver: sample instances per size, solve each with repeated
//! CIM restarts, classify every run against exact oracles and aggregate.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;

use cimroute_core::cim::{CimConfig, CimSimulator, TracePoint};
use cimroute_core::network::generate_instance;
use cimroute_core::objectives::Normalization;
use cimroute_core::oracle::{
    pareto_frontier, scalar_optimum, values_match, ObjectiveSet, DEFAULT_MAX_PATHS,
};
use cimroute_core::{
    seed, Classification, Error, GeneratorConfig, NetworkInstance, PenaltyScheme, RadioConfig,
    Result, RouteSolution, ScalarWeights,
};

use crate::solver::RoutingProblem;

#[derive(Debug, Clone, PartialEq)]
pub enum WeightSpec {
    Fixed(ScalarWeights),
    /// Every combination on a 0.1 grid with each active weight at least 0.1.
    Sweep,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub node_counts: Vec<usize>,
    pub samples_per_size: usize,
    pub runs_per_sample: usize,
    pub weights: WeightSpec,
    /// Objectives for Pareto membership and for the sweep grid. `None`
    /// means the objectives with non-zero weight (all three for a sweep).
    pub active: Option<ObjectiveSet>,
    pub radio: RadioConfig,
    pub normalization: Normalization,
    pub cim: CimConfig,
    pub penalties: PenaltyScheme,
    pub seed: u64,
    pub max_paths: usize,
    pub record_wall_time: bool,
    pub trace_every: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            node_counts: vec![10, 20, 30, 40, 50, 60],
            samples_per_size: 40,
            runs_per_sample: 50,
            weights: WeightSpec::Fixed(ScalarWeights::new(0.0, 0.0, 1.0).expect("unit weights")),
            active: None,
            radio: RadioConfig::default(),
            normalization: Normalization::Max,
            cim: CimConfig::default(),
            penalties: PenaltyScheme::PathScaled(PenaltyScheme::DEFAULT_PATH_FACTOR),
            seed: 0,
            max_paths: DEFAULT_MAX_PATHS,
            record_wall_time: false,
            trace_every: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        if self.node_counts.is_empty() {
            return bad("no node counts");
        }
        if self.node_counts.iter().any(|&n| n < 2) {
            return bad("node counts must be at least 2");
        }
        if self.samples_per_size < 1 {
            return bad("samples per size must be at least 1");
        }
        if self.runs_per_sample < 1 {
            return bad("runs per sample must be at least 1");
        }
        if self.trace_every == Some(0) {
            return bad("trace interval must be positive");
        }
        if let PenaltyScheme::PathScaled(f) = self.penalties {
            if !(f > 0.0) || !f.is_finite() {
                return bad("penalty factor must be positive");
            }
        }
        self.radio.validate()?;
        self.cim.validate()
    }

    /// The weight settings, in output order.
    pub fn weight_settings(&self) -> Result<Vec<ScalarWeights>> {
        match &self.weights {
            WeightSpec::Fixed(w) => Ok(vec![*w]),
            WeightSpec::Sweep => Ok(weight_grid(self.active.unwrap_or(ObjectiveSet::all()))),
        }
    }

    fn active_for(&self, w: &ScalarWeights) -> Result<ObjectiveSet> {
        match self.active {
            Some(a) => Ok(a),
            None => ObjectiveSet::from_weights(w.as_array()),
        }
    }
}

/// Weight vectors in tenths over the active objectives, each active weight
/// at least 0.1, in lexicographic order of the tenths.
pub fn weight_grid(active: ObjectiveSet) -> Vec<ScalarWeights> {
    let dims: Vec<usize> = active.dims().collect();
    let mut out = Vec::new();
    let mut tenths = vec![0u32; dims.len()];
    fn fill(
        i: usize,
        left: u32,
        dims: &[usize],
        tenths: &mut Vec<u32>,
        out: &mut Vec<ScalarWeights>,
    ) {
        if i + 1 == dims.len() {
            tenths[i] = left;
            let mut w = [0.0; 3];
            for (d, t) in dims.iter().zip(tenths.iter()) {
                w[*d] = f64::from(*t) / 10.0;
            }
            out.push(ScalarWeights::new(w[0], w[1], w[2]).expect("tenths sum to one"));
            return;
        }
        let rest = (dims.len() - i - 1) as u32;
        for t in 1..=left - rest {
            tenths[i] = t;
            fill(i + 1, left - t, dims, tenths, out);
        }
    }
    if dims.len() == 1 {
        let mut w = [0.0; 3];
        w[dims[0]] = 1.0;
        return vec![ScalarWeights::new(w[0], w[1], w[2]).expect("unit weight")];
    }
    fill(0, 10, &dims, &mut tenths, &mut out);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParetoFlag {
    Member,
    NotMember,
    /// Path enumeration exceeded its limit.
    Unavailable,
}

impl ParetoFlag {
    pub fn as_str(&self) -> &'static str {
        match self {
            ParetoFlag::Member => "true",
            ParetoFlag::NotMember => "false",
            ParetoFlag::Unavailable => "oracle-unavailable",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub size: usize,
    pub sample: usize,
    /// Index into the weight settings.
    pub weight: usize,
    pub run: usize,
    /// `None` when the restart aborted on a non-finite amplitude.
    pub solution: Option<RouteSolution>,
    pub energy: Option<f64>,
    pub optimal: bool,
    pub pareto_optimal: ParetoFlag,
    pub wall_time: Option<f64>,
}

impl RunRecord {
    pub fn classification(&self) -> Classification {
        self.solution
            .as_ref()
            .map_or(Classification::Infeasible, RouteSolution::classification)
    }

    pub fn is_feasible(&self) -> bool {
        self.classification().is_feasible()
    }
}

/// Per sample and weight setting: instance size and oracle results.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleInfo {
    pub size: usize,
    pub sample: usize,
    pub weight: usize,
    pub instance_seed: u64,
    pub edges: usize,
    pub variables: usize,
    pub optimum: RouteSolution,
    /// `None` when the Pareto oracle was unavailable.
    pub frontier: Option<Vec<RouteSolution>>,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub size: usize,
    pub sample: usize,
    pub weight: usize,
    pub run: usize,
    pub point: TracePoint,
}

/// Counts behind one summary row; probabilities are ratios of these.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub size: usize,
    pub weight: usize,
    pub weights: ScalarWeights,
    pub samples: usize,
    pub records: usize,
    pub feasible: usize,
    pub simple: usize,
    pub optimal: usize,
    pub pareto_available: usize,
    pub pareto_optimal: usize,
    pub failed: usize,
    /// Samples whose lowest-energy run is feasible / optimal.
    pub best_feasible: usize,
    pub best_optimal: usize,
    /// Samples with at least one feasible / optimal run.
    pub any_feasible: usize,
    pub any_optimal: usize,
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

impl SummaryRow {
    pub fn p_feasible(&self) -> Option<f64> {
        ratio(self.feasible, self.records)
    }

    pub fn p_simple(&self) -> Option<f64> {
        ratio(self.simple, self.records)
    }

    pub fn p_optimal(&self) -> Option<f64> {
        ratio(self.optimal, self.records)
    }

    pub fn p_optimal_given_feasible(&self) -> Option<f64> {
        ratio(self.optimal, self.feasible)
    }

    /// Over records whose Pareto oracle succeeded.
    pub fn p_pareto(&self) -> Option<f64> {
        ratio(self.pareto_optimal, self.pareto_available)
    }

    pub fn p_best_feasible(&self) -> Option<f64> {
        ratio(self.best_feasible, self.samples)
    }

    pub fn p_best_optimal(&self) -> Option<f64> {
        ratio(self.best_optimal, self.samples)
    }

    pub fn p_any_feasible(&self) -> Option<f64> {
        ratio(self.any_feasible, self.samples)
    }

    pub fn p_any_optimal(&self) -> Option<f64> {
        ratio(self.any_optimal, self.samples)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub weights: Vec<ScalarWeights>,
    /// Sorted by (size, sample, weight, run).
    pub records: Vec<RunRecord>,
    pub samples: Vec<SampleInfo>,
    pub traces: Vec<TraceRow>,
    /// Sorted by (size, weight).
    pub summary: Vec<SummaryRow>,
    pub instances: BTreeMap<(usize, usize), NetworkInstance>,
}

impl ExperimentResult {
    /// Instance of `(size, sample)`. Panics if absent.
    pub fn instance(&self, size: usize, sample: usize) -> &NetworkInstance {
        &self.instances[&(size, sample)]
    }
}

struct SampleOutput {
    instance: NetworkInstance,
    infos: Vec<SampleInfo>,
    records: Vec<RunRecord>,
    traces: Vec<TraceRow>,
}

/// Seed of the instance for `(size, sample)`.
pub fn instance_seed(config_seed: u64, size: usize, sample: usize) -> u64 {
    seed::derive(config_seed, &[0, size as u64, sample as u64])
}

/// Seed of the CIM restarts for `(size, sample, weight)`.
pub fn cim_seed(config_seed: u64, size: usize, sample: usize, weight: usize) -> u64 {
    seed::derive(config_seed, &[1, size as u64, sample as u64, weight as u64])
}

fn run_sample(
    config: &ExperimentConfig,
    weights: &[ScalarWeights],
    size: usize,
    sample: usize,
) -> Result<SampleOutput> {
    let iseed = instance_seed(config.seed, size, sample);
    let instance = generate_instance(&GeneratorConfig::reference(size, iseed))?;
    let mut out = SampleOutput {
        instance: instance.clone(),
        infos: Vec::new(),
        records: Vec::new(),
        traces: Vec::new(),
    };
    for (wi, w) in weights.iter().enumerate() {
        let problem = RoutingProblem::build(
            instance.clone(),
            &config.radio,
            *w,
            config.normalization,
            &config.penalties,
        )?;
        let optimum = scalar_optimum(&problem.instance, &problem.scoring)?;
        let active = config.active_for(w)?;
        let frontier = match pareto_frontier(
            &problem.instance,
            &problem.scoring,
            active,
            config.max_paths,
        ) {
            Ok(set) => Some(set),
            Err(Error::TooManyPaths { .. } | Error::SearchBudgetExceeded { .. }) => None,
            Err(e) => return Err(e),
        };

        let cim = CimConfig {
            seed: cim_seed(config.seed, size, sample, wi),
            ..config.cim.clone()
        };
        let sim = CimSimulator::new(&problem.ising, &cim)?;
        let every = config.trace_every.unwrap_or(0);
        let mut failures = 0;
        for run in 0..config.runs_per_sample {
            let start = Instant::now();
            let mut points = Vec::new();
            let result = sim.run_restart_traced(run, every, |p| points.push(p));
            let elapsed = start.elapsed().as_secs_f64();
            out.traces.extend(points.into_iter().map(|point| TraceRow {
                size,
                sample,
                weight: wi,
                run,
                point,
            }));
            let (solution, energy) = match result {
                Ok(r) => (Some(problem.decode(&r.spins)?), Some(r.energy)),
                Err(Error::NonFinite { .. }) => {
                    failures += 1;
                    (None, None)
                }
                Err(e) => return Err(e),
            };
            let optimal = solution.as_ref().is_some_and(|s| {
                s.is_feasible_flow && values_match(s.scalar_value, optimum.scalar_value)
            });
            let pareto_optimal = match (&frontier, &solution) {
                (None, _) => ParetoFlag::Unavailable,
                (Some(f), Some(s))
                    if s.is_simple_path && f.contains_values(&s.objective_values.as_array()) =>
                {
                    ParetoFlag::Member
                }
                _ => ParetoFlag::NotMember,
            };
            out.records.push(RunRecord {
                size,
                sample,
                weight: wi,
                run,
                solution,
                energy,
                optimal,
                pareto_optimal,
                wall_time: config.record_wall_time.then_some(elapsed),
            });
        }
        out.infos.push(SampleInfo {
            size,
            sample,
            weight: wi,
            instance_seed: iseed,
            edges: problem.instance.edge_count(),
            variables: problem.qubo.map.len(),
            optimum,
            frontier: frontier.map(|f| f.members),
            failures,
        });
    }
    Ok(out)
}

/// Aggregates records into one row per (size, weight setting).
pub fn summarize(records: &[RunRecord], weights: &[ScalarWeights]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(usize, usize), BTreeMap<usize, Vec<&RunRecord>>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.size, r.weight))
            .or_default()
            .entry(r.sample)
            .or_default()
            .push(r);
    }
    groups
        .into_iter()
        .map(|((size, weight), samples)| {
            let mut row = SummaryRow {
                size,
                weight,
                weights: weights[weight],
                samples: samples.len(),
                records: 0,
                feasible: 0,
                simple: 0,
                optimal: 0,
                pareto_available: 0,
                pareto_optimal: 0,
                failed: 0,
                best_feasible: 0,
                best_optimal: 0,
                any_feasible: 0,
                any_optimal: 0,
            };
            for runs in samples.values() {
                for r in runs {
                    row.records += 1;
                    let c = r.classification();
                    row.feasible += usize::from(c.is_feasible());
                    row.simple += usize::from(c == Classification::SimplePath);
                    row.optimal += usize::from(r.optimal);
                    row.failed += usize::from(r.solution.is_none());
                    match r.pareto_optimal {
                        ParetoFlag::Member => {
                            row.pareto_available += 1;
                            row.pareto_optimal += 1;
                        }
                        ParetoFlag::NotMember => row.pareto_available += 1,
                        ParetoFlag::Unavailable => {}
                    }
                }
                let best = runs
                    .iter()
                    .filter_map(|r| r.energy.map(|e| (e, r.run, *r)))
                    .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                if let Some((_, _, b)) = best {
                    row.best_feasible += usize::from(b.is_feasible());
                    row.best_optimal += usize::from(b.optimal);
                }
                row.any_feasible += usize::from(runs.iter().any(|r| r.is_feasible()));
                row.any_optimal += usize::from(runs.iter().any(|r| r.optimal));
            }
            row
        })
        .collect()
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let weights = config.weight_settings()?;
    let tasks: Vec<(usize, usize)> = config
        .node_counts
        .iter()
        .flat_map(|&n| (0..config.samples_per_size).map(move |s| (n, s)))
        .collect();
    let outputs: Vec<SampleOutput> = tasks
        .par_iter()
        .map(|&(n, s)| run_sample(config, &weights, n, s))
        .collect::<Result<_>>()?;

    let mut records = Vec::new();
    let mut samples = Vec::new();
    let mut traces = Vec::new();
    let mut instances = BTreeMap::new();
    for o in outputs {
        instances.insert((o.instance.node_count(), o.infos[0].sample), o.instance);
        records.extend(o.records);
        samples.extend(o.infos);
        traces.extend(o.traces);
    }
    records.sort_by_key(|r| (r.size, r.sample, r.weight, r.run));
    samples.sort_by_key(|s| (s.size, s.sample, s.weight));
    traces.sort_by_key(|t| (t.size, t.sample, t.weight, t.run, t.point.step));
    let summary = summarize(&records, &weights);
    Ok(ExperimentResult {
        weights,
        records,
        samples,
        traces,
        summary,
        instances,
    })
}
