//! Command-line interface.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use cimroute_core::cim::{CimConfig, FieldSign, PumpSchedule};
use cimroute_core::network::{generate_instance, radius_for_mean_edges, reference_mean_edges};
use cimroute_core::objectives::Normalization;
use cimroute_core::oracle::{
    count_paths, pareto_frontier, scalar_optimum, values_match, ObjectiveSet, DEFAULT_MAX_PATHS,
};
use cimroute_core::{GeneratorConfig, PenaltyConfig, PenaltyScheme, RadioConfig, ScalarWeights};

use crate::format::{load_instance, save_instance, write_ising, write_qubo};
use crate::harness::{run_experiment, ExperimentConfig, WeightSpec};
use crate::output::{self, create};
use crate::solver::{solve_parallel, RoutingProblem};

#[derive(Debug, Parser)]
#[command(
    name = "cimroute",
    version,
    about = "Multi-objective wireless routing on a simulated coherent Ising machine"
)]
pub struct Cli {
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample random network instances.
    Generate(GenerateArgs),
    /// Solve one instance with CIM restarts.
    Solve(SolveArgs),
    /// Run the sampling experiment and write summary and records.
    Experiment(ExperimentArgs),
    /// Exact optimum and Pareto frontier of one instance.
    Oracle(OracleArgs),
    /// Write the QUBO and Ising models of one instance.
    Export(ExportArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, default_value_t = 10)]
    pub nodes: usize,
    /// Connection radius in meters; calibrated to the reference densities
    /// when omitted.
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long, default_value_t = GeneratorConfig::DEFAULT_AREA_SIDE)]
    pub area: f64,
    #[arg(long, default_value_t = 1)]
    pub count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScheduleArg {
    Tanh,
    Recursive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FieldSignArg {
    Descent,
    AsPrinted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NormalizationArg {
    Max,
    None,
}

#[derive(Debug, Clone, Args)]
pub struct CimArgs {
    #[arg(long, default_value_t = 1000)]
    pub iterations: usize,
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    #[arg(long, value_enum, default_value_t = ScheduleArg::Tanh)]
    pub schedule: ScheduleArg,
    #[arg(long, default_value_t = 2.0)]
    pub p_max: f64,
    #[arg(long, default_value_t = 0.0005)]
    pub ramp_rate: f64,
    #[arg(long, default_value_t = 0.1)]
    pub init_amplitude: f64,
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 10.0)]
    pub clamp: f64,
    /// Rescale couplings and fields to unit row bound.
    #[arg(long)]
    pub normalize: bool,
    #[arg(long, value_enum, default_value_t = FieldSignArg::Descent)]
    pub field_sign: FieldSignArg,
}

impl CimArgs {
    pub fn config(&self, seed: u64) -> CimConfig {
        CimConfig {
            iterations: self.iterations,
            time_step: self.dt,
            schedule: match self.schedule {
                ScheduleArg::Tanh => PumpSchedule::TanhRamp,
                ScheduleArg::Recursive => PumpSchedule::Recursive,
            },
            p_max: self.p_max,
            ramp_rate: self.ramp_rate,
            init_amplitude: self.init_amplitude,
            noise_amplitude: self.noise,
            clamp: self.clamp,
            normalize: self.normalize,
            field_sign: match self.field_sign {
                FieldSignArg::Descent => FieldSign::Descent,
                FieldSignArg::AsPrinted => FieldSign::AsPrinted,
            },
            seed,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct RadioArgs {
    #[arg(long, default_value_t = 2.7)]
    pub alpha: f64,
    /// Transmit power in watts.
    #[arg(long, default_value_t = 50.0)]
    pub power: f64,
    /// Carrier wavelength in meters.
    #[arg(long, default_value_t = 1.2)]
    pub wavelength: f64,
    #[arg(long, default_value_t = 4)]
    pub modulation: u32,
}

impl RadioArgs {
    pub fn config(&self) -> RadioConfig {
        RadioConfig {
            path_loss_exponent: self.alpha,
            transmit_power: self.power,
            carrier_wavelength: self.wavelength,
            modulation_order: self.modulation,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Scalarization weights `loss,ber,hops`, summing to one.
    #[arg(long, default_value = "0,0,1")]
    pub weights: String,
    #[arg(long, value_enum, default_value_t = NormalizationArg::Max)]
    pub normalization: NormalizationArg,
    /// `auto`, `path`, `path:<factor>` or `<p1>,<p2>,<p3>`.
    #[arg(long, default_value = "path")]
    pub penalties: String,
    #[command(flatten)]
    pub radio: RadioArgs,
}

impl ModelArgs {
    fn normalization(&self) -> Normalization {
        match self.normalization {
            NormalizationArg::Max => Normalization::Max,
            NormalizationArg::None => Normalization::None,
        }
    }

    fn build(&self, path: &Path) -> Result<RoutingProblem> {
        let instance =
            load_instance(path).with_context(|| format!("loading {}", path.display()))?;
        Ok(RoutingProblem::build(
            instance,
            &self.radio.config(),
            parse_weights(&self.weights)?,
            self.normalization(),
            &parse_penalties(&self.penalties)?,
        )?)
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, default_value_t = 50)]
    pub runs: usize,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub cim: CimArgs,
    /// Write the readout energy every N steps to trace.csv.
    #[arg(long, value_name = "N")]
    pub trace: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Comma-separated node counts.
    #[arg(long, default_value = "10,20,30,40,50,60")]
    pub nodes: String,
    #[arg(long, default_value_t = 40)]
    pub samples: usize,
    #[arg(long, default_value_t = 50)]
    pub runs: usize,
    /// `loss,ber,hops` weights, or `sweep` for the 0.1 grid.
    #[arg(long, default_value = "0,0,1")]
    pub weights: String,
    /// Active objectives, e.g. `loss,ber`.
    #[arg(long)]
    pub objectives: Option<String>,
    #[arg(long, value_enum, default_value_t = NormalizationArg::Max)]
    pub normalization: NormalizationArg,
    #[arg(long, default_value = "path")]
    pub penalties: String,
    #[arg(long, default_value_t = DEFAULT_MAX_PATHS)]
    pub max_paths: usize,
    /// Add a wall_time column to records.csv. Timings differ between runs.
    #[arg(long)]
    pub wall_time: bool,
    #[command(flatten)]
    pub radio: RadioArgs,
    #[command(flatten)]
    pub cim: CimArgs,
    #[arg(long, value_name = "N")]
    pub trace: Option<usize>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// Objectives spanning the frontier.
    #[arg(long, default_value = "loss,ber,hops")]
    pub objectives: String,
    /// Weights for the scalar optimum; equal over the objectives if omitted.
    #[arg(long)]
    pub weights: Option<String>,
    #[arg(long, value_enum, default_value_t = NormalizationArg::Max)]
    pub normalization: NormalizationArg,
    #[arg(long, default_value_t = DEFAULT_MAX_PATHS)]
    pub max_paths: usize,
    #[command(flatten)]
    pub radio: RadioArgs,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[command(flatten)]
    pub model: ModelArgs,
}

pub fn parse_weights(s: &str) -> Result<ScalarWeights> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("invalid weights `{s}`"))?;
    let [a, b, c] = v[..] else {
        bail!("weights need three values, got `{s}`");
    };
    Ok(ScalarWeights::new(a, b, c)?)
}

pub fn parse_penalties(s: &str) -> Result<PenaltyScheme> {
    let s = s.trim();
    if s == "auto" {
        return Ok(PenaltyScheme::Auto);
    }
    if s == "path" {
        return Ok(PenaltyScheme::PathScaled(
            PenaltyScheme::DEFAULT_PATH_FACTOR,
        ));
    }
    if let Some(f) = s.strip_prefix("path:") {
        let f: f64 = f
            .parse()
            .with_context(|| format!("invalid penalty factor `{f}`"))?;
        if !(f > 0.0) || !f.is_finite() {
            bail!("penalty factor must be positive");
        }
        return Ok(PenaltyScheme::PathScaled(f));
    }
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("invalid penalties `{s}`"))?;
    let [p1, p2, p3] = v[..] else {
        bail!("penalties need `auto`, `path[:factor]` or three values");
    };
    Ok(PenaltyScheme::Fixed(PenaltyConfig::new(p1, p2, p3)?))
}

fn parse_nodes(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|t| t.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("invalid node counts `{s}`"))
}

fn normalization(n: NormalizationArg) -> Normalization {
    match n {
        NormalizationArg::Max => Normalization::Max,
        NormalizationArg::None => Normalization::None,
    }
}

pub fn run(cli: Cli) -> Result<()> {
    fs::create_dir_all(&cli.out)
        .with_context(|| format!("creating output directory {}", cli.out.display()))?;
    match &cli.command {
        Command::Generate(a) => generate(&cli, a),
        Command::Solve(a) => solve(&cli, a),
        Command::Experiment(a) => experiment(&cli, a),
        Command::Oracle(a) => oracle(&cli, a),
        Command::Export(a) => export(&cli, a),
    }
}

fn generate(cli: &Cli, a: &GenerateArgs) -> Result<()> {
    let radius = match a.radius {
        Some(r) => r,
        None => radius_for_mean_edges(a.nodes, reference_mean_edges(a.nodes), a.area),
    };
    let mut seeds = Vec::new();
    for i in 0..a.count {
        let seed = if a.count == 1 {
            cli.seed
        } else {
            cimroute_core::seed::derive(cli.seed, &[i as u64])
        };
        let cfg = GeneratorConfig {
            area_side: a.area,
            ..GeneratorConfig::new(a.nodes, radius, seed)
        };
        let g = generate_instance(&cfg)?;
        let name = if a.count == 1 {
            "instance.txt".to_string()
        } else {
            format!("instance_{i:03}.txt")
        };
        let path = cli.out.join(&name);
        save_instance(&g, &path).with_context(|| format!("writing {}", path.display()))?;
        seeds.push(json!({ "file": name, "seed": seed, "edges": g.edge_count() }));
    }
    output::write_json(
        &cli.out.join("config.json"),
        &json!({
            "command": "generate",
            "nodes": a.nodes,
            "radius": radius,
            "area_side": a.area,
            "seed": cli.seed,
            "instances": seeds,
        }),
    )
}

fn solve(cli: &Cli, a: &SolveArgs) -> Result<()> {
    let p = a.model.build(&a.instance)?;
    let cim = a.cim.config(cli.seed);
    let res = solve_parallel(&p.ising, &cim, a.runs, a.trace)?;
    let optimum = scalar_optimum(&p.instance, &p.scoring)?;
    let mut rows = Vec::new();
    for run in &res.outcome.runs {
        let s = p.decode(&run.spins)?;
        let optimal = s.is_feasible_flow && values_match(s.scalar_value, optimum.scalar_value);
        rows.push((run.restart, run.energy, s, optimal));
    }
    output::write_solutions(create(&cli.out.join("solutions.csv"))?, &p.instance, &rows)?;
    if a.trace.is_some() {
        output::write_trace(
            create(&cli.out.join("trace.csv"))?,
            &["restart"],
            res.traces
                .iter()
                .flat_map(|t| t.points.iter().map(move |pt| (vec![t.restart], *pt))),
        )?;
    }
    let feasible = rows.iter().filter(|r| r.2.is_feasible_flow).count();
    let optimal = rows.iter().filter(|r| r.3).count();
    output::write_json(
        &cli.out.join("config.json"),
        &json!({
            "command": "solve",
            "instance": a.instance.display().to_string(),
            "runs": a.runs,
            "weights": parse_weights(&a.model.weights)?.as_array().to_vec(),
            "normalization": output::normalization_str(a.model.normalization()),
            "penalties": output::penalty_json(&p.penalties),
            "radio": output::radio_json(&a.model.radio.config()),
            "cim": output::cim_json(&cim),
            "trace_every": a.trace,
            "seed": cli.seed,
            "optimum_scalar": optimum.scalar_value,
            "failed_runs": res.outcome.failures.len(),
            "feasible_runs": feasible,
            "optimal_runs": optimal,
        }),
    )
}

fn experiment(cli: &Cli, a: &ExperimentArgs) -> Result<()> {
    if a.trace == Some(0) {
        bail!("--trace needs a positive interval");
    }
    let active = a
        .objectives
        .as_deref()
        .map(ObjectiveSet::parse)
        .transpose()?;
    let weights = if a.weights.trim() == "sweep" {
        WeightSpec::Sweep
    } else {
        WeightSpec::Fixed(parse_weights(&a.weights)?)
    };
    let config = ExperimentConfig {
        node_counts: parse_nodes(&a.nodes)?,
        samples_per_size: a.samples,
        runs_per_sample: a.runs,
        weights,
        active,
        radio: a.radio.config(),
        normalization: normalization(a.normalization),
        cim: a.cim.config(0),
        penalties: parse_penalties(&a.penalties)?,
        seed: cli.seed,
        max_paths: a.max_paths,
        record_wall_time: a.wall_time,
        trace_every: a.trace,
    };
    let result = run_experiment(&config)?;
    let out = &cli.out;
    output::write_summary(create(&out.join("summary.csv"))?, &result)?;
    output::write_experiment_records(create(&out.join("records.csv"))?, &result, a.wall_time)?;
    output::write_samples(create(&out.join("samples.csv"))?, &result)?;
    output::write_experiment_frontiers(create(&out.join("frontier.csv"))?, &result)?;
    if a.trace.is_some() {
        output::write_trace(
            create(&out.join("trace.csv"))?,
            &["size", "sample", "weight", "run"],
            result
                .traces
                .iter()
                .map(|t| (vec![t.size, t.sample, t.weight, t.run], t.point)),
        )?;
    }
    output::write_json(
        &out.join("config.json"),
        &output::experiment_json(&config, &result),
    )
}

fn oracle(cli: &Cli, a: &OracleArgs) -> Result<()> {
    let instance =
        load_instance(&a.instance).with_context(|| format!("loading {}", a.instance.display()))?;
    let active = ObjectiveSet::parse(&a.objectives)?;
    let weights = match &a.weights {
        Some(w) => parse_weights(w)?,
        None => {
            let k = active.dims().count() as f64;
            let mut w = [0.0; 3];
            for d in active.dims() {
                w[d] = 1.0 / k;
            }
            let last = active.dims().last().expect("at least one objective");
            w[last] = 1.0
                - w.iter()
                    .enumerate()
                    .filter(|(d, _)| *d != last)
                    .map(|(_, v)| v)
                    .sum::<f64>();
            ScalarWeights::new(w[0], w[1], w[2])?
        }
    };
    let radio = a.radio.config();
    let objectives = cimroute_core::EdgeObjectives::compute(&instance, &radio)?;
    let scoring =
        cimroute_core::route::Scoring::new(objectives, weights, normalization(a.normalization))?;
    let optimum = scalar_optimum(&instance, &scoring)?;
    let frontier = pareto_frontier(&instance, &scoring, active, a.max_paths)?;
    // The frontier search prunes; a full count may overflow where it did not.
    let paths = match count_paths(&instance, a.max_paths) {
        Ok(n) => json!(n),
        Err(cimroute_core::Error::TooManyPaths { .. }) => Value::Null,
        Err(e) => return Err(e.into()),
    };
    output::write_frontier(
        create(&cli.out.join("frontier.csv"))?,
        &instance,
        &frontier.members,
    )?;
    output::write_frontier(
        create(&cli.out.join("optimum.csv"))?,
        &instance,
        std::slice::from_ref(&optimum),
    )?;
    output::write_json(
        &cli.out.join("config.json"),
        &json!({
            "command": "oracle",
            "instance": a.instance.display().to_string(),
            "objectives": active.names(),
            "weights": weights.as_array().to_vec(),
            "normalization": output::normalization_str(normalization(a.normalization)),
            "radio": output::radio_json(&radio),
            "max_paths": a.max_paths,
            "simple_paths": paths,
            "frontier_size": frontier.members.len(),
            "seed": cli.seed,
        }),
    )
}

fn export(cli: &Cli, a: &ExportArgs) -> Result<()> {
    let p = a.model.build(&a.instance)?;
    let write = |name: &str, text: String| -> Result<()> {
        let path = cli.out.join(name);
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
    };
    write("qubo.txt", write_qubo(&p.qubo.model))?;
    write("ising.txt", write_ising(&p.ising))?;
    output::write_variables(
        create(&cli.out.join("variables.csv"))?,
        &p.instance,
        p.qubo.map.edges(),
    )?;
    output::write_json(
        &cli.out.join("config.json"),
        &json!({
            "command": "export",
            "instance": a.instance.display().to_string(),
            "weights": parse_weights(&a.model.weights)?.as_array().to_vec(),
            "normalization": output::normalization_str(a.model.normalization()),
            "penalties": output::penalty_json(&p.penalties),
            "radio": output::radio_json(&a.model.radio.config()),
            "variables": p.qubo.map.len(),
            "seed": cli.seed,
        }),
    )
}
