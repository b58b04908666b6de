//! CSV and JSON writers. Column layouts are listed in the README.
//!
//! Floats use the shortest round-trip form; missing values are written as
//! `NA`. Wall time is only written when requested so that repeated runs
//! produce identical bytes.

use std::fs;
use std::io;
use std::path::Path;

use anyhow::{Context, Result};
use serde_json::{json, Value};

use cimroute_core::cim::{CimConfig, FieldSign, PumpSchedule, TracePoint};
use cimroute_core::objectives::Normalization;
use cimroute_core::oracle::ObjectiveSet;
use cimroute_core::{NetworkInstance, PenaltyConfig, PenaltyScheme, RadioConfig, RouteSolution};

use crate::format::num;
use crate::harness::{ExperimentConfig, ExperimentResult, WeightSpec};

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".into(), num)
}

/// Edges as `from-to` pairs separated by spaces, in edge-index order.
pub fn edge_list(instance: &NetworkInstance, edges: &[usize]) -> String {
    edges
        .iter()
        .map(|&k| {
            let e = instance.edges()[k];
            format!("{}-{}", e.from, e.to)
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn solution_fields(instance: &NetworkInstance, s: &RouteSolution) -> Vec<String> {
    let v = s.objective_values;
    vec![
        s.classification().as_str().into(),
        s.is_feasible_flow.to_string(),
        s.is_simple_path.to_string(),
        num(v.loss),
        num(v.ber),
        num(v.hops),
        num(s.scalar_value),
        edge_list(instance, &s.edges),
    ]
}

pub fn write_experiment_records<W: io::Write>(
    out: W,
    result: &ExperimentResult,
    wall_time: bool,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![
        "size",
        "sample",
        "weight",
        "run",
        "status",
        "energy",
        "classification",
        "feasible_flow",
        "simple_path",
        "loss",
        "ber",
        "hops",
        "scalar",
        "edges",
        "optimal",
        "pareto_optimal",
    ];
    if wall_time {
        header.push("wall_time");
    }
    w.write_record(&header)?;
    for r in &result.records {
        let mut row = vec![
            r.size.to_string(),
            r.sample.to_string(),
            r.weight.to_string(),
            r.run.to_string(),
        ];
        match &r.solution {
            Some(s) => {
                let g = result.instance(r.size, r.sample);
                row.push("ok".into());
                row.push(opt(r.energy));
                row.extend(solution_fields(g, s));
            }
            None => {
                row.push("failed".into());
                row.push("NA".into());
                row.push("infeasible".into());
                row.extend(["false", "false", "NA", "NA", "NA", "NA", ""].map(String::from));
            }
        }
        row.push(r.optimal.to_string());
        row.push(r.pareto_optimal.as_str().into());
        if wall_time {
            row.push(opt(r.wall_time));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary<W: io::Write>(out: W, result: &ExperimentResult) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "size",
        "weight",
        "w_loss",
        "w_ber",
        "w_hops",
        "samples",
        "records",
        "feasible",
        "p_feasible",
        "simple",
        "p_simple",
        "optimal",
        "p_optimal",
        "p_optimal_given_feasible",
        "pareto_available",
        "pareto_optimal",
        "p_pareto",
        "failed",
        "best_feasible",
        "p_best_feasible",
        "best_optimal",
        "p_best_optimal",
        "any_feasible",
        "p_any_feasible",
        "any_optimal",
        "p_any_optimal",
    ])?;
    for r in &result.summary {
        let [a, b, c] = r.weights.as_array();
        let p_pareto = if r.pareto_available == 0 {
            "oracle-unavailable".into()
        } else {
            opt(r.p_pareto())
        };
        w.write_record([
            r.size.to_string(),
            r.weight.to_string(),
            num(a),
            num(b),
            num(c),
            r.samples.to_string(),
            r.records.to_string(),
            r.feasible.to_string(),
            opt(r.p_feasible()),
            r.simple.to_string(),
            opt(r.p_simple()),
            r.optimal.to_string(),
            opt(r.p_optimal()),
            opt(r.p_optimal_given_feasible()),
            r.pareto_available.to_string(),
            r.pareto_optimal.to_string(),
            p_pareto,
            r.failed.to_string(),
            r.best_feasible.to_string(),
            opt(r.p_best_feasible()),
            r.best_optimal.to_string(),
            opt(r.p_best_optimal()),
            r.any_feasible.to_string(),
            opt(r.p_any_feasible()),
            r.any_optimal.to_string(),
            opt(r.p_any_optimal()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_samples<W: io::Write>(out: W, result: &ExperimentResult) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "size",
        "sample",
        "weight",
        "instance_seed",
        "edges",
        "variables",
        "optimum_scalar",
        "optimum_loss",
        "optimum_ber",
        "optimum_hops",
        "optimum_edges",
        "frontier_size",
        "failed_runs",
    ])?;
    for s in &result.samples {
        let g = result.instance(s.size, s.sample);
        let v = s.optimum.objective_values;
        w.write_record([
            s.size.to_string(),
            s.sample.to_string(),
            s.weight.to_string(),
            s.instance_seed.to_string(),
            s.edges.to_string(),
            s.variables.to_string(),
            num(s.optimum.scalar_value),
            num(v.loss),
            num(v.ber),
            num(v.hops),
            edge_list(g, &s.optimum.edges),
            s.frontier
                .as_ref()
                .map_or_else(|| "oracle-unavailable".into(), |f| f.len().to_string()),
            s.failures.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Frontier rows for every sample whose oracle succeeded.
pub fn write_experiment_frontiers<W: io::Write>(out: W, result: &ExperimentResult) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "size", "sample", "weight", "edges", "loss", "ber", "hops", "scalar",
    ])?;
    for s in &result.samples {
        let Some(frontier) = &s.frontier else {
            continue;
        };
        let g = result.instance(s.size, s.sample);
        for m in frontier {
            let v = m.objective_values;
            w.write_record([
                s.size.to_string(),
                s.sample.to_string(),
                s.weight.to_string(),
                edge_list(g, &m.edges),
                num(v.loss),
                num(v.ber),
                num(v.hops),
                num(m.scalar_value),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Single-instance frontier: `edges, loss, ber, hops, scalar`.
pub fn write_frontier<W: io::Write>(
    out: W,
    instance: &NetworkInstance,
    members: &[RouteSolution],
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["edges", "loss", "ber", "hops", "scalar"])?;
    for m in members {
        let v = m.objective_values;
        w.write_record([
            edge_list(instance, &m.edges),
            num(v.loss),
            num(v.ber),
            num(v.hops),
            num(m.scalar_value),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One row per restart, lowest energy first.
pub fn write_solutions<W: io::Write>(
    out: W,
    instance: &NetworkInstance,
    rows: &[(usize, f64, RouteSolution, bool)],
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "restart",
        "energy",
        "classification",
        "feasible_flow",
        "simple_path",
        "loss",
        "ber",
        "hops",
        "scalar",
        "edges",
        "optimal",
    ])?;
    for (restart, energy, s, optimal) in rows {
        let mut row = vec![restart.to_string(), num(*energy)];
        row.extend(solution_fields(instance, s));
        row.push(optimal.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Trace rows: leading key columns followed by `step, pump, energy`.
pub fn write_trace<W: io::Write>(
    out: W,
    keys: &[&str],
    rows: impl IntoIterator<Item = (Vec<usize>, TracePoint)>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = keys.to_vec();
    header.extend(["step", "pump", "energy"]);
    w.write_record(&header)?;
    for (key, p) in rows {
        let mut row: Vec<String> = key.iter().map(usize::to_string).collect();
        row.extend([p.step.to_string(), num(p.pump), num(p.energy)]);
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Variable index to edge mapping for model exports.
pub fn write_variables<W: io::Write>(
    out: W,
    instance: &NetworkInstance,
    edges: &[usize],
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["variable", "edge", "from", "to"])?;
    for (v, &k) in edges.iter().enumerate() {
        let e = instance.edges()[k];
        w.write_record([
            v.to_string(),
            k.to_string(),
            e.from.to_string(),
            e.to.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn cim_json(c: &CimConfig) -> Value {
    json!({
        "iterations": c.iterations,
        "time_step": c.time_step,
        "schedule": match c.schedule {
            PumpSchedule::TanhRamp => "tanh-ramp",
            PumpSchedule::Recursive => "recursive",
        },
        "p_max": c.p_max,
        "ramp_rate": c.ramp_rate,
        "init_amplitude": c.init_amplitude,
        "noise_amplitude": c.noise_amplitude,
        "clamp": c.clamp,
        "normalize": c.normalize,
        "field_sign": match c.field_sign {
            FieldSign::Descent => "descent",
            FieldSign::AsPrinted => "as-printed",
        },
        "seed": c.seed,
    })
}

pub fn radio_json(r: &RadioConfig) -> Value {
    json!({
        "path_loss_exponent": r.path_loss_exponent,
        "transmit_power": r.transmit_power,
        "carrier_wavelength": r.carrier_wavelength,
        "modulation_order": r.modulation_order,
    })
}

pub fn penalty_scheme_json(p: &PenaltyScheme) -> Value {
    match p {
        PenaltyScheme::Auto => json!({ "scheme": "auto" }),
        PenaltyScheme::PathScaled(f) => json!({ "scheme": "path", "factor": f }),
        PenaltyScheme::Fixed(c) => json!({ "scheme": "fixed", "p1": c.p1, "p2": c.p2, "p3": c.p3 }),
    }
}

pub fn penalty_json(p: &PenaltyConfig) -> Value {
    json!({ "p1": p.p1, "p2": p.p2, "p3": p.p3 })
}

pub fn normalization_str(n: Normalization) -> &'static str {
    match n {
        Normalization::Max => "max",
        Normalization::None => "none",
    }
}

pub fn objectives_json(a: Option<ObjectiveSet>) -> Value {
    a.map_or(Value::Null, |a| json!(a.names()))
}

pub fn experiment_json(c: &ExperimentConfig, result: &ExperimentResult) -> Value {
    json!({
        "command": "experiment",
        "node_counts": c.node_counts,
        "samples_per_size": c.samples_per_size,
        "runs_per_sample": c.runs_per_sample,
        "weights": match &c.weights {
            WeightSpec::Fixed(_) => json!("fixed"),
            WeightSpec::Sweep => json!("sweep"),
        },
        "weight_settings": result.weights.iter().map(|w| w.as_array().to_vec()).collect::<Vec<_>>(),
        "active_objectives": objectives_json(c.active),
        "radio": radio_json(&c.radio),
        "normalization": normalization_str(c.normalization),
        "cim": cim_json(&c.cim),
        "penalties": penalty_scheme_json(&c.penalties),
        "seed": c.seed,
        "max_paths": c.max_paths,
        "record_wall_time": c.record_wall_time,
        "trace_every": c.trace_every,
    })
}

pub fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Creates `path` and wraps it in a buffered writer.
pub fn create(path: &Path) -> Result<io::BufWriter<fs::File>> {
    let f = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(io::BufWriter::new(f))
}
