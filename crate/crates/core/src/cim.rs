//! Simulated coherent Ising machine.
//!
//! Each spin is a degenerate optical parametric oscillator with in-phase
//! amplitude `c_i` and quadrature amplitude `s_i`, integrated with explicit
//! Euler steps:
//!
//! ```text
//! dc_i/dt = (-1 + p - (c_i^2 + s_i^2)) c_i + sum_j J_ij c_j + h_i
//! ds_i/dt = (-1 - p - (c_i^2 + s_i^2)) s_i + sum_j J_ij s_j + h_i
//! ```
//!
//! The pump `p` follows a [`PumpSchedule`] and spins are read out from the
//! sign of `c`. The field term enters with the sign that descends
//! [`IsingModel::energy`]; [`FieldSign::AsPrinted`] flips it.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::ising::IsingModel;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PumpSchedule {
    /// `p(t) = p_max * tanh(rate * t)`.
    #[default]
    TanhRamp,
    /// `p(t) = p(t-1) * tanh(0.0005 * t)` starting from `p(0) = p_max`.
    /// Strictly decreasing; kept for comparison.
    Recursive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FieldSign {
    /// `+h_i`: the drift follows the negative energy gradient.
    #[default]
    Descent,
    /// `-h_i`.
    AsPrinted,
}

/// Rate constant of the recursive pump schedule.
pub const RECURSIVE_PUMP_RATE: f64 = 0.0005;

#[derive(Debug, Clone, PartialEq)]
pub struct CimConfig {
    pub iterations: usize,
    pub time_step: f64,
    pub schedule: PumpSchedule,
    pub p_max: f64,
    pub ramp_rate: f64,
    pub init_amplitude: f64,
    /// Standard deviation of the additive Wiener increment on `c`.
    pub noise_amplitude: f64,
    /// Bound on `|c_i|` and `|s_i|` after every step.
    pub clamp: f64,
    /// Rescale `J` and `h` so the largest row of `|J|` plus `|h|` is one.
    pub normalize: bool,
    pub field_sign: FieldSign,
    pub seed: u64,
}

impl Default for CimConfig {
    fn default() -> Self {
        Self {
            iterations: 1000,
            time_step: 0.01,
            schedule: PumpSchedule::TanhRamp,
            p_max: 2.0,
            ramp_rate: 0.0005,
            init_amplitude: 0.1,
            noise_amplitude: 0.0,
            clamp: 10.0,
            normalize: false,
            field_sign: FieldSign::Descent,
            seed: 0,
        }
    }
}

impl CimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        if self.iterations < 1 {
            return bad("iterations must be at least 1");
        }
        if !(self.time_step > 0.0) {
            return bad("time step must be positive");
        }
        if !(self.init_amplitude > 0.0) {
            return bad("initial amplitude must be positive");
        }
        if !(self.noise_amplitude >= 0.0) {
            return bad("noise amplitude must be non-negative");
        }
        if !(self.clamp > 0.0) {
            return bad("clamp must be positive");
        }
        if !self.p_max.is_finite() || !self.ramp_rate.is_finite() {
            return bad("pump parameters must be finite");
        }
        Ok(())
    }

    /// Pump value before the first step.
    pub fn initial_pump(&self) -> f64 {
        match self.schedule {
            PumpSchedule::TanhRamp => 0.0,
            PumpSchedule::Recursive => self.p_max,
        }
    }
}

/// Pump value at step `t >= 1` given the value `p` at step `t - 1`.
pub fn pump_update(p: f64, t: usize, config: &CimConfig) -> f64 {
    match config.schedule {
        PumpSchedule::TanhRamp => config.p_max * libm::tanh(config.ramp_rate * t as f64),
        PumpSchedule::Recursive => p * libm::tanh(RECURSIVE_PUMP_RATE * t as f64),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CimState {
    pub in_phase: Vec<f64>,
    pub quadrature: Vec<f64>,
    pub pump: f64,
    pub step: usize,
}

impl CimState {
    /// Amplitudes drawn uniformly from `[-a0, a0]`.
    pub fn random<R: Rng + ?Sized>(n: usize, config: &CimConfig, rng: &mut R) -> Self {
        let a0 = config.init_amplitude;
        let mut draw = |_| rng.random_range(-a0..=a0);
        let in_phase = (0..n).map(&mut draw).collect();
        let quadrature = (0..n).map(&mut draw).collect();
        Self {
            in_phase,
            quadrature,
            pump: config.initial_pump(),
            step: 0,
        }
    }
}

/// `sigma_i = -1` if `c_i < 0`, else `+1`.
pub fn readout(state: &CimState) -> Vec<i8> {
    state
        .in_phase
        .iter()
        .map(|&c| if c < 0.0 { -1 } else { 1 })
        .collect()
}

/// Computes `y = J v` (zero diagonal) from the factored and residual parts
/// of an [`IsingModel`]. Cost per product is linear in the number of stored
/// terms.
#[derive(Debug, Clone)]
pub struct CouplingOperator {
    dimension: usize,
    factor_scales: Vec<f64>,
    factor_starts: Vec<usize>,
    factor_terms: Vec<(usize, f64)>,
    row_starts: Vec<usize>,
    row_entries: Vec<(usize, f64)>,
}

impl CouplingOperator {
    pub fn new(model: &IsingModel, scale: f64) -> Self {
        let n = model.dimension();
        let mut factor_scales = Vec::with_capacity(model.factors().len());
        let mut factor_starts = vec![0];
        let mut factor_terms = Vec::new();
        for f in model.factors() {
            factor_scales.push(scale * f.scale);
            factor_terms.extend_from_slice(&f.terms);
            factor_starts.push(factor_terms.len());
        }
        let mut degree = vec![0usize; n + 1];
        for &(k, l, _) in model.residual() {
            degree[k + 1] += 1;
            degree[l + 1] += 1;
        }
        for i in 0..n {
            degree[i + 1] += degree[i];
        }
        let row_starts = degree.clone();
        let mut fill = degree;
        let mut row_entries = vec![(0, 0.0); row_starts[n]];
        for &(k, l, j) in model.residual() {
            row_entries[fill[k]] = (l, scale * j);
            fill[k] += 1;
            row_entries[fill[l]] = (k, scale * j);
            fill[l] += 1;
        }
        Self {
            dimension: n,
            factor_scales,
            factor_starts,
            factor_terms,
            row_starts,
            row_entries,
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Number of stored coefficients; one product costs about twice this.
    pub fn stored_terms(&self) -> usize {
        self.factor_terms.len() + self.row_entries.len()
    }

    pub fn apply(&self, v: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.row_entries[self.row_starts[i]..self.row_starts[i + 1]];
            *o = row.iter().map(|&(j, w)| w * v[j]).sum();
        }
        for (f, &scale) in self.factor_scales.iter().enumerate() {
            let terms = &self.factor_terms[self.factor_starts[f]..self.factor_starts[f + 1]];
            let dot: f64 = terms.iter().map(|&(k, a)| a * v[k]).sum();
            for &(k, a) in terms {
                out[k] += scale * a * (dot - a * v[k]);
            }
        }
    }

    /// Upper bound on `max_i sum_j |J_ij|`.
    pub fn row_bound(&self) -> Vec<f64> {
        let mut bound = vec![0.0; self.dimension];
        for (i, b) in bound.iter_mut().enumerate() {
            *b = self.row_entries[self.row_starts[i]..self.row_starts[i + 1]]
                .iter()
                .map(|e| e.1.abs())
                .sum();
        }
        for (f, &scale) in self.factor_scales.iter().enumerate() {
            let terms = &self.factor_terms[self.factor_starts[f]..self.factor_starts[f + 1]];
            let total: f64 = terms.iter().map(|t| t.1.abs()).sum();
            for &(k, a) in terms {
                bound[k] += scale.abs() * a.abs() * (total - a.abs());
            }
        }
        bound
    }
}

/// One traced sample of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub step: usize,
    pub pump: f64,
    pub energy: f64,
}

/// Final spins of one restart.
#[derive(Debug, Clone, PartialEq)]
pub struct CimRun {
    pub restart: usize,
    pub spins: Vec<i8>,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CimFailure {
    pub restart: usize,
    pub error: Error,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CimOutcome {
    /// Sorted by energy, ties by restart index.
    pub runs: Vec<CimRun>,
    pub failures: Vec<CimFailure>,
}

impl CimOutcome {
    pub fn collect(results: impl IntoIterator<Item = (usize, Result<CimRun>)>) -> Self {
        let mut out = Self::default();
        for (restart, r) in results {
            match r {
                Ok(run) => out.runs.push(run),
                Err(error) => out.failures.push(CimFailure { restart, error }),
            }
        }
        out.runs.sort_by(|a, b| {
            a.energy
                .total_cmp(&b.energy)
                .then(a.restart.cmp(&b.restart))
        });
        out.failures.sort_by_key(|f| f.restart);
        out
    }

    pub fn best(&self) -> Option<&CimRun> {
        self.runs.first()
    }
}

/// Integrator bound to one model and configuration. Shareable across
/// threads; each restart owns its state.
#[derive(Debug, Clone)]
pub struct CimSimulator<'a> {
    model: &'a IsingModel,
    config: CimConfig,
    coupling: CouplingOperator,
    field: Vec<f64>,
}

impl<'a> CimSimulator<'a> {
    pub fn new(model: &'a IsingModel, config: &CimConfig) -> Result<Self> {
        config.validate()?;
        let unit = CouplingOperator::new(model, 1.0);
        let scale = if config.normalize {
            let worst = unit
                .row_bound()
                .iter()
                .zip(model.field())
                .map(|(r, h)| r + h.abs())
                .fold(0.0_f64, f64::max);
            if worst > 0.0 {
                1.0 / worst
            } else {
                1.0
            }
        } else {
            1.0
        };
        let coupling = if scale == 1.0 {
            unit
        } else {
            CouplingOperator::new(model, scale)
        };
        let sign = match config.field_sign {
            FieldSign::Descent => 1.0,
            FieldSign::AsPrinted => -1.0,
        };
        let field = model.field().iter().map(|h| sign * scale * h).collect();
        Ok(Self {
            model,
            config: config.clone(),
            coupling,
            field,
        })
    }

    pub fn config(&self) -> &CimConfig {
        &self.config
    }

    pub fn model(&self) -> &IsingModel {
        self.model
    }

    pub fn initial_state(&self, restart: usize) -> (CimState, rand_chacha::ChaCha8Rng) {
        let mut rng = seed::rng(seed::derive(self.config.seed, &[restart as u64]));
        let state = CimState::random(self.model.dimension(), &self.config, &mut rng);
        (state, rng)
    }

    /// One Euler step. `scratch` holds two vectors of the model dimension.
    pub fn step<R: Rng + ?Sized>(
        &self,
        state: &mut CimState,
        scratch: &mut [Vec<f64>; 2],
        rng: &mut R,
    ) -> Result<()> {
        let n = self.model.dimension();
        if state.in_phase.len() != n || state.quadrature.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: state.in_phase.len(),
            });
        }
        let cfg = &self.config;
        let dt = cfg.time_step;
        let p = state.pump;
        let [jc, js] = scratch;
        jc.resize(n, 0.0);
        js.resize(n, 0.0);
        self.coupling.apply(&state.in_phase, jc);
        self.coupling.apply(&state.quadrature, js);
        let noise = cfg.noise_amplitude * libm::sqrt(dt);
        let bound = cfg.clamp;
        for i in 0..n {
            let c = state.in_phase[i];
            let s = state.quadrature[i];
            let r2 = c * c + s * s;
            let mut dc = dt * ((-1.0 + p - r2) * c + jc[i] + self.field[i]);
            if noise > 0.0 {
                let eta: f64 = StandardNormal.sample(rng);
                dc += noise * eta;
            }
            let ds = dt * ((-1.0 - p - r2) * s + js[i] + self.field[i]);
            let c_next = c + dc;
            let s_next = s + ds;
            if !c_next.is_finite() || !s_next.is_finite() {
                return Err(Error::NonFinite {
                    step: state.step + 1,
                    spin: i,
                });
            }
            state.in_phase[i] = c_next.clamp(-bound, bound);
            state.quadrature[i] = s_next.clamp(-bound, bound);
        }
        state.step += 1;
        state.pump = pump_update(state.pump, state.step, cfg);
        Ok(())
    }

    pub fn run_restart(&self, restart: usize) -> Result<CimRun> {
        self.run_restart_traced(restart, 0, |_| {})
    }

    /// Runs one restart, calling `trace` every `every` steps (never when
    /// `every == 0`) with the readout energy at that point.
    pub fn run_restart_traced(
        &self,
        restart: usize,
        every: usize,
        mut trace: impl FnMut(TracePoint),
    ) -> Result<CimRun> {
        let (mut state, mut rng) = self.initial_state(restart);
        let mut scratch = [Vec::new(), Vec::new()];
        for _ in 0..self.config.iterations {
            self.step(&mut state, &mut scratch, &mut rng)?;
            if every > 0 && state.step % every == 0 {
                trace(TracePoint {
                    step: state.step,
                    pump: state.pump,
                    energy: self.model.energy(&readout(&state))?,
                });
            }
        }
        let spins = readout(&state);
        let energy = self.model.energy(&spins)?;
        Ok(CimRun {
            restart,
            spins,
            energy,
        })
    }
}

/// Runs `restarts` independent restarts sequentially.
pub fn solve(model: &IsingModel, config: &CimConfig, restarts: usize) -> Result<CimOutcome> {
    if restarts < 1 {
        return Err(Error::InvalidConfig("restarts must be at least 1".into()));
    }
    let sim = CimSimulator::new(model, config)?;
    Ok(CimOutcome::collect(
        (0..restarts).map(|r| (r, sim.run_restart(r))),
    ))
}
