//! Per-edge radio objectives and their weighted scalarization.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::network::NetworkInstance;

/// Radio parameters. The defaults are the reference experiment values:
/// path-loss exponent 2.7, 50 W transmit power, 1.2 m carrier wavelength and
/// QPSK (M = 4).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioConfig {
    pub path_loss_exponent: f64,
    /// Watts.
    pub transmit_power: f64,
    /// Meters.
    pub carrier_wavelength: f64,
    pub modulation_order: u32,
}

impl Default for RadioConfig {
    fn default() -> Self {
        Self {
            path_loss_exponent: 2.7,
            transmit_power: 50.0,
            carrier_wavelength: 1.2,
            modulation_order: 4,
        }
    }
}

impl RadioConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.path_loss_exponent > 0.0) {
            return Err(Error::InvalidConfig(
                "path-loss exponent must be positive".into(),
            ));
        }
        if !(self.transmit_power > 0.0) {
            return Err(Error::InvalidConfig(
                "transmit power must be positive".into(),
            ));
        }
        if !(self.carrier_wavelength > 0.0) {
            return Err(Error::InvalidConfig(
                "carrier wavelength must be positive".into(),
            ));
        }
        if self.modulation_order < 2 || !self.modulation_order.is_power_of_two() {
            return Err(Error::InvalidConfig(format!(
                "modulation order {} is not a power of two >= 2",
                self.modulation_order
            )));
        }
        Ok(())
    }

    pub fn bits_per_symbol(&self) -> f64 {
        self.modulation_order.trailing_zeros() as f64
    }
}

/// Free-space style path loss `(4*pi*d / wavelength)^alpha` at distance `d`.
pub fn path_loss(d: f64, radio: &RadioConfig) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::Domain("distance must be positive"));
    }
    let base = 4.0 * core::f64::consts::PI * d / radio.carrier_wavelength;
    Ok(libm::pow(base, radio.path_loss_exponent))
}

/// Bit error probability at signal-to-noise ratio `snr`:
/// `(1 - sqrt(R / (R + 1))) / 2`, evaluated in a cancellation-free form so
/// the result stays strictly positive at high SNR.
pub fn ber_from_snr(snr: f64) -> f64 {
    let root = libm::sqrt(snr / (snr + 1.0));
    0.5 / ((snr + 1.0) * (1.0 + root))
}

/// SNR of edge `k`: received power over the bit-scaled mean noise of both
/// endpoints.
pub fn edge_snr(instance: &NetworkInstance, k: usize, radio: &RadioConfig) -> Result<f64> {
    let e = instance.edges()[k];
    let ni = instance.nodes()[e.from].noise_power;
    let nj = instance.nodes()[e.to].noise_power;
    if !(ni > 0.0) || !(nj > 0.0) {
        return Err(Error::Domain("noise power must be positive"));
    }
    let received = radio.transmit_power / path_loss(instance.edge_length(k), radio)?;
    let noise = 0.5 * (ni + nj);
    Ok(received / (radio.bits_per_symbol() * noise))
}

/// Bit error probability of edge `k`.
pub fn bit_error(instance: &NetworkInstance, k: usize, radio: &RadioConfig) -> Result<f64> {
    if k >= instance.edge_count() {
        return Err(Error::Domain("edge index out of range"));
    }
    Ok(ber_from_snr(edge_snr(instance, k, radio)?))
}

/// Per-edge objective coefficients, indexed like `NetworkInstance::edges`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeObjectives {
    pub loss: Vec<f64>,
    pub ber: Vec<f64>,
    pub hop: Vec<f64>,
}

impl EdgeObjectives {
    pub fn compute(instance: &NetworkInstance, radio: &RadioConfig) -> Result<Self> {
        radio.validate()?;
        let m = instance.edge_count();
        let mut loss = Vec::with_capacity(m);
        let mut ber = Vec::with_capacity(m);
        for k in 0..m {
            loss.push(path_loss(instance.edge_length(k), radio)?);
            ber.push(bit_error(instance, k, radio)?);
        }
        Ok(Self {
            loss,
            ber,
            hop: alloc::vec![1.0; m],
        })
    }

    pub fn len(&self) -> usize {
        self.loss.len()
    }

    pub fn is_empty(&self) -> bool {
        self.loss.is_empty()
    }

    /// `[loss, ber, hop]` of edge `k`.
    pub fn values(&self, k: usize) -> [f64; 3] {
        [self.loss[k], self.ber[k], self.hop[k]]
    }
}

/// Convex weights `(v1, v2, v3)` over (loss, ber, hops).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarWeights([f64; 3]);

impl ScalarWeights {
    pub const SUM_TOLERANCE: f64 = 1e-12;

    pub fn new(loss: f64, ber: f64, hops: f64) -> Result<Self> {
        let w = [loss, ber, hops];
        if w.iter().any(|v| !(*v >= 0.0 && *v <= 1.0)) {
            return Err(Error::InvalidWeights(format!(
                "{w:?}: each weight must lie in [0, 1]"
            )));
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > Self::SUM_TOLERANCE {
            return Err(Error::InvalidWeights(format!("{w:?} sums to {sum}, not 1")));
        }
        Ok(Self(w))
    }

    pub fn as_array(&self) -> [f64; 3] {
        self.0
    }

    pub fn loss(&self) -> f64 {
        self.0[0]
    }

    pub fn ber(&self) -> f64 {
        self.0[1]
    }

    pub fn hops(&self) -> f64 {
        self.0[2]
    }

    pub fn dot(&self, v: [f64; 3]) -> f64 {
        self.0[0] * v[0] + self.0[1] * v[1] + self.0[2] * v[2]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    /// Divide every objective by its maximum over the instance's edges.
    #[default]
    Max,
    None,
}

/// Scalarized per-edge costs and the per-objective divisors that produced
/// them. A route's scalar value is `weights . (totals / scale)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeCosts {
    pub costs: Vec<f64>,
    pub scale: [f64; 3],
}

pub fn scalarize(
    objs: &EdgeObjectives,
    weights: &ScalarWeights,
    normalization: Normalization,
) -> Result<EdgeCosts> {
    if objs.is_empty() {
        return Err(Error::EmptyEdgeSet);
    }
    let scale = match normalization {
        Normalization::None => [1.0; 3],
        Normalization::Max => {
            let max = |v: &[f64]| v.iter().copied().fold(0.0_f64, f64::max);
            let s = [max(&objs.loss), max(&objs.ber), max(&objs.hop)];
            s.map(|m| if m > 0.0 { m } else { 1.0 })
        }
    };
    let costs = (0..objs.len())
        .map(|k| {
            let [l, b, h] = objs.values(k);
            weights.dot([l / scale[0], b / scale[1], h / scale[2]])
        })
        .collect();
    Ok(EdgeCosts { costs, scale })
}
