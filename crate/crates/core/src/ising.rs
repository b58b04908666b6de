//! Ising form of a QUBO under `sigma = 2x - 1`.
//!
//! Sign convention: `E(sigma) = -sum_{k<l} J_kl s_k s_l - sum_k h_k s_k + offset`,
//! which equals the source QUBO energy at `x = (sigma + 1) / 2` for every
//! assignment.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::qubo::{QuadraticFactor, QuboModel, SparsePairs};

#[derive(Debug, Clone, PartialEq)]
pub struct IsingModel {
    dimension: usize,
    couplings: SparsePairs,
    field: Vec<f64>,
    offset: f64,
    factors: Vec<QuadraticFactor>,
    residual: SparsePairs,
}

impl IsingModel {
    /// Builds a model from explicit couplings. Pairs may be given in either
    /// orientation; repeated pairs add.
    pub fn new(
        dimension: usize,
        couplings: &[(usize, usize, f64)],
        field: Vec<f64>,
        offset: f64,
    ) -> Result<Self> {
        if field.len() != dimension {
            return Err(Error::DimensionMismatch {
                expected: dimension,
                found: field.len(),
            });
        }
        let mut pairs: SparsePairs = Vec::with_capacity(couplings.len());
        for &(k, l, v) in couplings {
            if k == l {
                return Err(Error::InvalidConfig(
                    "Ising coupling on the diagonal".into(),
                ));
            }
            if k.max(l) >= dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    found: k.max(l) + 1,
                });
            }
            pairs.push((k.min(l), k.max(l), v));
        }
        pairs.sort_by_key(|p| (p.0, p.1));
        let mut merged: SparsePairs = Vec::with_capacity(pairs.len());
        for (k, l, v) in pairs {
            match merged.last_mut() {
                Some(last) if last.0 == k && last.1 == l => last.2 += v,
                _ => merged.push((k, l, v)),
            }
        }
        merged.retain(|e| e.2 != 0.0);
        Ok(Self {
            dimension,
            couplings: merged.clone(),
            field,
            offset,
            factors: Vec::new(),
            residual: merged,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Couplings `J_kl`, `k < l`, sorted.
    pub fn couplings(&self) -> &[(usize, usize, f64)] {
        &self.couplings
    }

    pub fn field(&self) -> &[f64] {
        &self.field
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Rank-one coupling terms: `J_kl += scale * a_k * a_l`.
    pub fn factors(&self) -> &[QuadraticFactor] {
        &self.factors
    }

    /// Couplings not covered by `factors`.
    pub fn residual(&self) -> &[(usize, usize, f64)] {
        &self.residual
    }

    /// Energy of a spin configuration. Runs in time linear in the size of the
    /// factored representation.
    pub fn energy(&self, spins: &[i8]) -> Result<f64> {
        if spins.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                found: spins.len(),
            });
        }
        if let Some(index) = spins.iter().position(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidSpin {
                index,
                value: spins[index],
            });
        }
        let s = |k: usize| spins[k] as f64;
        let mut pair_sum = 0.0;
        for f in &self.factors {
            let (mut dot, mut norm) = (0.0, 0.0);
            for &(k, a) in &f.terms {
                dot += a * s(k);
                norm += a * a;
            }
            pair_sum += 0.5 * f.scale * (dot * dot - norm);
        }
        for &(k, l, j) in &self.residual {
            pair_sum += j * s(k) * s(l);
        }
        let field_sum: f64 = self.field.iter().enumerate().map(|(k, h)| h * s(k)).sum();
        Ok(self.offset - pair_sum - field_sum)
    }
}

/// `J = -Q/4`, `h_k = -q_k/2 - sum_l Q_kl/4`, `offset = sum q/2 + sum Q/4 + c`
/// with `Q` the folded quadratic.
pub fn qubo_to_ising(model: &QuboModel) -> IsingModel {
    let n = model.dimension();
    let mut field: Vec<f64> = model.linear().iter().map(|q| -0.5 * q).collect();
    let mut offset = model.offset() + 0.5 * model.linear().iter().sum::<f64>();

    let mut row = vec![0.0; n];
    for f in model.factors() {
        let total: f64 = f.terms.iter().map(|t| t.1).sum();
        for &(k, a) in &f.terms {
            row[k] += f.scale * a * (total - a);
        }
        // Sum over unordered pairs of a_k a_l.
        let sq: f64 = f.terms.iter().map(|t| t.1 * t.1).sum();
        offset += 0.25 * f.scale * 0.5 * (total * total - sq);
    }
    for &(k, l, v) in model.residual() {
        row[k] += v;
        row[l] += v;
        offset += 0.25 * v;
    }
    for k in 0..n {
        field[k] -= 0.25 * row[k];
    }

    let quarter = |pairs: &[(usize, usize, f64)]| -> SparsePairs {
        pairs.iter().map(|&(k, l, v)| (k, l, -0.25 * v)).collect()
    };
    IsingModel {
        dimension: n,
        couplings: quarter(model.quadratic()),
        field,
        offset,
        factors: model
            .factors()
            .iter()
            .map(|f| QuadraticFactor {
                scale: -0.25 * f.scale,
                terms: f.terms.clone(),
            })
            .collect(),
        residual: quarter(model.residual()),
    }
}

pub fn spins_from_binary(x: &[bool]) -> Vec<i8> {
    x.iter().map(|&b| if b { 1 } else { -1 }).collect()
}

pub fn binary_from_spins(spins: &[i8]) -> Vec<bool> {
    spins.iter().map(|&s| s > 0).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubo::QuboBuilder;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn assignments(n: usize) -> impl Iterator<Item = Vec<bool>> {
        (0..1u32 << n).map(move |m| (0..n).map(|i| m >> i & 1 == 1).collect())
    }

    #[test]
    fn zero_qubo_maps_to_zero() {
        let m = qubo_to_ising(&QuboModel::zero(3));
        assert!(m.couplings().is_empty());
        assert_eq!(m.field(), &[0.0, 0.0, 0.0]);
        assert_eq!(m.offset(), 0.0);
    }

    #[test]
    fn single_variable() {
        let c = 1.7;
        let mut b = QuboBuilder::new(1);
        b.add_linear(0, c);
        let m = qubo_to_ising(&b.build());
        assert_eq!(m.field(), &[-c / 2.0]);
        assert_eq!(m.offset(), c / 2.0);
        assert_eq!(m.energy(&[1]).unwrap(), c);
        assert_eq!(m.energy(&[-1]).unwrap(), 0.0);
    }

    #[test]
    fn exhaustive_equivalence_random_8() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 8;
        let mut b = QuboBuilder::new(n);
        for k in 0..n {
            b.add_linear(k, rng.random_range(-3.0..3.0));
            for l in 0..n {
                if k != l && rng.random_bool(0.5) {
                    b.add_pair(k, l, rng.random_range(-3.0..3.0));
                }
            }
        }
        b.add_squared_penalty(2.0, &[(0, 1.0), (3, 1.0), (5, -1.0)], 1.0);
        b.add_offset(0.4);
        let q = b.build();
        let ising = qubo_to_ising(&q);
        for x in assignments(n) {
            let eq = q.energy(&x).unwrap();
            let ei = ising.energy(&spins_from_binary(&x)).unwrap();
            assert!((eq - ei).abs() <= 1e-9 * eq.abs().max(1.0), "{eq} vs {ei}");
        }
    }

    #[test]
    fn energy_matches_naive_double_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 7;
        let mut b = QuboBuilder::new(n);
        for k in 0..n {
            b.add_linear(k, rng.random_range(-1.0..1.0));
        }
        b.add_pair(1, 4, 0.3);
        b.add_squared_penalty(1.5, &[(0, 1.0), (2, 1.0), (6, -1.0)], 0.0);
        b.add_squared_penalty(0.5, &[(2, 1.0), (3, 1.0), (4, 1.0)], 1.0);
        let ising = qubo_to_ising(&b.build());
        let mut dense = [[0.0f64; 7]; 7];
        for &(k, l, j) in ising.couplings() {
            dense[k][l] = j;
        }
        for _ in 0..50 {
            let s: Vec<i8> = (0..n).map(|_| if rng.random() { 1 } else { -1 }).collect();
            let mut e = ising.offset();
            for k in 0..n {
                for l in k + 1..n {
                    e -= dense[k][l] * s[k] as f64 * s[l] as f64;
                }
                e -= ising.field()[k] * s[k] as f64;
            }
            let got = ising.energy(&s).unwrap();
            assert!((got - e).abs() <= 1e-12 * e.abs().max(1.0));
        }
    }

    #[test]
    fn explicit_model_energy() {
        let m = IsingModel::new(3, &[], vec![0.0; 3], 2.5).unwrap();
        assert_eq!(m.energy(&[1, 1, 1]).unwrap(), 2.5);

        let ferro = IsingModel::new(2, &[(1, 0, 1.0)], vec![0.0, 0.0], 0.0).unwrap();
        let e = |s: [i8; 2]| ferro.energy(&s).unwrap();
        assert_eq!(e([1, 1]), e([-1, -1]));
        assert!(e([1, 1]) < e([1, -1]));
        assert_eq!(e([1, -1]), e([-1, 1]));
    }

    #[test]
    fn invalid_spins_rejected() {
        let m = IsingModel::new(2, &[], vec![0.0; 2], 0.0).unwrap();
        assert_eq!(
            m.energy(&[1, 0]),
            Err(Error::InvalidSpin { index: 1, value: 0 })
        );
        assert!(m.energy(&[1]).is_err());
        assert!(IsingModel::new(2, &[(0, 0, 1.0)], vec![0.0; 2], 0.0).is_err());
        assert!(IsingModel::new(2, &[(0, 2, 1.0)], vec![0.0; 2], 0.0).is_err());
    }
}
