//! Fully connected Ising energy model and exact brute-force quantities over
//! all `2^N` spin configurations (`k_B T = 1`).

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{QbmError, Result};
use crate::target::TargetDistribution;

/// Largest node count accepted by the enumeration routines.
pub const MAX_ENUMERATION_NODES: usize = 20;

/// Biases `b_i` and couplings `w_ij` (`i < j`) of a fully connected model.
///
/// Couplings are stored packed in lexicographic pair order
/// `(0,1), (0,2), …, (0,N−1), (1,2), …, (N−2,N−1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsingModel {
    biases: Vec<f64>,
    couplings: Vec<f64>,
}

pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// All pairs `i < j` in packed order.
pub fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
}

impl IsingModel {
    pub fn zeros(n: usize) -> Self {
        Self {
            biases: vec![0.0; n],
            couplings: vec![0.0; pair_count(n)],
        }
    }

    pub fn new(biases: Vec<f64>, couplings: Vec<f64>) -> Result<Self> {
        let expected = pair_count(biases.len());
        if couplings.len() != expected {
            return Err(QbmError::DimensionMismatch {
                expected,
                got: couplings.len(),
            });
        }
        Ok(Self { biases, couplings })
    }

    /// Every bias and coupling drawn from `U(−half_width, half_width)`.
    pub fn random<R: Rng + ?Sized>(n: usize, half_width: f64, rng: &mut R) -> Self {
        let mut draw = || {
            if half_width > 0.0 {
                rng.random_range(-half_width..half_width)
            } else {
                0.0
            }
        };
        let biases = (0..n).map(|_| draw()).collect();
        let couplings = (0..pair_count(n)).map(|_| draw()).collect();
        Self { biases, couplings }
    }

    pub fn n(&self) -> usize {
        self.biases.len()
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn biases_mut(&mut self) -> &mut [f64] {
        &mut self.biases
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn couplings_mut(&mut self) -> &mut [f64] {
        &mut self.couplings
    }

    /// Packed position of pair `(i, j)`, either order.
    pub fn pair_index(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        debug_assert!(i != j && j < self.n());
        let n = self.n();
        i * (2 * n - i - 1) / 2 + (j - i - 1)
    }

    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        if i == j {
            0.0
        } else {
            self.couplings[self.pair_index(i, j)]
        }
    }

    pub fn set_coupling(&mut self, i: usize, j: usize, value: f64) {
        let k = self.pair_index(i, j);
        self.couplings[k] = value;
    }

    /// Number of trainable parameters, `N + N(N−1)/2`.
    pub fn n_params(&self) -> usize {
        self.biases.len() + self.couplings.len()
    }

    /// Parameter `k` in the flat order biases-then-couplings.
    pub fn param(&self, k: usize) -> f64 {
        if k < self.biases.len() {
            self.biases[k]
        } else {
            self.couplings[k - self.biases.len()]
        }
    }

    pub fn param_mut(&mut self, k: usize) -> &mut f64 {
        let nb = self.biases.len();
        if k < nb {
            &mut self.biases[k]
        } else {
            &mut self.couplings[k - nb]
        }
    }

    /// `E(s) = Σ b_i x_i + Σ_{i<j} w_ij x_i x_j`
    pub fn energy(&self, s: &SpinConfig) -> Result<f64> {
        if s.len() != self.n() {
            return Err(QbmError::DimensionMismatch {
                expected: self.n(),
                got: s.len(),
            });
        }
        Ok(self.energy_unchecked(s.spins()))
    }

    fn energy_unchecked(&self, x: &[i8]) -> f64 {
        let field: f64 = self
            .biases
            .iter()
            .zip(x)
            .map(|(b, &xi)| b * f64::from(xi))
            .sum();
        let coupling: f64 = pairs(self.n())
            .zip(&self.couplings)
            .map(|((i, j), w)| w * f64::from(x[i] * x[j]))
            .sum();
        field + coupling
    }

    /// Energy of the configuration encoded by basis index `index`.
    pub fn energy_of_index(&self, index: usize) -> f64 {
        self.energy_unchecked(SpinConfig::from_index(index, self.n()).spins())
    }

    /// `E(s)` for every basis index, in index order.
    pub fn energy_table(&self) -> Result<Vec<f64>> {
        check_enumerable(self.n())?;
        Ok((0..1usize << self.n()).map(|i| self.energy_of_index(i)).collect())
    }
}

/// Node states `x_i ∈ {+1, −1}`.
///
/// Basis mapping: `x_i = +1 ↔ |0⟩`, `x_i = −1 ↔ |1⟩`, with node 0 as the
/// most significant bit. `(−1, +1, +1, −1)` is `"1001"`, index 9.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpinConfig(Vec<i8>);

impl SpinConfig {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if let Some(&bad) = spins.iter().find(|&&x| x != 1 && x != -1) {
            return Err(QbmError::Config(format!("spin value {bad} is not ±1")));
        }
        Ok(Self(spins))
    }

    pub fn from_index(index: usize, n: usize) -> Self {
        Self(
            (0..n)
                .map(|i| if (index >> (n - 1 - i)) & 1 == 1 { -1 } else { 1 })
                .collect(),
        )
    }

    pub fn from_bitstring(bits: &str) -> Result<Self> {
        if bits.is_empty() {
            return Err(QbmError::MalformedBitstring(bits.to_owned()));
        }
        bits.chars()
            .map(|c| match c {
                '0' => Ok(1),
                '1' => Ok(-1),
                _ => Err(QbmError::MalformedBitstring(bits.to_owned())),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn spins(&self) -> &[i8] {
        &self.0
    }

    pub fn get(&self, i: usize) -> i8 {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, value: i8) {
        debug_assert!(value == 1 || value == -1);
        self.0[i] = value;
    }

    pub fn to_index(&self) -> usize {
        self.0
            .iter()
            .fold(0usize, |acc, &x| (acc << 1) | usize::from(x == -1))
    }

    pub fn to_bitstring(&self) -> String {
        self.0.iter().map(|&x| if x == 1 { '0' } else { '1' }).collect()
    }
}

pub fn check_enumerable(n: usize) -> Result<()> {
    if n > MAX_ENUMERATION_NODES {
        Err(QbmError::EnumerationLimit {
            n,
            limit: MAX_ENUMERATION_NODES,
        })
    } else {
        Ok(())
    }
}

/// `Z = Σ_s exp(−E(s))`
pub fn partition_function(m: &IsingModel) -> Result<f64> {
    let energies = m.energy_table()?;
    Ok(energies.iter().map(|e| (-e).exp()).sum())
}

/// `P(s) = exp(−E(s)) / Z`, indexed by basis index.
pub fn boltzmann_distribution(m: &IsingModel) -> Result<TargetDistribution> {
    let energies = m.energy_table()?;
    let e_min = energies.iter().cloned().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = energies.iter().map(|e| (e_min - e).exp()).collect();
    let z: f64 = weights.iter().sum();
    TargetDistribution::new(weights.into_iter().map(|w| w / z).collect())
}

/// All configurations attaining the minimum energy, ascending by index.
/// Exact ties only; energies are compared with `==`.
pub fn ground_states(m: &IsingModel) -> Result<Vec<SpinConfig>> {
    let energies = m.energy_table()?;
    let e_min = energies.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(energies
        .iter()
        .enumerate()
        .filter(|(_, &e)| e == e_min)
        .map(|(i, _)| SpinConfig::from_index(i, m.n()))
        .collect())
}

/// First moments `E[x_i]` and packed pair moments `E[x_i x_j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub first: Vec<f64>,
    pub pair: Vec<f64>,
}

impl Moments {
    pub fn zeros(n: usize) -> Self {
        Self {
            first: vec![0.0; n],
            pair: vec![0.0; pair_count(n)],
        }
    }

    /// Moments of an arbitrary distribution over basis indices.
    pub fn of_distribution(n: usize, probs: &[f64]) -> Self {
        let mut out = Self::zeros(n);
        for (idx, &p) in probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            out.accumulate(&SpinConfig::from_index(idx, n), p);
        }
        out
    }

    /// Sample averages.
    pub fn of_samples<'a>(n: usize, samples: impl IntoIterator<Item = &'a SpinConfig>) -> Self {
        let mut out = Self::zeros(n);
        let mut count = 0usize;
        for s in samples {
            out.accumulate(s, 1.0);
            count += 1;
        }
        if count > 0 {
            let inv = 1.0 / count as f64;
            out.first.iter_mut().chain(out.pair.iter_mut()).for_each(|v| *v *= inv);
        }
        out
    }

    fn accumulate(&mut self, s: &SpinConfig, weight: f64) {
        let x = s.spins();
        for (acc, &xi) in self.first.iter_mut().zip(x) {
            *acc += weight * f64::from(xi);
        }
        for (acc, (i, j)) in self.pair.iter_mut().zip(pairs(x.len())) {
            *acc += weight * f64::from(x[i] * x[j]);
        }
    }
}

/// Exact Boltzmann moments by enumeration.
pub fn exact_moments(m: &IsingModel) -> Result<Moments> {
    let dist = boltzmann_distribution(m)?;
    Ok(Moments::of_distribution(m.n(), dist.probs()))
}
