//! Trainable-coefficient QAOA circuit.
//!
//! Layer `k` applies the cost unitary `exp(iγ_k H₁/2)` and then the mixer
//! `exp(iβ_k H₀/2)` to `|+⟩^⊗N`, with `H₁ = Σ b_i Z_i + Σ w_ij Z_i Z_j` and
//! `H₀ = Σ X_i`. In gates: `RZ(−γ_k b_i)`, `RZZ(−γ_k w_ij)`, `RX(−β_k)`.
//! The half-angle scale puts every single-term rotation in the
//! `exp(−iθP/2)` form for which a ±π/2 shift gives the exact derivative.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{QbmError, Result};
use crate::ising::{self, IsingModel};
use crate::qsim::{self, Backend, Gate, GateSet, NoiseModel};
use crate::target::TargetDistribution;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaoaParams {
    beta: Vec<f64>,
    gamma: Vec<f64>,
}

impl QaoaParams {
    pub fn new(beta: Vec<f64>, gamma: Vec<f64>) -> Result<Self> {
        if beta.is_empty() || beta.len() != gamma.len() {
            return Err(QbmError::Config(format!(
                "beta and gamma need equal nonzero length, got {} and {}",
                beta.len(),
                gamma.len()
            )));
        }
        Ok(Self { beta, gamma })
    }

    pub fn zeros(p: usize) -> Self {
        Self {
            beta: vec![0.0; p],
            gamma: vec![0.0; p],
        }
    }

    pub fn random<R: Rng + ?Sized>(p: usize, half_width: f64, rng: &mut R) -> Self {
        let mut draw = || {
            if half_width > 0.0 {
                rng.random_range(-half_width..half_width)
            } else {
                0.0
            }
        };
        let beta = (0..p).map(|_| draw()).collect();
        let gamma = (0..p).map(|_| draw()).collect();
        Self { beta, gamma }
    }

    pub fn p(&self) -> usize {
        self.beta.len()
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn beta_mut(&mut self) -> &mut [f64] {
        &mut self.beta
    }

    pub fn gamma_mut(&mut self) -> &mut [f64] {
        &mut self.gamma
    }
}

/// Diagonal cost Hamiltonian built from an Ising model. `diagonal[i]` is
/// `⟨i|H₁|i⟩`, the energy of the configuration encoded by basis index `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostHamiltonian {
    model: IsingModel,
    diagonal: Vec<f64>,
}

impl CostHamiltonian {
    pub fn new(model: IsingModel) -> Result<Self> {
        let diagonal = model.energy_table()?;
        Ok(Self { model, diagonal })
    }

    pub fn model(&self) -> &IsingModel {
        &self.model
    }

    pub fn into_model(self) -> IsingModel {
        self.model
    }

    pub fn n_qubits(&self) -> usize {
        self.model.n()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    pub fn min_energy(&self) -> f64 {
        self.diagonal.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max_energy(&self) -> f64 {
        self.diagonal.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Same Hamiltonian with trainable parameter `k` (biases then couplings)
    /// offset by `delta`.
    pub fn with_param_shift(&self, k: usize, delta: f64) -> Self {
        let mut model = self.model.clone();
        *model.param_mut(k) += delta;
        Self::new(model).expect("shift keeps dimensions")
    }

    /// `⟨H₁⟩` under a distribution over basis states.
    pub fn expectation(&self, probs: &[f64]) -> f64 {
        probs.iter().zip(&self.diagonal).map(|(p, e)| p * e).sum()
    }
}

/// Hadamard wall, then per layer: `RZ` on every qubit, `RZZ` on every pair,
/// `RX` on every qubit.
pub fn build_circuit(h1: &CostHamiltonian, params: &QaoaParams) -> Vec<Gate> {
    let n = h1.n_qubits();
    let model = h1.model();
    let mut gates = Vec::with_capacity(n + params.p() * (2 * n + ising::pair_count(n)));
    gates.extend((0..n).map(Gate::Hadamard));
    for (&beta, &gamma) in params.beta().iter().zip(params.gamma()) {
        gates.extend(
            model
                .biases()
                .iter()
                .enumerate()
                .map(|(q, b)| Gate::Rz(-gamma * b, q)),
        );
        gates.extend(
            ising::pairs(n)
                .zip(model.couplings())
                .map(|((i, j), w)| Gate::Rzz(-gamma * w, i, j)),
        );
        gates.extend((0..n).map(|q| Gate::Rx(-beta, q)));
    }
    gates
}

/// How distributions are read off the circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMode {
    /// Exact register probabilities.
    Exact,
    /// Empirical frequencies `m_i / m` from `m` shots.
    Shots(u64),
}

/// Circuit evaluation settings shared by every expectation in a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluator {
    pub noise: NoiseModel,
    pub backend: Backend,
    pub mode: EvalMode,
    pub gate_set: GateSet,
}

impl Evaluator {
    pub fn new(noise: NoiseModel, mode: EvalMode) -> Self {
        Self {
            noise,
            backend: Backend::for_noise(&noise),
            mode,
            gate_set: GateSet::default(),
        }
    }

    pub fn with_gate_set(mut self, gate_set: GateSet) -> Self {
        self.gate_set = gate_set;
        self
    }

    pub fn exact(noise: NoiseModel) -> Self {
        Self::new(noise, EvalMode::Exact)
    }

    /// Exact output distribution of the circuit.
    pub fn probabilities(&self, h1: &CostHamiltonian, params: &QaoaParams) -> Vec<f64> {
        let gates = self.gate_set.lower(&build_circuit(h1, params));
        qsim::run_circuit(&gates, h1.n_qubits(), &self.noise, self.backend)
            .expect("circuit built for this register")
            .probabilities()
    }

    /// Exact probabilities or shot frequencies, per `mode`.
    pub fn observed<R: Rng + ?Sized>(
        &self,
        h1: &CostHamiltonian,
        params: &QaoaParams,
        rng: &mut R,
    ) -> Vec<f64> {
        let probs = self.probabilities(h1, params);
        match self.mode {
            EvalMode::Exact => probs,
            EvalMode::Shots(m) => {
                let counts = qsim::sample_counts(&renormalize(probs), m, rng)
                    .expect("register probabilities are normalized");
                counts.iter().map(|&k| k as f64 / m as f64).collect()
            }
        }
    }

    /// Generation unit: run the trained circuit and draw `shots` outcomes.
    pub fn generate<R: Rng + ?Sized>(
        &self,
        h1: &CostHamiltonian,
        params: &QaoaParams,
        shots: u64,
        rng: &mut R,
    ) -> Result<Vec<u64>> {
        qsim::sample_counts(&renormalize(self.probabilities(h1, params)), shots, rng)
    }

    /// `⟨H₁⟩ = Σ_i P(i)·⟨i|H₁|i⟩`
    pub fn expected_h1<R: Rng + ?Sized>(
        &self,
        h1: &CostHamiltonian,
        params: &QaoaParams,
        rng: &mut R,
    ) -> f64 {
        h1.expectation(&self.observed(h1, params, rng))
    }

    /// `⟨H₂⟩ = (1/2^N)·Σ_i (P(i) − P_T(i))²`
    pub fn mse_loss<R: Rng + ?Sized>(
        &self,
        h1: &CostHamiltonian,
        params: &QaoaParams,
        target: &TargetDistribution,
        rng: &mut R,
    ) -> f64 {
        mse(&self.observed(h1, params, rng), target.probs())
    }
}

fn renormalize(mut probs: Vec<f64>) -> Vec<f64> {
    let s: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= s);
    probs
}

pub fn mse(probs: &[f64], target: &[f64]) -> f64 {
    debug_assert_eq!(probs.len(), target.len());
    probs
        .iter()
        .zip(target)
        .map(|(p, t)| (p - t) * (p - t))
        .sum::<f64>()
        / probs.len() as f64
}

pub fn expected_h1<R: Rng + ?Sized>(
    h1: &CostHamiltonian,
    params: &QaoaParams,
    noise: &NoiseModel,
    mode: EvalMode,
    rng: &mut R,
) -> f64 {
    Evaluator::new(*noise, mode).expected_h1(h1, params, rng)
}

pub fn mse_loss_h2<R: Rng + ?Sized>(
    h1: &CostHamiltonian,
    params: &QaoaParams,
    target: &TargetDistribution,
    noise: &NoiseModel,
    mode: EvalMode,
    rng: &mut R,
) -> Result<f64> {
    if target.probs().len() != 1 << h1.n_qubits() {
        return Err(QbmError::DimensionMismatch {
            expected: 1 << h1.n_qubits(),
            got: target.probs().len(),
        });
    }
    Ok(Evaluator::new(*noise, mode).mse_loss(h1, params, target, rng))
}

/// Generation unit: run the trained circuit and draw `shots` outcomes.
pub fn generate<R: Rng + ?Sized>(
    h1: &CostHamiltonian,
    params: &QaoaParams,
    noise: &NoiseModel,
    shots: u64,
    rng: &mut R,
) -> Result<Vec<u64>> {
    Evaluator::exact(*noise).generate(h1, params, shots, rng)
}
