//! Minimal gate-level simulator: pure statevectors, dense density matrices,
//! and per-gate depolarizing noise.

mod density;
mod gate;
mod kernels;
mod noise;
mod statevector;

pub use density::DensityMatrix;
pub use gate::{Gate, Matrix2};
pub use noise::NoiseModel;
pub use statevector::StateVector;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{QbmError, Result};

/// Tolerance on `Σp = 1` accepted by [`sample_counts`].
pub const NORMALIZATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Pure,
    Mixed,
}

impl Backend {
    /// Mixed whenever any noise is present.
    pub fn for_noise(noise: &NoiseModel) -> Self {
        if noise.is_noiseless() {
            Backend::Pure
        } else {
            Backend::Mixed
        }
    }
}

/// Two-qubit gate vocabulary the circuit is run in. Noise follows the gates
/// actually executed, so the choice sets how many two-qubit channels a
/// coupling term costs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateSet {
    /// `RZZ` executes as one two-qubit gate.
    #[default]
    Native,
    /// `RZZ(θ)` on `(a, b)` executes as `CNOT(a,b) · RZ(θ) on b · CNOT(a,b)`.
    Cnot,
}

impl GateSet {
    pub fn lower(&self, gates: &[Gate]) -> Vec<Gate> {
        match self {
            GateSet::Native => gates.to_vec(),
            GateSet::Cnot => {
                let mut out = Vec::with_capacity(gates.len() * 2);
                for g in gates {
                    match *g {
                        Gate::Rzz(theta, a, b) => {
                            out.extend([Gate::Cnot(a, b), Gate::Rz(theta, b), Gate::Cnot(a, b)])
                        }
                        other => out.push(other),
                    }
                }
                out
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Register {
    Pure(StateVector),
    Mixed(DensityMatrix),
}

impl Register {
    pub fn zero(n_qubits: usize, backend: Backend) -> Self {
        match backend {
            Backend::Pure => Register::Pure(StateVector::zero(n_qubits)),
            Backend::Mixed => Register::Mixed(DensityMatrix::zero(n_qubits)),
        }
    }

    pub fn n_qubits(&self) -> usize {
        match self {
            Register::Pure(s) => s.n_qubits(),
            Register::Mixed(r) => r.n_qubits(),
        }
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        match self {
            Register::Pure(s) => s.apply_gate(gate),
            Register::Mixed(r) => r.apply_gate(gate),
        }
    }

    /// Depolarizes one qubit (`qubits.len() == 1`) or a pair.
    pub fn apply_depolarizing(&mut self, qubits: &[usize], p: f64) -> Result<()> {
        let Register::Mixed(rho) = self else {
            return Err(QbmError::NoiseOnPureState);
        };
        match *qubits {
            [q] => rho.depolarize_1q(q, p),
            [a, b] => rho.depolarize_2q(a, b, p),
            _ => Err(QbmError::Config(format!(
                "depolarizing acts on 1 or 2 qubits, got {}",
                qubits.len()
            ))),
        }
    }

    pub fn probabilities(&self) -> Vec<f64> {
        match self {
            Register::Pure(s) => s.probabilities(),
            Register::Mixed(r) => r.probabilities(),
        }
    }

    pub fn as_pure(&self) -> Option<&StateVector> {
        match self {
            Register::Pure(s) => Some(s),
            Register::Mixed(_) => None,
        }
    }

    pub fn as_mixed(&self) -> Option<&DensityMatrix> {
        match self {
            Register::Mixed(r) => Some(r),
            Register::Pure(_) => None,
        }
    }
}

/// Runs `gates` in order from `|0…0⟩`, inserting a `p1` channel after every
/// single-qubit gate and a `p2` channel after every two-qubit gate.
pub fn run_circuit(
    gates: &[Gate],
    n_qubits: usize,
    noise: &NoiseModel,
    backend: Backend,
) -> Result<Register> {
    if backend == Backend::Pure && !noise.is_noiseless() {
        return Err(QbmError::NoiseOnPureState);
    }
    let mut reg = Register::zero(n_qubits, backend);
    for gate in gates {
        reg.apply_gate(gate)?;
        if noise.is_noiseless() {
            continue;
        }
        match gate.qubits() {
            (a, Some(b)) if noise.p2 > 0.0 => reg.apply_depolarizing(&[a, b], noise.p2)?,
            (q, None) if noise.p1 > 0.0 => reg.apply_depolarizing(&[q], noise.p1)?,
            _ => {}
        }
    }
    Ok(reg)
}

pub fn check_distribution(probs: &[f64]) -> Result<()> {
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > NORMALIZATION_TOL || probs.iter().any(|&p| p < -NORMALIZATION_TOL) {
        return Err(QbmError::Unnormalized { sum });
    }
    Ok(())
}

/// Multinomial draw of `shots` outcomes, via a chain of conditional binomials.
pub fn sample_counts<R: Rng + ?Sized>(probs: &[f64], shots: u64, rng: &mut R) -> Result<Vec<u64>> {
    if shots == 0 {
        return Err(QbmError::ZeroShots);
    }
    check_distribution(probs)?;
    let mut counts = vec![0u64; probs.len()];
    let mut remaining = shots;
    let mut mass_left = 1.0f64;
    for (i, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        let p = p.max(0.0);
        if i + 1 == probs.len() || mass_left <= p {
            counts[i] = remaining;
            break;
        }
        let cond = (p / mass_left).clamp(0.0, 1.0);
        let k = Binomial::new(remaining, cond)
            .expect("conditional probability lies in [0, 1]")
            .sample(rng);
        counts[i] = k;
        remaining -= k;
        mass_left -= p;
    }
    Ok(counts)
}
