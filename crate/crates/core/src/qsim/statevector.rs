use num_complex::Complex64;

use super::gate::Gate;
use super::kernels;
use crate::error::Result;

/// Pure state of `n_qubits`. Qubit `q` is bit `n_qubits - 1 - q` of the basis
/// index, so qubit 0 is the most significant bit of the printed bitstring.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩`
    pub fn zero(n_qubits: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Self {
            n_qubits,
            amplitudes,
        }
    }

    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let mut s = Self::zero(n_qubits);
        s.amplitudes[0] = Complex64::new(0.0, 0.0);
        s.amplitudes[index] = Complex64::new(1.0, 0.0);
        s
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        let bit = |q: usize| self.n_qubits - 1 - q;
        match *gate {
            Gate::Rz(theta, q) => {
                let (p0, p1) = super::gate::rz_phases(theta);
                kernels::apply_diag_1q(&mut self.amplitudes, bit(q), p0, p1);
            }
            Gate::Rzz(_, a, b) => {
                let d = gate.diagonal4().expect("two-qubit diagonal");
                kernels::apply_diag_2q(&mut self.amplitudes, bit(a), bit(b), &d);
            }
            Gate::Cnot(c, t) => kernels::apply_cnot(&mut self.amplitudes, bit(c), bit(t)),
            Gate::Hadamard(q) | Gate::Rx(_, q) => {
                let m = gate.matrix().expect("single-qubit matrix");
                kernels::apply_1q(&mut self.amplitudes, bit(q), &m);
            }
        }
        Ok(())
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }
}
