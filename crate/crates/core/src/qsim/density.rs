use num_complex::Complex64;

use super::gate::Gate;
use super::kernels;
use super::statevector::StateVector;
use crate::error::{QbmError, Result};

/// Mixed state stored as a dense row-major `2^n × 2^n` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    entries: Vec<Complex64>,
}

impl DensityMatrix {
    /// `|0…0⟩⟨0…0|`
    pub fn zero(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        entries[0] = Complex64::new(1.0, 0.0);
        Self { n_qubits, entries }
    }

    pub fn from_pure(state: &StateVector) -> Self {
        let amps = state.amplitudes();
        let entries = amps
            .iter()
            .flat_map(|r| amps.iter().map(move |c| r * c.conj()))
            .collect();
        Self {
            n_qubits: state.n_qubits(),
            entries,
        }
    }

    /// Builds from raw row-major entries. The caller is responsible for the
    /// density-matrix invariants.
    pub fn from_entries(n_qubits: usize, entries: Vec<Complex64>) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if entries.len() != dim * dim {
            return Err(QbmError::DimensionMismatch {
                expected: dim * dim,
                got: entries.len(),
            });
        }
        Ok(Self { n_qubits, entries })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim() + col]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    /// Largest `|ρ_ij − conj(ρ_ji)|`.
    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    fn row_bit(&self, q: usize) -> usize {
        2 * self.n_qubits - 1 - q
    }

    fn col_bit(&self, q: usize) -> usize {
        self.n_qubits - 1 - q
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        match *gate {
            Gate::Rz(theta, q) => {
                let (p0, p1) = super::gate::rz_phases(theta);
                let (r, c) = (self.row_bit(q), self.col_bit(q));
                kernels::apply_diag_1q(&mut self.entries, r, p0, p1);
                kernels::apply_diag_1q(&mut self.entries, c, p0.conj(), p1.conj());
            }
            Gate::Rzz(_, a, b) => {
                let d = gate.diagonal4().expect("two-qubit diagonal");
                let dc = [d[0].conj(), d[1].conj(), d[2].conj(), d[3].conj()];
                let (ra, rb) = (self.row_bit(a), self.row_bit(b));
                let (ca, cb) = (self.col_bit(a), self.col_bit(b));
                kernels::apply_diag_2q(&mut self.entries, ra, rb, &d);
                kernels::apply_diag_2q(&mut self.entries, ca, cb, &dc);
            }
            Gate::Cnot(c, t) => {
                let (rc, rt) = (self.row_bit(c), self.row_bit(t));
                let (cc, ct) = (self.col_bit(c), self.col_bit(t));
                kernels::apply_cnot(&mut self.entries, rc, rt);
                kernels::apply_cnot(&mut self.entries, cc, ct);
            }
            Gate::Hadamard(q) | Gate::Rx(_, q) => {
                let m = gate.matrix().expect("single-qubit matrix");
                let (r, c) = (self.row_bit(q), self.col_bit(q));
                kernels::apply_1q(&mut self.entries, r, &m);
                kernels::apply_1q(&mut self.entries, c, &kernels::conj_matrix(&m));
            }
        }
        Ok(())
    }

    /// Single-qubit depolarizing channel
    /// `ρ → (1−p)ρ + (p/3)(XρX + YρY + ZρZ)`, evaluated through the
    /// equivalent form `(1−4p/3)ρ + (4p/3)·Tr_q(ρ)⊗I/2`.
    pub fn depolarize_1q(&mut self, q: usize, p: f64) -> Result<()> {
        check_probability(p)?;
        if q >= self.n_qubits {
            return Err(QbmError::QubitOutOfRange {
                index: q,
                n_qubits: self.n_qubits,
            });
        }
        if p == 0.0 {
            return Ok(());
        }
        let lambda = 4.0 * p / 3.0;
        let keep = 1.0 - lambda;
        let d = self.dim();
        let m = 1usize << self.col_bit(q);
        for r in (0..d).filter(|r| r & m == 0) {
            for c in (0..d).filter(|c| c & m == 0) {
                let i00 = r * d + c;
                let i11 = (r | m) * d + (c | m);
                let i01 = r * d + (c | m);
                let i10 = (r | m) * d + c;
                let avg = (self.entries[i00] + self.entries[i11]) * 0.5;
                self.entries[i00] = self.entries[i00] * keep + avg * lambda;
                self.entries[i11] = self.entries[i11] * keep + avg * lambda;
                self.entries[i01] *= keep;
                self.entries[i10] *= keep;
            }
        }
        Ok(())
    }

    /// Two-qubit depolarizing channel `ρ → (1−p)ρ + (p/15)·Σ PρP` over the 15
    /// non-identity two-qubit Paulis, evaluated as
    /// `(1−16p/15)ρ + (16p/15)·Tr_ab(ρ)⊗I/4`.
    pub fn depolarize_2q(&mut self, a: usize, b: usize, p: f64) -> Result<()> {
        check_probability(p)?;
        Gate::Rzz(0.0, a, b).validate(self.n_qubits)?;
        if p == 0.0 {
            return Ok(());
        }
        let lambda = 16.0 * p / 15.0;
        let keep = 1.0 - lambda;
        let d = self.dim();
        let ma = 1usize << self.col_bit(a);
        let mb = 1usize << self.col_bit(b);
        let both = ma | mb;
        let offsets = [0, mb, ma, ma | mb];
        for r in (0..d).filter(|r| r & both == 0) {
            for c in (0..d).filter(|c| c & both == 0) {
                let avg: Complex64 = offsets
                    .iter()
                    .map(|&o| self.entries[(r | o) * d + (c | o)])
                    .sum::<Complex64>()
                    * 0.25;
                for &or in &offsets {
                    for &oc in &offsets {
                        let idx = (r | or) * d + (c | oc);
                        self.entries[idx] *= keep;
                        if or == oc {
                            self.entries[idx] += avg * lambda;
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Diagonal, clamped at zero against round-off.
    pub fn probabilities(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.get(i, i).re.max(0.0)).collect()
    }
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(QbmError::InvalidProbability(p))
    }
}
