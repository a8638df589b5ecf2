use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::error::{QbmError, Result};

pub type Matrix2 = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Native gate set. Rotations follow `R_P(θ) = exp(-iθP/2)`; angles in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    Hadamard(usize),
    Rx(f64, usize),
    Rz(f64, usize),
    /// `exp(-iθ Z⊗Z / 2)` on a qubit pair.
    Rzz(f64, usize, usize),
    /// Controlled NOT, `(control, target)`.
    Cnot(usize, usize),
}

impl Gate {
    pub fn qubits(&self) -> (usize, Option<usize>) {
        match *self {
            Gate::Hadamard(q) | Gate::Rx(_, q) | Gate::Rz(_, q) => (q, None),
            Gate::Rzz(_, a, b) | Gate::Cnot(a, b) => (a, Some(b)),
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(self, Gate::Rzz(..) | Gate::Cnot(..))
    }

    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        let (a, b) = self.qubits();
        for q in std::iter::once(a).chain(b) {
            if q >= n_qubits {
                return Err(QbmError::QubitOutOfRange { index: q, n_qubits });
            }
        }
        if b == Some(a) {
            return Err(QbmError::RepeatedQubit(a));
        }
        Ok(())
    }

    /// 2x2 matrix of a single-qubit gate; `None` for two-qubit gates.
    pub fn matrix(&self) -> Option<Matrix2> {
        match *self {
            Gate::Hadamard(_) => {
                let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
                Some([[h, h], [h, -h]])
            }
            Gate::Rx(theta, _) => {
                let c = Complex64::new((theta / 2.0).cos(), 0.0);
                let s = Complex64::new(0.0, -(theta / 2.0).sin());
                Some([[c, s], [s, c]])
            }
            Gate::Rz(theta, _) => {
                let (p0, p1) = rz_phases(theta);
                Some([[p0, ZERO], [ZERO, p1]])
            }
            Gate::Rzz(..) | Gate::Cnot(..) => None,
        }
    }

    /// Diagonal of the 4x4 matrix of a two-qubit gate, indexed by `2*bit_a + bit_b`.
    pub fn diagonal4(&self) -> Option<[Complex64; 4]> {
        match *self {
            Gate::Rzz(theta, ..) => {
                let (even, odd) = rz_phases(theta);
                Some([even, odd, odd, even])
            }
            _ => None,
        }
    }
}

/// `(e^{-iθ/2}, e^{iθ/2})`
pub(crate) fn rz_phases(theta: f64) -> (Complex64, Complex64) {
    let half = theta / 2.0;
    (
        Complex64::from_polar(1.0, -half),
        Complex64::from_polar(1.0, half),
    )
}
