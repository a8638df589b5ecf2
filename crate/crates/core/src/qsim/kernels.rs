//! In-place kernels over a flat amplitude buffer. A density matrix of `n`
//! qubits is handled as a `2n`-bit buffer whose high bits index rows and low
//! bits index columns, so `UρU†` is `U` on the row bit and `conj(U)` on the
//! column bit.

use num_complex::Complex64;

use super::gate::Matrix2;

pub(crate) fn apply_1q(buf: &mut [Complex64], bit: usize, m: &Matrix2) {
    let mask = 1usize << bit;
    let len = buf.len();
    let mut base = 0;
    while base < len {
        for i0 in base..base + mask {
            let i1 = i0 | mask;
            let a0 = buf[i0];
            let a1 = buf[i1];
            buf[i0] = m[0][0] * a0 + m[0][1] * a1;
            buf[i1] = m[1][0] * a0 + m[1][1] * a1;
        }
        base += mask << 1;
    }
}

pub(crate) fn apply_diag_1q(buf: &mut [Complex64], bit: usize, d0: Complex64, d1: Complex64) {
    let mask = 1usize << bit;
    for (i, a) in buf.iter_mut().enumerate() {
        *a *= if i & mask == 0 { d0 } else { d1 };
    }
}

/// Diagonal two-qubit gate, `d` indexed by `2*bit_a + bit_b`.
pub(crate) fn apply_diag_2q(buf: &mut [Complex64], bit_a: usize, bit_b: usize, d: &[Complex64; 4]) {
    for (i, a) in buf.iter_mut().enumerate() {
        let k = (((i >> bit_a) & 1) << 1) | ((i >> bit_b) & 1);
        *a *= d[k];
    }
}

/// Flips `bit_target` wherever `bit_control` is set.
pub(crate) fn apply_cnot(buf: &mut [Complex64], bit_control: usize, bit_target: usize) {
    let (c, t) = (1usize << bit_control, 1usize << bit_target);
    for i in 0..buf.len() {
        if i & c != 0 && i & t == 0 {
            buf.swap(i, i | t);
        }
    }
}

pub(crate) fn conj_matrix(m: &Matrix2) -> Matrix2 {
    [
        [m[0][0].conj(), m[0][1].conj()],
        [m[1][0].conj(), m[1][1].conj()],
    ]
}
