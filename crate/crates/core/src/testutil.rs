//! Dense linear-algebra oracles shared by unit tests. Built from explicit
//! Kronecker products, independent of the in-place kernels.

use nalgebra::DMatrix;
use num_complex::Complex64 as C;

use crate::qsim::{DensityMatrix, Gate};

pub type M = DMatrix<C>;

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

pub fn pauli(k: usize) -> M {
    match k {
        0 => M::identity(2, 2),
        1 => M::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]),
        2 => M::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]),
        3 => M::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]),
        _ => unreachable!(),
    }
}

/// Full `2^n` operator with `ops[q]` on qubit q (qubit 0 = most significant).
pub fn embed(n: usize, ops: &[(usize, M)]) -> M {
    let mut out = M::identity(1, 1);
    for q in 0..n {
        let f = ops
            .iter()
            .find(|(k, _)| *k == q)
            .map(|(_, m)| m.clone())
            .unwrap_or_else(|| M::identity(2, 2));
        out = out.kronecker(&f);
    }
    out
}

pub fn dense_unitary(n: usize, g: &Gate) -> M {
    match *g {
        Gate::Rzz(theta, a, b) => {
            let zz = embed(n, &[(a, pauli(3)), (b, pauli(3))]);
            let dim = 1 << n;
            // exp(-iθ/2 ZZ) = cos(θ/2) I − i sin(θ/2) ZZ
            M::identity(dim, dim) * c((theta / 2.0).cos(), 0.0) - zz * c(0.0, (theta / 2.0).sin())
        }
        Gate::Cnot(ctl, tgt) => {
            let p0 = M::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(0., 0.)]);
            let p1 = M::from_row_slice(2, 2, &[c(0., 0.), c(0., 0.), c(0., 0.), c(1., 0.)]);
            embed(n, &[(ctl, p0)]) + embed(n, &[(ctl, p1), (tgt, pauli(1))])
        }
        _ => {
            let m = g.matrix().unwrap();
            let m = M::from_row_slice(2, 2, &[m[0][0], m[0][1], m[1][0], m[1][1]]);
            embed(n, &[(g.qubits().0, m)])
        }
    }
}

pub fn to_dense(rho: &DensityMatrix) -> M {
    M::from_row_slice(rho.dim(), rho.dim(), rho.entries())
}

pub fn dense_state(n: usize, gates: &[Gate]) -> nalgebra::DVector<C> {
    let mut psi = nalgebra::DVector::from_element(1 << n, c(0.0, 0.0));
    psi[0] = c(1.0, 0.0);
    for g in gates {
        psi = dense_unitary(n, g) * psi;
    }
    psi
}
