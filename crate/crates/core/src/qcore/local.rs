//! Dense local-operator kernels shared by the statevector and density-matrix
//! paths.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Bit mask of `qubit` inside an `n_qubits` basis index (qubit 0 is the MSB).
#[inline]
pub(crate) fn qubit_mask(n_qubits: usize, qubit: usize) -> usize {
    1 << (n_qubits - 1 - qubit)
}

pub(crate) fn check_targets(n_qubits: usize, targets: &[usize]) -> Result<()> {
    for (i, &t) in targets.iter().enumerate() {
        if t >= n_qubits {
            return Err(Error::QubitOutOfRange {
                index: t,
                n_qubits,
            });
        }
        if targets[..i].contains(&t) {
            return Err(Error::DuplicateTargets(targets.to_vec()));
        }
    }
    Ok(())
}

/// Applies a `2^k x 2^k` row-major operator acting on `targets` to an amplitude
/// slice of an `n_qubits` register. `targets[0]` is the most significant bit of
/// the operator's local index. Targets must already be validated.
pub(crate) fn apply_local(amps: &mut [Complex64], n_qubits: usize, targets: &[usize], op: &[Complex64]) {
    let k = targets.len();
    let dim = 1usize << k;
    debug_assert_eq!(op.len(), dim * dim);
    debug_assert!(k <= 3);

    let mut offsets = [0usize; 8];
    let mut all = 0usize;
    for (j, &t) in targets.iter().enumerate() {
        let m = qubit_mask(n_qubits, t);
        all |= m;
        for (l, off) in offsets.iter_mut().enumerate().take(dim) {
            if l & (1 << (k - 1 - j)) != 0 {
                *off |= m;
            }
        }
    }

    let mut buf = [Complex64::new(0.0, 0.0); 8];
    for base in 0..amps.len() {
        if base & all != 0 {
            continue;
        }
        for l in 0..dim {
            buf[l] = amps[base | offsets[l]];
        }
        for r in 0..dim {
            let row = &op[r * dim..(r + 1) * dim];
            let mut acc = Complex64::new(0.0, 0.0);
            for c in 0..dim {
                acc += row[c] * buf[c];
            }
            amps[base | offsets[r]] = acc;
        }
    }
}

/// `m <- op * m` where `op` acts locally on `targets`.
pub(crate) fn left_apply(m: &mut DMatrix<Complex64>, n_qubits: usize, targets: &[usize], op: &[Complex64]) {
    let d = m.nrows();
    for col in m.as_mut_slice().chunks_mut(d) {
        apply_local(col, n_qubits, targets, op);
    }
}

/// `m <- op * m * op^dagger`.
pub(crate) fn conjugate(m: &mut DMatrix<Complex64>, n_qubits: usize, targets: &[usize], op: &[Complex64]) {
    left_apply(m, n_qubits, targets, op);
    m.adjoint_mut();
    left_apply(m, n_qubits, targets, op);
    m.adjoint_mut();
}

pub(crate) fn to_row_major(m: &DMatrix<Complex64>) -> Vec<Complex64> {
    let (r, c) = m.shape();
    let mut out = Vec::with_capacity(r * c);
    for i in 0..r {
        for j in 0..c {
            out.push(m[(i, j)]);
        }
    }
    out
}
