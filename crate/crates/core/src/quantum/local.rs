//! In-place application of single-site 2x2 operators to dense `2^N x 2^N`
//! matrices, O(4^N) per call instead of a full matrix product.

use num_complex::Complex64 as C64;

pub type Op2 = [[C64; 2]; 2];

/// Bit mask of `site` in a basis index; site 0 is the most significant bit.
#[inline]
pub fn site_mask(n_sites: usize, site: usize) -> usize {
    1 << (n_sites - 1 - site)
}

/// `m ← (op on site) · m`, where `m` is `dim x dim` row-major.
pub fn apply_left(m: &mut [C64], dim: usize, mask: usize, op: &Op2) {
    for a0 in (0..dim).filter(|a| a & mask == 0) {
        let a1 = a0 | mask;
        for c in 0..dim {
            let x0 = m[a0 * dim + c];
            let x1 = m[a1 * dim + c];
            m[a0 * dim + c] = op[0][0] * x0 + op[0][1] * x1;
            m[a1 * dim + c] = op[1][0] * x0 + op[1][1] * x1;
        }
    }
}

/// `m ← m · (op on site)`.
pub fn apply_right(m: &mut [C64], dim: usize, mask: usize, op: &Op2) {
    for r in 0..dim {
        let row = &mut m[r * dim..(r + 1) * dim];
        for b0 in (0..dim).filter(|b| b & mask == 0) {
            let b1 = b0 | mask;
            let x0 = row[b0];
            let x1 = row[b1];
            row[b0] = x0 * op[0][0] + x1 * op[1][0];
            row[b1] = x0 * op[0][1] + x1 * op[1][1];
        }
    }
}

pub fn adjoint2(op: &Op2) -> Op2 {
    [[op[0][0].conj(), op[1][0].conj()], [op[0][1].conj(), op[1][1].conj()]]
}

pub fn mul2(a: &Op2, b: &Op2) -> Op2 {
    let mut out = [[C64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::matrix::{kron, ComplexMatrix};

    fn op_matrix(op: &Op2) -> ComplexMatrix {
        ComplexMatrix::from_fn(2, 2, |i, j| op[i][j])
    }

    #[test]
    fn local_application_matches_dense_kron() {
        let op: Op2 = [[C64::new(0.3, 0.1), C64::new(-0.2, 0.5)], [C64::new(1.1, 0.0), C64::new(0.0, -0.7)]];
        let n = 3;
        let dim = 8;
        let m = ComplexMatrix::from_fn(dim, dim, |i, j| C64::new((i * 3 + j) as f64 * 0.1, (i as f64 - j as f64) * 0.05));
        for site in 0..n {
            let mut full = ComplexMatrix::identity(1);
            for s in 0..n {
                let f = if s == site { op_matrix(&op) } else { ComplexMatrix::identity(2) };
                full = kron(&full, &f).unwrap();
            }
            let mut left = m.clone();
            apply_left(left.as_mut_slice(), dim, site_mask(n, site), &op);
            assert!(left.max_abs_diff(&(&full * &m)) < 1e-13);
            let mut right = m.clone();
            apply_right(right.as_mut_slice(), dim, site_mask(n, site), &op);
            assert!(right.max_abs_diff(&(&m * &full)) < 1e-13);
        }
    }
}
