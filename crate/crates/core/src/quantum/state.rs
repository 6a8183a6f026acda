use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::linalg::eigvals_hermitian;
use super::matrix::{ComplexMatrix, ONE, ZERO};
use crate::error::{QrcError, Result};

pub const STATE_HERMITIAN_TOL: f64 = 1e-9;
pub const STATE_TRACE_TOL: f64 = 1e-9;
pub const STATE_MIN_EIG_TOL: f64 = -1e-8;

/// Density matrix over `n_sites` two-level atoms.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n_sites: usize,
    matrix: ComplexMatrix,
}

/// Physicality residuals of a state.
#[derive(Clone, Copy, Debug)]
pub struct StateDiagnostics {
    pub hermitian_residual: f64,
    pub trace_error: f64,
    pub min_eigenvalue: f64,
}

fn sites_for_dim(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(QrcError::Dimension(format!("dimension {dim} is not a power of two")));
    }
    Ok(dim.trailing_zeros() as usize)
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity before wrapping.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let rho = Self::from_matrix_unchecked(matrix)?;
        let d = rho.diagnostics()?;
        if d.hermitian_residual > STATE_HERMITIAN_TOL {
            return Err(QrcError::Argument(format!("state not Hermitian (residual {:.3e})", d.hermitian_residual)));
        }
        if d.trace_error > STATE_TRACE_TOL {
            return Err(QrcError::Argument(format!("state trace off by {:.3e}", d.trace_error)));
        }
        if d.min_eigenvalue < STATE_MIN_EIG_TOL {
            return Err(QrcError::Argument(format!("state has eigenvalue {:.3e}", d.min_eigenvalue)));
        }
        Ok(rho)
    }

    /// Wraps without physicality checks; only the shape is validated.
    /// Used for integrator output, which is monitored rather than enforced.
    pub fn from_matrix_unchecked(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(QrcError::Dimension("density matrix must be square".into()));
        }
        let n_sites = sites_for_dim(matrix.rows())?;
        Ok(Self { n_sites, matrix })
    }

    /// |ψ⟩⟨ψ| for a (not necessarily normalized) state vector.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(QrcError::Argument("zero state vector".into()));
        }
        let v: Vec<C64> = psi.iter().map(|z| z / norm).collect();
        Self::from_matrix_unchecked(ComplexMatrix::outer(&v, &v))
    }

    /// Computational basis state |index⟩⟨index|.
    pub fn basis(n_sites: usize, index: usize) -> Self {
        let dim = 1usize << n_sites;
        let mut m = ComplexMatrix::zeros(dim, dim);
        m[(index, index)] = ONE;
        Self { n_sites, matrix: m }
    }

    /// |g⟩⟨g|^⊗N, i.e. |0…0⟩.
    pub fn ground(n_sites: usize) -> Self {
        Self::basis(n_sites, 0)
    }

    pub fn maximally_mixed(n_sites: usize) -> Self {
        let dim = 1usize << n_sites;
        Self { n_sites, matrix: ComplexMatrix::identity(dim).scale(C64::new(1.0 / dim as f64, 0.0)) }
    }

    /// Random state from the Hilbert–Schmidt ensemble, `GG† / Tr GG†`.
    pub fn random_hilbert_schmidt(n_sites: usize, rng: &mut impl Rng) -> Self {
        let dim = 1usize << n_sites;
        let g = ComplexMatrix::from_fn(dim, dim, |_, _| {
            C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
        });
        let mut m = &g * &g.adjoint();
        let tr = m.trace().re;
        m = m.scale(C64::new(1.0 / tr, 0.0));
        symmetrize(&mut m);
        Self { n_sites, matrix: m }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn diagnostics(&self) -> Result<StateDiagnostics> {
        let hermitian_residual = self.matrix.hermitian_residual();
        let trace_error = (self.matrix.trace() - ONE).norm();
        let mut sym = self.matrix.clone();
        symmetrize(&mut sym);
        let min_eigenvalue = eigvals_hermitian(&sym)?[0];
        Ok(StateDiagnostics { hermitian_residual, trace_error, min_eigenvalue })
    }

    /// Tr(ρ A).
    pub fn expectation(&self, op: &ComplexMatrix) -> Result<C64> {
        if op.rows() != self.dim() || op.cols() != self.dim() {
            return Err(QrcError::Dimension("operator and state dimensions differ".into()));
        }
        let d = self.dim();
        let (r, a) = (self.matrix.as_slice(), op.as_slice());
        let mut acc = ZERO;
        for i in 0..d {
            for j in 0..d {
                acc += r[i * d + j] * a[j * d + i];
            }
        }
        Ok(acc)
    }

    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        let m = self.matrix.kron(&other.matrix)?;
        DensityMatrix::from_matrix_unchecked(m)
    }

    /// Partial transpose on the sites in `sites`.
    pub fn partial_transpose(&self, sites: &[usize]) -> Result<ComplexMatrix> {
        let mut mask = 0usize;
        for &s in sites {
            if s >= self.n_sites {
                return Err(QrcError::Argument(format!("site {s} out of range")));
            }
            mask |= 1 << (self.n_sites - 1 - s);
        }
        let d = self.dim();
        Ok(ComplexMatrix::from_fn(d, d, |a, b| {
            // swap the masked bits between row and column index
            let a2 = (a & !mask) | (b & mask);
            let b2 = (b & !mask) | (a & mask);
            self.matrix[(a2, b2)]
        }))
    }
}

/// ρ ← (ρ + ρ†)/2 in place.
pub fn symmetrize(m: &mut ComplexMatrix) {
    let n = m.rows();
    for i in 0..n {
        m[(i, i)].im = 0.0;
        for j in i + 1..n {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
}

fn scatter(value: usize, positions: &[usize]) -> usize {
    // positions: bit positions (LSB numbering), most significant first
    let k = positions.len();
    positions.iter().enumerate().fold(0, |acc, (idx, &pos)| acc | (((value >> (k - 1 - idx)) & 1) << pos))
}

/// Reduced state on the sites in `keep` (any order; output follows ascending site order).
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    if keep.is_empty() {
        return Err(QrcError::Argument("partial trace needs a non-empty keep set".into()));
    }
    let n = rho.n_sites();
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if let Some(&bad) = kept.iter().find(|&&s| s >= n) {
        return Err(QrcError::Argument(format!("site {bad} out of range for {n} sites")));
    }
    let traced: Vec<usize> = (0..n).filter(|s| !kept.contains(s)).collect();
    let kept_bits: Vec<usize> = kept.iter().map(|&s| n - 1 - s).collect();
    let traced_bits: Vec<usize> = traced.iter().map(|&s| n - 1 - s).collect();
    let dk = 1usize << kept.len();
    let dt = 1usize << traced.len();
    let kept_idx: Vec<usize> = (0..dk).map(|v| scatter(v, &kept_bits)).collect();
    let traced_idx: Vec<usize> = (0..dt).map(|v| scatter(v, &traced_bits)).collect();
    let m = rho.matrix();
    let out = ComplexMatrix::from_fn(dk, dk, |a, b| {
        traced_idx.iter().map(|&t| m[(kept_idx[a] | t, kept_idx[b] | t)]).sum()
    });
    DensityMatrix::from_matrix_unchecked(out)
}

/// D(ρ, σ) = ½ Σ |λ_k(ρ − σ)|.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(QrcError::Dimension(format!("states of dimension {} and {}", rho.dim(), sigma.dim())));
    }
    let mut diff = rho.matrix() - sigma.matrix();
    symmetrize(&mut diff);
    let ev = eigvals_hermitian(&diff)?;
    Ok((0.5 * ev.iter().map(|l| l.abs()).sum::<f64>()).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bell_phi_plus() -> DensityMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        DensityMatrix::pure(&[C64::new(s, 0.0), ZERO, ZERO, C64::new(s, 0.0)]).unwrap()
    }

    #[test]
    fn validation_rejects_unphysical() {
        assert!(DensityMatrix::new(ComplexMatrix::identity(2)).is_err());
        let mut m = ComplexMatrix::identity(2).scale(C64::new(0.5, 0.0));
        m[(0, 1)] = C64::new(0.1, 0.0);
        assert!(DensityMatrix::new(m).is_err());
        assert!(DensityMatrix::new(ComplexMatrix::identity(3).scale(C64::new(1.0 / 3.0, 0.0))).is_err());
        assert!(DensityMatrix::new(DensityMatrix::maximally_mixed(3).into_matrix()).is_ok());
    }

    #[test]
    fn product_state_factorizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = DensityMatrix::random_hilbert_schmidt(1, &mut rng);
        let b = DensityMatrix::random_hilbert_schmidt(2, &mut rng);
        let ab = a.tensor(&b).unwrap();
        assert!(partial_trace(&ab, &[0]).unwrap().matrix().max_abs_diff(a.matrix()) < 1e-14);
        assert!(partial_trace(&ab, &[1, 2]).unwrap().matrix().max_abs_diff(b.matrix()) < 1e-14);
    }

    #[test]
    fn bell_marginal_is_maximally_mixed() {
        let r = partial_trace(&bell_phi_plus(), &[0]).unwrap();
        assert!(r.matrix().max_abs_diff(DensityMatrix::maximally_mixed(1).matrix()) < 1e-15);
    }

    #[test]
    fn two_qubit_trace_matches_index_contraction() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rho = DensityMatrix::random_hilbert_schmidt(2, &mut rng);
        let m = rho.matrix();
        // ρ_A[a,b] = Σ_t ρ[(a,t),(b,t)] with index (a,t) = 2a + t
        for keep_first in [true, false] {
            let oracle = ComplexMatrix::from_fn(2, 2, |a, b| {
                (0..2)
                    .map(|t| if keep_first { m[(2 * a + t, 2 * b + t)] } else { m[(2 * t + a, 2 * t + b)] })
                    .sum()
            });
            let keep = if keep_first { [0] } else { [1] };
            assert!(partial_trace(&rho, &keep).unwrap().matrix().max_abs_diff(&oracle) < 1e-15);
        }
    }

    #[test]
    fn empty_keep_rejected() {
        assert!(matches!(partial_trace(&DensityMatrix::ground(2), &[]), Err(QrcError::Argument(_))));
    }

    #[test]
    fn trace_distance_references() {
        let g = DensityMatrix::basis(1, 0);
        let e = DensityMatrix::basis(1, 1);
        assert!(trace_distance(&g, &g).unwrap().abs() < 1e-15);
        assert!((trace_distance(&g, &e).unwrap() - 1.0).abs() < 1e-12);
        assert!((trace_distance(&g, &DensityMatrix::maximally_mixed(1)).unwrap() - 0.5).abs() < 1e-12);
        assert!(trace_distance(&g, &DensityMatrix::ground(2)).is_err());
    }

    #[test]
    fn bell_partial_transpose_negative() {
        let pt = bell_phi_plus().partial_transpose(&[1]).unwrap();
        let ev = eigvals_hermitian(&pt).unwrap();
        assert!((ev[0] + 0.5).abs() < 1e-12);
    }

    #[test]
    fn hilbert_schmidt_states_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..4 {
            DensityMatrix::new(DensityMatrix::random_hilbert_schmidt(n, &mut rng).into_matrix()).unwrap();
        }
    }
}
