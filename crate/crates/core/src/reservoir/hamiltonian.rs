use num_complex::Complex64 as C64;

use super::config::ReservoirConfig;
use super::lattice::Lattice;
use crate::error::{QrcError, Result};
use crate::quantum::local::site_mask;
use crate::quantum::ComplexMatrix;

/// Pair coupling `V/R_ij^6` with the blockade-radius convention
/// `R_b = (V/Ω)^{1/6}`: a pair at distance `d·a` interacts with
/// `Ω / (d · a/R_b)^6`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Coupling {
    pub i: usize,
    pub j: usize,
    pub strength: f64,
}

pub fn pair_couplings(lattice: &Lattice, omega: f64, a_over_rb: f64) -> Result<Vec<Coupling>> {
    let n = lattice.n_atoms();
    let mut out = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let d = lattice.distance(i, j);
            if d <= 1e-12 {
                return Err(QrcError::Geometry(format!("atoms {i} and {j} coincide")));
            }
            out.push(Coupling { i, j, strength: omega / (d * a_over_rb).powi(6) });
        }
    }
    Ok(out)
}

/// Diagonal of `Σ_{i<j} V_ij n_i n_j` in the computational basis.
pub fn interaction_diagonal(n_sites: usize, couplings: &[Coupling]) -> Vec<f64> {
    (0..1usize << n_sites)
        .map(|b| {
            couplings
                .iter()
                .filter(|c| b & site_mask(n_sites, c.i) != 0 && b & site_mask(n_sites, c.j) != 0)
                .map(|c| c.strength)
                .sum()
        })
        .collect()
}

/// H = Σ Δ_i n_i + (Ω/2) Σ σ^x_i + Σ_{i<j} V_ij n_i n_j, stored as its
/// (real) diagonal plus the uniform transverse drive.
#[derive(Clone, Debug, PartialEq)]
pub struct Hamiltonian {
    n_sites: usize,
    detunings: Vec<f64>,
    rabi: f64,
    diagonal: Vec<f64>,
}

impl Hamiltonian {
    /// `interaction` is the precomputed interaction diagonal (see
    /// [`interaction_diagonal`]).
    pub fn from_parts(n_sites: usize, detunings: &[f64], rabi: f64, interaction: &[f64]) -> Result<Self> {
        if detunings.len() != n_sites {
            return Err(QrcError::Dimension(format!("{} detunings for {n_sites} sites", detunings.len())));
        }
        let dim = 1usize << n_sites;
        if interaction.len() != dim {
            return Err(QrcError::Dimension("interaction diagonal has the wrong length".into()));
        }
        let diagonal = (0..dim)
            .map(|b| {
                interaction[b]
                    + detunings
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| b & site_mask(n_sites, *i) != 0)
                        .map(|(_, d)| d)
                        .sum::<f64>()
            })
            .collect();
        Ok(Self { n_sites, detunings: detunings.to_vec(), rabi, diagonal })
    }

    pub fn new(n_sites: usize, detunings: &[f64], rabi: f64, couplings: &[Coupling]) -> Result<Self> {
        Self::from_parts(n_sites, detunings, rabi, &interaction_diagonal(n_sites, couplings))
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    pub fn detunings(&self) -> &[f64] {
        &self.detunings
    }

    pub fn rabi(&self) -> f64 {
        self.rabi
    }

    /// Basis-state energies of the diagonal part.
    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    pub fn matrix(&self) -> ComplexMatrix {
        let dim = self.dim();
        let mut m = ComplexMatrix::zeros(dim, dim);
        for (b, &e) in self.diagonal.iter().enumerate() {
            m[(b, b)] = C64::new(e, 0.0);
        }
        let half = C64::new(self.rabi / 2.0, 0.0);
        for site in 0..self.n_sites {
            let mask = site_mask(self.n_sites, site);
            for b in 0..dim {
                m[(b ^ mask, b)] += half;
            }
        }
        m
    }

    /// Real symmetric copy for eigenvalue work (H is real in this basis).
    pub fn real_matrix(&self) -> nalgebra::DMatrix<f64> {
        let dim = self.dim();
        let mut m = nalgebra::DMatrix::zeros(dim, dim);
        for (b, &e) in self.diagonal.iter().enumerate() {
            m[(b, b)] = e;
        }
        for site in 0..self.n_sites {
            let mask = site_mask(self.n_sites, site);
            for b in 0..dim {
                m[(b ^ mask, b)] += self.rabi / 2.0;
            }
        }
        m
    }
}

pub fn build_hamiltonian(cfg: &ReservoirConfig, detunings: &[f64]) -> Result<Hamiltonian> {
    let couplings = pair_couplings(&cfg.lattice, cfg.omega, cfg.a_over_rb)?;
    Hamiltonian::new(cfg.n_atoms(), detunings, cfg.omega, &couplings)
}
