use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{QrcError, Result};
use crate::rng::rng_for;

pub const DEFAULT_DISORDER_SIGMA: f64 = 0.04;

/// Atom positions on a jittered triangular lattice, in units of the
/// lattice constant `a`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LatticeSpec", into = "LatticeSpec")]
pub struct Lattice {
    rows: Vec<usize>,
    disorder_sigma: f64,
    rng_seed: u64,
    positions: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LatticeSpec {
    #[serde(default)]
    n_atoms: Option<usize>,
    rows: Vec<usize>,
    #[serde(default = "default_sigma")]
    disorder_sigma: f64,
    #[serde(default)]
    rng_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    positions: Option<Vec<[f64; 2]>>,
}

fn default_sigma() -> f64 {
    DEFAULT_DISORDER_SIGMA
}

impl TryFrom<LatticeSpec> for Lattice {
    type Error = QrcError;

    fn try_from(spec: LatticeSpec) -> Result<Self> {
        let mut lattice = build_lattice(&spec.rows, 1.0, spec.disorder_sigma, spec.rng_seed)?;
        if let Some(n) = spec.n_atoms {
            if n != lattice.n_atoms() {
                return Err(QrcError::Config(format!(
                    "lattice n_atoms = {n} but rows {:?} hold {}",
                    spec.rows,
                    lattice.n_atoms()
                )));
            }
        }
        if let Some(positions) = spec.positions {
            if positions.len() != lattice.n_atoms() {
                return Err(QrcError::Config("explicit positions do not match the atom count".into()));
            }
            lattice.positions = positions;
        }
        Ok(lattice)
    }
}

impl From<Lattice> for LatticeSpec {
    fn from(l: Lattice) -> Self {
        LatticeSpec {
            n_atoms: Some(l.n_atoms()),
            rows: l.rows,
            disorder_sigma: l.disorder_sigma,
            rng_seed: l.rng_seed,
            positions: None,
        }
    }
}

impl Lattice {
    pub fn n_atoms(&self) -> usize {
        self.positions.len()
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn positions(&self) -> &[[f64; 2]] {
        &self.positions
    }

    pub fn disorder_sigma(&self) -> f64 {
        self.disorder_sigma
    }

    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let (p, q) = (self.positions[i], self.positions[j]);
        ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
    }

    /// Same ideal lattice, new disorder realization.
    pub fn with_seed(&self, rng_seed: u64) -> Result<Self> {
        build_lattice(&self.rows, 1.0, self.disorder_sigma, rng_seed)
    }

    /// Uniformly rescaled positions (for scaling checks).
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for p in &mut out.positions {
            p[0] *= factor;
            p[1] *= factor;
        }
        out
    }

    /// Default compact triangular patches: 10 → (4,3,3), 8 → (3,3,2), 6 → (3,3).
    pub fn default_rows(n_atoms: usize) -> Vec<usize> {
        match n_atoms {
            10 => vec![4, 3, 3],
            8 => vec![3, 3, 2],
            6 => vec![3, 3],
            n => {
                let width = (n as f64).sqrt().ceil().max(1.0) as usize;
                let mut rows = vec![width; n / width];
                if n % width != 0 {
                    rows.push(n % width);
                }
                rows
            }
        }
    }
}

/// Triangular lattice with row `r` shifted by `spacing/2 · (r mod 2)` and
/// vertical pitch `spacing·√3/2`, plus per-site Gaussian jitter of standard
/// deviation `sigma·spacing` on both coordinates.
pub fn build_lattice(rows: &[usize], spacing: f64, sigma: f64, seed: u64) -> Result<Lattice> {
    if !(spacing > 0.0) || !spacing.is_finite() {
        return Err(QrcError::Argument(format!("lattice spacing must be positive, got {spacing}")));
    }
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(QrcError::Argument(format!("disorder sigma must be non-negative, got {sigma}")));
    }
    let n: usize = rows.iter().sum();
    if n == 0 {
        return Err(QrcError::Argument("lattice needs at least one atom".into()));
    }
    let mut rng = rng_for(seed, &[crate::rng::stream::DISORDER]);
    let jitter = Normal::new(0.0, sigma * spacing).expect("validated sigma");
    let pitch = spacing * 3f64.sqrt() / 2.0;
    let mut positions = Vec::with_capacity(n);
    for (r, &len) in rows.iter().enumerate() {
        let offset = spacing / 2.0 * (r % 2) as f64;
        for c in 0..len {
            let mut p = [offset + spacing * c as f64, pitch * r as f64];
            if sigma > 0.0 {
                p[0] += jitter.sample(&mut rng);
                p[1] += jitter.sample(&mut rng);
            }
            positions.push(p);
        }
    }
    Ok(Lattice { rows: rows.to_vec(), disorder_sigma: sigma, rng_seed: seed, positions })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_row_without_jitter() {
        let l = build_lattice(&[2], 1.5, 0.0, 0).unwrap();
        assert_eq!(l.positions(), &[[0.0, 0.0], [1.5, 0.0]]);
    }

    #[test]
    fn second_row_is_offset() {
        let a = 2.0;
        let l = build_lattice(&[2, 1], a, 0.0, 0).unwrap();
        let p = l.positions()[2];
        assert!((p[0] - a / 2.0).abs() < 1e-15);
        assert!((p[1] - a * 3f64.sqrt() / 2.0).abs() < 1e-15);
        // equilateral triangle
        assert!((l.distance(0, 2) - a).abs() < 1e-12);
        assert!((l.distance(1, 2) - a).abs() < 1e-12);
    }

    #[test]
    fn seeded_jitter_is_deterministic() {
        let a = build_lattice(&[3, 3], 1.0, 0.04, 9).unwrap();
        let b = build_lattice(&[3, 3], 1.0, 0.04, 9).unwrap();
        let c = build_lattice(&[3, 3], 1.0, 0.04, 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn bad_spacing() {
        assert!(matches!(build_lattice(&[2], 0.0, 0.0, 0), Err(QrcError::Argument(_))));
        assert!(matches!(build_lattice(&[2], -1.0, 0.0, 0), Err(QrcError::Argument(_))));
    }

    #[test]
    fn jitter_statistics() {
        // pooled displacement over many realizations has std ≈ sigma
        let sigma = 0.04;
        let mut dx = Vec::new();
        for seed in 0..400 {
            let l = build_lattice(&[3, 3], 1.0, sigma, seed).unwrap();
            let ideal = build_lattice(&[3, 3], 1.0, 0.0, seed).unwrap();
            for (p, q) in l.positions().iter().zip(ideal.positions()) {
                dx.push(p[0] - q[0]);
                dx.push(p[1] - q[1]);
            }
        }
        let n = dx.len() as f64;
        let mean = dx.iter().sum::<f64>() / n;
        let std = (dx.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
        assert!((std - sigma).abs() < 0.05 * sigma, "std {std}");
    }

    #[test]
    fn default_rows_sum() {
        for n in 1..=10 {
            assert_eq!(Lattice::default_rows(n).iter().sum::<usize>(), n);
        }
        assert_eq!(Lattice::default_rows(10), vec![4, 3, 3]);
    }
}
