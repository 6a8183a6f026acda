//! Two-qubit separability classification.
//!
//! The geometric input α is a proxy: the Hilbert–Schmidt distance of ρ from
//! I/4, mapped affinely from [0, √(3/4)] onto [−1, 1].

use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{QrcError, Result};
use crate::measurement::ObservableSet;
use crate::quantum::{eigvals_hermitian, ComplexMatrix, DensityMatrix};
use crate::reservoir::ReservoirConfig;
use crate::rng::{rng_for, stream};
use num_complex::Complex64 as C64;

/// Partial-transpose eigenvalues below −PPT_MARGIN count as entangled.
pub const PPT_MARGIN: f64 = 1e-12;
/// Evolution time τΩ for this task.
pub const ENTANGLEMENT_TAU_OMEGA: f64 = 16.0;

#[derive(Clone, Debug, PartialEq)]
pub struct EntanglementSample {
    pub rho: DensityMatrix,
    pub alpha: f64,
    pub entangled: bool,
}

impl EntanglementSample {
    pub fn new(rho: DensityMatrix) -> Result<Self> {
        if rho.n_sites() != 2 {
            return Err(QrcError::Dimension(format!("expected a two-qubit state, got {} sites", rho.n_sites())));
        }
        Ok(Self { alpha: alpha_proxy(&rho), entangled: is_entangled(&rho)?, rho })
    }

    pub fn label(&self) -> usize {
        usize::from(self.entangled)
    }
}

pub fn pt_min_eigenvalue(rho: &DensityMatrix) -> Result<f64> {
    Ok(eigvals_hermitian(&rho.partial_transpose(&[1])?)?[0])
}

pub fn is_entangled(rho: &DensityMatrix) -> Result<bool> {
    Ok(pt_min_eigenvalue(rho)? < -PPT_MARGIN)
}

/// 2‖ρ − I/4‖₂ / √(3/4) − 1
pub fn alpha_proxy(rho: &DensityMatrix) -> f64 {
    let d = rho.dim();
    let m = rho.matrix();
    let mut s = 0.0;
    for i in 0..d {
        for j in 0..d {
            let v = m[(i, j)] - if i == j { C64::new(1.0 / d as f64, 0.0) } else { C64::new(0.0, 0.0) };
            s += v.norm_sqr();
        }
    }
    (2.0 * s.sqrt() / 0.75f64.sqrt() - 1.0).clamp(-1.0, 1.0)
}

/// Hilbert–Schmidt random two-qubit states; sample i uses its own stream.
pub fn gen_entanglement_dataset(n: usize, seed: u64) -> Result<Vec<EntanglementSample>> {
    if n == 0 {
        return Err(QrcError::Argument("dataset size must be positive".into()));
    }
    (0..n)
        .into_par_iter()
        .map(|i| EntanglementSample::new(DensityMatrix::random_hilbert_schmidt(2, &mut rng_for(seed, &[stream::DATASET, i as u64]))))
        .collect()
}

/// How α enters the detunings.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetuningConvention {
    /// Δ_i = α·Ω on every atom.
    #[default]
    Direct,
    /// Δ_i = Δ + η·α, the same encoding as the other tasks.
    Encoded,
}

pub fn entanglement_detunings(cfg: &ReservoirConfig, alpha: f64, convention: DetuningConvention) -> Vec<f64> {
    let value = match convention {
        DetuningConvention::Direct => alpha * cfg.omega,
        DetuningConvention::Encoded => cfg.delta() + cfg.eta() * alpha,
    };
    vec![value; cfg.n_atoms()]
}

/// ρ ⊗ |g⟩⟨g|^⊗(N−2).
pub fn prepare_entanglement_initial_state(sample: &EntanglementSample, n_sites: usize) -> Result<DensityMatrix> {
    if n_sites < 3 {
        return Err(QrcError::Argument(format!("need at least 3 atoms, got {n_sites}")));
    }
    sample.rho.tensor(&DensityMatrix::ground(n_sites - 2))
}

/// Readout restricted to atoms 2..N.
pub fn entanglement_observables(n_sites: usize, mixed: bool) -> Result<ObservableSet> {
    if n_sites < 3 {
        return Err(QrcError::Argument(format!("need at least 3 atoms, got {n_sites}")));
    }
    ObservableSet::on_sites(n_sites, &(2..n_sites).collect::<Vec<_>>(), mixed)
}

fn entry_header() -> Vec<String> {
    (0..4).flat_map(|i| (0..4).flat_map(move |j| [format!("re_{i}{j}"), format!("im_{i}{j}")])).collect()
}

/// One row per sample: 16 complex entries as re/im pairs, alpha, label.
pub fn write_entanglement_csv(samples: &[EntanglementSample], mut w: impl Write) -> Result<()> {
    writeln!(w, "{},alpha,label", entry_header().join(","))?;
    for s in samples {
        let m = s.rho.matrix();
        let vals: Vec<String> = (0..4)
            .flat_map(|i| (0..4).flat_map(move |j| [m[(i, j)].re.to_string(), m[(i, j)].im.to_string()]))
            .collect();
        writeln!(w, "{},{},{}", vals.join(","), s.alpha, s.label())?;
    }
    Ok(())
}

/// Reads the export format back; α and the label are recomputed and
/// checked against the stored ones.
pub fn read_entanglement_csv(r: impl BufRead) -> Result<Vec<EntanglementSample>> {
    let mut out = Vec::new();
    for (k, line) in r.lines().enumerate() {
        let line = line?;
        let lineno = k + 1;
        if k == 0 || line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 34 {
            return Err(QrcError::Ingestion { line: lineno, reason: format!("expected 34 fields, got {}", f.len()) });
        }
        let v = f[..33]
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| QrcError::Ingestion { line: lineno, reason: format!("{s:?}: {e}") }))
            .collect::<Result<Vec<_>>>()?;
        let m = ComplexMatrix::from_fn(4, 4, |i, j| C64::new(v[2 * (4 * i + j)], v[2 * (4 * i + j) + 1]));
        let rho = DensityMatrix::new(m).map_err(|e| QrcError::Ingestion { line: lineno, reason: e.to_string() })?;
        let s = EntanglementSample::new(rho)?;
        let label: usize = f[33].parse().map_err(|_| QrcError::Ingestion { line: lineno, reason: format!("bad label {:?}", f[33]) })?;
        if label != s.label() || (s.alpha - v[32]).abs() > 1e-9 {
            return Err(QrcError::Ingestion { line: lineno, reason: "stored alpha or label disagrees with the state".into() });
        }
        out.push(s);
    }
    Ok(out)
}
