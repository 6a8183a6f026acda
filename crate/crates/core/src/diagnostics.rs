//! Dynamical-phase and scrambling diagnostics: level-spacing statistics,
//! the infinite-temperature OTOC and the MS convergence probe.

use std::io::Write;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{QrcError, Result};
use crate::quantum::linalg::{eig_real_symmetric, eigvals_real_symmetric};
use crate::quantum::local::site_mask;
use crate::quantum::{trace_distance, DensityMatrix};
use crate::reservoir::{build_hamiltonian, Hamiltonian, ReservoirConfig, Reservoir};
use crate::rng::{derive_seed, stream};

/// Gaps below this are treated as exact degeneracies.
pub const DEGENERATE_GAP: f64 = 1e-12;

/// Mean of r_l = min(δ_l, δ_{l+1}) / max(δ_l, δ_{l+1}) over the sorted
/// spectrum. Two consecutive degenerate gaps give r = 1.
pub fn spacing_ratio(levels: &[f64]) -> Result<f64> {
    if levels.len() < 3 {
        return Err(QrcError::Argument(format!("need at least 3 levels, got {}", levels.len())));
    }
    if levels.iter().any(|e| !e.is_finite()) {
        return Err(QrcError::Numeric("non-finite level".into()));
    }
    let mut e = levels.to_vec();
    e.sort_by(f64::total_cmp);
    let gaps: Vec<f64> = e.windows(2).map(|w| w[1] - w[0]).collect();
    let sum: f64 = gaps
        .windows(2)
        .map(|g| {
            let (lo, hi) = if g[0] < g[1] { (g[0], g[1]) } else { (g[1], g[0]) };
            if hi < DEGENERATE_GAP {
                1.0
            } else {
                lo / hi
            }
        })
        .sum();
    Ok(sum / (gaps.len() - 1) as f64)
}

/// ⟨r⟩ of the full spectrum of `h`.
pub fn level_spacing_ratio(h: &Hamiltonian) -> Result<f64> {
    spacing_ratio(&eigvals_real_symmetric(&h.real_matrix()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub delta_over_omega: f64,
    pub a_over_rb: f64,
    pub mean_r: f64,
    pub std_err: f64,
    pub n_realizations: usize,
}

/// Disorder seed of realization `r`.
pub fn realization_seed(seed: u64, r: usize) -> u64 {
    derive_seed(seed, &[stream::DISORDER, r as u64])
}

/// ⟨r⟩ for one parameter point averaged over disorder realizations, with
/// η = 0 (uniform detuning Δ on every atom).
pub fn phase_point(cfg: &ReservoirConfig, delta_over_omega: f64, a_over_rb: f64, n_realizations: usize, seed: u64) -> Result<PhasePoint> {
    if n_realizations == 0 {
        return Err(QrcError::Argument("need at least one realization".into()));
    }
    let base = ReservoirConfig { delta_over_omega, a_over_rb, eta_over_omega: 0.0, ..cfg.clone() };
    base.validate()?;
    let rs = (0..n_realizations)
        .into_par_iter()
        .map(|r| {
            let c = base.with_disorder_seed(realization_seed(seed, r))?;
            level_spacing_ratio(&build_hamiltonian(&c, &vec![c.delta(); c.n_atoms()])?)
        })
        .collect::<Result<Vec<_>>>()?;
    let (mean, std_err) = mean_and_stderr(&rs);
    Ok(PhasePoint { delta_over_omega, a_over_rb, mean_r: mean, std_err, n_realizations })
}

/// ⟨r⟩ over the grid Δ/Ω × a/R_b, row-major in Δ/Ω.
pub fn phase_diagram(cfg: &ReservoirConfig, deltas: &[f64], a_over_rbs: &[f64], n_realizations: usize, seed: u64) -> Result<Vec<PhasePoint>> {
    deltas
        .iter()
        .flat_map(|&d| a_over_rbs.iter().map(move |&a| (d, a)))
        .map(|(d, a)| phase_point(cfg, d, a, n_realizations, seed))
        .collect()
}

pub fn write_phase_csv(points: &[PhasePoint], mut w: impl Write) -> Result<()> {
    writeln!(w, "delta_over_omega,a_over_rb,mean_r,std_err,n_realizations")?;
    for p in points {
        writeln!(w, "{},{},{},{},{}", p.delta_over_omega, p.a_over_rb, p.mean_r, p.std_err, p.n_realizations)?;
    }
    Ok(())
}

fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// F(τ) = 1/(N−1) Σ_{i≥1} 2^{−N} Tr[Z_0(τ) Z_i Z_0(τ) Z_i] for the closed
/// dynamics of `h`, with Z_0(τ) = e^{iHτ} Z_0 e^{−iHτ}.
pub fn otoc_for_hamiltonian(h: &Hamiltonian, taus: &[f64]) -> Result<Vec<f64>> {
    let n = h.n_sites();
    if n < 2 {
        return Err(QrcError::Argument("the OTOC needs at least 2 atoms".into()));
    }
    let d = h.dim();
    let (e, u) = eig_real_symmetric(&h.real_matrix());
    let z = |site: usize, b: usize| if b & site_mask(n, site) == 0 { 1.0 } else { -1.0 };
    // Z_0 in the eigenbasis
    let z0 = DMatrix::from_fn(d, d, |a, b| if a == b { z(0, a) } else { 0.0 });
    let a = u.transpose() * z0 * &u;
    taus.iter()
        .map(|&tau| {
            let c = DMatrix::from_fn(d, d, |k, l| a[(k, l)] * ((e[k] - e[l]) * tau).cos());
            let s = DMatrix::from_fn(d, d, |k, l| a[(k, l)] * ((e[k] - e[l]) * tau).sin());
            let wr = &u * c * u.transpose();
            let wi = &u * s * u.transpose();
            let (mut re, mut im) = (0.0, 0.0);
            for i in 1..n {
                for col in 0..d {
                    for row in 0..d {
                        let zz = z(i, row) * z(i, col);
                        re += zz * (wr[(row, col)] * wr[(col, row)] - wi[(row, col)] * wi[(col, row)]);
                        im += zz * (wr[(row, col)] * wi[(col, row)] + wi[(row, col)] * wr[(col, row)]);
                    }
                }
            }
            let norm = ((n - 1) * d) as f64;
            let (f, fi) = (re / norm, im / norm);
            if fi.abs() > 1e-9 || !(f.abs() <= 1.0 + 1e-9) {
                return Err(QrcError::Numeric(format!("OTOC {f} + {fi}i at tau = {tau}")));
            }
            Ok(f.clamp(-1.0, 1.0))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OtocPoint {
    pub tau_omega: f64,
    pub mean: f64,
    pub stddev: f64,
}

/// Disorder-averaged OTOC with η = 0 at the configured Δ and a/R_b.
pub fn otoc(cfg: &ReservoirConfig, tau_omegas: &[f64], n_realizations: usize, seed: u64) -> Result<Vec<OtocPoint>> {
    if n_realizations == 0 {
        return Err(QrcError::Argument("need at least one realization".into()));
    }
    let taus: Vec<f64> = tau_omegas.iter().map(|t| t / cfg.omega).collect();
    let curves = (0..n_realizations)
        .into_par_iter()
        .map(|r| {
            let c = cfg.with_disorder_seed(realization_seed(seed, r))?;
            otoc_for_hamiltonian(&build_hamiltonian(&c, &vec![c.delta(); c.n_atoms()])?, &taus)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(tau_omegas
        .iter()
        .enumerate()
        .map(|(k, &tau_omega)| {
            let xs: Vec<f64> = curves.iter().map(|c| c[k]).collect();
            let n = xs.len() as f64;
            let mean = xs.iter().sum::<f64>() / n;
            let stddev = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
            OtocPoint { tau_omega, mean, stddev }
        })
        .collect())
}

pub fn write_otoc_csv(points: &[OtocPoint], mut w: impl Write) -> Result<()> {
    writeln!(w, "tau_omega,F,stddev")?;
    for p in points {
        writeln!(w, "{},{},{}", p.tau_omega, p.mean, p.stddev)?;
    }
    Ok(())
}

/// Trace distance D^(m) between two trajectories driven by the same inputs,
/// recorded after every step.
pub fn convergence_probe(res: &Reservoir, inputs: &[Vec<f64>], rho0: &DensityMatrix, rho0_prime: &DensityMatrix) -> Result<Vec<f64>> {
    if rho0.dim() != rho0_prime.dim() || rho0.n_sites() != res.n_sites() {
        return Err(QrcError::Dimension("initial states do not match the reservoir".into()));
    }
    let (mut a, mut b) = (rho0.clone(), rho0_prime.clone());
    let mut out = Vec::with_capacity(inputs.len());
    for x in inputs {
        let (na, nb) = rayon::join(|| res.apply_input(&a, x), || res.apply_input(&b, x));
        a = na?;
        b = nb?;
        out.push(trace_distance(&a, &b)?);
    }
    Ok(out)
}

pub fn write_convergence_csv(distances: &[f64], mut w: impl Write) -> Result<()> {
    writeln!(w, "step,trace_distance")?;
    for (m, d) in distances.iter().enumerate() {
        writeln!(w, "{},{d}", m + 1)?;
    }
    Ok(())
}
