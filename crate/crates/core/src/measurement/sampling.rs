use std::collections::BTreeMap;
use std::io::Write;

use num_complex::Complex64 as C64;
use rand::Rng;

use crate::error::{QrcError, Result};
use crate::quantum::local::site_mask;
use crate::quantum::pauli::Pauli;
use crate::quantum::DensityMatrix;

pub const PROBABILITY_SUM_TOL: f64 = 1e-6;

/// One projective shot: the measured basis (one letter per site) and the
/// outcome, with bit `site_mask(n, i)` set when site i read −1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShotRecord {
    pub basis: Vec<Pauli>,
    pub outcome: usize,
}

impl ShotRecord {
    /// Outcome as a 0/1 string, site 0 first.
    pub fn bitstring(&self) -> String {
        let n = self.basis.len();
        (0..n).map(|i| if self.outcome & site_mask(n, i) != 0 { '1' } else { '0' }).collect()
    }

    pub fn basis_string(&self) -> String {
        self.basis.iter().map(|p| p.letter()).collect()
    }
}

// w[b][a][a'] = u[b][a]·conj(u[b][a']) for the basis change u taking the
// letter's +1/−1 eigenstates to |0⟩/|1⟩ (u = H for X, H·S† for Y).
fn rotation_weights(letter: Pauli) -> [[[C64; 2]; 2]; 2] {
    let z = C64::new(0.0, 0.0);
    let h = C64::new(0.5, 0.0);
    match letter {
        Pauli::Z | Pauli::I => {
            let one = C64::new(1.0, 0.0);
            [[[one, z], [z, z]], [[z, z], [z, one]]]
        }
        Pauli::X => [[[h, h], [h, h]], [[h, -h], [-h, h]]],
        Pauli::Y => {
            let i = C64::new(0.0, 0.5);
            [[[h, i], [-i, h]], [[h, -i], [i, h]]]
        }
    }
}

// Contracts the leading remaining site of `t` (layout [prefix][r][r'] with
// r, r' over `m` sites) into an outcome bit appended to the prefix.
fn contract_site(t: &[C64], m: usize, letter: Pauli) -> Vec<C64> {
    let half = 1usize << (m - 1);
    let full = half << 1;
    let blk = full * full;
    let n_prefix = t.len() / blk;
    let w = rotation_weights(letter);
    let mut out = vec![C64::new(0.0, 0.0); n_prefix * 2 * half * half];
    for p in 0..n_prefix {
        let src = &t[p * blk..(p + 1) * blk];
        for (b, wb) in w.iter().enumerate() {
            let dst = &mut out[(p * 2 + b) * half * half..(p * 2 + b + 1) * half * half];
            for (a, wa) in wb.iter().enumerate() {
                for (a2, &c) in wa.iter().enumerate() {
                    if c == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for s in 0..half {
                        let row = &src[(a * half + s) * full + a2 * half..(a * half + s) * full + a2 * half + half];
                        for (d, &v) in dst[s * half..(s + 1) * half].iter_mut().zip(row) {
                            *d += c * v;
                        }
                    }
                }
            }
        }
    }
    out
}

fn descend(t: &[C64], level: usize, n: usize, rows: &[(usize, &[Pauli])], out: &mut [Vec<f64>]) {
    if level == n {
        let probs: Vec<f64> = t.iter().map(|c| c.re).collect();
        for &(k, _) in rows {
            out[k] = probs.clone();
        }
        return;
    }
    for letter in [Pauli::X, Pauli::Y, Pauli::Z] {
        let group: Vec<(usize, &[Pauli])> = rows.iter().copied().filter(|(_, r)| r[level] == letter).collect();
        if !group.is_empty() {
            let next = contract_site(t, n - level, letter);
            descend(&next, level + 1, n, &group, out);
        }
    }
}

fn check_basis(basis: &[Pauli], n: usize) -> Result<()> {
    if basis.len() != n {
        return Err(QrcError::Dimension(format!("basis of length {} for {n} sites", basis.len())));
    }
    if basis.contains(&Pauli::I) {
        return Err(QrcError::Argument("measurement basis letters must be X, Y or Z".into()));
    }
    Ok(())
}

/// Outcome distributions of `rho` in each product basis. Bases sharing a
/// prefix share the partial contractions.
pub fn basis_probabilities(rho: &DensityMatrix, bases: &[Vec<Pauli>]) -> Result<Vec<Vec<f64>>> {
    let n = rho.n_sites();
    for b in bases {
        check_basis(b, n)?;
    }
    let rows: Vec<(usize, &[Pauli])> = bases.iter().enumerate().map(|(k, b)| (k, b.as_slice())).collect();
    let mut out = vec![Vec::new(); bases.len()];
    descend(rho.matrix().as_slice(), 0, n, &rows, &mut out);
    for p in &mut out {
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > PROBABILITY_SUM_TOL || p.iter().any(|v| !v.is_finite()) {
            return Err(QrcError::Numeric(format!("outcome probabilities sum to {total}")));
        }
        for v in p.iter_mut() {
            *v = v.max(0.0);
        }
    }
    Ok(out)
}

// Normalized cumulative distribution for inverse-transform sampling.
pub(crate) fn cumulative(p: &[f64]) -> Vec<f64> {
    let total: f64 = p.iter().sum();
    let mut acc = 0.0;
    p.iter()
        .map(|v| {
            acc += v / total;
            acc
        })
        .collect()
}

pub(crate) fn draw(cdf: &[f64], rng: &mut impl Rng) -> usize {
    let u: f64 = rng.random();
    cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
}

/// One projective shot in `basis`.
pub fn sample_bitstring(rho: &DensityMatrix, basis: &[Pauli], rng: &mut impl Rng) -> Result<usize> {
    let p = basis_probabilities(rho, &[basis.to_vec()])?;
    Ok(draw(&cumulative(&p[0]), rng))
}

/// Shots in the given order of bases, plus the index of each shot's basis
/// among the distinct bases (returned in sorted order).
pub(crate) fn draw_outcomes(
    rho: &DensityMatrix,
    bases: &[Vec<Pauli>],
    rng: &mut impl Rng,
) -> Result<(Vec<Vec<Pauli>>, Vec<usize>, Vec<usize>)> {
    let mut index: BTreeMap<&[Pauli], usize> = BTreeMap::new();
    for b in bases {
        let k = index.len();
        index.entry(b.as_slice()).or_insert(k);
    }
    // renumber in sorted order so the result does not depend on first appearance
    let distinct: Vec<Vec<Pauli>> = index.keys().map(|k| k.to_vec()).collect();
    let pos: BTreeMap<&[Pauli], usize> = distinct.iter().enumerate().map(|(i, b)| (b.as_slice(), i)).collect();
    let cdfs: Vec<Vec<f64>> = basis_probabilities(rho, &distinct)?.iter().map(|p| cumulative(p)).collect();
    let mut which = Vec::with_capacity(bases.len());
    let mut outcomes = Vec::with_capacity(bases.len());
    for b in bases {
        let k = pos[b.as_slice()];
        which.push(k);
        outcomes.push(draw(&cdfs[k], rng));
    }
    Ok((distinct, which, outcomes))
}

/// One shot per basis row.
pub fn sample_shots(rho: &DensityMatrix, bases: &[Vec<Pauli>], rng: &mut impl Rng) -> Result<Vec<ShotRecord>> {
    let (distinct, which, outcomes) = draw_outcomes(rho, bases, rng)?;
    Ok(which.into_iter().zip(outcomes).map(|(k, outcome)| ShotRecord { basis: distinct[k].clone(), outcome }).collect())
}

/// CSV with header `shot_index,basis_string,outcome_bits`.
pub fn write_shots_csv(shots: &[ShotRecord], mut w: impl Write) -> Result<()> {
    writeln!(w, "shot_index,basis_string,outcome_bits")?;
    for (i, s) in shots.iter().enumerate() {
        writeln!(w, "{i},{},{}", s.basis_string(), s.bitstring())?;
    }
    Ok(())
}
