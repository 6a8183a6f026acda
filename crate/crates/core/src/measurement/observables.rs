use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{QrcError, Result};
use crate::quantum::local::site_mask;
use crate::quantum::pauli::{Pauli, PauliString};
use crate::quantum::DensityMatrix;

/// Readout observables: X/Z Pauli strings of weight one or two.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ObservableLabels", into = "ObservableLabels")]
pub struct ObservableSet {
    n_sites: usize,
    paulis: Vec<PauliString>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct ObservableLabels {
    n_sites: usize,
    labels: Vec<String>,
}

impl TryFrom<ObservableLabels> for ObservableSet {
    type Error = QrcError;

    fn try_from(l: ObservableLabels) -> Result<Self> {
        let paulis = l.labels.iter().map(|s| PauliString::parse_label(s, l.n_sites)).collect::<Result<_>>()?;
        Self::new(l.n_sites, paulis)
    }
}

impl From<ObservableSet> for ObservableLabels {
    fn from(o: ObservableSet) -> Self {
        Self { n_sites: o.n_sites, labels: o.labels() }
    }
}

impl ObservableSet {
    pub fn new(n_sites: usize, paulis: Vec<PauliString>) -> Result<Self> {
        if paulis.is_empty() {
            return Err(QrcError::Argument("observable set is empty".into()));
        }
        let mut seen = HashSet::new();
        for p in &paulis {
            if p.sites() != n_sites {
                return Err(QrcError::Dimension(format!("observable {} is not on {n_sites} sites", p.label())));
            }
            if !(1..=2).contains(&p.weight()) {
                return Err(QrcError::Argument(format!("observable {} must have weight 1 or 2", p.label())));
            }
            if p.letters().iter().any(|&l| l == Pauli::Y) {
                return Err(QrcError::Argument(format!("observable {} uses Y; only X and Z are read out", p.label())));
            }
            if !seen.insert(p.clone()) {
                return Err(QrcError::Argument(format!("duplicate observable {}", p.label())));
            }
        }
        Ok(Self { n_sites, paulis })
    }

    /// {X_i, Z_i} ∪ {X_iX_j, Z_iZ_j : i<j}; `mixed` adds X_iZ_j and Z_iX_j.
    pub fn default_for(n_sites: usize, mixed: bool) -> Self {
        Self::on_sites(n_sites, &(0..n_sites).collect::<Vec<_>>(), mixed).expect("valid default set")
    }

    /// Same family restricted to `sites` of an `n_sites` register.
    pub fn on_sites(n_sites: usize, sites: &[usize], mixed: bool) -> Result<Self> {
        let mut paulis = Vec::new();
        for &i in sites {
            for p in [Pauli::X, Pauli::Z] {
                paulis.push(PauliString::from_sparse(n_sites, &[(i, p)])?);
            }
        }
        for (k, &i) in sites.iter().enumerate() {
            for &j in &sites[k + 1..] {
                paulis.push(PauliString::from_sparse(n_sites, &[(i, Pauli::X), (j, Pauli::X)])?);
                paulis.push(PauliString::from_sparse(n_sites, &[(i, Pauli::Z), (j, Pauli::Z)])?);
                if mixed {
                    paulis.push(PauliString::from_sparse(n_sites, &[(i, Pauli::X), (j, Pauli::Z)])?);
                    paulis.push(PauliString::from_sparse(n_sites, &[(i, Pauli::Z), (j, Pauli::X)])?);
                }
            }
        }
        Self::new(n_sites, paulis)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn len(&self) -> usize {
        self.paulis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paulis.is_empty()
    }

    pub fn paulis(&self) -> &[PauliString] {
        &self.paulis
    }

    pub fn labels(&self) -> Vec<String> {
        self.paulis.iter().map(PauliString::label).collect()
    }
}

// X-type and Z-type bit masks of a Pauli string; Y sets both.
pub(crate) fn xz_masks(p: &PauliString) -> (usize, usize) {
    let n = p.sites();
    let (mut x, mut z) = (0, 0);
    for (i, &l) in p.letters().iter().enumerate() {
        let m = site_mask(n, i);
        match l {
            Pauli::X => x |= m,
            Pauli::Z => z |= m,
            Pauli::Y => {
                x |= m;
                z |= m;
            }
            Pauli::I => {}
        }
    }
    (x, z)
}

/// Tr(ρP) for a Pauli string, in O(2^N).
pub fn pauli_expectation(rho: &DensityMatrix, p: &PauliString) -> Result<f64> {
    if p.sites() != rho.n_sites() {
        return Err(QrcError::Dimension(format!("{}-site Pauli on a {}-site state", p.sites(), rho.n_sites())));
    }
    let (x, z) = xz_masks(p);
    let n_y = (x & z).count_ones();
    let d = rho.dim();
    let m = rho.matrix().as_slice();
    // P|b⟩ = i^{n_Y} (−1)^{|b∧z|} |b⊕x⟩
    let mut acc = num_complex::Complex64::new(0.0, 0.0);
    for b in 0..d {
        let v = m[b * d + (b ^ x)];
        if (b & z).count_ones() % 2 == 0 {
            acc += v;
        } else {
            acc -= v;
        }
    }
    let phase = match n_y % 4 {
        0 => num_complex::Complex64::new(1.0, 0.0),
        1 => num_complex::Complex64::new(0.0, 1.0),
        2 => num_complex::Complex64::new(-1.0, 0.0),
        _ => num_complex::Complex64::new(0.0, -1.0),
    };
    Ok((acc * phase).re)
}

/// v_k = Tr(ρ P_k) for every observable.
pub fn exact_expectations(rho: &DensityMatrix, obs: &ObservableSet) -> Result<Vec<f64>> {
    obs.paulis().iter().map(|p| pauli_expectation(rho, p)).collect()
}
