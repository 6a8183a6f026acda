use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::matrix::{kron, pauli_x, pauli_y, pauli_z, ComplexMatrix};
use crate::error::{QrcError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> ComplexMatrix {
        match self {
            Pauli::I => ComplexMatrix::identity(2),
            Pauli::X => pauli_x(),
            Pauli::Y => pauli_y(),
            Pauli::Z => pauli_z(),
        }
    }

    pub fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_letter(c: char) -> Result<Self> {
        match c {
            'I' => Ok(Pauli::I),
            'X' => Ok(Pauli::X),
            'Y' => Ok(Pauli::Y),
            'Z' => Ok(Pauli::Z),
            other => Err(QrcError::Argument(format!("unknown Pauli letter '{other}'"))),
        }
    }
}

/// A tensor product of single-site Paulis over `n` sites.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    letters: Vec<Pauli>,
}

impl PauliString {
    pub fn identity(n_sites: usize) -> Self {
        Self { letters: vec![Pauli::I; n_sites] }
    }

    pub fn new(letters: Vec<Pauli>) -> Self {
        Self { letters }
    }

    /// Builds a string with the given (site, letter) pairs; identity elsewhere.
    pub fn from_sparse(n_sites: usize, terms: &[(usize, Pauli)]) -> Result<Self> {
        let mut letters = vec![Pauli::I; n_sites];
        for &(site, p) in terms {
            if site >= n_sites {
                return Err(QrcError::Dimension(format!("site {site} out of range for {n_sites} sites")));
            }
            letters[site] = p;
        }
        Ok(Self { letters })
    }

    pub fn sites(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn letter(&self, site: usize) -> Pauli {
        self.letters[site]
    }

    pub fn support(&self) -> Vec<usize> {
        self.letters.iter().enumerate().filter(|(_, &p)| p != Pauli::I).map(|(i, _)| i).collect()
    }

    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|&&p| p != Pauli::I).count()
    }

    /// Compact label listing only the support, e.g. `X1X4` or `Z3`.
    pub fn label(&self) -> String {
        let s: String = self
            .letters
            .iter()
            .enumerate()
            .filter(|(_, &p)| p != Pauli::I)
            .map(|(i, p)| format!("{}{}", p.letter(), i))
            .collect();
        if s.is_empty() {
            "I".into()
        } else {
            s
        }
    }

    /// Parses a compact label like `X0Z3` for `n_sites` sites.
    pub fn parse_label(label: &str, n_sites: usize) -> Result<Self> {
        if label == "I" {
            return Ok(Self::identity(n_sites));
        }
        let mut terms = Vec::new();
        let mut chars = label.chars().peekable();
        while let Some(c) = chars.next() {
            let p = Pauli::from_letter(c)?;
            let mut digits = String::new();
            while let Some(d) = chars.peek().filter(|d| d.is_ascii_digit()) {
                digits.push(*d);
                chars.next();
            }
            let site: usize = digits
                .parse()
                .map_err(|_| QrcError::Argument(format!("missing site index in label '{label}'")))?;
            terms.push((site, p));
        }
        Self::from_sparse(n_sites, &terms)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.letters {
            write!(f, "{}", p.letter())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = QrcError;

    /// Dense form, one letter per site (`IXZI`).
    fn from_str(s: &str) -> Result<Self> {
        s.chars().map(Pauli::from_letter).collect::<Result<Vec<_>>>().map(Self::new)
    }
}

/// Dense `2^N x 2^N` operator for `p`. Site 0 is the leftmost tensor factor.
pub fn embed_pauli(p: &PauliString, n_sites: usize) -> Result<ComplexMatrix> {
    if p.sites() != n_sites {
        return Err(QrcError::Dimension(format!(
            "Pauli string has {} sites, expected {n_sites}",
            p.sites()
        )));
    }
    p.letters.iter().try_fold(ComplexMatrix::identity(1), |acc, l| kron(&acc, &l.matrix()))
}
