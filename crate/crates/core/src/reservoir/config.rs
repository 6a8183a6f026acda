use serde::{Deserialize, Serialize};

use super::lattice::{build_lattice, Lattice, DEFAULT_DISORDER_SIGMA};
use crate::error::{QrcError, Result};
use crate::quantum::MAX_SITES;

pub const DEFAULT_JUMP_ALPHA: f64 = 0.025;
pub const DEFAULT_JUMP_BETA: f64 = 0.08;

/// Physical parameters of the reservoir. Every rate and duration is a
/// dimensionless ratio against the Rabi frequency `omega`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReservoirConfig {
    #[serde(default = "default_omega")]
    pub omega: f64,
    pub delta_over_omega: f64,
    pub a_over_rb: f64,
    pub eta_over_omega: f64,
    pub gamma_over_omega: f64,
    #[serde(default = "default_alpha")]
    pub jump_alpha: f64,
    #[serde(default = "default_beta")]
    pub jump_beta: f64,
    pub tau_omega: f64,
    pub lattice: Lattice,
}

fn default_omega() -> f64 {
    1.0
}
fn default_alpha() -> f64 {
    DEFAULT_JUMP_ALPHA
}
fn default_beta() -> f64 {
    DEFAULT_JUMP_BETA
}

impl ReservoirConfig {
    /// Working point used for the learning benchmarks:
    /// Δ/Ω = −0.5, a/R_b = 1, γ/Ω = 0.95, τΩ = 10, η/Ω = 0.1.
    pub fn benchmark(n_atoms: usize, disorder_seed: u64) -> Result<Self> {
        let lattice = build_lattice(&Lattice::default_rows(n_atoms), 1.0, DEFAULT_DISORDER_SIGMA, disorder_seed)?;
        let cfg = Self {
            omega: 1.0,
            delta_over_omega: -0.5,
            a_over_rb: 1.0,
            eta_over_omega: 0.1,
            gamma_over_omega: 0.95,
            jump_alpha: DEFAULT_JUMP_ALPHA,
            jump_beta: DEFAULT_JUMP_BETA,
            tau_omega: 10.0,
            lattice,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64, name: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(QrcError::Config(format!("{name} must be positive and finite, got {v}")))
            }
        };
        let non_negative = |v: f64, name: &str| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(QrcError::Config(format!("{name} must be non-negative and finite, got {v}")))
            }
        };
        positive(self.omega, "omega")?;
        positive(self.tau_omega, "tau_omega")?;
        positive(self.a_over_rb, "a_over_rb")?;
        non_negative(self.gamma_over_omega, "gamma_over_omega")?;
        non_negative(self.jump_alpha, "jump_alpha")?;
        non_negative(self.jump_beta, "jump_beta")?;
        if !self.delta_over_omega.is_finite() || !self.eta_over_omega.is_finite() {
            return Err(QrcError::Config("detuning parameters must be finite".into()));
        }
        let n = self.n_atoms();
        if n == 0 || n > MAX_SITES {
            return Err(QrcError::Config(format!("atom count {n} outside 1..={MAX_SITES}")));
        }
        Ok(())
    }

    pub fn n_atoms(&self) -> usize {
        self.lattice.n_atoms()
    }

    pub fn delta(&self) -> f64 {
        self.delta_over_omega * self.omega
    }

    pub fn eta(&self) -> f64 {
        self.eta_over_omega * self.omega
    }

    pub fn gamma(&self) -> f64 {
        self.gamma_over_omega * self.omega
    }

    pub fn tau(&self) -> f64 {
        self.tau_omega / self.omega
    }

    /// Same parameters on a fresh disorder realization.
    pub fn with_disorder_seed(&self, seed: u64) -> Result<Self> {
        Ok(Self { lattice: self.lattice.with_seed(seed)?, ..self.clone() })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| QrcError::Config(e.to_string()))
    }

    pub fn from_toml(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| QrcError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}
