//! Reservoir readout: exact Pauli expectations, projective shots and
//! classical-shadow estimators.

pub mod observables;
pub mod sampling;
pub mod shadow;

use serde::{Deserialize, Serialize};

pub use observables::{exact_expectations, pauli_expectation, ObservableSet};
pub use sampling::{basis_probabilities, sample_bitstring, sample_shots, write_shots_csv, ShotRecord};
pub use shadow::{
    make_derandomized_plan, make_randomized_plan, plan_hits, shadow_estimate, ShadowEstimate, ShadowMode, ShadowPlan,
    DEFAULT_EPSILON,
};

use crate::error::{QrcError, Result};
use crate::quantum::DensityMatrix;
use crate::rng::QrcRng;

/// How signals are read out of a reservoir state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum MeasurementMode {
    Exact,
    Randomized {
        n_shots: usize,
    },
    Derandomized {
        n_shots: usize,
        #[serde(default = "default_epsilon")]
        epsilon: f64,
    },
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

impl MeasurementMode {
    pub fn is_exact(&self) -> bool {
        matches!(self, MeasurementMode::Exact)
    }

    pub fn n_shots(&self) -> Option<usize> {
        match *self {
            MeasurementMode::Exact => None,
            MeasurementMode::Randomized { n_shots } | MeasurementMode::Derandomized { n_shots, .. } => Some(n_shots),
        }
    }

    pub fn label(&self) -> String {
        match *self {
            MeasurementMode::Exact => "exact".into(),
            MeasurementMode::Randomized { n_shots } => format!("randomized-{n_shots}"),
            MeasurementMode::Derandomized { n_shots, .. } => format!("derandomized-{n_shots}"),
        }
    }
}

/// Signals from one state.
#[derive(Clone, Debug, PartialEq)]
pub struct Signals {
    pub values: Vec<f64>,
    pub zero_hits: usize,
}

/// A measurement pipeline with any fixed plan precomputed.
#[derive(Clone, Debug)]
pub struct Measurer {
    obs: ObservableSet,
    mode: MeasurementMode,
    plan: Option<ShadowPlan>,
}

impl Measurer {
    pub fn new(obs: ObservableSet, mode: MeasurementMode) -> Result<Self> {
        let plan = match mode {
            MeasurementMode::Exact => None,
            MeasurementMode::Randomized { n_shots } => {
                if n_shots == 0 {
                    return Err(QrcError::Argument("n_shots must be positive".into()));
                }
                None
            }
            MeasurementMode::Derandomized { n_shots, epsilon } => Some(make_derandomized_plan(&obs, n_shots, epsilon)?),
        };
        Ok(Self { obs, mode, plan })
    }

    pub fn observables(&self) -> &ObservableSet {
        &self.obs
    }

    pub fn mode(&self) -> MeasurementMode {
        self.mode
    }

    /// The fixed derandomized plan, if any.
    pub fn plan(&self) -> Option<&ShadowPlan> {
        self.plan.as_ref()
    }

    /// Reads out `rho` with a fresh set of shots drawn from `rng`. The
    /// randomized mode also draws a fresh plan.
    pub fn measure(&self, rho: &DensityMatrix, rng: &mut QrcRng) -> Result<Signals> {
        if rho.n_sites() != self.obs.n_sites() {
            return Err(QrcError::Dimension(format!(
                "{}-site state read with a {}-site observable set",
                rho.n_sites(),
                self.obs.n_sites()
            )));
        }
        let (plan, mode) = match self.mode {
            MeasurementMode::Exact => {
                return Ok(Signals { values: exact_expectations(rho, &self.obs)?, zero_hits: 0 });
            }
            MeasurementMode::Randomized { n_shots } => {
                (make_randomized_plan(n_shots, self.obs.n_sites(), rng)?, ShadowMode::Randomized)
            }
            MeasurementMode::Derandomized { .. } => (self.plan.clone().expect("plan built in new"), ShadowMode::Derandomized),
        };
        let (distinct, which, outcomes) = sampling::draw_outcomes(rho, &plan.bases, rng)?;
        let d = rho.dim();
        let mut hist = vec![vec![0u32; d]; distinct.len()];
        for (&k, &b) in which.iter().zip(&outcomes) {
            hist[k][b] += 1;
        }
        let est = shadow::estimate_from_histograms(&distinct, &hist, plan.n_shots(), &self.obs, mode);
        Ok(Signals { values: est.values, zero_hits: est.zero_hits })
    }
}

/// One-off readout; builds the plan on every call.
pub fn measure_signals(rho: &DensityMatrix, obs: &ObservableSet, mode: MeasurementMode, rng: &mut QrcRng) -> Result<Vec<f64>> {
    Ok(Measurer::new(obs.clone(), mode)?.measure(rho, rng)?.values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_for;

    #[test]
    fn exact_mode_dispatches() {
        let mut rng = rng_for(5, &[]);
        let rho = DensityMatrix::random_hilbert_schmidt(3, &mut rng);
        let obs = ObservableSet::default_for(3, false);
        assert_eq!(measure_signals(&rho, &obs, MeasurementMode::Exact, &mut rng).unwrap(), exact_expectations(&rho, &obs).unwrap());
    }

    #[test]
    fn finite_shot_values_are_clipped() {
        let mut rng = rng_for(6, &[]);
        let rho = DensityMatrix::random_hilbert_schmidt(3, &mut rng);
        let obs = ObservableSet::default_for(3, false);
        for mode in [MeasurementMode::Randomized { n_shots: 20 }, MeasurementMode::Derandomized { n_shots: 20, epsilon: 0.9 }] {
            let v = measure_signals(&rho, &obs, mode, &mut rng).unwrap();
            assert!(v.iter().all(|x| (-1.0..=1.0).contains(x)));
        }
    }

    #[test]
    fn derandomized_converges_to_exact() {
        let mut rng = rng_for(8, &[]);
        let rho = DensityMatrix::random_hilbert_schmidt(3, &mut rng);
        let obs = ObservableSet::default_for(3, false);
        let exact = exact_expectations(&rho, &obs).unwrap();
        let m = Measurer::new(obs, MeasurementMode::Derandomized { n_shots: 40_000, epsilon: 0.9 }).unwrap();
        let v = m.measure(&rho, &mut rng).unwrap().values;
        let err = v.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 0.03, "max error {err}");
    }

    #[test]
    fn mode_config_round_trip() {
        let m: MeasurementMode = toml::from_str("mode = \"derandomized\"\nn_shots = 100\n").unwrap();
        assert_eq!(m, MeasurementMode::Derandomized { n_shots: 100, epsilon: DEFAULT_EPSILON });
        let e: MeasurementMode = toml::from_str("mode = \"exact\"\n").unwrap();
        assert!(e.is_exact());
    }
}
