//! Experiment configuration files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::capacity::IpcOptions;
use crate::engine::{Architecture, PipelineConfig};
use crate::error::{QrcError, Result};
use crate::measurement::{MeasurementMode, ObservableSet};
use crate::quantum::{MAX_SITES, WARN_SITES};
use crate::reservoir::lattice::{build_lattice, Lattice, DEFAULT_DISORDER_SIGMA};
use crate::reservoir::config::{DEFAULT_JUMP_ALPHA, DEFAULT_JUMP_BETA};
use crate::reservoir::ReservoirConfig;
use crate::tasks::DetuningConvention;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    PhaseDiagram,
    Otoc,
    Convergence,
    IpcScan,
    Iris,
    Entanglement,
    Narma2,
    ShotsScan,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::PhaseDiagram => "phase-diagram",
            Self::Otoc => "otoc",
            Self::Convergence => "convergence",
            Self::IpcScan => "ipc-scan",
            Self::Iris => "iris",
            Self::Entanglement => "entanglement",
            Self::Narma2 => "narma2",
            Self::ShotsScan => "shots-scan",
        }
    }
}

/// Physical parameters as dimensionless ratios; the lattice is drawn per
/// disorder realization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReservoirSpec {
    pub n_atoms: usize,
    pub rows: Option<Vec<usize>>,
    pub delta_over_omega: f64,
    pub a_over_rb: f64,
    pub eta_over_omega: f64,
    pub gamma_over_omega: f64,
    pub tau_omega: f64,
    pub jump_alpha: f64,
    pub jump_beta: f64,
    pub disorder_sigma: f64,
}

impl Default for ReservoirSpec {
    fn default() -> Self {
        Self {
            n_atoms: 6,
            rows: None,
            delta_over_omega: -0.5,
            a_over_rb: 1.0,
            eta_over_omega: 0.1,
            gamma_over_omega: 0.95,
            tau_omega: 10.0,
            jump_alpha: DEFAULT_JUMP_ALPHA,
            jump_beta: DEFAULT_JUMP_BETA,
            disorder_sigma: DEFAULT_DISORDER_SIGMA,
        }
    }
}

impl ReservoirSpec {
    pub fn rows(&self) -> Vec<usize> {
        self.rows.clone().unwrap_or_else(|| Lattice::default_rows(self.n_atoms))
    }

    pub fn to_config(&self, disorder_seed: u64) -> Result<ReservoirConfig> {
        let rows = self.rows();
        if rows.iter().sum::<usize>() != self.n_atoms {
            return Err(QrcError::Config(format!("rows {rows:?} do not hold {} atoms", self.n_atoms)));
        }
        let cfg = ReservoirConfig {
            omega: 1.0,
            delta_over_omega: self.delta_over_omega,
            a_over_rb: self.a_over_rb,
            eta_over_omega: self.eta_over_omega,
            gamma_over_omega: self.gamma_over_omega,
            jump_alpha: self.jump_alpha,
            jump_beta: self.jump_beta,
            tau_omega: self.tau_omega,
            lattice: build_lattice(&rows, 1.0, self.disorder_sigma, disorder_seed)
                .map_err(|e| QrcError::Config(e.to_string()))?,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Fixed ridge penalty or cross-validated choice.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LambdaChoice {
    Fixed(f64),
    Named(LambdaKeyword),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LambdaKeyword {
    Cv,
}

impl Default for LambdaChoice {
    fn default() -> Self {
        LambdaChoice::Fixed(crate::learning::DEFAULT_LAMBDA)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PhaseDiagramParams {
    pub deltas: Vec<f64>,
    pub a_over_rb: Vec<f64>,
}

impl Default for PhaseDiagramParams {
    fn default() -> Self {
        Self { deltas: vec![-4.0, -3.0, -2.0, -1.0, -0.5, 0.0, 1.0], a_over_rb: vec![0.6, 0.8, 1.0, 1.2, 1.5, 2.0, 2.5] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OtocParams {
    pub tau_omegas: Vec<f64>,
}

impl Default for OtocParams {
    fn default() -> Self {
        Self { tau_omegas: (0..=20).map(f64::from).collect() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConvergenceParams {
    pub n_steps: usize,
}

impl Default for ConvergenceParams {
    fn default() -> Self {
        Self { n_steps: 300 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IpcParams {
    pub length: usize,
    pub washout: usize,
    pub architectures: Option<Vec<Architecture>>,
    /// Shot counts evaluated next to the exact readout.
    pub shots: Vec<usize>,
    pub shadow: ShadowKind,
    pub max_degree: usize,
    pub max_delay: usize,
    pub n_surrogates: usize,
    pub min_shift: usize,
    pub percentile: f64,
}

impl Default for IpcParams {
    fn default() -> Self {
        let o = IpcOptions::default();
        Self {
            length: 1000,
            washout: 200,
            architectures: None,
            shots: Vec::new(),
            shadow: ShadowKind::Derandomized,
            max_degree: o.max_degree,
            max_delay: o.max_delay,
            n_surrogates: o.n_surrogates,
            min_shift: o.min_shift,
            percentile: o.percentile,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IrisParams {
    pub data: Option<PathBuf>,
    pub test_fraction: f64,
    pub lambda: LambdaChoice,
    /// Measurement realizations for finite-shot readouts.
    pub repeats: usize,
}

impl Default for IrisParams {
    fn default() -> Self {
        Self { data: None, test_fraction: 0.2, lambda: LambdaChoice::default(), repeats: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EntanglementParams {
    pub n_samples: usize,
    pub test_fraction: f64,
    pub tau_omega: f64,
    pub convention: DetuningConvention,
    pub lambda: LambdaChoice,
    pub repeats: usize,
}

impl Default for EntanglementParams {
    fn default() -> Self {
        Self {
            n_samples: 1000,
            test_fraction: 0.2,
            tau_omega: crate::tasks::ENTANGLEMENT_TAU_OMEGA,
            convention: DetuningConvention::default(),
            lambda: LambdaChoice::default(),
            repeats: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NarmaParams {
    pub length: usize,
    /// (washout, train, test)
    pub split: [usize; 3],
    pub architectures: Option<Vec<Architecture>>,
    pub lambda: LambdaChoice,
    pub repeats: usize,
}

impl Default for NarmaParams {
    fn default() -> Self {
        Self { length: 1000, split: [200, 600, 200], architectures: None, lambda: LambdaChoice::default(), repeats: 1 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanTask {
    Iris,
    Entanglement,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShadowKind {
    Randomized,
    Derandomized,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ShotsScanParams {
    pub task: ScanTask,
    pub shots: Vec<usize>,
    pub modes: Vec<ShadowKind>,
    pub repeats: usize,
}

impl Default for ShotsScanParams {
    fn default() -> Self {
        Self {
            task: ScanTask::Iris,
            shots: vec![100, 1_000, 10_000, 100_000],
            modes: vec![ShadowKind::Randomized, ShadowKind::Derandomized],
            repeats: 10,
        }
    }
}

fn default_seed() -> u64 {
    42
}

fn default_realizations() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    /// Disorder realizations.
    #[serde(default = "default_realizations")]
    pub n_realizations: usize,
    #[serde(default)]
    pub reservoir: ReservoirSpec,
    #[serde(default)]
    pub pipeline: Option<PipelineConfig>,
    #[serde(default)]
    pub phase_diagram: PhaseDiagramParams,
    #[serde(default)]
    pub otoc: OtocParams,
    #[serde(default)]
    pub convergence: ConvergenceParams,
    #[serde(default)]
    pub ipc_scan: IpcParams,
    #[serde(default)]
    pub iris: IrisParams,
    #[serde(default)]
    pub entanglement: EntanglementParams,
    #[serde(default)]
    pub narma2: NarmaParams,
    #[serde(default)]
    pub shots_scan: ShotsScanParams,
}

/// A parsed config plus the keys serde did not recognize.
#[derive(Clone, Debug)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    pub unknown_keys: Vec<String>,
}

pub fn parse_config(text: &str) -> Result<LoadedConfig> {
    let de = toml::Deserializer::parse(text).map_err(|e| QrcError::Config(e.to_string()))?;
    let mut unknown_keys = Vec::new();
    let config: ExperimentConfig =
        serde_ignored::deserialize(de, |path| unknown_keys.push(path.to_string())).map_err(|e| QrcError::Config(e.to_string()))?;
    Ok(LoadedConfig { config, unknown_keys })
}

pub fn load_config(path: &Path) -> Result<LoadedConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| QrcError::Config(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

/// Derived quantities and problems found without running anything.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub experiment: String,
    pub n_atoms: usize,
    pub hilbert_dim: usize,
    pub estimated_memory_bytes: u64,
    pub feature_count: usize,
    pub warnings: Vec<String>,
    pub errors: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }
}

impl ExperimentConfig {
    pub fn pipeline_template(&self) -> PipelineConfig {
        self.pipeline.clone().unwrap_or_else(|| PipelineConfig::new(Architecture::Ss))
    }

    /// Architectures for comparative experiments: an explicit list, else
    /// the pipeline's, else both.
    pub fn architectures(&self, explicit: &Option<Vec<Architecture>>) -> Vec<Architecture> {
        match (explicit, &self.pipeline) {
            (Some(a), _) => a.clone(),
            (None, Some(p)) => vec![p.architecture],
            (None, None) => vec![Architecture::Ss, Architecture::Ms],
        }
    }

    /// Per-architecture pipeline built from the template.
    pub fn pipeline_for(&self, arch: Architecture) -> PipelineConfig {
        PipelineConfig { architecture: arch, ..self.pipeline_template() }
    }

    /// Exact readout first, then the configured finite-shot mode if any.
    pub fn readout_modes(&self) -> Vec<MeasurementMode> {
        let m = self.pipeline_template().measurement;
        if m.is_exact() {
            vec![m]
        } else {
            vec![MeasurementMode::Exact, m]
        }
    }

    pub fn feature_count(&self) -> usize {
        let n = self.reservoir.n_atoms;
        let mixed = self.pipeline_template().mixed_pairs;
        let obs = match self.experiment {
            ExperimentKind::Entanglement => n.saturating_sub(2),
            ExperimentKind::ShotsScan if self.shots_scan.task == ScanTask::Entanglement => n.saturating_sub(2),
            _ => n,
        };
        let pairs = obs * obs.saturating_sub(1) / 2;
        2 * obs + pairs * if mixed { 4 } else { 2 } + 1
    }

    pub fn validate(&self) -> ValidationReport {
        let n = self.reservoir.n_atoms;
        let mut r = ValidationReport {
            experiment: self.experiment.name().to_string(),
            n_atoms: n,
            feature_count: self.feature_count(),
            ..ValidationReport::default()
        };
        if n == 0 || n > MAX_SITES {
            r.errors.push(format!("n_atoms = {n} outside 1..={MAX_SITES}"));
            return r;
        }
        r.hilbert_dim = 1 << n;
        // ~12 dense state-sized buffers per concurrent evolution
        let per_state = 16u64 * (1u64 << (2 * n));
        r.estimated_memory_bytes = 12 * per_state * rayon::current_num_threads() as u64;
        if n > WARN_SITES {
            r.warnings.push(format!(
                "N = {n}: each density matrix holds 4^{n} complex entries; expect ~{} MiB per worker and long runtimes",
                12 * per_state >> 20
            ));
        }
        if let Err(e) = self.reservoir.to_config(0) {
            r.errors.push(e.to_string());
        }
        if self.n_realizations == 0 {
            r.errors.push("n_realizations must be at least 1".into());
        }
        let p = self.pipeline_template();
        if let Some(0) = p.window {
            r.errors.push("window must be at least 1".into());
        }
        if p.window.is_some_and(|w| w > n) {
            r.errors.push(format!("window {} exceeds {n} atoms", p.window.unwrap()));
        }
        if let Some(0) = p.measurement.n_shots() {
            r.errors.push("n_shots must be positive".into());
        }
        if let MeasurementMode::Derandomized { epsilon, .. } = p.measurement {
            if !(epsilon > 0.0 && epsilon < 1.0) {
                r.errors.push(format!("derandomization epsilon {epsilon} outside (0, 1)"));
            }
        }
        let series_len = match self.experiment {
            ExperimentKind::Narma2 => Some(self.narma2.length),
            ExperimentKind::IpcScan => Some(self.ipc_scan.length),
            ExperimentKind::Convergence => Some(self.convergence.n_steps),
            _ => None,
        };
        if let (Some(len), Some(w)) = (series_len, p.washout) {
            if w >= len {
                r.errors.push(format!("washout {w} must be below the series length {len}"));
            }
        }
        match self.experiment {
            ExperimentKind::PhaseDiagram => {
                if self.phase_diagram.deltas.is_empty() || self.phase_diagram.a_over_rb.is_empty() {
                    r.errors.push("phase diagram grid is empty".into());
                }
                if self.phase_diagram.a_over_rb.iter().any(|&a| !(a > 0.0)) {
                    r.errors.push("a_over_rb values must be positive".into());
                }
            }
            ExperimentKind::Otoc => {
                if n < 2 {
                    r.errors.push("the OTOC needs at least 2 atoms".into());
                }
                if self.otoc.tau_omegas.is_empty() {
                    r.errors.push("otoc.tau_omegas is empty".into());
                }
            }
            ExperimentKind::Convergence => {
                if self.convergence.n_steps == 0 {
                    r.errors.push("convergence.n_steps must be positive".into());
                }
            }
            ExperimentKind::IpcScan => {
                let q = &self.ipc_scan;
                if q.washout >= q.length {
                    r.errors.push(format!("ipc_scan.washout {} must be below length {}", q.washout, q.length));
                } else if q.length - q.washout < 2 * q.min_shift + q.n_surrogates {
                    r.errors.push("ipc_scan evaluation window too short for the surrogate shifts".into());
                }
                if q.max_delay > q.washout {
                    r.errors.push("ipc_scan.max_delay exceeds the washout history".into());
                }
                if q.max_degree == 0 {
                    r.errors.push("ipc_scan.max_degree must be at least 1".into());
                }
                if q.shots.contains(&0) {
                    r.errors.push("ipc_scan.shots must be positive".into());
                }
            }
            ExperimentKind::Iris => {
                if !(0.0..1.0).contains(&self.iris.test_fraction) || self.iris.test_fraction == 0.0 {
                    r.errors.push("iris.test_fraction must lie in (0, 1)".into());
                }
                if n < 4 {
                    r.errors.push("iris has 4 features and needs at least 4 atoms".into());
                }
                if self.iris.repeats == 0 {
                    r.errors.push("iris.repeats must be at least 1".into());
                }
            }
            ExperimentKind::Entanglement => {
                let e = &self.entanglement;
                if n < 3 {
                    r.errors.push("the entanglement task needs at least 3 atoms".into());
                }
                if e.n_samples < 10 {
                    r.errors.push("entanglement.n_samples must be at least 10".into());
                }
                if !(e.test_fraction > 0.0 && e.test_fraction < 1.0) {
                    r.errors.push("entanglement.test_fraction must lie in (0, 1)".into());
                }
                if !(e.tau_omega > 0.0) {
                    r.errors.push("entanglement.tau_omega must be positive".into());
                }
                if e.repeats == 0 {
                    r.errors.push("entanglement.repeats must be at least 1".into());
                }
            }
            ExperimentKind::Narma2 => {
                let q = &self.narma2;
                if q.split.iter().sum::<usize>() != q.length {
                    r.errors.push(format!("narma2.split {:?} does not sum to length {}", q.split, q.length));
                }
                if q.split[0] >= q.length {
                    r.errors.push(format!("washout {} must be below the series length {}", q.split[0], q.length));
                }
                if q.split[1] == 0 || q.split[2] == 0 {
                    r.errors.push("narma2 needs non-empty train and test ranges".into());
                }
                if q.repeats == 0 {
                    r.errors.push("narma2.repeats must be at least 1".into());
                }
            }
            ExperimentKind::ShotsScan => {
                let s = &self.shots_scan;
                if s.shots.is_empty() || s.shots.contains(&0) {
                    r.errors.push("shots_scan.shots must be a non-empty list of positive counts".into());
                }
                if s.modes.is_empty() {
                    r.errors.push("shots_scan.modes is empty".into());
                }
                if s.repeats == 0 {
                    r.errors.push("shots_scan.repeats must be at least 1".into());
                }
                if s.task == ScanTask::Entanglement && n < 3 || s.task == ScanTask::Iris && n < 4 {
                    r.errors.push("too few atoms for the scanned task".into());
                }
            }
        }
        r
    }

    /// Observable set used for the experiment's readout.
    pub fn observables(&self) -> Result<ObservableSet> {
        let n = self.reservoir.n_atoms;
        let mixed = self.pipeline_template().mixed_pairs;
        match self.experiment {
            ExperimentKind::Entanglement => crate::tasks::entanglement_observables(n, mixed),
            ExperimentKind::ShotsScan if self.shots_scan.task == ScanTask::Entanglement => {
                crate::tasks::entanglement_observables(n, mixed)
            }
            _ => Ok(ObservableSet::default_for(n, mixed)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_uses_defaults() {
        let c = parse_config("experiment = \"narma2\"\n").unwrap();
        assert!(c.unknown_keys.is_empty());
        assert_eq!(c.config.seed, 42);
        assert_eq!(c.config.reservoir, ReservoirSpec::default());
        assert_eq!(c.config.architectures(&None), vec![Architecture::Ss, Architecture::Ms]);
        assert!(c.config.validate().is_ok());
    }

    #[test]
    fn missing_experiment_is_an_error() {
        assert!(matches!(parse_config("seed = 3\n"), Err(QrcError::Config(_))));
        assert!(parse_config("experiment = \"fly\"\n").is_err());
    }

    #[test]
    fn unknown_keys_are_listed() {
        let c = parse_config("experiment = \"otoc\"\ncolour = 1\n[reservoir]\nn_atoms = 4\nspin = 2\n").unwrap();
        assert_eq!(c.unknown_keys, vec!["colour".to_string(), "reservoir.spin".to_string()]);
        assert!(c.config.validate().is_ok());
    }

    #[test]
    fn large_arrays_warn() {
        let c = parse_config("experiment = \"otoc\"\n[reservoir]\nn_atoms = 10\n").unwrap().config;
        let r = c.validate();
        assert!(r.is_ok());
        assert_eq!(r.hilbert_dim, 1024);
        assert!(r.warnings.iter().any(|w| w.contains("N = 10")));
    }

    #[test]
    fn washout_beyond_series_is_an_error() {
        let text = "experiment = \"narma2\"\n[pipeline]\narchitecture = \"ms\"\nwashout = 1000\n";
        let r = parse_config(text).unwrap().config.validate();
        assert!(r.errors.iter().any(|e| e.contains("washout")));
        let text = "experiment = \"narma2\"\n[narma2]\nlength = 100\nsplit = [100, 0, 0]\n";
        assert!(!parse_config(text).unwrap().config.validate().is_ok());
    }

    #[test]
    fn lambda_accepts_number_or_cv() {
        let c = parse_config("experiment = \"iris\"\n[iris]\nlambda = \"cv\"\n").unwrap().config;
        assert_eq!(c.iris.lambda, LambdaChoice::Named(LambdaKeyword::Cv));
        let c = parse_config("experiment = \"iris\"\n[iris]\nlambda = 0.001\n").unwrap().config;
        assert_eq!(c.iris.lambda, LambdaChoice::Fixed(0.001));
    }

    #[test]
    fn measurement_section_parses() {
        let text = "experiment = \"narma2\"\n[pipeline]\narchitecture = \"ms\"\n[pipeline.measurement]\nmode = \"derandomized\"\nn_shots = 20000\n";
        let c = parse_config(text).unwrap().config;
        assert_eq!(c.readout_modes().len(), 2);
        assert_eq!(c.architectures(&None), vec![Architecture::Ms]);
        assert_eq!(c.feature_count(), 6 * 2 + 15 * 2 + 1);
    }
}
