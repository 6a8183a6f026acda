//! Single-step (SS) and multi-step (MS) reservoir pipelines.
//!
//! SS: every sample starts from |0…0⟩, is encoded once and read out.
//! MS: one trajectory is driven by the whole series and read out after
//! every step. Finite-shot readout never feeds back into the state.

use std::io::Write;
use std::ops::Range;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{QrcError, Result};
use crate::measurement::{MeasurementMode, Measurer, ObservableSet};
use crate::quantum::DensityMatrix;
use crate::reservoir::{Reservoir, ReservoirConfig};
use crate::rng::{rng_for, stream};

pub const DEFAULT_MS_WASHOUT: usize = 200;
pub const CONST_COLUMN: &str = "const";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Architecture {
    Ss,
    Ms,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub architecture: Architecture,
    /// Rows dropped from the start; defaults to 200 for MS and 0 for SS.
    #[serde(default)]
    pub washout: Option<usize>,
    /// SS window length; defaults to N.
    #[serde(default)]
    pub window: Option<usize>,
    #[serde(default = "default_measurement")]
    pub measurement: MeasurementMode,
    /// Also read out X_iZ_j and Z_iX_j pairs.
    #[serde(default)]
    pub mixed_pairs: bool,
}

fn default_measurement() -> MeasurementMode {
    MeasurementMode::Exact
}

impl PipelineConfig {
    pub fn new(architecture: Architecture) -> Self {
        Self { architecture, washout: None, window: None, measurement: MeasurementMode::Exact, mixed_pairs: false }
    }

    pub fn washout(&self) -> usize {
        self.washout.unwrap_or(match self.architecture {
            Architecture::Ms => DEFAULT_MS_WASHOUT,
            Architecture::Ss => 0,
        })
    }

    pub fn window(&self, n_sites: usize) -> usize {
        self.window.unwrap_or(n_sites)
    }

    pub fn observables(&self, n_sites: usize) -> ObservableSet {
        ObservableSet::default_for(n_sites, self.mixed_pairs)
    }

    pub fn validate(&self, n_sites: usize, series_len: usize) -> Result<()> {
        if self.window(n_sites) == 0 {
            return Err(QrcError::Config("window must be at least 1".into()));
        }
        if self.architecture == Architecture::Ss && self.window(n_sites) > n_sites {
            return Err(QrcError::Config(format!("window {} exceeds {n_sites} atoms", self.window(n_sites))));
        }
        if self.washout() >= series_len {
            return Err(QrcError::Config(format!("washout {} must be below the series length {series_len}", self.washout())));
        }
        if let Some(0) = self.measurement.n_shots() {
            return Err(QrcError::Config("n_shots must be positive".into()));
        }
        Ok(())
    }
}

/// Scalar time series u^(m), or pre-built input vectors x^(m).
#[derive(Clone, Debug, PartialEq)]
pub enum InputSeries {
    Scalar(Vec<f64>),
    Vector(Vec<Vec<f64>>),
}

impl InputSeries {
    pub fn len(&self) -> usize {
        match self {
            InputSeries::Scalar(u) => u.len(),
            InputSeries::Vector(x) => x.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// (min, max) over all values.
    pub fn range(&self) -> Option<(f64, f64)> {
        let values: Box<dyn Iterator<Item = f64> + '_> = match self {
            InputSeries::Scalar(u) => Box::new(u.iter().copied()),
            InputSeries::Vector(x) => Box::new(x.iter().flatten().copied()),
        };
        values.fold(None, |acc, v| match acc {
            None => Some((v, v)),
            Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
        })
    }

    fn check_finite(&self) -> Result<()> {
        let ok = match self {
            InputSeries::Scalar(u) => u.iter().all(|v| v.is_finite()),
            InputSeries::Vector(x) => x.iter().flatten().all(|v| v.is_finite()),
        };
        if ok {
            Ok(())
        } else {
            Err(QrcError::Encoding("input series contains non-finite values".into()))
        }
    }
}

/// Sliding windows x^(m) = (u^(m−W+1), …, u^(m)), zero-filled before the
/// start. Vector samples pass through unchanged.
pub fn build_ss_inputs(series: &InputSeries, window: usize, n_sites: usize) -> Result<Vec<Vec<f64>>> {
    series.check_finite()?;
    match series {
        InputSeries::Vector(x) => {
            if let Some(bad) = x.iter().find(|v| v.len() > n_sites) {
                return Err(QrcError::Encoding(format!("sample of dimension {} exceeds {n_sites} atoms", bad.len())));
            }
            Ok(x.clone())
        }
        InputSeries::Scalar(u) => {
            if window == 0 || window > n_sites {
                return Err(QrcError::Encoding(format!("window {window} must lie in 1..={n_sites}")));
            }
            Ok((0..u.len())
                .map(|m| (0..window).map(|k| (m + k + 1).checked_sub(window).map_or(0.0, |i| u[i])).collect())
                .collect())
        }
    }
}

/// x^(m) = (u^(m), …, u^(m)) of length N.
pub fn build_ms_inputs(series: &[f64], n_sites: usize) -> Vec<Vec<f64>> {
    series.iter().map(|&u| vec![u; n_sites]).collect()
}

/// Rows are samples or time steps, columns the observables plus a trailing
/// constant column.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix {
    names: Vec<String>,
    data: DMatrix<f64>,
}

impl FeatureMatrix {
    /// Appends the constant column to signal rows.
    pub fn from_signals(labels: Vec<String>, rows: &[Vec<f64>]) -> Result<Self> {
        let f = labels.len();
        if labels.iter().any(|l| l == CONST_COLUMN) {
            return Err(QrcError::Argument("signal labels may not use the constant column name".into()));
        }
        if let Some(r) = rows.iter().find(|r| r.len() != f) {
            return Err(QrcError::Dimension(format!("signal row of width {} for {f} observables", r.len())));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(QrcError::Numeric("non-finite feature value".into()));
        }
        let data = DMatrix::from_fn(rows.len(), f + 1, |i, j| if j < f { rows[i][j] } else { 1.0 });
        let mut names = labels;
        names.push(CONST_COLUMN.into());
        Ok(Self { names, data })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn n_rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.data.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn const_column(&self) -> usize {
        self.n_cols() - 1
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.data.row(i).iter().copied().collect()
    }

    /// Signal columns only (no constant).
    pub fn signals(&self) -> DMatrix<f64> {
        self.data.columns(0, self.n_cols() - 1).into_owned()
    }

    pub fn rows(&self, range: Range<usize>) -> Result<Self> {
        if range.end > self.n_rows() || range.start > range.end {
            return Err(QrcError::Argument(format!("row range {range:?} outside {} rows", self.n_rows())));
        }
        Ok(Self { names: self.names.clone(), data: self.data.rows(range.start, range.len()).into_owned() })
    }

    /// Rows at arbitrary indices, in the given order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        if let Some(&i) = indices.iter().find(|&&i| i >= self.n_rows()) {
            return Err(QrcError::Argument(format!("row {i} outside {} rows", self.n_rows())));
        }
        Ok(Self { names: self.names.clone(), data: self.data.select_rows(indices) })
    }

    pub fn drop_rows(&self, washout: usize) -> Result<Self> {
        self.rows(washout.min(self.n_rows())..self.n_rows())
    }

    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "{}", self.names.join(","))?;
        for i in 0..self.n_rows() {
            let row: Vec<String> = self.data.row(i).iter().map(|v| v.to_string()).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// One prepared SS sample: initial state and per-site detunings.
#[derive(Clone, Debug)]
pub struct Preparation {
    pub rho: DensityMatrix,
    pub detunings: Vec<f64>,
}

// Per-state shot stream: (readout index, sample index).
fn shot_rng(seed: u64, readout: usize, sample: usize) -> crate::rng::QrcRng {
    rng_for(seed, &[stream::SHOTS, readout as u64, sample as u64])
}

fn read_all(readouts: &[Measurer], rho: &DensityMatrix, seed: u64, sample: usize) -> Result<Vec<Vec<f64>>> {
    readouts
        .iter()
        .enumerate()
        .map(|(k, m)| m.measure(rho, &mut shot_rng(seed, k, sample)).map(|s| s.values))
        .collect()
}

fn collect(readouts: &[Measurer], per_sample: Vec<Vec<Vec<f64>>>) -> Result<Vec<FeatureMatrix>> {
    readouts
        .iter()
        .enumerate()
        .map(|(k, m)| {
            let rows: Vec<Vec<f64>> = per_sample.iter().map(|s| s[k].clone()).collect();
            FeatureMatrix::from_signals(m.observables().labels(), &rows)
        })
        .collect()
}

/// SS over arbitrary prepared samples, each evolved for `duration`.
/// Returns one feature matrix per readout.
pub fn run_prepared(
    res: &Reservoir,
    samples: &[Preparation],
    duration: f64,
    readouts: &[Measurer],
    seed: u64,
) -> Result<Vec<FeatureMatrix>> {
    let per_sample = samples
        .par_iter()
        .enumerate()
        .map(|(m, s)| {
            let out = res.evolve_detuned(&s.rho, &s.detunings, duration)?;
            read_all(readouts, &out, seed, m)
        })
        .collect::<Result<Vec<_>>>()?;
    collect(readouts, per_sample)
}

/// Final states of prepared samples, for repeated readout.
pub fn evolve_prepared(res: &Reservoir, samples: &[Preparation], duration: f64) -> Result<Vec<DensityMatrix>> {
    samples.par_iter().map(|s| res.evolve_detuned(&s.rho, &s.detunings, duration)).collect()
}

/// Reads stored states; draws the same shot streams as [`run_prepared`].
pub fn read_states(states: &[DensityMatrix], readouts: &[Measurer], seed: u64) -> Result<Vec<FeatureMatrix>> {
    let per_sample = states
        .par_iter()
        .enumerate()
        .map(|(m, rho)| read_all(readouts, rho, seed, m))
        .collect::<Result<Vec<_>>>()?;
    collect(readouts, per_sample)
}

/// SS-QRC: ρ ← |0…0⟩⟨0…0|, apply E(x^(m)), read out.
pub fn run_ss(res: &Reservoir, inputs: &[Vec<f64>], readouts: &[Measurer], seed: u64) -> Result<Vec<FeatureMatrix>> {
    let n = res.n_sites();
    let samples = inputs
        .iter()
        .map(|x| Ok(Preparation { rho: DensityMatrix::ground(n), detunings: res.encode(x)? }))
        .collect::<Result<Vec<_>>>()?;
    run_prepared(res, &samples, res.config().tau(), readouts, seed)
}

/// Callback receiving (step index, state after that step).
pub type StepObserver<'a> = dyn FnMut(usize, &DensityMatrix) -> Result<()> + 'a;

/// MS-QRC from an arbitrary initial state; every step is read out and the
/// first `washout` rows are dropped.
pub fn run_ms_from(
    res: &Reservoir,
    rho0: &DensityMatrix,
    inputs: &[Vec<f64>],
    washout: usize,
    readouts: &[Measurer],
    seed: u64,
    mut observer: Option<&mut StepObserver<'_>>,
) -> Result<Vec<FeatureMatrix>> {
    if washout >= inputs.len() {
        return Err(QrcError::Argument(format!("washout {washout} must be below the series length {}", inputs.len())));
    }
    let mut rho = rho0.clone();
    let mut per_step = Vec::with_capacity(inputs.len() - washout);
    for (m, x) in inputs.iter().enumerate() {
        rho = res.apply_input(&rho, x)?;
        if let Some(obs) = observer.as_mut() {
            obs(m, &rho)?;
        }
        if m >= washout {
            per_step.push(read_all(readouts, &rho, seed, m)?);
        }
    }
    collect(readouts, per_step)
}

/// MS-QRC from |0…0⟩.
pub fn run_ms(res: &Reservoir, inputs: &[Vec<f64>], washout: usize, readouts: &[Measurer], seed: u64) -> Result<Vec<FeatureMatrix>> {
    run_ms_from(res, &DensityMatrix::ground(res.n_sites()), inputs, washout, readouts, seed, None)
}

/// Runs the architecture and readout described by `pipeline`.
pub fn run_pipeline(cfg: &ReservoirConfig, pipeline: &PipelineConfig, series: &InputSeries, seed: u64) -> Result<FeatureMatrix> {
    let n = cfg.n_atoms();
    pipeline.validate(n, series.len())?;
    let res = Reservoir::new(cfg)?;
    let readout = [Measurer::new(pipeline.observables(n), pipeline.measurement)?];
    match pipeline.architecture {
        Architecture::Ss => {
            let inputs = build_ss_inputs(series, pipeline.window(n), n)?;
            run_ss(&res, &inputs, &readout, seed)?.remove(0).drop_rows(pipeline.washout())
        }
        Architecture::Ms => {
            let InputSeries::Scalar(u) = series else {
                return Err(QrcError::Encoding("MS-QRC takes a scalar series".into()));
            };
            Ok(run_ms(&res, &build_ms_inputs(u, n), pipeline.washout(), &readout, seed)?.remove(0))
        }
    }
}

/// Row counts for washout / training / testing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Split {
    pub washout: usize,
    pub train: usize,
    pub test: usize,
}

impl Split {
    pub fn total(&self) -> usize {
        self.washout + self.train + self.test
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub train: FeatureMatrix,
    pub y_train: Vec<f64>,
    pub test: FeatureMatrix,
    pub y_test: Vec<f64>,
}

/// Row-aligned washout / train / test partition.
pub fn assemble(features: &FeatureMatrix, targets: &[f64], split: Split) -> Result<Dataset> {
    if features.n_rows() != targets.len() {
        return Err(QrcError::Argument(format!("{} feature rows vs {} targets", features.n_rows(), targets.len())));
    }
    if split.total() != targets.len() {
        return Err(QrcError::Argument(format!("split {split:?} does not sum to {} rows", targets.len())));
    }
    let a = split.washout;
    let b = a + split.train;
    Ok(Dataset {
        train: features.rows(a..b)?,
        y_train: targets[a..b].to_vec(),
        test: features.rows(b..targets.len())?,
        y_test: targets[b..].to_vec(),
    })
}
