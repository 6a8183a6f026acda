//! The experiments behind each config `experiment` name.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ExperimentKind, LambdaChoice, ScanTask, ShadowKind};
use super::output::{OutputSink, Table};
use crate::capacity::{ipc, IpcOptions};
use crate::diagnostics::{convergence_probe, otoc, phase_diagram, realization_seed};
use crate::engine::{
    assemble, build_ms_inputs, build_ss_inputs, evolve_prepared, read_states, run_ms_from, run_prepared, run_ss, Architecture,
    FeatureMatrix, InputSeries, Preparation, Split,
};
use crate::error::{QrcError, Result};
use crate::learning::{
    accuracy, cross_validate_lambda, fit_classifier, fit_features, mean_predictor_nrmse, nrmse, one_hot, ridge_predict, Classifier,
    CV_FOLDS, LAMBDA_GRID,
};
use crate::measurement::{MeasurementMode, Measurer, ObservableSet, DEFAULT_EPSILON};
use crate::quantum::DensityMatrix;
use crate::reservoir::{Reservoir, ReservoirConfig};
use crate::rng::{derive_seed, rng_for, stream};
use crate::row;
use crate::tasks::{
    entanglement_detunings, gen_entanglement_dataset, gen_narma2, iris_bundled, load_iris, narma_reservoir_input,
    prepare_entanglement_initial_state, stratified_split, write_entanglement_csv,
};

/// Headline numbers of a run, keyed `part.measurement.metric`.
pub type Summary = BTreeMap<String, f64>;

/// Seeds that pin down every random draw of a run.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub master: u64,
    /// Disorder seed of each realization.
    pub disorder: Vec<u64>,
}

pub fn seed_record(cfg: &ExperimentConfig) -> SeedRecord {
    SeedRecord { master: cfg.seed, disorder: (0..cfg.n_realizations).map(|r| realization_seed(cfg.seed, r)).collect() }
}

fn reservoir_config(cfg: &ExperimentConfig, r: usize) -> Result<ReservoirConfig> {
    cfg.reservoir.to_config(realization_seed(cfg.seed, r))
}

fn arch_name(a: Architecture) -> &'static str {
    match a {
        Architecture::Ss => "ss",
        Architecture::Ms => "ms",
    }
}

fn mode_name(m: &MeasurementMode) -> &'static str {
    match m {
        MeasurementMode::Exact => "exact",
        MeasurementMode::Randomized { .. } => "randomized",
        MeasurementMode::Derandomized { .. } => "derandomized",
    }
}

fn shadow_mode(kind: ShadowKind, n_shots: usize) -> MeasurementMode {
    match kind {
        ShadowKind::Randomized => MeasurementMode::Randomized { n_shots },
        ShadowKind::Derandomized => MeasurementMode::Derandomized { n_shots, epsilon: DEFAULT_EPSILON },
    }
}

/// A readout slot: exact once, finite-shot modes once per repeat. Each slot
/// index draws its own shot stream.
struct Readout {
    mode: MeasurementMode,
    repeat: usize,
    measurer: Measurer,
}

fn readouts(obs: &ObservableSet, modes: &[MeasurementMode], repeats: usize) -> Result<Vec<Readout>> {
    let mut out = Vec::new();
    for &mode in modes {
        let n = if mode.is_exact() { 1 } else { repeats };
        let measurer = Measurer::new(obs.clone(), mode)?;
        for repeat in 0..n {
            out.push(Readout { mode, repeat, measurer: measurer.clone() });
        }
    }
    Ok(out)
}

fn measurers(slots: &[Readout]) -> Vec<Measurer> {
    slots.iter().map(|s| s.measurer.clone()).collect()
}

fn choose_lambda(choice: LambdaChoice, v: &DMatrix<f64>, y: &DMatrix<f64>, free: &[usize]) -> Result<f64> {
    match choice {
        LambdaChoice::Fixed(l) => Ok(l),
        LambdaChoice::Named(_) => Ok(cross_validate_lambda(v, y, &LAMBDA_GRID, CV_FOLDS, free)?.best_lambda),
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Runs the configured experiment, writing result files into `sink`.
pub fn run_experiment(cfg: &ExperimentConfig, sink: &mut OutputSink) -> Result<Summary> {
    match cfg.experiment {
        ExperimentKind::PhaseDiagram => run_phase_diagram(cfg, sink),
        ExperimentKind::Otoc => run_otoc(cfg, sink),
        ExperimentKind::Convergence => run_convergence(cfg, sink),
        ExperimentKind::IpcScan => run_ipc_scan(cfg, sink),
        ExperimentKind::Iris | ExperimentKind::Entanglement => run_classification(cfg, sink),
        ExperimentKind::Narma2 => run_narma2(cfg, sink),
        ExperimentKind::ShotsScan => run_shots_scan(cfg, sink),
    }
}

fn run_phase_diagram(cfg: &ExperimentConfig, sink: &mut OutputSink) -> Result<Summary> {
    let p = &cfg.phase_diagram;
    let points = phase_diagram(&reservoir_config(cfg, 0)?, &p.deltas, &p.a_over_rb, cfg.n_realizations, cfg.seed)?;
    let mut t = Table::new(&["delta_over_omega", "a_over_rb", "mean_r", "std_err", "n_realizations"]);
    let mut summary = Summary::new();
    for q in &points {
        t.push(row![q.delta_over_omega, q.a_over_rb, q.mean_r, q.std_err, q.n_realizations])?;
        summary.insert(format!("r.{}.{}", q.delta_over_omega, q.a_over_rb), q.mean_r);
    }
    sink.write_table("phase_diagram.csv", &t)?;
    Ok(summary)
}

fn run_otoc(cfg: &ExperimentConfig, sink: &mut OutputSink) -> Result<Summary> {
    let points = otoc(&reservoir_config(cfg, 0)?, &cfg.otoc.tau_omegas, cfg.n_realizations, cfg.seed)?;
    let mut t = Table::new(&["tau_omega", "F", "stddev"]);
    let mut summary = Summary::new();
    for q in &points {
        t.push(row![q.tau_omega, q.mean, q.stddev])?;
        summary.insert(format!("F.{}", q.tau_omega), q.mean);
    }
    sink.write_table("otoc.csv", &t)?;
    Ok(summary)
}

/// Uniform[−1, 1] scalar inputs from the input stream of the master seed.
pub fn uniform_inputs(seed: u64, length: usize) -> Vec<f64> {
    let mut rng = rng_for(seed, &[stream::INPUTS]);
    (0..length).map(|_| rng.random_range(-1.0..=1.0)).collect()
}

/// Trace distance between trajectories from |0…0⟩ and a Hilbert–Schmidt
/// random state, averaged over disorder realizations.
fn run_convergence(cfg: &ExperimentConfig, sink: &mut OutputSink) -> Result<Summary> {
    let n = cfg.reservoir.n_atoms;
    let inputs = build_ms_inputs(&uniform_inputs(cfg.seed, cfg.convergence.n_steps), n);
    let rho_prime = DensityMatrix::random_hilbert_schmidt(n, &mut rng_for(cfg.seed, &[stream::INITIAL_STATE]));
    let mut sum = vec![0.0; inputs.len()];
    for r in 0..cfg.n_realizations {
        let res = Reservoir::new(&reservoir_config(cfg, r)?)?;
        let d = convergence_probe(&res, &inputs, &DensityMatrix::ground(n), &rho_prime)?;
        sum.iter_mut().zip(&d).for_each(|(s, v)| *s += v);
    }
    let avg: Vec<f64> = sum.iter().map(|s| s / cfg.n_realizations as f64).collect();
    let mut t = Table::new(&["step", "trace_distance"]);
    for (m, d) in avg.iter().enumerate() {
        t.push(row![m + 1, *d])?;
    }
    sink.write_table("convergence.csv", &t)?;
    let mut summary = Summary::new();
    summary.insert("trace_distance.final".into(), *avg.last().unwrap_or(&0.0));
    summary.insert(
        "trace_distance.max_increase".into(),
        avg.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max).max(0.0),
    );
    Ok(summary)
}

fn run_ipc_scan(cfg: &ExperimentConfig, sink: &mut OutputSink) -> Result<Summary> {
    let q = &cfg.ipc_scan;
    let n = cfg.reservoir.n_atoms;
    let opts = IpcOptions {
        max_degree: q.max_degree,
        max_delay: q.max_delay,
        n_surrogates: q.n_surrogates,
        min_shift: q.min_shift,
        percentile: q.percentile,
    };
    let u = uniform_inputs(cfg.seed, q.length);
    let mut modes = vec![MeasurementMode::Exact];
    modes.extend(q.shots.iter().map(|&s| shadow_mode(q.shadow, s)));
    let obs = cfg.observables()?;
    let slots = readouts(&obs, &modes, 1)?;
    let mut table = Table::new(&["realization", "architecture", "measurement", "n_shots", "rank", "degree", "capacity"]);
    let mut totals = Table::new(&["realization", "architecture", "measurement", "n_shots", "rank", "total", "nonlinear"]);
    let mut acc: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in 0..cfg.n_realizations {
        let res = Reservoir::new(&reservoir_config(cfg, r)?)?;
        let shot_seed = derive_seed(cfg.seed, &[stream::SHOTS, r as u64]);
        for arch in cfg.architectures(&q.architectures) {
            let fms = match arch {
                Architecture::Ss => {
                    let window = cfg.pipeline_for(arch).window(n);
                    let x = build_ss_inputs(&InputSeries::Scalar(u.clone()), window, n)?;
                    run_ss(&res, &x, &measurers(&slots), shot_seed)?
                        .into_iter()
                        .map(|f| f.drop_rows(q.washout))
                        .collect::<Result<Vec<_>>>()?
                }
                Architecture::Ms => {
                    run_ms_from(&res, &DensityMatrix::ground(n), &build_ms_inputs(&u, n), q.washout, &measurers(&slots), shot_seed, None)?
                }
            };
            for (slot, f) in slots.iter().zip(&fms) {
                let report = ipc(f.matrix(), &u, q.washout, &opts)?;
                let shots = slot.mode.n_shots().unwrap_or(0);
                let label = slot.mode.label();
                for (d, c) in report.per_degree.iter().enumerate() {
                    table.push(row![r, arch_name(arch), mode_name(&slot.mode), shots, report.rank, d + 1, *c])?;
                }
                totals.push(row![r, arch_name(arch), mode_name(&slot.mode), shots, report.rank, report.total, report.nonlinear()])?;
                sink.write_json(&format!("capacity_{}_{label}_r{r}.json", arch_name(arch)), &report)?;
                let key = format!("{}.{label}", arch_name(arch));
                acc.entry(format!("{key}.total")).or_default().push(report.total);
                acc.entry(format!("{key}.nonlinear")).or_default().push(report.nonlinear());
                acc.entry(format!("{key}.rank")).or_default().push(report.rank as f64);
            }
        }
    }
    sink.write_table("ipc.csv", &table)?;
    sink.write_table("ipc_totals.csv", &totals)?;
    Ok(acc.into_iter().map(|(k, v)| (k, mean(&v))).collect())
}

/// Prepared samples, labels and evolution time of a classification task.
struct ClassTask {
    preps: Vec<Preparation>,
    labels: Vec<usize>,
    duration: f64,
}

fn class_task(cfg: &ExperimentConfig, task: ScanTask, rcfg: &ReservoirConfig, sink: Option<&mut OutputSink>) -> Result<ClassTask> {
    let n = cfg.reservoir.n_atoms;
    match task {
        ScanTask::Iris => {
            let data = match &cfg.iris.data {
                Some(path) => load_iris(path)?,
                None => iris_bundled()?,
            };
            let res = Reservoir::new(rcfg)?;
            let preps = data
                .features
                .iter()
                .map(|x| Ok(Preparation { rho: DensityMatrix::ground(n), detunings: res.encode(x)? }))
                .collect::<Result<Vec<_>>>()?;
            Ok(ClassTask { preps, labels: data.labels, duration: rcfg.tau() })
        }
        ScanTask::Entanglement => {
            let e = &cfg.entanglement;
            let data = gen_entanglement_dataset(e.n_samples, cfg.seed)?;
            if let Some(sink) = sink {
                sink.write_with("dataset.csv", |w| write_entanglement_csv(&data, w))?;
            }
            let preps = data
                .iter()
                .map(|s| {
                    Ok(Preparation {
                        rho: prepare_entanglement_initial_state(s, n)?,
                        detunings: entanglement_detunings(rcfg, s.alpha, e.convention),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ClassTask { preps, labels: data.iter().map(|s| s.label()).collect(), duration: e.tau_omega / rcfg.omega })
        }
    }
}

struct Fitted {
    classifier: Classifier,
    train_accuracy: f64,
    test_accuracy: f64,
    test_predictions: Vec<usize>,
}

fn fit_and_score(f: &FeatureMatrix, labels: &[usize], train: &[usize], test: &[usize], lambda: LambdaChoice) -> Result<Fitted> {
    let (ftr, fte) = (f.select(train)?, f.select(test)?);
    let ytr: Vec<usize> = train.iter().map(|&i| labels[i]).collect();
    let yte: Vec<usize> = test.iter().map(|&i| labels[i]).collect();
    let free = [f.const_column()];
    let classes: Vec<usize> = ytr.iter().copied().collect::<std::collections::BTreeSet<_>>().into_iter().collect();
    let l = choose_lambda(lambda, ftr.matrix(), &one_hot(&ytr, &classes), &free)?;
    let classifier = fit_classifier(ftr.matrix(), &ytr, l, &free)?;
    let test_predictions = classifier.classify(fte.matrix())?;
    Ok(Fitted {
        train_accuracy: accuracy(&classifier.classify(ftr.matrix())?, &ytr)?,
        test_accuracy: accuracy(&test_predictions, &yte)?,
        classifier,
        test_predictions,
    })
}

#[derive(Serialize)]
struct ClassifierWeights {
    lambda: f64,
    classes: Vec<usize>,
    /// class → feature name → weight
    weights: BTreeMap<String, BTreeMap<String, f64>>,
}

fn classifier_weights(c: &Classifier, names: &[String]) -> ClassifierWeights {
    let weights = c
        .classes
        .iter()
        .enumerate()
        .map(|(k, cls)| (cls.to_string(), names.iter().enumerate().map(|(j, n)| (n.clone(), c.weights[(j, k)])).collect()))
        .collect();
    ClassifierWeights { lambda: c.lambda, classes: c.classes.clone(), weights }
}

fn run_classification(cfg: &ExperimentConfig, sink: &mut OutputSink) -> Result<Summary> {
    let (task, test_fraction, lambda, repeats) = match cfg.experiment {
        ExperimentKind::Iris => (ScanTask::Iris, cfg.iris.test_fraction, cfg.iris.lambda, cfg.iris.repeats),
        _ => (ScanTask::Entanglement, cfg.entanglement.test_fraction, cfg.entanglement.lambda, cfg.entanglement.repeats),
    };
    let obs = cfg.observables()?;
    let slots = readouts(&obs, &cfg.readout_modes(), repeats)?;
    let mut acc_table = Table::new(&["realization", "measurement", "n_shots", "repeat", "lambda", "train_accuracy", "test_accuracy"]);
    let mut pred_table = Table::new(&["realization", "measurement", "n_shots", "repeat", "sample", "label", "predicted"]);
    let mut acc: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in 0..cfg.n_realizations {
        let rcfg = reservoir_config(cfg, r)?;
        let ct = class_task(cfg, task, &rcfg, if r == 0 { Some(&mut *sink) } else { None })?;
        let (train, test) = stratified_split(&ct.labels, test_fraction, cfg.seed)?;
        let res = Reservoir::new(&rcfg)?;
        let fms = run_prepared(&res, &ct.preps, ct.duration, &measurers(&slots), derive_seed(cfg.seed, &[stream::SHOTS, r as u64]))?;
        for (slot, f) in slots.iter().zip(&fms) {
            let fit = fit_and_score(f, &ct.labels, &train, &test, lambda)?;
            let shots = slot.mode.n_shots().unwrap_or(0);
            let mode = mode_name(&slot.mode);
            acc_table.push(row![r, mode, shots, slot.repeat, fit.classifier.lambda, fit.train_accuracy, fit.test_accuracy])?;
            for (&i, &p) in test.iter().zip(&fit.test_predictions) {
                pred_table.push(row![r, mode, shots, slot.repeat, i, ct.labels[i], p])?;
            }
            acc.entry(format!("{}.train_accuracy", slot.mode.label())).or_default().push(fit.train_accuracy);
            acc.entry(format!("{}.test_accuracy", slot.mode.label())).or_default().push(fit.test_accuracy);
            if r == 0 && slot.mode.is_exact() {
                sink.write_json("weights.json", &classifier_weights(&fit.classifier, f.names()))?;
            }
        }
    }
    sink.write_table("accuracy.csv", &acc_table)?;
    sink.write_table("predictions.csv", &pred_table)?;
    Ok(acc.into_iter().map(|(k, v)| (k, mean(&v))).collect())
}

fn run_narma2(cfg: &ExperimentConfig, sink: &mut OutputSink) -> Result<Summary> {
    let q = &cfg.narma2;
    let n = cfg.reservoir.n_atoms;
    let split = Split { washout: q.split[0], train: q.split[1], test: q.split[2] };
    // one extra step so that M input/target pairs remain after the shift
    let series = gen_narma2(q.length + 1, cfg.seed, (0.0, 0.0))?;
    let (u, y) = series.task_pairs();
    let x = narma_reservoir_input(&u);
    let obs = cfg.observables()?;
    let slots = readouts(&obs, &cfg.readout_modes(), q.repeats)?;
    let mut nrmse_table = Table::new(&[
        "realization", "architecture", "measurement", "n_shots", "repeat", "lambda", "nrmse_train", "nrmse_test", "baseline",
    ]);
    let mut pred_table =
        Table::new(&["realization", "architecture", "measurement", "n_shots", "repeat", "step", "split", "target", "prediction"]);
    let mut acc: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in 0..cfg.n_realizations {
        let res = Reservoir::new(&reservoir_config(cfg, r)?)?;
        let shot_seed = derive_seed(cfg.seed, &[stream::SHOTS, r as u64]);
        for arch in cfg.architectures(&q.architectures) {
            let fms = match arch {
                Architecture::Ss => {
                    let window = cfg.pipeline_for(arch).window(n);
                    run_ss(&res, &build_ss_inputs(&InputSeries::Scalar(x.clone()), window, n)?, &measurers(&slots), shot_seed)?
                }
                Architecture::Ms => {
                    run_ms_from(&res, &DensityMatrix::ground(n), &build_ms_inputs(&x, n), 0, &measurers(&slots), shot_seed, None)?
                }
            };
            for (slot, f) in slots.iter().zip(&fms) {
                let d = assemble(f, &y, split)?;
                let yt = DMatrix::from_column_slice(d.y_train.len(), 1, &d.y_train);
                let l = choose_lambda(q.lambda, d.train.matrix(), &yt, &[d.train.const_column()])?;
                let model = fit_features(&d.train, &d.y_train, l)?;
                let p_train = ridge_predict(&model, d.train.matrix())?;
                let p_test = ridge_predict(&model, d.test.matrix())?;
                let (e_train, e_test) = (nrmse(&p_train, &d.y_train)?, nrmse(&p_test, &d.y_test)?);
                let baseline = mean_predictor_nrmse(&d.y_train, &d.y_test)?;
                let shots = slot.mode.n_shots().unwrap_or(0);
                let (a, mode) = (arch_name(arch), mode_name(&slot.mode));
                nrmse_table.push(row![r, a, mode, shots, slot.repeat, l, e_train, e_test, baseline])?;
                let parts = [("train", split.washout, &d.y_train, &p_train), ("test", split.washout + split.train, &d.y_test, &p_test)];
                for (name, offset, ys, ps) in parts {
                    for (k, (t, p)) in ys.iter().zip(ps.iter()).enumerate() {
                        pred_table.push(row![r, a, mode, shots, slot.repeat, offset + k, name, *t, *p])?;
                    }
                }
                let key = format!("{a}.{}", slot.mode.label());
                acc.entry(format!("{key}.nrmse_train")).or_default().push(e_train);
                acc.entry(format!("{key}.nrmse_test")).or_default().push(e_test);
                acc.entry(format!("{key}.baseline")).or_default().push(baseline);
            }
        }
    }
    sink.write_table("nrmse.csv", &nrmse_table)?;
    sink.write_table("predictions.csv", &pred_table)?;
    Ok(acc.into_iter().map(|(k, v)| (k, mean(&v))).collect())
}

/// ‖V̂ − V‖_F / √rows over the signal columns.
pub fn signal_error(estimate: &FeatureMatrix, exact: &FeatureMatrix) -> Result<f64> {
    if estimate.n_rows() != exact.n_rows() || estimate.n_cols() != exact.n_cols() {
        return Err(QrcError::Dimension("feature matrices differ in shape".into()));
    }
    Ok((estimate.signals() - exact.signals()).norm() / (exact.n_rows() as f64).sqrt())
}

fn run_shots_scan(cfg: &ExperimentConfig, sink: &mut OutputSink) -> Result<Summary> {
    let s = &cfg.shots_scan;
    let lambda = match s.task {
        ScanTask::Iris => cfg.iris.lambda,
        ScanTask::Entanglement => cfg.entanglement.lambda,
    };
    let test_fraction = match s.task {
        ScanTask::Iris => cfg.iris.test_fraction,
        ScanTask::Entanglement => cfg.entanglement.test_fraction,
    };
    let obs = cfg.observables()?;
    let mut table = Table::new(&["realization", "mode", "n_shots", "repeat", "train_accuracy", "test_accuracy", "frobenius_error"]);
    let mut acc: BTreeMap<(String, usize), (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for r in 0..cfg.n_realizations {
        let rcfg = reservoir_config(cfg, r)?;
        let ct = class_task(cfg, s.task, &rcfg, None)?;
        let (train, test) = stratified_split(&ct.labels, test_fraction, cfg.seed)?;
        let states = evolve_prepared(&Reservoir::new(&rcfg)?, &ct.preps, ct.duration)?;
        let exact = read_states(&states, &[Measurer::new(obs.clone(), MeasurementMode::Exact)?], 0)?.remove(0);
        let fit = fit_and_score(&exact, &ct.labels, &train, &test, lambda)?;
        table.push(row![r, "exact", 0usize, 0usize, fit.train_accuracy, fit.test_accuracy, 0.0])?;
        let e = acc.entry(("exact".into(), 0)).or_default();
        e.0.push(fit.test_accuracy);
        e.1.push(0.0);
        for (mi, &kind) in s.modes.iter().enumerate() {
            for &shots in &s.shots {
                let mode = shadow_mode(kind, shots);
                let measurer = [Measurer::new(obs.clone(), mode)?];
                for k in 0..s.repeats {
                    let seed = derive_seed(cfg.seed, &[stream::SHOTS, r as u64, mi as u64, shots as u64, k as u64]);
                    let f = read_states(&states, &measurer, seed)?.remove(0);
                    let fit = fit_and_score(&f, &ct.labels, &train, &test, lambda)?;
                    let err = signal_error(&f, &exact)?;
                    table.push(row![r, mode_name(&mode), shots, k, fit.train_accuracy, fit.test_accuracy, err])?;
                    let e = acc.entry((mode_name(&mode).to_string(), shots)).or_default();
                    e.0.push(fit.test_accuracy);
                    e.1.push(err);
                }
            }
        }
    }
    let mut summary_table = Table::new(&["mode", "n_shots", "mean_test_accuracy", "std_test_accuracy", "mean_frobenius_error"]);
    let mut summary = Summary::new();
    for ((mode, shots), (accs, errs)) in &acc {
        let m = mean(accs);
        let sd = (accs.iter().map(|a| (a - m).powi(2)).sum::<f64>() / accs.len() as f64).sqrt();
        summary_table.push(row![mode.as_str(), *shots, m, sd, mean(errs)])?;
        summary.insert(format!("{mode}-{shots}.test_accuracy"), m);
        summary.insert(format!("{mode}-{shots}.frobenius_error"), mean(errs));
    }
    sink.write_table("shots_scan.csv", &table)?;
    sink.write_table("shots_scan_summary.csv", &summary_table)?;
    Ok(summary)
}
