//! Config-driven experiment runner behind the `rqrc` binary.
//!
//! A run reads a TOML config (or the manifest of an earlier run), applies
//! command-line overrides, validates, executes the experiment and writes
//! its CSV/JSON results next to a `manifest.json`. All randomness derives
//! from the master seed, so identical manifests give identical files.

pub mod config;
pub mod experiments;
pub mod manifest;
pub mod output;

use std::path::{Path, PathBuf};
use std::time::Instant;

pub use config::{load_config, parse_config, ExperimentConfig, ExperimentKind, LoadedConfig, ValidationReport};
pub use experiments::{run_experiment, SeedRecord, Summary};
pub use manifest::{RunManifest, RunStatus, MANIFEST_FILE};
pub use output::{OutputSink, Table};

use crate::error::{QrcError, Result};

/// Environment variable naming the default output root.
pub const OUT_DIR_ENV: &str = "RQRC_OUT_DIR";
pub const DEFAULT_OUT_ROOT: &str = "rqrc-out";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

/// Command-line overrides, applied on top of the file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub n_atoms: Option<usize>,
    pub out_dir: Option<PathBuf>,
}

/// Reads a TOML config, or a `.json` run manifest whose config snapshot is
/// reused as is.
pub fn load_input(path: &Path) -> Result<LoadedConfig> {
    if path.extension().is_some_and(|e| e == "json") {
        let m = RunManifest::load(path)?;
        return Ok(LoadedConfig { config: m.config, unknown_keys: Vec::new() });
    }
    load_config(path)
}

pub fn apply_overrides(cfg: &mut ExperimentConfig, o: &Overrides) {
    if let Some(seed) = o.seed {
        cfg.seed = seed;
    }
    if let Some(n) = o.n_atoms {
        cfg.reservoir.n_atoms = n;
        cfg.reservoir.rows = None;
    }
}

/// `--out-dir`, then the config's `out_dir`, then `$RQRC_OUT_DIR/<experiment>`,
/// then `./rqrc-out/<experiment>`.
pub fn resolve_out_dir(cfg: &ExperimentConfig, cli: Option<&Path>) -> PathBuf {
    if let Some(p) = cli {
        return p.to_path_buf();
    }
    if let Some(p) = &cfg.out_dir {
        return p.clone();
    }
    let root = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_ROOT));
    root.join(cfg.experiment.name())
}

/// Validation report including unknown keys as warnings.
pub fn validate_loaded(loaded: &LoadedConfig) -> ValidationReport {
    let mut report = loaded.config.validate();
    for k in &loaded.unknown_keys {
        report.warnings.push(format!("unknown key `{k}` ignored"));
    }
    report
}

/// Exit status for an error: 2 for bad configs or inputs, 3 for failures
/// during the computation.
pub fn exit_code(err: &QrcError) -> i32 {
    match err {
        QrcError::Config(_)
        | QrcError::Argument(_)
        | QrcError::Ingestion { .. }
        | QrcError::Geometry(_)
        | QrcError::Encoding(_)
        | QrcError::Dimension(_)
        | QrcError::TruncatedRange(_) => EXIT_INVALID,
        _ => EXIT_RUNTIME,
    }
}

/// Result of a run that got as far as creating its output directory.
#[derive(Debug)]
pub struct RunOutcome {
    pub manifest: RunManifest,
    pub out_dir: PathBuf,
    pub error: Option<QrcError>,
}

/// Validates and runs. An `Err` means nothing ran; a failure during the
/// experiment is reported in the outcome, with a partial manifest on disk.
pub fn execute(mut loaded: LoadedConfig, overrides: &Overrides) -> Result<RunOutcome> {
    apply_overrides(&mut loaded.config, overrides);
    let report = validate_loaded(&loaded);
    if !report.is_ok() {
        return Err(QrcError::Config(report.errors.join("; ")));
    }
    for w in &report.warnings {
        log::warn!("{w}");
    }
    let out_dir = resolve_out_dir(&loaded.config, overrides.out_dir.as_deref());
    let mut sink = OutputSink::create(&out_dir)?;
    let mut cfg = loaded.config;
    cfg.out_dir = Some(out_dir.clone());
    let start = Instant::now();
    let result = run_experiment(&cfg, &mut sink);
    let (status, error, summary) = match result {
        Ok(s) => (RunStatus::Ok, None, s),
        Err(e) => (RunStatus::Failed, Some(e), Summary::new()),
    };
    let manifest = RunManifest {
        seeds: experiments::seed_record(&cfg),
        config: cfg,
        code_version: manifest::CODE_VERSION.to_string(),
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        threads: rayon::current_num_threads(),
        outputs: sink.files().to_vec(),
        status,
        error: error.as_ref().map(|e| e.to_string()),
        warnings: report.warnings,
        summary,
    };
    std::fs::write(out_dir.join(MANIFEST_FILE), manifest.to_json()?)?;
    Ok(RunOutcome { manifest, out_dir, error })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(experiment: &str, extra: &str) -> LoadedConfig {
        let loaded =
            parse_config(&format!("experiment = \"{experiment}\"\nseed = 5\n{extra}\n[reservoir]\nn_atoms = 3\ntau_omega = 2.0\n")).unwrap();
        assert!(loaded.unknown_keys.is_empty());
        loaded
    }

    #[test]
    fn out_dir_precedence() {
        let mut cfg = small("otoc", "").config;
        assert_eq!(resolve_out_dir(&cfg, Some(Path::new("/a"))), PathBuf::from("/a"));
        cfg.out_dir = Some("/b".into());
        assert_eq!(resolve_out_dir(&cfg, Some(Path::new("/a"))), PathBuf::from("/a"));
        assert_eq!(resolve_out_dir(&cfg, None), PathBuf::from("/b"));
        cfg.out_dir = None;
        assert!(resolve_out_dir(&cfg, None).ends_with("otoc"));
    }

    #[test]
    fn overrides_replace_file_values() {
        let mut cfg = parse_config("experiment = \"otoc\"\n[reservoir]\nn_atoms = 4\nrows = [2, 2]\n").unwrap().config;
        apply_overrides(&mut cfg, &Overrides { seed: Some(9), n_atoms: Some(5), out_dir: None });
        assert_eq!((cfg.seed, cfg.reservoir.n_atoms, cfg.reservoir.rows.clone()), (9, 5, None));
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&QrcError::Config("x".into())), EXIT_INVALID);
        assert_eq!(exit_code(&QrcError::Ingestion { line: 1, reason: "x".into() }), EXIT_INVALID);
        assert_eq!(exit_code(&QrcError::Numeric("x".into())), EXIT_RUNTIME);
        assert_eq!(exit_code(&QrcError::Integration { time_reached: 1.0, reason: "x".into() }), EXIT_RUNTIME);
    }

    #[test]
    fn invalid_config_runs_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let loaded = small("otoc", "[otoc]\ntau_omegas = []\n");
        let o = Overrides { out_dir: Some(dir.path().join("x")), ..Overrides::default() };
        assert!(matches!(execute(loaded, &o), Err(QrcError::Config(_))));
        assert!(!dir.path().join("x").exists());
    }

    #[test]
    fn otoc_run_writes_manifest_and_reruns_identically() {
        let dir = tempfile::tempdir().unwrap();
        let loaded = small("otoc", "n_realizations = 2\n[otoc]\ntau_omegas = [0.0, 1.0, 2.0]\n");
        let o = Overrides { out_dir: Some(dir.path().join("a")), ..Overrides::default() };
        let out = execute(loaded, &o).unwrap();
        assert!(out.error.is_none());
        assert_eq!(out.manifest.status, RunStatus::Ok);
        assert_eq!(out.manifest.seeds.disorder.len(), 2);
        let text = std::fs::read_to_string(out.out_dir.join("otoc.csv")).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("tau_omega,F,stddev"));
        let first: Vec<f64> = lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
        assert!((first[1] - 1.0).abs() < 1e-9 && first[2] < 1e-9);

        let again = load_input(&out.out_dir.join(MANIFEST_FILE)).unwrap();
        let o2 = Overrides { out_dir: Some(dir.path().join("b")), ..Overrides::default() };
        let out2 = execute(again, &o2).unwrap();
        assert_eq!(out.manifest.outputs, out2.manifest.outputs);
    }
}
