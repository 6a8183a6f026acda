//! Iris flower classification data.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use sha2::{Digest, Sha256};

use crate::error::{QrcError, Result};
use crate::rng::{rng_for, stream};

const IRIS_CSV: &str = include_str!("../../data/iris.csv");
pub const IRIS_SHA256: &str = "09d1766be79ec606b4c045059bc4b0d3e6a693b61d1cdfc6bdd45af42531df65";
pub const IRIS_TEST_FRACTION: f64 = 0.2;

#[derive(Clone, Debug, PartialEq)]
pub struct IrisData {
    /// Per-column rescaled to [−1, 1].
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub class_names: Vec<String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Parses `f1,f2,f3,f4,class` rows after a header line. Class names are
/// numbered in order of first appearance.
pub fn parse_iris(text: &str) -> Result<IrisData> {
    let mut raw = Vec::new();
    let mut labels = Vec::new();
    let mut classes: BTreeMap<String, usize> = BTreeMap::new();
    let mut class_names = Vec::new();
    for (k, line) in text.lines().enumerate().skip(1) {
        let lineno = k + 1;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 5 {
            return Err(QrcError::Ingestion { line: lineno, reason: format!("expected 5 fields, got {}", f.len()) });
        }
        let row = f[..4]
            .iter()
            .map(|s| match s.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(QrcError::Ingestion { line: lineno, reason: format!("bad number {s:?}") }),
            })
            .collect::<Result<Vec<_>>>()?;
        if f[4].is_empty() {
            return Err(QrcError::Ingestion { line: lineno, reason: "empty class".into() });
        }
        let next = classes.len();
        let id = *classes.entry(f[4].to_string()).or_insert_with(|| {
            class_names.push(f[4].to_string());
            next
        });
        raw.push(row);
        labels.push(id);
    }
    if raw.is_empty() {
        return Err(QrcError::Ingestion { line: 1, reason: "no data rows".into() });
    }
    Ok(IrisData { features: rescale_columns(&raw)?, labels, class_names })
}

/// Affine per-column map onto [−1, 1].
pub fn rescale_columns(rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let cols = rows[0].len();
    let mut lo = vec![f64::INFINITY; cols];
    let mut hi = vec![f64::NEG_INFINITY; cols];
    for r in rows {
        for j in 0..cols {
            lo[j] = lo[j].min(r[j]);
            hi[j] = hi[j].max(r[j]);
        }
    }
    if let Some(j) = (0..cols).find(|&j| !(hi[j] > lo[j])) {
        return Err(QrcError::Encoding(format!("feature column {j} is constant")));
    }
    Ok(rows.iter().map(|r| (0..cols).map(|j| 2.0 * (r[j] - lo[j]) / (hi[j] - lo[j]) - 1.0).collect()).collect())
}

pub fn load_iris(path: &Path) -> Result<IrisData> {
    parse_iris(&std::fs::read_to_string(path)?)
}

/// The bundled 150-sample fixture, checksum-verified.
pub fn iris_bundled() -> Result<IrisData> {
    let digest = sha256_hex(IRIS_CSV.as_bytes());
    if digest != IRIS_SHA256 {
        return Err(QrcError::Ingestion { line: 0, reason: format!("bundled iris data checksum {digest} does not match") });
    }
    parse_iris(IRIS_CSV)
}

/// Stratified split: round(`test_fraction` · n_c) test samples per class,
/// shuffled with the split stream of `seed`. Returns (train, test) indices.
pub fn stratified_split(labels: &[usize], test_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(0.0..1.0).contains(&test_fraction) {
        return Err(QrcError::Argument(format!("test fraction {test_fraction} outside [0, 1)")));
    }
    let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        by_class.entry(l).or_default().push(i);
    }
    let mut rng = rng_for(seed, &[stream::SPLIT]);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for idx in by_class.values_mut() {
        idx.shuffle(&mut rng);
        let k = (test_fraction * idx.len() as f64).round() as usize;
        test.extend_from_slice(&idx[..k]);
        train.extend_from_slice(&idx[k..]);
    }
    train.shuffle(&mut rng);
    test.shuffle(&mut rng);
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_composition() {
        let d = iris_bundled().unwrap();
        assert_eq!(d.features.len(), 150);
        assert_eq!(d.class_names.len(), 3);
        for c in 0..3 {
            assert_eq!(d.labels.iter().filter(|&&l| l == c).count(), 50);
        }
        for j in 0..4 {
            let col: Vec<f64> = d.features.iter().map(|r| r[j]).collect();
            assert_eq!(col.iter().copied().fold(f64::INFINITY, f64::min), -1.0);
            assert_eq!(col.iter().copied().fold(f64::NEG_INFINITY, f64::max), 1.0);
        }
    }

    #[test]
    fn split_is_stratified_and_deterministic() {
        let d = iris_bundled().unwrap();
        let (train, test) = stratified_split(&d.labels, IRIS_TEST_FRACTION, 11).unwrap();
        assert_eq!((train.len(), test.len()), (120, 30));
        for c in 0..3 {
            assert_eq!(test.iter().filter(|&&i| d.labels[i] == c).count(), 10);
        }
        let mut all: Vec<usize> = train.iter().chain(&test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..150).collect::<Vec<_>>());
        assert_eq!(stratified_split(&d.labels, IRIS_TEST_FRACTION, 11).unwrap(), (train, test));
    }

    #[test]
    fn malformed_rows_report_line() {
        let text = "a,b,c,d,e\n1,2,3,4,x\n1,2,oops,4,y\n";
        match parse_iris(text) {
            Err(QrcError::Ingestion { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_iris("h\n1,2,3,x\n"), Err(QrcError::Ingestion { line: 2, .. })));
    }

    #[test]
    fn loads_from_path() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("iris.csv");
        std::fs::write(&p, IRIS_CSV).unwrap();
        assert_eq!(load_iris(&p).unwrap(), iris_bundled().unwrap());
    }
}
