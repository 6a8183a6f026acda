//! Linear readout: ridge regression, one-vs-all classification and metrics.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::engine::FeatureMatrix;
use crate::error::{QrcError, Result};

pub const DEFAULT_LAMBDA: f64 = 1e-6;
pub const LAMBDA_GRID: [f64; 8] = [1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1];
pub const CV_FOLDS: usize = 5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RidgeModel {
    pub weights: Vec<f64>,
    pub lambda: f64,
    /// Set when λ = 0 met a rank-deficient system and the minimum-norm
    /// solution was returned.
    pub rank_deficient: bool,
}

fn check_rows(v: &DMatrix<f64>, n: usize) -> Result<()> {
    if v.nrows() != n {
        return Err(QrcError::Dimension(format!("{} feature rows vs {n} targets", v.nrows())));
    }
    if v.nrows() == 0 || v.ncols() == 0 {
        return Err(QrcError::Dimension("empty design matrix".into()));
    }
    Ok(())
}

fn min_norm_solve(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<(DMatrix<f64>, bool)> {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let tol = smax * f64::EPSILON * a.nrows().max(a.ncols()) as f64;
    let rank = svd.singular_values.iter().filter(|&&s| s > tol).count();
    let x = svd.solve(b, tol).map_err(|e| QrcError::Numeric(e.to_string()))?;
    Ok((x, rank < a.ncols().min(a.nrows()) || rank < a.ncols()))
}

/// Solves (VᵀV + λP) W = VᵀY column by column, with P the identity except
/// on `free` columns (left unpenalized). λ = 0 uses the SVD least-squares
/// solution instead of the normal equations.
pub fn ridge_fit_multi(v: &DMatrix<f64>, y: &DMatrix<f64>, lambda: f64, free: &[usize]) -> Result<(DMatrix<f64>, bool)> {
    check_rows(v, y.nrows())?;
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(QrcError::Argument(format!("lambda must be non-negative, got {lambda}")));
    }
    if let Some(&c) = free.iter().find(|&&c| c >= v.ncols()) {
        return Err(QrcError::Dimension(format!("free column {c} outside {} columns", v.ncols())));
    }
    if lambda == 0.0 {
        return min_norm_solve(v, y);
    }
    let mut a = v.transpose() * v;
    for j in 0..v.ncols() {
        if !free.contains(&j) {
            a[(j, j)] += lambda;
        }
    }
    let rhs = v.transpose() * y;
    match a.clone().cholesky() {
        Some(ch) => Ok((ch.solve(&rhs), false)),
        // unpenalized columns can leave the system singular
        None => min_norm_solve(&a, &rhs),
    }
}

/// Ridge fit with every column penalized.
pub fn ridge_fit(v: &DMatrix<f64>, y: &[f64], lambda: f64) -> Result<RidgeModel> {
    ridge_fit_free(v, y, lambda, &[])
}

pub fn ridge_fit_free(v: &DMatrix<f64>, y: &[f64], lambda: f64, free: &[usize]) -> Result<RidgeModel> {
    let (w, rank_deficient) = ridge_fit_multi(v, &DMatrix::from_column_slice(y.len(), 1, y), lambda, free)?;
    Ok(RidgeModel { weights: w.column(0).iter().copied().collect(), lambda, rank_deficient })
}

/// Ridge fit on a feature matrix; the constant column is not penalized.
pub fn fit_features(f: &FeatureMatrix, y: &[f64], lambda: f64) -> Result<RidgeModel> {
    ridge_fit_free(f.matrix(), y, lambda, &[f.const_column()])
}

/// ỹ = V w
pub fn ridge_predict(model: &RidgeModel, v: &DMatrix<f64>) -> Result<Vec<f64>> {
    if v.ncols() != model.weights.len() {
        return Err(QrcError::Dimension(format!("{} features for {} weights", v.ncols(), model.weights.len())));
    }
    Ok((v * DVector::from_column_slice(&model.weights)).iter().copied().collect())
}

/// Weights keyed by feature name, as JSON.
pub fn weights_json(model: &RidgeModel, names: &[String]) -> Result<String> {
    if names.len() != model.weights.len() {
        return Err(QrcError::Dimension("feature names do not match the weights".into()));
    }
    let map: serde_json::Map<String, serde_json::Value> =
        names.iter().zip(&model.weights).map(|(n, w)| (n.clone(), serde_json::json!(w))).collect();
    serde_json::to_string_pretty(&serde_json::json!({ "lambda": model.lambda, "weights": map }))
        .map_err(|e| QrcError::Numeric(e.to_string()))
}

/// One ridge head per class on one-hot targets.
#[derive(Clone, Debug, PartialEq)]
pub struct Classifier {
    pub classes: Vec<usize>,
    pub weights: DMatrix<f64>,
    pub lambda: f64,
}

pub fn one_hot(labels: &[usize], classes: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(labels.len(), classes.len(), |i, k| if labels[i] == classes[k] { 1.0 } else { 0.0 })
}

pub fn fit_classifier(v: &DMatrix<f64>, labels: &[usize], lambda: f64, free: &[usize]) -> Result<Classifier> {
    let classes: Vec<usize> = labels.iter().copied().collect::<std::collections::BTreeSet<_>>().into_iter().collect();
    if classes.len() < 2 {
        return Err(QrcError::DegenerateLabels(format!("training set has {} class(es)", classes.len())));
    }
    let (weights, _) = ridge_fit_multi(v, &one_hot(labels, &classes), lambda, free)?;
    Ok(Classifier { classes, weights, lambda })
}

impl Classifier {
    pub fn scores(&self, v: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if v.ncols() != self.weights.nrows() {
            return Err(QrcError::Dimension(format!("{} features for {} weights", v.ncols(), self.weights.nrows())));
        }
        Ok(v * &self.weights)
    }

    /// argmax over class scores (lowest class wins ties).
    pub fn classify(&self, v: &DMatrix<f64>) -> Result<Vec<usize>> {
        Ok(argmax_rows(&self.scores(v)?).into_iter().map(|k| self.classes[k]).collect())
    }
}

pub fn argmax_rows(scores: &DMatrix<f64>) -> Vec<usize> {
    (0..scores.nrows())
        .map(|i| {
            let row = scores.row(i);
            (0..row.len()).fold(0, |best, k| if row[k] > row[best] { k } else { best })
        })
        .collect()
}

pub fn accuracy(predicted: &[usize], truth: &[usize]) -> Result<f64> {
    if predicted.len() != truth.len() || truth.is_empty() {
        return Err(QrcError::Dimension("label vectors must be non-empty and of equal length".into()));
    }
    Ok(predicted.iter().zip(truth).filter(|(a, b)| a == b).count() as f64 / truth.len() as f64)
}

/// RMSE divided by the target range max(y) − min(y).
pub fn nrmse(predictions: &[f64], targets: &[f64]) -> Result<f64> {
    if predictions.len() != targets.len() || targets.is_empty() {
        return Err(QrcError::Dimension("prediction and target lengths differ".into()));
    }
    let hi = targets.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = targets.iter().copied().fold(f64::INFINITY, f64::min);
    let range = hi - lo;
    if !(range > 0.0) {
        return Err(QrcError::UndefinedMetric("targets are constant".into()));
    }
    let mse = predictions.iter().zip(targets).map(|(p, t)| (p - t).powi(2)).sum::<f64>() / targets.len() as f64;
    Ok(mse.sqrt() / range)
}

/// NRMSE of always predicting the training mean.
pub fn mean_predictor_nrmse(y_train: &[f64], y_test: &[f64]) -> Result<f64> {
    if y_train.is_empty() {
        return Err(QrcError::Dimension("empty training targets".into()));
    }
    let mean = y_train.iter().sum::<f64>() / y_train.len() as f64;
    nrmse(&vec![mean; y_test.len()], y_test)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub best_lambda: f64,
    /// λ → mean validation MSE
    pub scores: BTreeMap<String, f64>,
}

/// k-fold cross-validation over contiguous folds, scored by mean squared
/// error over all target columns.
pub fn cross_validate_lambda(v: &DMatrix<f64>, y: &DMatrix<f64>, lambdas: &[f64], folds: usize, free: &[usize]) -> Result<CvResult> {
    check_rows(v, y.nrows())?;
    let n = v.nrows();
    if folds < 2 || folds > n {
        return Err(QrcError::Argument(format!("{folds} folds for {n} rows")));
    }
    if lambdas.is_empty() {
        return Err(QrcError::Argument("no candidate lambdas".into()));
    }
    let bounds: Vec<usize> = (0..=folds).map(|k| k * n / folds).collect();
    let mut scores = BTreeMap::new();
    let mut best = (f64::INFINITY, lambdas[0]);
    for &lambda in lambdas {
        let mut sse = 0.0;
        for k in 0..folds {
            let (a, b) = (bounds[k], bounds[k + 1]);
            let train_idx: Vec<usize> = (0..a).chain(b..n).collect();
            let vt = v.select_rows(&train_idx);
            let yt = y.select_rows(&train_idx);
            let (w, _) = ridge_fit_multi(&vt, &yt, lambda, free)?;
            let pred = v.rows(a, b - a) * w;
            sse += (pred - y.rows(a, b - a)).iter().map(|e| e * e).sum::<f64>();
        }
        let mse = sse / (n * y.ncols()) as f64;
        scores.insert(format!("{lambda:e}"), mse);
        if mse < best.0 {
            best = (mse, lambda);
        }
    }
    Ok(CvResult { best_lambda: best.1, scores })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_for;
    use proptest::prelude::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = rng_for(seed, &[]);
        DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
    }

    fn objective(v: &DMatrix<f64>, y: &[f64], w: &[f64], lambda: f64) -> f64 {
        let r = v * DVector::from_column_slice(w) - DVector::from_column_slice(y);
        r.norm_squared() + lambda * w.iter().map(|x| x * x).sum::<f64>()
    }

    #[test]
    fn identity_examples() {
        let v = DMatrix::<f64>::identity(2, 2);
        let w0 = ridge_fit(&v, &[1.0, 0.0], 0.0).unwrap();
        assert!((w0.weights[0] - 1.0).abs() < 1e-15 && w0.weights[1].abs() < 1e-15);
        assert!(!w0.rank_deficient);
        let w1 = ridge_fit(&v, &[1.0, 0.0], 1.0).unwrap();
        assert!((w1.weights[0] - 0.5).abs() < 1e-15 && w1.weights[1].abs() < 1e-15);
    }

    #[test]
    fn matches_explicit_inverse() {
        for (f, seed) in [(3usize, 1u64), (20, 2), (50, 3)] {
            let v = random_matrix(3 * f, f, seed);
            let y: Vec<f64> = random_matrix(3 * f, 1, seed + 100).iter().copied().collect();
            let lambda = 0.3;
            let model = ridge_fit(&v, &y, lambda).unwrap();
            let a = v.transpose() * &v + DMatrix::<f64>::identity(f, f) * lambda;
            let oracle = a.try_inverse().unwrap() * v.transpose() * DVector::from_column_slice(&y);
            for (w, o) in model.weights.iter().zip(oracle.iter()) {
                assert!((w - o).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn square_interpolation_at_zero_lambda() {
        let v = random_matrix(12, 12, 4);
        let y: Vec<f64> = (0..12).map(|i| (i as f64).sin()).collect();
        let model = ridge_fit(&v, &y, 0.0).unwrap();
        let pred = ridge_predict(&model, &v).unwrap();
        assert!(pred.iter().zip(&y).all(|(p, t)| (p - t).abs() < 1e-9));
    }

    #[test]
    fn rank_deficient_min_norm() {
        // duplicated column: minimum-norm solution splits the weight evenly
        let v = DMatrix::from_row_slice(3, 2, &[1.0, 1.0, 2.0, 2.0, 3.0, 3.0]);
        let model = ridge_fit(&v, &[2.0, 4.0, 6.0], 0.0).unwrap();
        assert!(model.rank_deficient);
        assert!((model.weights[0] - 1.0).abs() < 1e-12 && (model.weights[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn predict_examples() {
        let v = random_matrix(5, 3, 5);
        let zero = RidgeModel { weights: vec![0.0; 3], lambda: 0.0, rank_deficient: false };
        assert!(ridge_predict(&zero, &v).unwrap().iter().all(|&p| p == 0.0));
        let m = RidgeModel { weights: vec![0.5, -1.0, 2.0], lambda: 0.0, rank_deficient: false };
        let m3 = RidgeModel { weights: m.weights.iter().map(|w| 3.0 * w).collect(), ..m.clone() };
        for (a, b) in ridge_predict(&m, &v).unwrap().iter().zip(ridge_predict(&m3, &v).unwrap()) {
            assert!((3.0 * a - b).abs() < 1e-12);
        }
        assert!(ridge_predict(&m, &random_matrix(5, 2, 6)).is_err());
    }

    #[test]
    fn free_column_is_not_shrunk() {
        let v = DMatrix::from_fn(50, 2, |i, j| if j == 1 { 1.0 } else { (i as f64 * 0.37).sin() });
        let y: Vec<f64> = (0..50).map(|i| 10.0 + 0.0 * i as f64).collect();
        let m = ridge_fit_free(&v, &y, 1.0, &[1]).unwrap();
        assert!((m.weights[1] - 10.0).abs() < 1e-9);
    }

    #[test]
    fn ridge_norm_decreases_with_lambda() {
        let v = random_matrix(40, 8, 7);
        let y: Vec<f64> = random_matrix(40, 1, 8).iter().copied().collect();
        let mut prev = f64::INFINITY;
        for lambda in [1e-6, 1e-3, 1e-1, 1.0, 10.0] {
            let n = ridge_fit(&v, &y, lambda).unwrap().weights.iter().map(|w| w * w).sum::<f64>().sqrt();
            assert!(n <= prev + 1e-12);
            prev = n;
        }
    }

    #[test]
    fn ridge_solution_is_a_minimum() {
        let v = random_matrix(30, 6, 9);
        let y: Vec<f64> = random_matrix(30, 1, 10).iter().copied().collect();
        let lambda = 0.05;
        let w = ridge_fit(&v, &y, lambda).unwrap().weights;
        let base = objective(&v, &y, &w, lambda);
        let mut rng = rng_for(11, &[]);
        for _ in 0..100 {
            let d: Vec<f64> = (0..6).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let norm = d.iter().map(|x| x * x).sum::<f64>().sqrt();
            let wp: Vec<f64> = w.iter().zip(&d).map(|(a, b)| a + 1e-3 * b / norm).collect();
            assert!(objective(&v, &y, &wp, lambda) >= base - 1e-12);
        }
    }

    #[test]
    fn classifier_examples() {
        let v = DMatrix::from_row_slice(4, 3, &[1.0, 0.0, 1.0, 0.9, 0.1, 1.0, 0.0, 1.0, 1.0, 0.1, 0.9, 1.0]);
        let labels = [7, 7, 3, 3];
        let c = fit_classifier(&v, &labels, 1e-6, &[2]).unwrap();
        assert_eq!(c.classify(&v).unwrap(), labels.to_vec());
        // renaming classes gives the same partition
        let renamed = fit_classifier(&v, &[0, 0, 9, 9], 1e-6, &[2]).unwrap();
        assert_eq!(renamed.classify(&v).unwrap(), vec![0, 0, 9, 9]);
        assert!(matches!(fit_classifier(&v, &[1, 1, 1, 1], 1e-6, &[]), Err(QrcError::DegenerateLabels(_))));
        let oh = one_hot(&[0, 2, 1], &[0, 1, 2]);
        assert!((0..3).all(|i| oh.row(i).sum() == 1.0));
    }

    #[test]
    fn argmax_is_scale_invariant() {
        let s = random_matrix(20, 3, 12);
        assert_eq!(argmax_rows(&s), argmax_rows(&(&s * 4.5)));
    }

    #[test]
    fn nrmse_examples() {
        assert_eq!(nrmse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert!((nrmse(&[1.0, 0.0], &[0.0, 1.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(nrmse(&[1.0, 1.0], &[2.0, 2.0]), Err(QrcError::UndefinedMetric(_))));
        let (p, t) = ([0.3, 0.1, 0.7], [0.2, 0.4, 0.9]);
        let c = 3.7;
        let scaled = nrmse(&p.map(|x| c * x), &t.map(|x| c * x)).unwrap();
        assert!((scaled - nrmse(&p, &t).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn cross_validation_picks_small_lambda_for_clean_data() {
        let v = random_matrix(100, 5, 13);
        let w = DVector::from_vec(vec![1.0, -2.0, 0.5, 0.0, 3.0]);
        let y = &v * &w;
        let res = cross_validate_lambda(&v, &DMatrix::from_column_slice(100, 1, y.as_slice()), &LAMBDA_GRID, CV_FOLDS, &[]).unwrap();
        assert!(res.best_lambda <= 1e-6);
        assert_eq!(res.scores.len(), LAMBDA_GRID.len());
    }

    #[test]
    fn weights_json_uses_names() {
        let m = RidgeModel { weights: vec![0.25, 1.0], lambda: 1e-6, rank_deficient: false };
        let s = weights_json(&m, &["Z0".into(), "const".into()]).unwrap();
        assert!(s.contains("\"Z0\": 0.25") && s.contains("\"const\": 1.0"));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn column_recombination_keeps_predictions(seed in any::<u64>()) {
            let v = random_matrix(25, 4, seed);
            let y: Vec<f64> = random_matrix(25, 1, seed ^ 1).iter().copied().collect();
            let t = random_matrix(4, 4, seed ^ 2) + DMatrix::<f64>::identity(4, 4) * 3.0;
            let a = ridge_predict(&ridge_fit(&v, &y, 0.0).unwrap(), &v).unwrap();
            let vt = &v * t;
            let b = ridge_predict(&ridge_fit(&vt, &y, 0.0).unwrap(), &vt).unwrap();
            for (x, z) in a.iter().zip(&b) {
                prop_assert!((x - z).abs() < 1e-8);
            }
        }
    }
}
