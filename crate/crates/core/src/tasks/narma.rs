//! Second-order NARMA series.

use std::io::{BufRead, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{QrcError, Result};
use crate::rng::{rng_for, stream};

pub const NARMA_INPUT_MAX: f64 = 0.2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Narma2Series {
    pub inputs: Vec<f64>,
    pub targets: Vec<f64>,
}

/// y^(m+1) = 0.4 y^(m) + 0.4 y^(m) y^(m−1) + 0.6 (u^(m))³ + 0.1
pub fn narma2_step(y: f64, y_prev: f64, u: f64) -> f64 {
    0.4 * y + 0.4 * y * y_prev + 0.6 * u * u * u + 0.1
}

/// Targets for a given input series, starting from (y^(0), y^(1)) = `y_init`.
pub fn narma2_targets(inputs: &[f64], y_init: (f64, f64)) -> Result<Vec<f64>> {
    if inputs.len() < 3 {
        return Err(QrcError::Argument(format!("NARMA2 needs at least 3 steps, got {}", inputs.len())));
    }
    let mut y = vec![y_init.0, y_init.1];
    for m in 1..inputs.len() - 1 {
        y.push(narma2_step(y[m], y[m - 1], inputs[m]));
    }
    Ok(y)
}

/// u^(m) ~ U[0, 0.2] i.i.d.
pub fn gen_narma2(length: usize, seed: u64, y_init: (f64, f64)) -> Result<Narma2Series> {
    let mut rng = rng_for(seed, &[stream::INPUTS]);
    let inputs: Vec<f64> = (0..length).map(|_| rng.random_range(0.0..=NARMA_INPUT_MAX)).collect();
    let targets = narma2_targets(&inputs, y_init)?;
    Ok(Narma2Series { inputs, targets })
}

impl Narma2Series {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    /// One-step-ahead pairs: the reservoir sees u^(m) and predicts y^(m+1).
    /// Returns M − 1 pairs.
    pub fn task_pairs(&self) -> (Vec<f64>, Vec<f64>) {
        (self.inputs[..self.len() - 1].to_vec(), self.targets[1..].to_vec())
    }

    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "m,u,y")?;
        for (m, (u, y)) in self.inputs.iter().zip(&self.targets).enumerate() {
            writeln!(w, "{m},{u},{y}")?;
        }
        Ok(())
    }

    pub fn read_csv(r: impl BufRead) -> Result<Self> {
        let mut inputs = Vec::new();
        let mut targets = Vec::new();
        for (k, line) in r.lines().enumerate() {
            let line = line?;
            let lineno = k + 1;
            if k == 0 {
                if line.trim() != "m,u,y" {
                    return Err(QrcError::Ingestion { line: lineno, reason: format!("expected header m,u,y, got {line:?}") });
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if f.len() != 3 {
                return Err(QrcError::Ingestion { line: lineno, reason: format!("expected 3 fields, got {}", f.len()) });
            }
            let parse = |s: &str| s.parse::<f64>().map_err(|e| QrcError::Ingestion { line: lineno, reason: format!("{s:?}: {e}") });
            let m: usize = f[0].parse().map_err(|e| QrcError::Ingestion { line: lineno, reason: format!("{:?}: {e}", f[0]) })?;
            if m != inputs.len() {
                return Err(QrcError::Ingestion { line: lineno, reason: format!("index {m} out of sequence") });
            }
            inputs.push(parse(f[1])?);
            targets.push(parse(f[2])?);
        }
        Ok(Self { inputs, targets })
    }
}

/// Affine map of [0, 0.2] onto [−1, 1], the range the encoding expects.
pub fn narma_reservoir_input(u: &[f64]) -> Vec<f64> {
    u.iter().map(|x| 2.0 * x / NARMA_INPUT_MAX - 1.0).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn first_target_from_zero_history() {
        let s = gen_narma2(10, 3, (0.0, 0.0)).unwrap();
        assert_eq!(s.targets[0], 0.0);
        assert_eq!(s.targets[1], 0.0);
        assert_eq!(s.targets[2], 0.6 * s.inputs[1].powi(3) + 0.1);
        assert!(s.inputs.iter().all(|u| (0.0..=0.2).contains(u)));
        assert!(gen_narma2(2, 0, (0.0, 0.0)).is_err());
    }

    #[test]
    fn zero_input_fixed_point() {
        // 0.4y² − 0.6y + 0.1 = 0, smaller root
        let fixed = (0.6 - 0.2f64.sqrt()) / 0.8;
        assert!((fixed - 0.19098).abs() < 1e-5);
        let y = narma2_targets(&vec![0.0; 400], (0.0, 0.0)).unwrap();
        assert!((y[399] - fixed).abs() < 1e-12);
    }

    #[test]
    fn max_input_orbit_is_bounded() {
        let y = narma2_targets(&vec![0.2; 1000], (0.0, 0.0)).unwrap();
        assert!(y[2..].iter().all(|&v| v > 0.0 && v < 1.0));
    }

    #[test]
    fn task_pairs_shift_by_one() {
        let s = gen_narma2(20, 4, (0.0, 0.0)).unwrap();
        let (u, y) = s.task_pairs();
        assert_eq!(u.len(), 19);
        assert_eq!(y[5], narma2_step(s.targets[5], s.targets[4], u[5]));
        let x = narma_reservoir_input(&[0.0, 0.1, 0.2]);
        assert_eq!(x, vec![-1.0, 0.0, 1.0]);
    }

    #[test]
    fn csv_round_trip_and_errors() {
        let s = gen_narma2(30, 5, (0.0, 0.0)).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        assert_eq!(Narma2Series::read_csv(&buf[..]).unwrap(), s);
        let bad = "m,u,y\n0,0.1,0.2\n1,zz,0.3\n";
        match Narma2Series::read_csv(bad.as_bytes()) {
            Err(QrcError::Ingestion { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn recurrence_holds_and_regenerates(seed in any::<u64>()) {
            let s = gen_narma2(200, seed, (0.0, 0.0)).unwrap();
            for m in 1..199 {
                prop_assert_eq!(s.targets[m + 1], narma2_step(s.targets[m], s.targets[m - 1], s.inputs[m]));
            }
            prop_assert_eq!(gen_narma2(200, seed, (0.0, 0.0)).unwrap(), s);
        }
    }
}
