use serde::{Deserialize, Serialize};

use rand::Rng;

use super::observables::{xz_masks, ObservableSet};
use super::sampling::ShotRecord;
use crate::error::{QrcError, Result};
use crate::quantum::pauli::Pauli;

pub const DEFAULT_EPSILON: f64 = 0.9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShadowMode {
    Randomized,
    Derandomized,
}

/// Per-shot measurement bases.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShadowPlan {
    pub mode: ShadowMode,
    pub epsilon: Option<f64>,
    pub n_sites: usize,
    pub bases: Vec<Vec<Pauli>>,
}

impl ShadowPlan {
    pub fn n_shots(&self) -> usize {
        self.bases.len()
    }
}

/// Uniform i.i.d. letters from {X, Y, Z}.
pub fn make_randomized_plan(n_shots: usize, n_sites: usize, rng: &mut impl Rng) -> Result<ShadowPlan> {
    if n_shots == 0 {
        return Err(QrcError::Argument("a shadow plan needs at least one shot".into()));
    }
    const LETTERS: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];
    let bases = (0..n_shots).map(|_| (0..n_sites).map(|_| LETTERS[rng.random_range(0..3)]).collect()).collect();
    Ok(ShadowPlan { mode: ShadowMode::Randomized, epsilon: None, n_sites, bases })
}

fn log_sum_exp(xs: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = xs.collect();
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Greedy derandomization: bases are fixed shot by shot, site by site,
/// each time picking the letter that minimizes
/// Σ_o 2·exp(−(ε²/2)·ĥ(o)), where ĥ(o) counts past hits, the current
/// shot's partial match, and 3^{−w} for every shot still open. Costs are
/// compared in the log domain; ties go to Z, then X, then Y.
pub fn make_derandomized_plan(obs: &ObservableSet, n_shots: usize, epsilon: f64) -> Result<ShadowPlan> {
    if obs.is_empty() {
        return Err(QrcError::Argument("derandomization needs at least one observable".into()));
    }
    if n_shots == 0 {
        return Err(QrcError::Argument("a shadow plan needs at least one shot".into()));
    }
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(QrcError::Argument(format!("epsilon must be positive, got {epsilon}")));
    }
    let n = obs.n_sites();
    let c = epsilon * epsilon / 2.0;
    let paulis = obs.paulis();
    let weights: Vec<i32> = paulis.iter().map(|p| p.weight() as i32).collect();
    let touching: Vec<Vec<usize>> =
        (0..n).map(|i| (0..paulis.len()).filter(|&k| paulis[k].letter(i) != Pauli::I).collect()).collect();
    let mut past = vec![0.0f64; paulis.len()];
    let mut bases = Vec::with_capacity(n_shots);
    for s in 0..n_shots {
        let open_after = (n_shots - s - 1) as f64;
        let mut row: Vec<Pauli> = Vec::with_capacity(n);
        for i in 0..n {
            let mut best = (f64::INFINITY, Pauli::Z);
            for cand in [Pauli::Z, Pauli::X, Pauli::Y] {
                let cost = log_sum_exp(touching[i].iter().map(|&k| {
                    let p = &paulis[k];
                    let mut cur = 1.0;
                    for j in 0..n {
                        let l = p.letter(j);
                        if l == Pauli::I {
                            continue;
                        }
                        let chosen = if j < i { Some(row[j]) } else if j == i { Some(cand) } else { None };
                        cur *= match chosen {
                            Some(b) if b == l => 1.0,
                            Some(_) => 0.0,
                            None => 1.0 / 3.0,
                        };
                    }
                    let h = past[k] + cur + open_after * 3f64.powi(-weights[k]);
                    -c * h
                }));
                if cost < best.0 {
                    best = (cost, cand);
                }
            }
            row.push(best.1);
        }
        for (k, p) in paulis.iter().enumerate() {
            if p.support().iter().all(|&j| row[j] == p.letter(j)) {
                past[k] += 1.0;
            }
        }
        bases.push(row);
    }
    Ok(ShadowPlan { mode: ShadowMode::Derandomized, epsilon: Some(epsilon), n_sites: n, bases })
}

/// Number of shots whose basis matches each observable on its support.
pub fn plan_hits(plan: &ShadowPlan, obs: &ObservableSet) -> Vec<usize> {
    obs.paulis()
        .iter()
        .map(|p| {
            let support = p.support();
            plan.bases.iter().filter(|b| support.iter().all(|&j| b[j] == p.letter(j))).count()
        })
        .collect()
}

/// Shadow estimates: `values` are clipped to [−1, 1], `raw` are not.
#[derive(Clone, Debug, PartialEq)]
pub struct ShadowEstimate {
    pub values: Vec<f64>,
    pub raw: Vec<f64>,
    pub hits: Vec<usize>,
    /// Observables with no matching shot (estimate set to 0).
    pub zero_hits: usize,
}

/// Estimator over shots aggregated as per-basis outcome histograms.
pub(crate) fn estimate_from_histograms(
    bases: &[Vec<Pauli>],
    histograms: &[Vec<u32>],
    n_shots: usize,
    obs: &ObservableSet,
    mode: ShadowMode,
) -> ShadowEstimate {
    let mut raw = Vec::with_capacity(obs.len());
    let mut hits = Vec::with_capacity(obs.len());
    for p in obs.paulis() {
        let support = p.support();
        let (x, z) = xz_masks(p);
        let parity_mask = x | z;
        let (mut h, mut sum) = (0usize, 0.0f64);
        for (basis, hist) in bases.iter().zip(histograms) {
            if !support.iter().all(|&j| basis[j] == p.letter(j)) {
                continue;
            }
            for (b, &count) in hist.iter().enumerate() {
                if count == 0 {
                    continue;
                }
                h += count as usize;
                let s = if (b & parity_mask).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                sum += s * count as f64;
            }
        }
        let est = match mode {
            ShadowMode::Randomized => 3f64.powi(support.len() as i32) * sum / n_shots as f64,
            ShadowMode::Derandomized if h > 0 => sum / h as f64,
            ShadowMode::Derandomized => 0.0,
        };
        raw.push(est);
        hits.push(h);
    }
    let zero_hits = hits.iter().filter(|&&h| h == 0).count();
    ShadowEstimate { values: raw.iter().map(|v| v.clamp(-1.0, 1.0)).collect(), raw, hits, zero_hits }
}

/// Estimates from individual shot records. Randomized shots use the
/// 3^w inverse-channel factor; derandomized shots average over the shots
/// that hit each observable.
pub fn shadow_estimate(shots: &[ShotRecord], obs: &ObservableSet, mode: ShadowMode) -> Result<ShadowEstimate> {
    if shots.is_empty() {
        return Err(QrcError::Argument("no shots to estimate from".into()));
    }
    let n = obs.n_sites();
    let d = 1usize << n;
    let mut groups: std::collections::BTreeMap<&[Pauli], Vec<u32>> = std::collections::BTreeMap::new();
    for s in shots {
        if s.basis.len() != n || s.outcome >= d {
            return Err(QrcError::Dimension("shot does not match the observable register".into()));
        }
        groups.entry(s.basis.as_slice()).or_insert_with(|| vec![0; d])[s.outcome] += 1;
    }
    let (bases, hists): (Vec<Vec<Pauli>>, Vec<Vec<u32>>) = groups.into_iter().map(|(b, h)| (b.to_vec(), h)).unzip();
    Ok(estimate_from_histograms(&bases, &hists, shots.len(), obs, mode))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::observables::exact_expectations;
    use crate::measurement::sampling::sample_shots;
    use crate::quantum::pauli::PauliString;
    use crate::quantum::DensityMatrix;
    use crate::rng::rng_for;

    fn obs(labels: &[&str], n: usize) -> ObservableSet {
        ObservableSet::new(n, labels.iter().map(|l| PauliString::parse_label(l, n).unwrap()).collect()).unwrap()
    }

    #[test]
    fn randomized_plan_shape_and_determinism() {
        let a = make_randomized_plan(50, 4, &mut rng_for(9, &[])).unwrap();
        let b = make_randomized_plan(50, 4, &mut rng_for(9, &[])).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.n_shots(), 50);
        assert!(a.bases.iter().all(|r| r.len() == 4));
        assert!(make_randomized_plan(0, 4, &mut rng_for(9, &[])).is_err());
    }

    #[test]
    fn randomized_letters_are_uniform() {
        let plan = make_randomized_plan(20_000, 5, &mut rng_for(4, &[])).unwrap();
        let total: f64 = 100_000.0;
        for letter in [Pauli::X, Pauli::Y, Pauli::Z] {
            let c = plan.bases.iter().flatten().filter(|&&l| l == letter).count() as f64;
            let sigma = (total * (1.0 / 3.0) * (2.0 / 3.0)).sqrt();
            assert!((c - total / 3.0).abs() < 4.0 * sigma, "{letter:?}: {c}");
        }
    }

    #[test]
    fn single_z_observable_always_measured_in_z() {
        let plan = make_derandomized_plan(&obs(&["Z0"], 1), 10, DEFAULT_EPSILON).unwrap();
        assert!(plan.bases.iter().all(|r| r == &[Pauli::Z]));
    }

    #[test]
    fn x_and_z_alternate() {
        // Hand trace for {X0, Z0}: shot 0 ties between Z and X (both leave
        // one observable unmatched) and takes Z; from then on the observable
        // with fewer hits has the larger cost term, so the choice alternates.
        let plan = make_derandomized_plan(&obs(&["X0", "Z0"], 1), 6, DEFAULT_EPSILON).unwrap();
        let letters: Vec<Pauli> = plan.bases.iter().map(|r| r[0]).collect();
        assert_eq!(letters, vec![Pauli::Z, Pauli::X, Pauli::Z, Pauli::X, Pauli::Z, Pauli::X]);
        let big = make_derandomized_plan(&obs(&["X0", "Z0"], 1), 1001, DEFAULT_EPSILON).unwrap();
        let hits = plan_hits(&big, &obs(&["X0", "Z0"], 1));
        assert!(hits[0].abs_diff(hits[1]) <= 1);
    }

    #[test]
    fn derandomized_beats_random_hit_rate() {
        for n in [3usize, 4, 6] {
            let set = ObservableSet::default_for(n, false);
            for shots in [100usize, 1000] {
                let plan = make_derandomized_plan(&set, shots, DEFAULT_EPSILON).unwrap();
                for (p, h) in set.paulis().iter().zip(plan_hits(&plan, &set)) {
                    let expected = shots as f64 / 3f64.powi(p.weight() as i32);
                    assert!(h as f64 >= expected, "{} hit {h} < {expected}", p.label());
                }
            }
        }
    }

    #[test]
    fn ground_state_z_estimate() {
        let rho = DensityMatrix::ground(2);
        let set = obs(&["Z0", "Z0Z1", "X1"], 2);
        let plan = ShadowPlan { mode: ShadowMode::Derandomized, epsilon: None, n_sites: 2, bases: vec![vec![Pauli::Z; 2]; 5] };
        let shots = sample_shots(&rho, &plan.bases, &mut rng_for(0, &[])).unwrap();
        let est = shadow_estimate(&shots, &set, ShadowMode::Derandomized).unwrap();
        assert_eq!(est.values, vec![1.0, 1.0, 0.0]);
        assert_eq!(est.zero_hits, 1);
    }

    #[test]
    fn single_randomized_shot_weight_two() {
        let set = obs(&["X0X1"], 2);
        for outcome in 0..4usize {
            let shot = ShotRecord { basis: vec![Pauli::X, Pauli::X], outcome };
            let est = shadow_estimate(&[shot], &set, ShadowMode::Randomized).unwrap();
            let sign = if outcome.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            assert_eq!(est.raw[0], 9.0 * sign);
            assert_eq!(est.values[0], sign);
        }
    }

    #[test]
    fn randomized_estimator_is_unbiased_on_small_state() {
        let mut rng = rng_for(17, &[]);
        let rho = DensityMatrix::random_hilbert_schmidt(2, &mut rng);
        let set = ObservableSet::default_for(2, true);
        let exact = exact_expectations(&rho, &set).unwrap();
        let reps = 300;
        let mut samples = vec![Vec::new(); set.len()];
        for _ in 0..reps {
            let plan = make_randomized_plan(200, 2, &mut rng).unwrap();
            let shots = sample_shots(&rho, &plan.bases, &mut rng).unwrap();
            let est = shadow_estimate(&shots, &set, ShadowMode::Randomized).unwrap();
            for (k, v) in est.raw.iter().enumerate() {
                samples[k].push(*v);
            }
        }
        for (k, s) in samples.iter().enumerate() {
            let m = s.iter().sum::<f64>() / reps as f64;
            let var = s.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (reps - 1) as f64;
            let se = (var / reps as f64).sqrt();
            assert!((m - exact[k]).abs() < 5.0 * se, "obs {k}: {m} vs {}", exact[k]);
        }
    }

    #[test]
    fn empty_inputs_rejected() {
        assert!(shadow_estimate(&[], &obs(&["Z0"], 1), ShadowMode::Randomized).is_err());
        assert!(make_derandomized_plan(&obs(&["Z0"], 1), 0, 0.9).is_err());
    }
}
