//! Lindblad master-equation integration for one reservoir step.
//!
//! ρ̇ = −i[H, ρ] + Σ_i (L_i ρ L_i† − ½{L_i† L_i, ρ})
//!
//! The generator is applied in O(N·4^N) per evaluation: the diagonal part of
//! `H` acts entrywise and every other term is a single-site 2x2 operator
//! applied blockwise. Integration is adaptive Dormand–Prince 5(4).

use num_complex::Complex64 as C64;

use super::config::ReservoirConfig;
use super::hamiltonian::{interaction_diagonal, pair_couplings, Hamiltonian};
use crate::error::{QrcError, Result};
use crate::quantum::local::{site_mask, Op2};
use crate::quantum::matrix::ZERO;
use crate::quantum::state::symmetrize;
use crate::quantum::{ComplexMatrix, DensityMatrix};

/// Single-site jump operator of the form |g⟩(c_g⟨g| + c_r⟨r|).
///
/// Every dissipator in this model (decay plus ground-state dephasing) has
/// this rank-one shape, which keeps the generator cheap to apply.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JumpOperator {
    pub site: usize,
    /// (c_g, c_r)
    pub coeffs: [f64; 2],
}

impl JumpOperator {
    pub fn op(&self) -> Op2 {
        [[C64::new(self.coeffs[0], 0.0), C64::new(self.coeffs[1], 0.0)], [ZERO, ZERO]]
    }

    pub fn embed(&self, n_sites: usize) -> ComplexMatrix {
        let dim = 1usize << n_sites;
        let mask = site_mask(n_sites, self.site);
        let op = self.op();
        ComplexMatrix::from_fn(dim, dim, |a, b| {
            if a & !mask != b & !mask {
                return ZERO;
            }
            op[usize::from(a & mask != 0)][usize::from(b & mask != 0)]
        })
    }
}

/// L_i = √γ |g_i⟩(α⟨r_i| + β⟨g_i|) for every site.
pub fn build_jump_ops(cfg: &ReservoirConfig) -> Vec<JumpOperator> {
    let s = cfg.gamma().sqrt();
    (0..cfg.n_atoms())
        .map(|site| JumpOperator { site, coeffs: [s * cfg.jump_beta, s * cfg.jump_alpha] })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self { rtol: 1e-8, atol: 1e-10, max_steps: 1_000_000 }
    }
}

impl IntegratorOptions {
    pub fn tightened(&self) -> Self {
        Self { rtol: self.rtol * 0.1, atol: self.atol * 0.1, ..*self }
    }
}

// σx terms with a common coefficient
struct FlipGroup {
    re: f64,
    im: f64,
    masks: Vec<usize>,
}

// Σ L ρ L† on one site, with Σ_u u u^T = [[uu, uv], [uv, vv]]
struct Sandwich {
    mask: usize,
    uu: f64,
    uv: f64,
    vv: f64,
}

/// The Lindbladian generator in a form that is cheap to apply.
///
/// With H_eff = H − (i/2) Σ L†L the generator reads
/// 𝓛(ρ) = X + X† + Σ L ρ L†, where X = −i H_eff ρ. Every L†L is `u u^T` on
/// one site, so H_eff is a complex diagonal plus σx terms and X is built
/// from whole-row operations. States are stored as a real plane followed by
/// an imaginary plane, both row-major.
pub struct Generator {
    dim: usize,
    // −i times the diagonal of H_eff
    diag_re: Vec<f64>,
    diag_im: Vec<f64>,
    flips: Vec<FlipGroup>,
    sandwiches: Vec<Sandwich>,
}

impl Generator {
    pub fn new(h: &Hamiltonian, jumps: &[JumpOperator]) -> Result<Self> {
        let n = h.n_sites();
        if let Some(j) = jumps.iter().find(|j| j.site >= n) {
            return Err(QrcError::Dimension(format!("jump operator on site {} of {n}", j.site)));
        }
        let half = h.rabi() / 2.0;
        let mut flips: Vec<FlipGroup> = Vec::new();
        let mut sandwiches = Vec::new();
        let mut loss = vec![0.0; h.dim()];
        for site in 0..n {
            let mask = site_mask(n, site);
            let (mut uu, mut uv, mut vv) = (0.0, 0.0, 0.0);
            for j in jumps.iter().filter(|j| j.site == site) {
                let [u0, u1] = j.coeffs;
                uu += u0 * u0;
                uv += u0 * u1;
                vv += u1 * u1;
            }
            // −i(Ω/2 − (i/2) uv)
            let (re, im) = (-0.5 * uv, -half);
            match flips.iter_mut().find(|g| g.re == re && g.im == im) {
                Some(g) => g.masks.push(mask),
                None => flips.push(FlipGroup { re, im, masks: vec![mask] }),
            }
            if uu != 0.0 || uv != 0.0 || vv != 0.0 {
                sandwiches.push(Sandwich { mask, uu, uv, vv });
                for (a, l) in loss.iter_mut().enumerate() {
                    *l += if a & mask == 0 { uu } else { vv };
                }
            }
        }
        flips.retain(|g| g.re != 0.0 || g.im != 0.0);
        // −i(e − (i/2) loss)
        let diag_re = loss.iter().map(|l| -0.5 * l).collect();
        let diag_im = h.diagonal().iter().map(|e| -e).collect();
        Ok(Self { dim: h.dim(), diag_re, diag_im, flips, sandwiches })
    }

    /// Length of the scratch buffer expected by [`Generator::apply_planes`].
    pub fn scratch_len(&self) -> usize {
        2 * self.dim * self.dim + 2 * self.dim
    }

    /// 𝓛(ρ) on an interleaved complex row-major matrix.
    pub fn apply(&self, rho: &[C64]) -> Vec<C64> {
        let n = rho.len();
        let planes = to_planes(rho);
        let mut out = vec![0.0; 2 * n];
        let mut scratch = vec![0.0; self.scratch_len()];
        self.apply_planes(&planes, &mut out, &mut scratch);
        from_planes(&out)
    }

    /// out ← 𝓛(ρ) on split real/imaginary planes. `rho` must be Hermitian.
    pub fn apply_planes(&self, rho: &[f64], out: &mut [f64], scratch: &mut [f64]) {
        let d = self.dim;
        let n = d * d;
        let (rr, ri) = rho.split_at(n);
        let (x, sums) = scratch.split_at_mut(2 * n);
        let (xr, xi) = x.split_at_mut(n);
        let (sr, si) = sums.split_at_mut(d);
        for a in 0..d {
            let row = a * d..(a + 1) * d;
            let (er, ei) = (self.diag_re[a], self.diag_im[a]);
            for ((xv, &p), &q) in xr[row.clone()].iter_mut().zip(&rr[row.clone()]).zip(&ri[row.clone()]) {
                *xv = er * p - ei * q;
            }
            for ((xv, &p), &q) in xi[row.clone()].iter_mut().zip(&rr[row.clone()]).zip(&ri[row.clone()]) {
                *xv = er * q + ei * p;
            }
            for g in &self.flips {
                sr.fill(0.0);
                si.fill(0.0);
                for &m in &g.masks {
                    let o = (a ^ m) * d;
                    for (s, &p) in sr.iter_mut().zip(&rr[o..o + d]) {
                        *s += p;
                    }
                    for (s, &q) in si.iter_mut().zip(&ri[o..o + d]) {
                        *s += q;
                    }
                }
                for ((xv, &p), &q) in xr[row.clone()].iter_mut().zip(&*sr).zip(&*si) {
                    *xv += g.re * p - g.im * q;
                }
                for ((xv, &p), &q) in xi[row.clone()].iter_mut().zip(&*sr).zip(&*si) {
                    *xv += g.re * q + g.im * p;
                }
            }
        }
        let (or, oi) = out.split_at_mut(n);
        for a in 0..d {
            for b in a..d {
                let (ab, ba) = (a * d + b, b * d + a);
                let (re, im) = (xr[ab] + xr[ba], xi[ab] - xi[ba]);
                or[ab] = re;
                oi[ab] = im;
                or[ba] = re;
                oi[ba] = -im;
            }
        }
        for t in &self.sandwiches {
            let m = t.mask;
            for a0 in (0..d).filter(|a| a & m == 0) {
                let (r0, r1) = (a0 * d, (a0 | m) * d);
                for (p, o) in [(rr, &mut *or), (ri, &mut *oi)] {
                    let (p0, p1, o0) = (&p[r0..r0 + d], &p[r1..r1 + d], &mut o[r0..r0 + d]);
                    if m == 1 {
                        for ((q, x), y) in o0.chunks_exact_mut(2).zip(p0.chunks_exact(2)).zip(p1.chunks_exact(2)) {
                            q[0] += t.uu * x[0] + t.uv * (x[1] + y[0]) + t.vv * y[1];
                        }
                    } else {
                        for ((q, x), y) in o0.chunks_exact_mut(2 * m).zip(p0.chunks_exact(2 * m)).zip(p1.chunks_exact(2 * m)) {
                            let (xl, xh) = x.split_at(m);
                            let (yl, yh) = y.split_at(m);
                            for k in 0..m {
                                q[k] += t.uu * xl[k] + t.uv * (xh[k] + yl[k]) + t.vv * yh[k];
                            }
                        }
                    }
                }
            }
        }
    }
}

fn to_planes(z: &[C64]) -> Vec<f64> {
    z.iter().map(|c| c.re).chain(z.iter().map(|c| c.im)).collect()
}

fn from_planes(p: &[f64]) -> Vec<C64> {
    let (re, im) = p.split_at(p.len() / 2);
    re.iter().zip(im).map(|(&r, &i)| C64::new(r, i)).collect()
}

// Dormand–Prince 5(4) tableau; the generator is autonomous so the nodes c_i are not needed.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Statistics of one integration.
#[derive(Clone, Copy, Debug, Default)]
pub struct IntegrationStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

// RMS of the error over complex entries, each scaled by atol + rtol·|y|
fn scaled_rms(err: &[f64], y0: &[f64], y1: &[f64], opts: &IntegratorOptions) -> f64 {
    let n = err.len() / 2;
    let mut s = 0.0;
    for k in 0..n {
        let a = (y0[k] * y0[k] + y0[k + n] * y0[k + n]).max(y1[k] * y1[k] + y1[k + n] * y1[k + n]);
        let sc = opts.atol + opts.rtol * a.sqrt();
        s += (err[k] * err[k] + err[k + n] * err[k + n]) / (sc * sc);
    }
    (s / n as f64).sqrt()
}

/// Integrates the master equation for `duration` and returns the
/// re-symmetrized state.
pub fn evolve(rho: &DensityMatrix, h: &Hamiltonian, jumps: &[JumpOperator], duration: f64) -> Result<DensityMatrix> {
    evolve_with(rho, h, jumps, duration, &IntegratorOptions::default()).map(|(r, _)| r)
}

pub fn evolve_with(
    rho: &DensityMatrix,
    h: &Hamiltonian,
    jumps: &[JumpOperator],
    duration: f64,
    opts: &IntegratorOptions,
) -> Result<(DensityMatrix, IntegrationStats)> {
    if rho.dim() != h.dim() {
        return Err(QrcError::Dimension(format!("state dim {} vs Hamiltonian dim {}", rho.dim(), h.dim())));
    }
    if !(duration >= 0.0) || !duration.is_finite() {
        return Err(QrcError::Argument(format!("evolution duration must be non-negative, got {duration}")));
    }
    if duration == 0.0 {
        return Ok((rho.clone(), IntegrationStats::default()));
    }
    let gen = Generator::new(h, jumps)?;
    let (y, stats) = integrate(&gen, &to_planes(rho.matrix().as_slice()), duration, opts)?;
    let mut m = ComplexMatrix::from_vec(rho.dim(), rho.dim(), from_planes(&y))?;
    symmetrize(&mut m);
    Ok((DensityMatrix::from_matrix_unchecked(m)?, stats))
}

fn integrate(gen: &Generator, y0: &[f64], t_end: f64, opts: &IntegratorOptions) -> Result<(Vec<f64>, IntegrationStats)> {
    let n = y0.len();
    let mut stats = IntegrationStats::default();
    let mut y = y0.to_vec();
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; n]; 7];
    let mut tmp = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    let mut err = vec![0.0; n];
    let mut scratch = vec![0.0; gen.scratch_len()];

    gen.apply_planes(&y, &mut k[0], &mut scratch);
    stats.evaluations += 1;

    // Hairer's starting-step heuristic
    let zero = vec![0.0; n];
    let d0 = scaled_rms(&y, &y, &zero, opts);
    let d1 = scaled_rms(&k[0], &y, &zero, opts);
    let mut h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h = h.min(t_end);
    for ((t, &yi), &fi) in tmp.iter_mut().zip(&y).zip(&k[0]) {
        *t = yi + fi * h;
    }
    gen.apply_planes(&tmp, &mut k[1], &mut scratch);
    stats.evaluations += 1;
    for (e, (a, b)) in err.iter_mut().zip(k[1].iter().zip(&k[0])) {
        *e = a - b;
    }
    let d2 = scaled_rms(&err, &y, &zero, opts) / h;
    let h1 = if d1.max(d2) <= 1e-15 { (h * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
    h = (100.0 * h).min(h1).min(t_end);

    let mut t = 0.0;
    let mut last_rejected = false;
    while t < t_end {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(QrcError::Integration { time_reached: t, reason: "step budget exhausted".into() });
        }
        if h < 1e-12 * t_end.max(1.0) {
            return Err(QrcError::Integration { time_reached: t, reason: "step size underflow".into() });
        }
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }
        for s in 1..7 {
            tmp.copy_from_slice(&y);
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = A[s][j] * h;
                if a != 0.0 {
                    for (tv, kv) in tmp.iter_mut().zip(kj) {
                        *tv += kv * a;
                    }
                }
            }
            gen.apply_planes(&tmp, &mut k[s], &mut scratch);
            stats.evaluations += 1;
        }
        // the last stage is evaluated at the 5th-order solution (FSAL)
        y_new.copy_from_slice(&tmp);
        err.iter_mut().for_each(|e| *e = 0.0);
        for (j, kj) in k.iter().enumerate() {
            let c = E[j] * h;
            if c != 0.0 {
                for (e, kv) in err.iter_mut().zip(kj) {
                    *e += kv * c;
                }
            }
        }
        let en = scaled_rms(&err, &y, &y_new, opts);
        if en <= 1.0 {
            t = if last { t_end } else { t + h };
            std::mem::swap(&mut y, &mut y_new);
            k.swap(0, 6);
            stats.accepted += 1;
            let fac = if en == 0.0 { 5.0 } else { (0.9 * en.powf(-0.2)).clamp(0.2, 5.0) };
            h *= if last_rejected { fac.min(1.0) } else { fac };
            last_rejected = false;
        } else {
            stats.rejected += 1;
            h *= (0.9 * en.powf(-0.2)).clamp(0.2, 1.0);
            last_rejected = true;
        }
    }
    Ok((y, stats))
}

/// A reservoir realization: interactions and jump operators are fixed, the
/// per-site detunings follow the input.
pub struct Reservoir {
    cfg: ReservoirConfig,
    interaction: Vec<f64>,
    jumps: Vec<JumpOperator>,
    options: IntegratorOptions,
    monitor: bool,
}

/// Thresholds on integrator output; a violation triggers a retry with
/// tighter tolerances.
pub const MONITOR_TRACE_TOL: f64 = 1e-7;
pub const MONITOR_HERMITIAN_TOL: f64 = 1e-8;
pub const MONITOR_MIN_EIG: f64 = -1e-6;

impl Reservoir {
    pub fn new(cfg: &ReservoirConfig) -> Result<Self> {
        cfg.validate()?;
        let couplings = pair_couplings(&cfg.lattice, cfg.omega, cfg.a_over_rb)?;
        Ok(Self {
            cfg: cfg.clone(),
            interaction: interaction_diagonal(cfg.n_atoms(), &couplings),
            jumps: build_jump_ops(cfg),
            options: IntegratorOptions::default(),
            monitor: true,
        })
    }

    pub fn with_options(mut self, options: IntegratorOptions) -> Self {
        self.options = options;
        self
    }

    /// Disables the post-step positivity check.
    pub fn without_monitor(mut self) -> Self {
        self.monitor = false;
        self
    }

    pub fn config(&self) -> &ReservoirConfig {
        &self.cfg
    }

    pub fn n_sites(&self) -> usize {
        self.cfg.n_atoms()
    }

    pub fn jumps(&self) -> &[JumpOperator] {
        &self.jumps
    }

    pub fn hamiltonian(&self, detunings: &[f64]) -> Result<Hamiltonian> {
        Hamiltonian::from_parts(self.n_sites(), detunings, self.cfg.omega, &self.interaction)
    }

    /// Δ_i = Δ + η x_i with `x` zero-padded to N.
    pub fn encode(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = self.n_sites();
        if x.len() > n {
            return Err(QrcError::Encoding(format!("input of dimension {} exceeds {n} atoms", x.len())));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(QrcError::Encoding("non-finite input value".into()));
        }
        let (delta, eta) = (self.cfg.delta(), self.cfg.eta());
        Ok((0..n).map(|i| delta + eta * x.get(i).copied().unwrap_or(0.0)).collect())
    }

    /// Evolves `rho` for τ under explicit per-site detunings.
    pub fn evolve_detuned(&self, rho: &DensityMatrix, detunings: &[f64], duration: f64) -> Result<DensityMatrix> {
        let h = self.hamiltonian(detunings)?;
        let mut opts = self.options;
        for attempt in 0..3 {
            let (out, _) = evolve_with(rho, &h, &self.jumps, duration, &opts)?;
            if !self.monitor || attempt == 2 {
                return Ok(out);
            }
            let d = out.diagnostics()?;
            if d.trace_error < MONITOR_TRACE_TOL && d.hermitian_residual < MONITOR_HERMITIAN_TOL && d.min_eigenvalue > MONITOR_MIN_EIG {
                return Ok(out);
            }
            log::warn!(
                "state drifted (trace {:.2e}, min eig {:.2e}); tightening tolerances",
                d.trace_error,
                d.min_eigenvalue
            );
            opts = opts.tightened();
        }
        unreachable!()
    }

    /// The CPTP map E(x).
    pub fn apply_input(&self, rho: &DensityMatrix, x: &[f64]) -> Result<DensityMatrix> {
        let detunings = self.encode(x)?;
        self.evolve_detuned(rho, &detunings, self.cfg.tau())
    }
}

/// One-shot form of [`Reservoir::apply_input`].
pub fn apply_input_map(rho: &DensityMatrix, cfg: &ReservoirConfig, x: &[f64]) -> Result<DensityMatrix> {
    Reservoir::new(cfg)?.apply_input(rho, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::trace_distance;
    use crate::reservoir::lattice::build_lattice;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn single_atom(gamma: f64, alpha: f64, beta: f64) -> ReservoirConfig {
        let mut cfg = ReservoirConfig::benchmark(1, 0).unwrap();
        cfg.lattice = build_lattice(&[1], 1.0, 0.0, 0).unwrap();
        cfg.gamma_over_omega = gamma;
        cfg.jump_alpha = alpha;
        cfg.jump_beta = beta;
        cfg.delta_over_omega = 0.0;
        cfg
    }

    fn dense_lindblad_rhs(h: &ComplexMatrix, ls: &[ComplexMatrix], rho: &ComplexMatrix) -> ComplexMatrix {
        let mi = C64::new(0.0, -1.0);
        let mut out = (&(h * rho) - &(rho * h)).scale(mi);
        for l in ls {
            let ld = l.adjoint();
            let k = &ld * l;
            let term = &(&(l * rho) * &ld) - &(&(&k * rho) + &(rho * &k)).scale(C64::new(0.5, 0.0));
            out = &out + &term;
        }
        out
    }

    #[test]
    fn jump_ops_closed_system_vanish() {
        let cfg = single_atom(0.0, 0.025, 0.08);
        for j in build_jump_ops(&cfg) {
            assert!(j.embed(1).max_abs() == 0.0);
        }
    }

    #[test]
    fn jump_op_matrix_for_unit_rate() {
        let cfg = single_atom(1.0, 0.025, 0.08);
        let l = build_jump_ops(&cfg)[0].embed(1);
        let expected = ComplexMatrix::from_real_rows(&[&[0.08, 0.025], &[0.0, 0.0]]);
        assert!(l.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn jump_op_trace_identity() {
        let mut cfg = ReservoirConfig::benchmark(3, 1).unwrap();
        cfg.gamma_over_omega = 0.7;
        let n = cfg.n_atoms();
        let (a, b, g) = (cfg.jump_alpha, cfg.jump_beta, cfg.gamma());
        let ops = build_jump_ops(&cfg);
        assert_eq!(ops.len(), n);
        for j in ops {
            let l = j.embed(n);
            let tr = (&l * &l.adjoint()).trace().re;
            let expected = g * (a * a + b * b) * (1 << (n - 1)) as f64;
            assert!((tr - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn generator_matches_dense_lindbladian() {
        let mut cfg = ReservoirConfig::benchmark(3, 4).unwrap();
        cfg.gamma_over_omega = 2.0;
        let res = Reservoir::new(&cfg).unwrap();
        let h = res.hamiltonian(&[0.3, -0.1, 0.2]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rho = DensityMatrix::random_hilbert_schmidt(3, &mut rng);
        let gen = Generator::new(&h, res.jumps()).unwrap();
        let out = gen.apply(rho.matrix().as_slice());
        let ls: Vec<_> = res.jumps().iter().map(|j| j.embed(3)).collect();
        let dense = dense_lindblad_rhs(&h.matrix(), &ls, rho.matrix());
        let fast = ComplexMatrix::from_vec(8, 8, out).unwrap();
        assert!(fast.max_abs_diff(&dense) < 1e-13);
    }

    #[test]
    fn rabi_oscillation() {
        let cfg = single_atom(0.0, 0.0, 0.0);
        let res = Reservoir::new(&cfg).unwrap();
        let h = res.hamiltonian(&[0.0]).unwrap();
        let n_op = ComplexMatrix::from_real_rows(&[&[0.0, 0.0], &[0.0, 1.0]]);
        for &t in &[0.0, 0.7, 3.0, 10.0] {
            let out = evolve(&DensityMatrix::ground(1), &h, res.jumps(), t).unwrap();
            let n = out.expectation(&n_op).unwrap().re;
            assert!((n - (t / 2.0f64).sin().powi(2)).abs() < 1e-7, "t={t}");
        }
    }

    #[test]
    fn amplitude_damping() {
        let gamma = 3.0;
        let alpha = 0.5;
        let mut cfg = single_atom(gamma, alpha, 0.0);
        cfg.omega = 1.0;
        let h = Hamiltonian::new(1, &[0.0], 0.0, &[]).unwrap();
        let jumps = build_jump_ops(&cfg);
        let n_op = ComplexMatrix::from_real_rows(&[&[0.0, 0.0], &[0.0, 1.0]]);
        for &t in &[0.5, 2.0, 5.0] {
            let out = evolve(&DensityMatrix::basis(1, 1), &h, &jumps, t).unwrap();
            let n = out.expectation(&n_op).unwrap().re;
            assert!((n - (-gamma * alpha * alpha * t).exp()).abs() < 1e-8);
        }
    }

    #[test]
    fn zero_duration_is_identity() {
        let cfg = ReservoirConfig::benchmark(2, 0).unwrap();
        let res = Reservoir::new(&cfg).unwrap();
        let h = res.hamiltonian(&[0.1, 0.2]).unwrap();
        let rho = DensityMatrix::maximally_mixed(2);
        assert_eq!(evolve(&rho, &h, res.jumps(), 0.0).unwrap(), rho);
    }

    #[test]
    fn encoding_pads_and_rejects_oversize() {
        let cfg = ReservoirConfig::benchmark(3, 0).unwrap();
        let res = Reservoir::new(&cfg).unwrap();
        let d = res.encode(&[1.0]).unwrap();
        assert!((d[0] - (-0.5 + 0.1)).abs() < 1e-15);
        assert_eq!(d[1], -0.5);
        assert_eq!(d[2], -0.5);
        assert!(matches!(res.encode(&[0.0; 4]), Err(QrcError::Encoding(_))));
    }

    #[test]
    fn zero_input_equals_bias_only_evolution() {
        let mut cfg = ReservoirConfig::benchmark(3, 2).unwrap();
        cfg.tau_omega = 2.0;
        let res = Reservoir::new(&cfg).unwrap();
        let rho = DensityMatrix::ground(3);
        let a = res.apply_input(&rho, &[0.0, 0.0, 0.0]).unwrap();
        let b = res.evolve_detuned(&rho, &[cfg.delta(); 3], cfg.tau()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_eta_ignores_input() {
        let mut cfg = ReservoirConfig::benchmark(3, 2).unwrap();
        cfg.tau_omega = 2.0;
        cfg.eta_over_omega = 0.0;
        let rho = DensityMatrix::ground(3);
        let a = apply_input_map(&rho, &cfg, &[0.9, -0.3]).unwrap();
        let b = apply_input_map(&rho, &cfg, &[-0.5, 0.1, 0.7]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn input_map_contracts() {
        let mut cfg = ReservoirConfig::benchmark(3, 2).unwrap();
        cfg.tau_omega = 3.0;
        cfg.gamma_over_omega = 4.0;
        let res = Reservoir::new(&cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let r = DensityMatrix::random_hilbert_schmidt(3, &mut rng);
        let s = DensityMatrix::random_hilbert_schmidt(3, &mut rng);
        let x = [0.4, -0.8, 0.1];
        let before = trace_distance(&r, &s).unwrap();
        let after = trace_distance(&res.apply_input(&r, &x).unwrap(), &res.apply_input(&s, &x).unwrap()).unwrap();
        assert!(after <= before + 1e-8);
    }
}
