//! Solver for the convex sequence-update subproblem
//!
//! ```text
//! minimize    (1/√N)·‖Gx − v‖₂ + λ‖x‖∞
//! subject to  x_dc = 0
//!             |Re (Gx)_p| ≤ u_p,  |Im (Gx)_p| ≤ u_p   for each bounded sample p
//! ```
//!
//! `G` has orthogonal columns (`GᴴG = N·I`), so the least-squares term equals
//! `sqrt(‖x − w‖² + r²)` with `w = Gᴴv/N` and `r² = ‖v‖²/N − ‖w‖²` restricted
//! to the free tones. The reduced problem is a small second-order cone
//! program, solved here with a primal log-barrier path-following method:
//!
//! ```text
//! minimize    t + λ·s
//! subject to  ‖(y − w, r)‖ ≤ t
//!             |x_k| ≤ s                      (one 3-d cone per free tone)
//!             −u_i ≤ a_iᵀ y ≤ u_i            (two rows per bounded sample)
//! ```
//!
//! where `y` stacks real and imaginary parts of the free tones. Samples with a
//! zero bound become equalities and are eliminated through a null-space basis.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operator::SynthesisOperator;

/// Upper bound `u` on the real and imaginary parts of output sample `sample`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundedOutput {
    pub sample: usize,
    pub bound: f64,
}

#[derive(Debug, Clone)]
pub struct SubproblemB {
    pub operator: SynthesisOperator,
    pub target: Vec<Complex64>,
    pub lambda: f64,
    pub equality_index: usize,
    pub bounded_outputs: Vec<BoundedOutput>,
}

impl SubproblemB {
    pub fn new(
        operator: SynthesisOperator,
        target: Vec<Complex64>,
        lambda: f64,
        equality_index: usize,
        bounded_outputs: Vec<BoundedOutput>,
    ) -> Result<Self> {
        let prob = Self {
            operator,
            target,
            lambda,
            equality_index,
            bounded_outputs,
        };
        prob.validate()?;
        Ok(prob)
    }

    pub fn validate(&self) -> Result<()> {
        let (l, n) = (self.operator.tones(), self.operator.grid());
        if self.target.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: self.target.len(),
            });
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::Config(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        if self.equality_index >= l {
            return Err(Error::Config(format!(
                "equality index {} out of range for {l} tones",
                self.equality_index
            )));
        }
        for b in &self.bounded_outputs {
            if b.sample >= n {
                return Err(Error::Config(format!("bounded sample {} >= N = {n}", b.sample)));
            }
            if !(b.bound >= 0.0) || !b.bound.is_finite() {
                return Err(Error::Config(format!("bound must be finite and >= 0, got {}", b.bound)));
            }
        }
        Ok(())
    }

    pub fn tones(&self) -> usize {
        self.operator.tones()
    }

    pub fn grid(&self) -> usize {
        self.operator.grid()
    }

    /// `(1/√N)‖Gx − v‖ + λ‖x‖∞`.
    pub fn objective(&self, x: &[Complex64]) -> f64 {
        let gx = self.operator.forward(x);
        let resid: f64 = gx
            .iter()
            .zip(&self.target)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        let linf = x.iter().map(|c| c.norm()).fold(0.0, f64::max);
        (resid / self.grid() as f64).sqrt() + self.lambda * linf
    }

    /// Largest violation of the equality and bound constraints.
    pub fn violation(&self, x: &[Complex64]) -> f64 {
        let gx = self.operator.forward(x);
        let mut worst = x[self.equality_index].norm();
        for b in &self.bounded_outputs {
            let s = gx[b.sample];
            worst = worst
                .max(s.re.abs() - b.bound)
                .max(s.im.abs() - b.bound);
        }
        worst.max(0.0)
    }

    /// Bounds merged per sample (tightest wins), sorted by sample.
    fn merged_bounds(&self) -> Vec<BoundedOutput> {
        let mut out: Vec<BoundedOutput> = Vec::new();
        let mut sorted = self.bounded_outputs.clone();
        sorted.sort_by_key(|b| b.sample);
        for b in sorted {
            match out.last_mut() {
                Some(last) if last.sample == b.sample => last.bound = last.bound.min(b.bound),
                _ => out.push(b),
            }
        }
        out
    }
}

/// One linear inequality `row · y ≤ bound` of the stacked real program.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearInequality {
    pub row: Vec<f64>,
    pub bound: f64,
}

/// Real-valued form of [`SubproblemB`] over `y = [Re x; Im x]` (length 2L).
#[derive(Debug, Clone)]
pub struct RealProgram {
    pub tones: usize,
    /// `[[Re G, −Im G], [Im G, Re G]]`, size 2N × 2L.
    pub design: DMatrix<f64>,
    /// `[Re v; Im v]`.
    pub target: DVector<f64>,
    pub lambda: f64,
    /// Indices of `y` pinned to zero (real and imaginary DC parts).
    pub fixed_zero: [usize; 2],
    pub inequalities: Vec<LinearInequality>,
}

impl RealProgram {
    pub fn stack(x: &[Complex64]) -> DVector<f64> {
        let l = x.len();
        DVector::from_fn(2 * l, |i, _| if i < l { x[i].re } else { x[i - l].im })
    }

    pub fn unstack(y: &DVector<f64>) -> Vec<Complex64> {
        let l = y.len() / 2;
        (0..l).map(|k| Complex64::new(y[k], y[k + l])).collect()
    }

    pub fn objective(&self, y: &DVector<f64>) -> f64 {
        let n = self.design.nrows() / 2;
        let resid = (&self.design * y - &self.target).norm();
        let l = self.tones;
        let linf = (0..l)
            .map(|k| y[k].hypot(y[k + l]))
            .fold(0.0, f64::max);
        resid / (n as f64).sqrt() + self.lambda * linf
    }

    pub fn is_feasible(&self, y: &DVector<f64>, tol: f64) -> bool {
        self.fixed_zero.iter().all(|&i| y[i] == 0.0)
            && self
                .inequalities
                .iter()
                .all(|c| dot(&c.row, y.as_slice()) <= c.bound + tol)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Rows giving `Re (Gx)_p` and `Im (Gx)_p` as linear functions of stacked `y`.
fn sample_rows(op: &SynthesisOperator, p: usize) -> (Vec<f64>, Vec<f64>) {
    let l = op.tones();
    let mut re = vec![0.0; 2 * l];
    let mut im = vec![0.0; 2 * l];
    for k in 0..l {
        let e = op.entry(p, k);
        re[k] = e.re;
        re[k + l] = -e.im;
        im[k] = e.im;
        im[k + l] = e.re;
    }
    (re, im)
}

/// Stacked real/imaginary embedding; each bounded sample contributes four
/// inequalities (`±Re ≤ u`, `±Im ≤ u`).
pub fn real_embedding(prob: &SubproblemB) -> RealProgram {
    let (l, n) = (prob.tones(), prob.grid());
    let op = &prob.operator;
    let design = DMatrix::from_fn(2 * n, 2 * l, |i, j| {
        let e = op.entry(i % n, j % l);
        match (i < n, j < l) {
            (true, true) => e.re,
            (true, false) => -e.im,
            (false, true) => e.im,
            (false, false) => e.re,
        }
    });
    let target = DVector::from_fn(2 * n, |i, _| {
        if i < n {
            prob.target[i].re
        } else {
            prob.target[i - n].im
        }
    });
    let mut inequalities = Vec::with_capacity(4 * prob.bounded_outputs.len());
    for b in &prob.bounded_outputs {
        let (re, im) = sample_rows(op, b.sample);
        for row in [re, im] {
            let neg = row.iter().map(|v| -v).collect();
            inequalities.push(LinearInequality { row, bound: b.bound });
            inequalities.push(LinearInequality {
                row: neg,
                bound: b.bound,
            });
        }
    }
    RealProgram {
        tones: l,
        design,
        target,
        lambda: prob.lambda,
        fixed_zero: [prob.equality_index, prob.equality_index + l],
        inequalities,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverReport {
    pub objective: f64,
    /// Largest constraint violation of the returned point.
    pub primal_residual: f64,
    /// Squared Newton decrement over the barrier weight at the final centre:
    /// bounds the objective excess caused by inexact centring.
    pub stationarity_residual: f64,
    /// Barrier duality-gap bound `ν/τ`; converged runs reach `ν/τ ≤ tol`.
    pub duality_gap: f64,
    /// Newton steps taken.
    pub iterations: usize,
    pub converged: bool,
    /// Objective at the end of each centring stage; non-increasing along the
    /// central path.
    pub merit_history: Vec<f64>,
    /// Per-Newton-step log, filled only when requested.
    pub log: Vec<SolverLogEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverLogEntry {
    pub stage: usize,
    pub newton_step: usize,
    pub barrier_weight: f64,
    pub merit: f64,
    pub objective: f64,
    pub decrement_sq: f64,
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iters: usize,
    pub warm_start: Option<Vec<Complex64>>,
    pub record_log: bool,
}

impl SolverOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iters: 20_000,
            warm_start: None,
            record_log: false,
        }
    }
}

pub fn solve(prob: &SubproblemB, tol: f64) -> Result<(Vec<Complex64>, SolverReport)> {
    solve_with(prob, &SolverOptions::with_tol(tol))
}

pub fn solve_with(
    prob: &SubproblemB,
    opts: &SolverOptions,
) -> Result<(Vec<Complex64>, SolverReport)> {
    prob.validate()?;
    if !(opts.tol > 0.0) {
        return Err(Error::Config(format!("solver tolerance must be > 0, got {}", opts.tol)));
    }
    let reduced = Reduced::build(prob)?;

    let finish = |x: Vec<Complex64>, report: SolverReport| -> (Vec<Complex64>, SolverReport) {
        let objective = prob.objective(&x);
        let primal_residual = prob.violation(&x);
        (
            x,
            SolverReport {
                objective,
                primal_residual,
                ..report
            },
        )
    };
    let exact = SolverReport {
        objective: 0.0,
        primal_residual: 0.0,
        stationarity_residual: 0.0,
        duality_gap: 0.0,
        iterations: 0,
        converged: true,
        merit_history: Vec::new(),
        log: Vec::new(),
    };

    // x = 0 is optimal when the free part of the least-squares target vanishes
    if reduced.w.iter().all(|&v| v == 0.0) || reduced.dim == 0 {
        let x = vec![Complex64::new(0.0, 0.0); prob.tones()];
        return Ok(finish(x, exact));
    }
    // closed-form projection when nothing but the DC equality is active
    if prob.lambda == 0.0 && reduced.slabs.is_empty() && reduced.is_identity {
        let x = reduced.to_complex(&reduced.w, prob);
        return Ok(finish(x, exact));
    }

    let (xi, report) = Barrier::new(&reduced, prob.lambda).run(opts)?;
    let y = &reduced.basis * &xi;
    let x = reduced.to_complex(&y, prob);
    Ok(finish(x, report))
}

/// The problem restricted to the free tones, in null-space coordinates.
struct Reduced {
    /// Free tone count.
    m: usize,
    /// Null-space dimension.
    dim: usize,
    free: Vec<usize>,
    /// `2m × dim`, orthonormal columns; `y = basis · ξ`.
    basis: DMatrix<f64>,
    is_identity: bool,
    /// Stacked free part of `Gᴴv/N`.
    w: DVector<f64>,
    r_sq: f64,
    /// Slab rows in ξ coordinates with their bounds.
    slabs: Vec<(DVector<f64>, f64)>,
}

impl Reduced {
    fn build(prob: &SubproblemB) -> Result<Self> {
        let (l, n) = (prob.tones(), prob.grid());
        let free: Vec<usize> = (0..l).filter(|&k| k != prob.equality_index).collect();
        let m = free.len();

        let wc: Vec<Complex64> = prob
            .operator
            .adjoint(&prob.target)
            .into_iter()
            .map(|c| c / n as f64)
            .collect();
        let w = DVector::from_fn(2 * m, |i, _| {
            if i < m {
                wc[free[i]].re
            } else {
                wc[free[i - m]].im
            }
        });
        let v_sq: f64 = prob.target.iter().map(|c| c.norm_sqr()).sum();
        let r_sq = (v_sq / n as f64 - w.norm_squared()).max(0.0);

        let mut rows = Vec::new();
        let mut equalities = Vec::new();
        for b in prob.merged_bounds() {
            let (re, im) = sample_rows(&prob.operator, b.sample);
            for row in [re, im] {
                let reduced = DVector::from_fn(2 * m, |i, _| {
                    if i < m {
                        row[free[i]]
                    } else {
                        row[free[i - m] + l]
                    }
                });
                if b.bound == 0.0 {
                    equalities.push(reduced);
                } else {
                    rows.push((reduced, b.bound));
                }
            }
        }

        let (basis, is_identity) = if equalities.is_empty() {
            (DMatrix::identity(2 * m, 2 * m), true)
        } else {
            (null_space(&equalities, 2 * m), false)
        };
        let dim = basis.ncols();
        let slabs = rows
            .into_iter()
            .map(|(a, u)| (basis.transpose() * a, u))
            .filter(|(a, _)| a.norm() > 0.0)
            .collect();
        Ok(Self {
            m,
            dim,
            free,
            basis,
            is_identity,
            w,
            r_sq,
            slabs,
        })
    }

    fn to_complex(&self, y: &DVector<f64>, prob: &SubproblemB) -> Vec<Complex64> {
        let mut x = vec![Complex64::new(0.0, 0.0); prob.tones()];
        for (i, &k) in self.free.iter().enumerate() {
            x[k] = Complex64::new(y[i], y[i + self.m]);
        }
        x
    }

    fn from_complex(&self, x: &[Complex64]) -> DVector<f64> {
        let y = DVector::from_fn(2 * self.m, |i, _| {
            if i < self.m {
                x[self.free[i]].re
            } else {
                x[self.free[i - self.m]].im
            }
        });
        self.basis.transpose() * y
    }
}

fn null_space(rows: &[DVector<f64>], cols: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]);
    // pad to a square system so the SVD exposes the full right singular basis
    let padded = if a.nrows() < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (a.nrows(), cols)).copy_from(&a);
        p
    } else {
        a
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let smax = svd.singular_values.max();
    let cutoff = smax * 1e-10 * cols as f64;
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] <= cutoff)
        .collect();
    DMatrix::from_fn(cols, keep.len(), |i, j| v_t[(keep[j], i)])
}

struct Barrier<'a> {
    red: &'a Reduced,
    lambda: f64,
    /// `ξ` then `t`, then `s` when `λ > 0`.
    n_vars: usize,
    /// Rows of the basis for each free tone's real and imaginary part.
    tone_rows: Vec<(DVector<f64>, DVector<f64>)>,
    nu: f64,
}

const ALPHA: f64 = 0.25;
const BETA: f64 = 0.5;
const STAGE_GROWTH: f64 = 12.0;
const MAX_NEWTON_PER_STAGE: usize = 200;

impl<'a> Barrier<'a> {
    fn new(red: &'a Reduced, lambda: f64) -> Self {
        let with_linf = lambda > 0.0;
        let n_vars = red.dim + 1 + usize::from(with_linf);
        let tone_rows = if with_linf {
            (0..red.m)
                .map(|k| {
                    (
                        red.basis.row(k).transpose(),
                        red.basis.row(k + red.m).transpose(),
                    )
                })
                .collect()
        } else {
            Vec::new()
        };
        let nu = 2.0 + 2.0 * tone_rows.len() as f64 + 2.0 * red.slabs.len() as f64;
        Self {
            red,
            lambda,
            n_vars,
            tone_rows,
            nu,
        }
    }

    fn with_linf(&self) -> bool {
        !self.tone_rows.is_empty()
    }

    fn split<'z>(&self, z: &'z DVector<f64>) -> (nalgebra::DVectorView<'z, f64>, f64, f64) {
        let d = self.red.dim;
        let xi = z.rows(0, d);
        let t = z[d];
        let s = if self.with_linf() { z[d + 1] } else { 0.0 };
        (xi, t, s)
    }

    fn objective(&self, z: &DVector<f64>) -> f64 {
        let (_, t, s) = self.split(z);
        t + self.lambda * s
    }

    fn cost_vector(&self) -> DVector<f64> {
        let mut c = DVector::zeros(self.n_vars);
        c[self.red.dim] = 1.0;
        if self.with_linf() {
            c[self.red.dim + 1] = self.lambda;
        }
        c
    }

    /// Barrier value, or `None` outside the strict interior.
    fn barrier(&self, z: &DVector<f64>) -> Option<f64> {
        let (xi, t, s) = self.split(z);
        let y = &self.red.basis * xi;
        let q = &y - &self.red.w;
        let g0 = soc_slack(t, q.norm_squared() + self.red.r_sq)?;
        let mut phi = -g0.ln();
        for (zr, zi) in &self.tone_rows {
            let xr = zr.dot(&xi);
            let xim = zi.dot(&xi);
            let gk = soc_slack(s, xr * xr + xim * xim)?;
            phi -= gk.ln();
        }
        for (a, u) in &self.red.slabs {
            let ay = a.dot(&xi);
            let (s1, s2) = (u - ay, u + ay);
            if !(s1 > 0.0 && s2 > 0.0) {
                return None;
            }
            phi -= s1.ln() + s2.ln();
        }
        Some(phi)
    }

    fn derivatives(&self, z: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
        let d = self.red.dim;
        let nv = self.n_vars;
        let (xi, t, s) = self.split(z);
        let mut grad = DVector::zeros(nv);
        let mut hess = DMatrix::zeros(nv, nv);

        // -ln(t² − ‖Bξ − w‖² − r²)
        let y = &self.red.basis * xi;
        let q = &y - &self.red.w;
        let g0 = t * t - q.norm_squared() - self.red.r_sq;
        let mut dg = DVector::zeros(nv);
        dg.rows_mut(0, d).copy_from(&(self.red.basis.transpose() * &q * -2.0));
        dg[d] = 2.0 * t;
        grad -= &dg / g0;
        for i in 0..d {
            hess[(i, i)] += 2.0 / g0;
        }
        hess[(d, d)] -= 2.0 / g0;
        hess.ger(1.0 / (g0 * g0), &dg, &dg, 1.0);

        // -ln(s² − |x_k|²)
        if self.with_linf() {
            let si = d + 1;
            for (zr, zi) in &self.tone_rows {
                let xr = zr.dot(&xi);
                let xim = zi.dot(&xi);
                let gk = s * s - xr * xr - xim * xim;
                let mut dgk = DVector::zeros(nv);
                {
                    let mut head = dgk.rows_mut(0, d);
                    head.axpy(-2.0 * xr, zr, 0.0);
                    head.axpy(-2.0 * xim, zi, 1.0);
                }
                dgk[si] = 2.0 * s;
                grad -= &dgk / gk;
                {
                    let mut block = hess.view_mut((0, 0), (d, d));
                    block.ger(2.0 / gk, zr, zr, 1.0);
                    block.ger(2.0 / gk, zi, zi, 1.0);
                }
                hess[(si, si)] -= 2.0 / gk;
                hess.ger(1.0 / (gk * gk), &dgk, &dgk, 1.0);
            }
        }

        // -ln(u − aξ) − ln(u + aξ)
        for (a, u) in &self.red.slabs {
            let ay = a.dot(&xi);
            let (s1, s2) = (u - ay, u + ay);
            let coef = 1.0 / s1 - 1.0 / s2;
            grad.rows_mut(0, d).axpy(coef, a, 1.0);
            let curv = 1.0 / (s1 * s1) + 1.0 / (s2 * s2);
            hess.view_mut((0, 0), (d, d)).ger(curv, a, a, 1.0);
        }
        (grad, hess)
    }

    fn initial_point(&self, warm: Option<&[Complex64]>) -> DVector<f64> {
        let d = self.red.dim;
        let mut xi = match warm {
            Some(x) => self.red.from_complex(x),
            None => DVector::zeros(d),
        };
        let worst = self
            .red
            .slabs
            .iter()
            .map(|(a, u)| a.dot(&xi).abs() / u)
            .fold(0.0, f64::max);
        if worst > 0.5 {
            xi *= 0.5 / worst;
        }
        let y = &self.red.basis * &xi;
        let fit = ((&y - &self.red.w).norm_squared() + self.red.r_sq).sqrt();
        let scale = self.red.w.norm() + self.red.r_sq.sqrt();
        let mut z = DVector::zeros(self.n_vars);
        z.rows_mut(0, d).copy_from(&xi);
        z[d] = fit + 0.1 * scale.max(1e-12);
        if self.with_linf() {
            let peak = self
                .tone_rows
                .iter()
                .map(|(zr, zi)| zr.dot(&xi).hypot(zi.dot(&xi)))
                .fold(0.0, f64::max);
            z[d + 1] = 1.1 * peak + 0.01 * scale.max(1e-12) / (self.red.m as f64).sqrt();
        }
        z
    }

    fn run(&self, opts: &SolverOptions) -> Result<(DVector<f64>, SolverReport)> {
        let c = self.cost_vector();
        let mut z = self.initial_point(opts.warm_start.as_deref());
        if self.barrier(&z).is_none() {
            return Err(Error::Numerical("no strictly feasible starting point".into()));
        }

        let f0 = self.objective(&z);
        let mut tau = (self.nu / (f0.abs() + 1.0)).max(1e-3);
        let mut iterations = 0usize;
        let mut merit_history = Vec::new();
        let mut log = Vec::new();
        let mut converged = false;
        let mut decrement_sq;
        let mut stage = 0usize;

        loop {
            // centring
            decrement_sq = f64::INFINITY;
            let mut merit = tau * self.objective(&z) + self.barrier(&z).expect("interior");
            for step in 0..MAX_NEWTON_PER_STAGE {
                if iterations >= opts.max_iters {
                    break;
                }
                let (g_phi, hess) = self.derivatives(&z);
                let grad = &c * tau + g_phi;
                let dir = match newton_direction(hess, &grad) {
                    Some(d) => d,
                    None => {
                        return Err(Error::Numerical(format!(
                            "singular barrier Hessian at stage {stage}"
                        )))
                    }
                };
                decrement_sq = -grad.dot(&dir);
                iterations += 1;
                if opts.record_log {
                    log.push(SolverLogEntry {
                        stage,
                        newton_step: step,
                        barrier_weight: tau,
                        merit,
                        objective: self.objective(&z),
                        decrement_sq,
                    });
                }
                if !(decrement_sq >= 0.0) {
                    return Err(Error::Numerical("barrier Hessian is not positive definite".into()));
                }
                if decrement_sq / 2.0 <= 1e-10 {
                    break;
                }
                let mut alpha = 1.0;
                let mut accepted = false;
                while alpha > 1e-16 {
                    let cand = &z + &dir * alpha;
                    if let Some(phi) = self.barrier(&cand) {
                        let m = tau * self.objective(&cand) + phi;
                        if m <= merit - ALPHA * alpha * decrement_sq {
                            z = cand;
                            merit = m;
                            accepted = true;
                            break;
                        }
                    }
                    alpha *= BETA;
                }
                if !accepted {
                    // round-off floor: the centre is as good as f64 allows
                    break;
                }
            }
            let obj = self.objective(&z);
            merit_history.push(obj);
            let gap = self.nu / tau;
            let stationarity = decrement_sq / tau;
            if gap <= opts.tol && stationarity <= opts.tol {
                converged = true;
                break;
            }
            if iterations >= opts.max_iters || gap < 1e-300 {
                break;
            }
            tau *= STAGE_GROWTH;
            stage += 1;
        }

        let report = SolverReport {
            objective: self.objective(&z),
            primal_residual: 0.0,
            stationarity_residual: decrement_sq / tau,
            duality_gap: self.nu / tau,
            iterations,
            converged,
            merit_history,
            log,
        };
        Ok((z.rows(0, self.red.dim).into_owned(), report))
    }
}

/// `sqrt-free` cone slack `t² − q²`, requiring `t > 0`.
fn soc_slack(t: f64, q_sq: f64) -> Option<f64> {
    if !(t > 0.0) {
        return None;
    }
    let g = t * t - q_sq;
    (g > 0.0 && g.is_finite()).then_some(g)
}

fn newton_direction(mut hess: DMatrix<f64>, grad: &DVector<f64>) -> Option<DVector<f64>> {
    let n = hess.nrows();
    // symmetric diagonal scaling keeps the factorization well conditioned
    let scale: Vec<f64> = (0..n)
        .map(|i| {
            let d = hess[(i, i)];
            if d > 0.0 && d.is_finite() {
                1.0 / d.sqrt()
            } else {
                1.0
            }
        })
        .collect();
    for i in 0..n {
        for j in 0..n {
            hess[(i, j)] *= scale[i] * scale[j];
        }
    }
    let g = DVector::from_fn(n, |i, _| grad[i] * scale[i]);
    let mut ridge = 0.0;
    for _ in 0..12 {
        let mut h = hess.clone();
        if ridge > 0.0 {
            for i in 0..n {
                h[(i, i)] += ridge;
            }
        }
        if let Some(chol) = h.cholesky() {
            let step = chol.solve(&(-&g));
            return Some(DVector::from_fn(n, |i, _| step[i] * scale[i]));
        }
        ridge = if ridge == 0.0 { 1e-14 } else { ridge * 100.0 };
    }
    None
}
