//! Alternating minimization that fits a sequence's time envelope to an
//! on-off shape.
//!
//! Each iteration fixes the sequence and takes the phase of every ON sample
//! in closed form, then fixes the phases and solves the convex sequence
//! update with [`crate::solver`]. The iterate is kept unnormalized; the
//! returned sequence is rescaled to `‖c‖² = P`.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::metrics::rmse_cost_tones;
use crate::operator::{build_operator, SynthesisOperator};
use crate::sequence::{nominal_power, Sequence};
use crate::solver::{solve_with, BoundedOutput, SolverLogEntry, SolverOptions, SubproblemB};
use crate::waveform::ShapeTemplate;

#[derive(Debug, Clone)]
pub struct ScanParams {
    pub lambda: f64,
    /// Bound on `|Re|` and `|Im|` of sample 0; `inf` disables it.
    pub u_first: f64,
    /// Bound on `|Re|` and `|Im|` of every OFF sample; `inf` disables it.
    pub u_leak: f64,
    pub max_iters: usize,
    pub cost_tol: f64,
    pub solver_tol: f64,
    pub initial: Sequence,
    /// Keep the per-Newton-step solver log.
    pub solver_debug: bool,
}

impl ScanParams {
    pub fn new(initial: Sequence) -> Self {
        Self {
            lambda: 0.0,
            u_first: 1e-3,
            u_leak: 1e-3,
            max_iters: 500,
            cost_tol: 1e-7,
            solver_tol: 1e-10,
            initial,
            solver_debug: false,
        }
    }

    /// All-ones start of length `tones` (DC entry zero).
    pub fn ones(tones: usize) -> Result<Self> {
        let mut c = vec![Complex64::new(1.0, 0.0); tones];
        if tones % 2 == 1 {
            c[(tones - 1) / 2] = Complex64::new(0.0, 0.0);
        }
        Ok(Self::new(Sequence::new(c)?))
    }

    pub fn tones(&self) -> usize {
        self.initial.len()
    }

    pub fn validate(&self, grid: usize) -> Result<()> {
        let l = self.tones();
        if l < 3 || l % 2 == 0 {
            return Err(Error::InvalidSequence(format!(
                "initial sequence must have odd length >= 3, got {l}"
            )));
        }
        if grid < 2 * l - 1 {
            return Err(Error::Undersampled {
                n: grid,
                tones: l,
                min: 2 * l - 1,
            });
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::Config(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        for (name, u) in [("u_first", self.u_first), ("u_leak", self.u_leak)] {
            if !(u >= 0.0) {
                return Err(Error::Config(format!("{name} must be >= 0, got {u}")));
            }
        }
        if !(self.cost_tol > 0.0) || !(self.solver_tol > 0.0) {
            return Err(Error::Config("tolerances must be > 0".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be >= 1".into()));
        }
        if self.initial.elements().iter().all(|c| c.norm() == 0.0) {
            return Err(Error::ZeroSignal);
        }
        Ok(())
    }
}

/// Unit-modulus phases on the ON samples of a shape.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseVector {
    on_set: Vec<usize>,
    z: Vec<Complex64>,
}

impl PhaseVector {
    pub fn from_angles(on_set: Vec<usize>, angles: &[f64]) -> Result<Self> {
        if on_set.len() != angles.len() {
            return Err(Error::LengthMismatch {
                expected: on_set.len(),
                got: angles.len(),
            });
        }
        let z = angles.iter().map(|&a| Complex64::from_polar(1.0, a)).collect();
        Ok(Self { on_set, z })
    }

    pub fn ones(shape: &ShapeTemplate) -> Self {
        Self {
            on_set: shape.on_set().to_vec(),
            z: vec![Complex64::new(1.0, 0.0); shape.on_set().len()],
        }
    }

    pub fn on_set(&self) -> &[usize] {
        &self.on_set
    }

    pub fn values(&self) -> &[Complex64] {
        &self.z
    }

    /// `√P · A z`: the scaled shape with these phases, length `n`.
    pub fn target(&self, shape: &ShapeTemplate, power: f64) -> Vec<Complex64> {
        let mut v = vec![Complex64::new(0.0, 0.0); shape.len()];
        let amps = shape.amplitudes();
        let root = power.sqrt();
        for (&p, z) in self.on_set.iter().zip(&self.z) {
            v[p] = z * (root * amps[p]);
        }
        v
    }
}

/// `(1/√N)·‖Gc − √P·A z‖` for raw tones.
pub fn modified_cost_tones(tones: &[Complex64], z: &PhaseVector, shape: &ShapeTemplate) -> Result<f64> {
    let op = build_operator(tones.len(), shape.len())?;
    modified_cost_with(&op, tones, z, shape)
}

pub fn modified_cost(seq: &Sequence, z: &PhaseVector, shape: &ShapeTemplate) -> Result<f64> {
    modified_cost_tones(seq.elements(), z, shape)
}

fn modified_cost_with(
    op: &SynthesisOperator,
    tones: &[Complex64],
    z: &PhaseVector,
    shape: &ShapeTemplate,
) -> Result<f64> {
    if z.on_set() != shape.on_set() {
        return Err(Error::LengthMismatch {
            expected: shape.on_set().len(),
            got: z.on_set().len(),
        });
    }
    let s = op.forward(tones);
    let v = z.target(shape, nominal_power(tones.len()));
    let sum: f64 = s.iter().zip(&v).map(|(a, b)| (a - b).norm_sqr()).sum();
    Ok((sum / shape.len() as f64).sqrt())
}

/// Phase of each synthesized ON sample; exact zeros take phase 0.
pub fn phase_update_tones(tones: &[Complex64], shape: &ShapeTemplate) -> Result<PhaseVector> {
    let op = build_operator(tones.len(), shape.len())?;
    Ok(phase_update_with(&op, tones, shape))
}

pub fn phase_update(seq: &Sequence, shape: &ShapeTemplate) -> Result<PhaseVector> {
    phase_update_tones(seq.elements(), shape)
}

fn phase_update_with(op: &SynthesisOperator, tones: &[Complex64], shape: &ShapeTemplate) -> PhaseVector {
    let s = op.forward(tones);
    let z = shape
        .on_set()
        .iter()
        .map(|&p| {
            let n = s[p].norm();
            if n == 0.0 {
                Complex64::new(1.0, 0.0)
            } else {
                s[p] / n
            }
        })
        .collect();
    PhaseVector {
        on_set: shape.on_set().to_vec(),
        z,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    /// Fit to the phased shape, without the λ term.
    pub cost_mod: f64,
    /// Sampled envelope RMSE of the unnormalized iterate.
    pub cost_rmse: f64,
    pub linf: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScanTrace {
    pub rows: Vec<TraceRow>,
}

impl ScanTrace {
    /// `cost_mod + λ·linf` per row.
    pub fn objective(&self, lambda: f64) -> Vec<f64> {
        self.rows.iter().map(|r| r.cost_mod + lambda * r.linf).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("iter,cost_mod,cost_rmse,linf\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{:.12e},{:.12e},{:.12e}", r.iter, r.cost_mod, r.cost_rmse, r.linf);
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Clone)]
pub struct ScanOutcome {
    /// Final sequence rescaled to `‖c‖² = P`.
    pub sequence: Sequence,
    /// Last unnormalized iterate.
    pub raw: Vec<Complex64>,
    pub trace: ScanTrace,
    /// Stopped on the cost tolerance with every sequence update converged.
    pub converged: bool,
    pub solver_iterations: usize,
    pub solver_failures: usize,
    /// `(scan iteration, entry)` pairs when `solver_debug` is set.
    pub solver_log: Vec<(usize, SolverLogEntry)>,
}

impl ScanOutcome {
    pub fn write_solver_log(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = String::from("scan_iter,stage,newton_step,barrier_weight,merit,objective,decrement_sq\n");
        for (it, e) in &self.solver_log {
            let _ = writeln!(
                out,
                "{it},{},{},{:.6e},{:.12e},{:.12e},{:.6e}",
                e.stage, e.newton_step, e.barrier_weight, e.merit, e.objective, e.decrement_sq
            );
        }
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }
}

/// Bounds on sample 0 and the OFF samples, tightest per sample.
pub fn output_bounds(params: &ScanParams, shape: &ShapeTemplate) -> Vec<BoundedOutput> {
    let mut bounds = Vec::new();
    if params.u_first.is_finite() {
        bounds.push(BoundedOutput {
            sample: 0,
            bound: params.u_first,
        });
    }
    if params.u_leak.is_finite() {
        for &p in shape.off_set() {
            bounds.push(BoundedOutput {
                sample: p,
                bound: params.u_leak,
            });
        }
    }
    bounds
}

pub fn scan_run(params: &ScanParams, shape: &ShapeTemplate) -> Result<ScanOutcome> {
    let n = shape.len();
    params.validate(n)?;
    let l = params.tones();
    let power = nominal_power(l);
    let op = build_operator(l, n)?;
    let bounds = output_bounds(params, shape);
    let dc = (l - 1) / 2;

    let mut c = params.initial.elements().to_vec();
    let mut trace = ScanTrace::default();
    let mut prev: Option<f64> = None;
    let mut tol_stop = false;
    let mut solver_iterations = 0;
    let mut solver_failures = 0;
    let mut solver_log = Vec::new();

    for iter in 1..=params.max_iters {
        let z = phase_update_with(&op, &c, shape);
        let prob = SubproblemB::new(op.clone(), z.target(shape, power), params.lambda, dc, bounds.clone())?;
        let opts = SolverOptions {
            tol: params.solver_tol,
            warm_start: Some(c.clone()),
            record_log: params.solver_debug,
            ..SolverOptions::default()
        };
        let (x, report) = solve_with(&prob, &opts).map_err(|e| Error::Solver {
            iteration: iter,
            msg: e.to_string(),
        })?;
        solver_iterations += report.iterations;
        if !report.converged {
            solver_failures += 1;
        }
        solver_log.extend(report.log.into_iter().map(|e| (iter, e)));
        c = x;

        let cost_mod = modified_cost_with(&op, &c, &z, shape)?;
        let linf = c.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let cost_rmse = rmse_cost_tones(&c, shape)?;
        trace.rows.push(TraceRow {
            iter,
            cost_mod,
            cost_rmse,
            linf,
        });

        let obj = cost_mod + params.lambda * linf;
        if let Some(p) = prev {
            if (p - obj) / p.abs().max(f64::MIN_POSITIVE) < params.cost_tol {
                tol_stop = true;
                break;
            }
        }
        if obj == 0.0 {
            tol_stop = true;
            break;
        }
        prev = Some(obj);
    }

    let sequence = Sequence::normalized(c.clone())?;
    Ok(ScanOutcome {
        sequence,
        raw: c,
        trace,
        converged: tol_stop && solver_failures == 0,
        solver_iterations,
        solver_failures,
        solver_log,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waveform::{make_shape, WaveformConfig};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn rand_tones(rng: &mut ChaCha8Rng, l: usize) -> Vec<Complex64> {
        (0..l)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect()
    }

    fn direct_cost(c: &[Complex64], z: &PhaseVector, shape: &ShapeTemplate) -> f64 {
        let n = shape.len();
        let p_pow = c.len() as f64 - 1.0;
        let mut acc = 0.0;
        for p in 0..n {
            let mut s = Complex64::new(0.0, 0.0);
            for (k, ck) in c.iter().enumerate() {
                s += ck * Complex64::from_polar(1.0, 2.0 * PI * (k * p) as f64 / n as f64);
            }
            let t = match z.on_set().iter().position(|&q| q == p) {
                Some(i) => z.values()[i] * p_pow.sqrt() * shape.amplitudes()[p],
                None => Complex64::new(0.0, 0.0),
            };
            acc += (s - t).norm_sqr();
        }
        (acc / n as f64).sqrt()
    }

    #[test]
    fn modified_cost_examples() {
        let shape = make_shape(&WaveformConfig::wifi(1.2).unwrap(), 0, 64).unwrap();
        let zero = vec![Complex64::new(0.0, 0.0); 15];
        let ones = PhaseVector::ones(&shape);
        let got = modified_cost_tones(&zero, &ones, &shape).unwrap();
        assert!((got - 14f64.sqrt()).abs() < 1e-12);

        let flat = ShapeTemplate::flat(16);
        let mut c = vec![Complex64::new(0.0, 0.0); 5];
        c[0] = Complex64::new(2.0, 0.0);
        let z = phase_update_tones(&c, &flat).unwrap();
        assert!(modified_cost_tones(&c, &z, &flat).unwrap() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..5 {
            let c = rand_tones(&mut rng, 15);
            let angles: Vec<f64> = (0..shape.on_set().len()).map(|_| rng.random_range(0.0..6.3)).collect();
            let z = PhaseVector::from_angles(shape.on_set().to_vec(), &angles).unwrap();
            let got = modified_cost_tones(&c, &z, &shape).unwrap();
            assert!((got - direct_cost(&c, &z, &shape)).abs() < 1e-10);
        }
    }

    #[test]
    fn phase_update_examples() {
        let flat = ShapeTemplate::flat(16);
        // a single tone at k = 0 gives real positive samples
        let mut c = vec![Complex64::new(0.0, 0.0); 5];
        c[0] = Complex64::new(0.5, 0.0);
        let z = phase_update_tones(&c, &flat).unwrap();
        assert!(z.values().iter().all(|v| (v - 1.0).norm() < 1e-15));

        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let c = rand_tones(&mut rng, 5);
        let scaled: Vec<Complex64> = c.iter().map(|v| v * 3.7).collect();
        let a = phase_update_tones(&c, &flat).unwrap();
        let b = phase_update_tones(&scaled, &flat).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).norm() < 1e-12);
        }
        let zero = phase_update_tones(&[Complex64::new(0.0, 0.0); 5], &flat).unwrap();
        assert!(zero.values().iter().all(|v| *v == Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn projection_fixed_point_without_constraints() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let shape = make_shape(&WaveformConfig::wifi(1.6).unwrap(), 0, 64).unwrap();
        let mut init = rand_tones(&mut rng, 15);
        init[7] = Complex64::new(0.0, 0.0);
        let mut params = ScanParams::new(Sequence::new(init.clone()).unwrap());
        params.u_first = f64::INFINITY;
        params.u_leak = f64::INFINITY;
        params.max_iters = 1;
        let out = scan_run(&params, &shape).unwrap();
        let op = build_operator(15, 64).unwrap();
        let z = phase_update_tones(&init, &shape).unwrap();
        let mut want: Vec<Complex64> = op
            .adjoint(&z.target(&shape, 14.0))
            .into_iter()
            .map(|v| v / 64.0)
            .collect();
        want[7] = Complex64::new(0.0, 0.0);
        for (a, b) in out.raw.iter().zip(&want) {
            assert!((a - b).norm() < 1e-12);
        }
        assert_eq!(out.trace.rows.len(), 1);
        assert!(!out.converged);
    }

    #[test]
    fn single_tone_target_stops_quickly() {
        let flat = ShapeTemplate::flat(16);
        let mut init = vec![Complex64::new(0.0, 0.0); 5];
        init[0] = Complex64::new(2.0, 0.0);
        let mut params = ScanParams::new(Sequence::new(init).unwrap());
        params.u_first = f64::INFINITY;
        params.u_leak = f64::INFINITY;
        let out = scan_run(&params, &flat).unwrap();
        assert!(out.trace.rows.len() <= 2);
        assert!(out.trace.rows.last().unwrap().cost_mod < 1e-12);
        assert!(out.converged);
    }

    #[test]
    fn trace_csv_header() {
        let t = ScanTrace {
            rows: vec![TraceRow { iter: 1, cost_mod: 0.5, cost_rmse: 1.0, linf: 2.0 }],
        };
        let csv = t.to_csv();
        assert!(csv.starts_with("iter,cost_mod,cost_rmse,linf\n1,"));
    }

    #[test]
    fn rejects_bad_params() {
        let shape = ShapeTemplate::flat(16);
        let mut p = ScanParams::ones(5).unwrap();
        p.lambda = -1.0;
        assert!(scan_run(&p, &shape).is_err());
        assert!(ScanParams::ones(4).is_err());
        let p = ScanParams::ones(15).unwrap();
        assert!(scan_run(&p, &ShapeTemplate::flat(20)).is_err());
        let mut p = ScanParams::ones(5).unwrap();
        p.max_iters = 0;
        assert!(scan_run(&p, &shape).is_err());
    }
}
