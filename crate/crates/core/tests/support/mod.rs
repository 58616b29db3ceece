//! Independent reference implementations used only by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use wakeform_core::operator::build_operator;
use wakeform_core::solver::{BoundedOutput, SubproblemB};
use wakeform_core::Complex64;

use std::f64::consts::PI;

/// Dense `(Gx)_p = Σ_k x_k e^{j2πkp/N}` built from direct exponentials.
pub fn dense_synthesis(tones: usize, grid: usize) -> Vec<Vec<Complex64>> {
    (0..grid)
        .map(|p| {
            (0..tones)
                .map(|k| Complex64::from_polar(1.0, 2.0 * PI * (k * p) as f64 / grid as f64))
                .collect()
        })
        .collect()
}

pub struct OracleProblem {
    pub tones: usize,
    pub grid: usize,
    pub target: Vec<Complex64>,
    pub lambda: f64,
    pub dc: usize,
    /// (sample, bound) pairs.
    pub bounds: Vec<(usize, f64)>,
}

impl OracleProblem {
    pub fn objective(&self, x: &[Complex64]) -> f64 {
        let g = dense_synthesis(self.tones, self.grid);
        let mut resid = 0.0;
        for p in 0..self.grid {
            let s: Complex64 = (0..self.tones).map(|k| g[p][k] * x[k]).sum();
            resid += (s - self.target[p]).norm_sqr();
        }
        let linf = x.iter().map(|c| c.norm()).fold(0.0, f64::max);
        (resid / self.grid as f64).sqrt() + self.lambda * linf
    }

    pub fn violation(&self, x: &[Complex64]) -> f64 {
        let g = dense_synthesis(self.tones, self.grid);
        let mut worst = x[self.dc].norm();
        for &(p, u) in &self.bounds {
            let s: Complex64 = (0..self.tones).map(|k| g[p][k] * x[k]).sum();
            worst = worst.max(s.re.abs() - u).max(s.im.abs() - u);
        }
        worst.max(0.0)
    }
}

/// Consensus ADMM on `‖A y − b‖ + λ max_k |x_k|` with box rows `|B y| ≤ u`,
/// followed by a scaling toward zero that makes the iterate exactly
/// feasible. The returned objective is therefore an upper bound on the
/// optimum.
pub fn admm_oracle(prob: &OracleProblem, iters: usize, rho: f64) -> (Vec<Complex64>, f64) {
    let (l, n) = (prob.tones, prob.grid);
    let free: Vec<usize> = (0..l).filter(|&k| k != prob.dc).collect();
    let m = free.len();
    let d = 2 * m;
    let g = dense_synthesis(l, n);
    let sn = (n as f64).sqrt();

    // A: 2N × 2m, scaled by 1/√N so the residual block is a plain norm
    let a = DMatrix::from_fn(2 * n, d, |i, j| {
        let e = g[i % n][free[j % m]] / sn;
        match (i < n, j < m) {
            (true, true) => e.re,
            (true, false) => -e.im,
            (false, true) => e.im,
            (false, false) => e.re,
        }
    });
    let b = DVector::from_fn(2 * n, |i, _| {
        if i < n {
            prob.target[i].re / sn
        } else {
            prob.target[i - n].im / sn
        }
    });
    let mut rows = Vec::new();
    let mut ub = Vec::new();
    for &(p, u) in &prob.bounds {
        let re = DVector::from_fn(d, |j, _| {
            let e = g[p][free[j % m]];
            if j < m { e.re } else { -e.im }
        });
        let im = DVector::from_fn(d, |j, _| {
            let e = g[p][free[j % m]];
            if j < m { e.im } else { e.re }
        });
        rows.push(re);
        rows.push(im);
        ub.push(u);
        ub.push(u);
    }
    let nb = rows.len();
    let bmat = DMatrix::from_fn(nb, d, |i, j| rows[i][j]);

    let system = a.transpose() * &a + DMatrix::identity(d, d) + bmat.transpose() * &bmat;
    let chol = system.cholesky().expect("ADMM system is positive definite");

    let mut y = DVector::zeros(d);
    let mut z1 = &a * &y;
    let mut z2 = y.clone();
    let mut z3 = &bmat * &y;
    let mut u1 = DVector::zeros(2 * n);
    let mut u2 = DVector::zeros(d);
    let mut u3 = DVector::zeros(nb);

    for _ in 0..iters {
        let rhs = a.transpose() * (&z1 - &u1) + (&z2 - &u2) + bmat.transpose() * (&z3 - &u3);
        y = chol.solve(&rhs);
        let ay = &a * &y;
        let by = &bmat * &y;

        // prox of ‖· − b‖ with weight 1/ρ
        let e = &ay + &u1 - &b;
        let en = e.norm();
        let shrink = if en > 0.0 { (1.0 - 1.0 / (rho * en)).max(0.0) } else { 0.0 };
        z1 = &b + e * shrink;

        // prox of λ‖·‖∞ over complex moduli via the Moreau identity
        let v = &y + &u2;
        z2 = v.clone() - project_group_l1(&v, m, prob.lambda / rho);

        z3 = DVector::from_fn(nb, |i, _| (by[i] + u3[i]).clamp(-ub[i], ub[i]));

        u1 += &ay - &z1;
        u2 += &y - &z2;
        u3 += &by - &z3;
    }

    // pull the iterate inside the box
    let by = &bmat * &y;
    let mut scale: f64 = 1.0;
    for i in 0..nb {
        if by[i].abs() > ub[i] {
            scale = scale.min(ub[i] / by[i].abs());
        }
    }
    y *= scale;
    let mut x = vec![Complex64::new(0.0, 0.0); l];
    for (j, &k) in free.iter().enumerate() {
        x[k] = Complex64::new(y[j], y[j + m]);
    }
    let obj = prob.objective(&x);
    (x, obj)
}

/// Project the group moduli `(v_k, v_{k+m})` onto the ℓ1 ball of `radius`.
fn project_group_l1(v: &DVector<f64>, m: usize, radius: f64) -> DVector<f64> {
    let mods: Vec<f64> = (0..m).map(|k| v[k].hypot(v[k + m])).collect();
    let total: f64 = mods.iter().sum();
    if total <= radius {
        return v.clone();
    }
    if radius == 0.0 {
        return DVector::zeros(v.len());
    }
    let mut sorted = mods.clone();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (i, s) in sorted.iter().enumerate() {
        cum += s;
        let t = (cum - radius) / (i + 1) as f64;
        if *s > t {
            theta = t;
        }
    }
    let mut out = v.clone();
    for k in 0..m {
        let f = if mods[k] > 0.0 {
            (mods[k] - theta).max(0.0) / mods[k]
        } else {
            0.0
        };
        out[k] *= f;
        out[k + m] *= f;
    }
    out
}

/// Centred synthesis by direct summation: `(1/√P) Σ_k c_k e^{j2π(k-m)p/n}`.
pub fn direct_synthesis(c: &[Complex64], n: usize) -> Vec<Complex64> {
    let m = (c.len() as f64 - 1.0) / 2.0;
    let scale = 1.0 / (c.len() as f64 - 1.0).sqrt();
    (0..n)
        .map(|p| {
            c.iter()
                .enumerate()
                .map(|(k, &x)| x * Complex64::from_polar(scale, 2.0 * PI * (k as f64 - m) * p as f64 / n as f64))
                .sum()
        })
        .collect()
}


/// Random instance with L ≤ 7, N ≤ 32, a bound on sample 0 and bounds on
/// a random subset of the other samples.
pub fn random_instance(rng: &mut ChaCha8Rng) -> (SubproblemB, OracleProblem) {
    let l = [3usize, 5, 7][rng.random_range(0..3)];
    let n = rng.random_range(2 * l - 1..=32);
    let lambda = if rng.random_bool(0.3) { 0.0 } else { rng.random_range(0.0..1.0) };
    let target: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let mut bounds = vec![(0usize, rng.random_range(0.01..0.3))];
    for p in 1..n {
        if rng.random_bool(0.4) {
            bounds.push((p, rng.random_range(0.005..0.5)));
        }
    }
    let dc = (l - 1) / 2;
    let sub = SubproblemB::new(
        build_operator(l, n).unwrap(),
        target.clone(),
        lambda,
        dc,
        bounds
            .iter()
            .map(|&(sample, bound)| BoundedOutput { sample, bound })
            .collect(),
    )
    .unwrap();
    let oracle = OracleProblem {
        tones: l,
        grid: n,
        target,
        lambda,
        dc,
        bounds,
    };
    (sub, oracle)
}
