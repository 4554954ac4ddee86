//! Log-barrier interior point method on the convex (log-variable) form.

use super::{GpProblem, Posynomial};
use crate::error::{Error, Result};
use crate::linalg::real::solve_in_place;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GpStatus {
    Optimal,
    Infeasible,
    MaxIters,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Larger of the duality gap `m / t` and the stationarity residual
    /// measured in the local Hessian norm, both on the log-objective scale.
    pub kkt_residual: f64,
    pub status: GpStatus,
    /// Newton steps over both phases.
    pub iterations: usize,
}

impl GpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == GpStatus::Optimal
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GpOptions {
    pub tol: f64,
    /// Newton step cap per phase.
    pub max_iters: usize,
    /// Starting point for phase I. Need not be feasible.
    pub start: Option<Vec<f64>>,
    /// Barrier weight of the first centering step. Larger values suit
    /// starts that are already close to optimal.
    pub initial_barrier: f64,
}

impl Default for GpOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_iters: 500, start: None, initial_barrier: 1.0 }
    }
}

/// `log sum_k exp(a_k . z + b_k)` over `n` variables.
#[derive(Debug, Clone)]
struct LogSumExp {
    n: usize,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl LogSumExp {
    fn from_posynomial(p: &Posynomial, n: usize) -> Self {
        let mut a = Vec::with_capacity(p.terms().len() * n);
        let mut b = Vec::with_capacity(p.terms().len());
        for t in p.terms() {
            a.extend_from_slice(t.exponents());
            a.resize(a.len() + n - t.nvars(), 0.0);
            b.push(t.coeff().ln());
        }
        Self { n, a, b }
    }

    fn terms(&self) -> usize {
        self.b.len()
    }

    fn row(&self, k: usize) -> &[f64] {
        &self.a[k * self.n..(k + 1) * self.n]
    }

    fn value(&self, z: &[f64]) -> f64 {
        let e: Vec<f64> = (0..self.terms()).map(|k| dot(self.row(k), z) + self.b[k]).collect();
        let top = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        top + e.iter().map(|v| (v - top).exp()).sum::<f64>().ln()
    }

    /// Value, gradient and (if requested) row-major Hessian.
    fn eval(&self, z: &[f64], hess: bool) -> (f64, Vec<f64>, Option<Vec<f64>>) {
        let n = self.n;
        let e: Vec<f64> = (0..self.terms()).map(|k| dot(self.row(k), z) + self.b[k]).collect();
        let top = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = e.iter().map(|v| (v - top).exp()).collect();
        let sum: f64 = w.iter().sum();
        let value = top + sum.ln();
        let mut g = vec![0.0; n];
        for (k, wk) in w.iter().enumerate() {
            axpy(wk / sum, self.row(k), &mut g);
        }
        let h = (hess && self.terms() > 1).then(|| {
            let mut h = vec![0.0; n * n];
            for (k, wk) in w.iter().enumerate() {
                let p = wk / sum;
                let r = self.row(k);
                for i in 0..n {
                    if r[i] == 0.0 {
                        continue;
                    }
                    for j in 0..n {
                        h[i * n + j] += p * r[i] * r[j];
                    }
                }
            }
            for i in 0..n {
                for j in 0..n {
                    h[i * n + j] -= g[i] * g[j];
                }
            }
            h
        });
        (value, g, h)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Linear equality constraints `E z = f`, row-major `E`.
#[derive(Debug, Clone)]
struct Equalities {
    e: Vec<f64>,
    f: Vec<f64>,
}

impl Equalities {
    fn rows(&self) -> usize {
        self.f.len()
    }

    /// Moves `z` onto the affine set by a least-norm correction.
    fn project(&self, z: &mut [f64]) -> Result<()> {
        let p = self.rows();
        if p == 0 {
            return Ok(());
        }
        let n = z.len();
        let row = |i: usize| &self.e[i * n..(i + 1) * n];
        let mut gram = vec![0.0; p * p];
        for i in 0..p {
            for j in 0..p {
                gram[i * p + j] = dot(row(i), row(j));
            }
        }
        let mut r: Vec<f64> = (0..p).map(|i| dot(row(i), z) - self.f[i]).collect();
        solve_in_place(&mut gram, &mut r)
            .ok_or_else(|| Error::InvalidInput("monomial equalities are linearly dependent".into()))?;
        for (i, ri) in r.iter().enumerate() {
            axpy(-ri, row(i), z);
        }
        Ok(())
    }
}

struct Barrier<'a> {
    objective: &'a LogSumExp,
    constraints: &'a [LogSumExp],
    eq: &'a Equalities,
    tol: f64,
    max_iters: usize,
    t0: f64,
}

struct Outcome {
    z: Vec<f64>,
    iterations: usize,
    capped: bool,
    kkt_residual: f64,
}

const MU: f64 = 10.0;
const CENTERING_TOL: f64 = 1e-11;

impl Barrier<'_> {
    fn constraint_values(&self, z: &[f64]) -> Option<Vec<f64>> {
        let v: Vec<f64> = self.constraints.iter().map(|c| c.value(z)).collect();
        v.iter().all(|f| *f < 0.0 && f.is_finite()).then_some(v)
    }

    fn phi(&self, t: f64, z: &[f64]) -> Option<f64> {
        let f = self.constraint_values(z)?;
        let v = t * self.objective.value(z) - f.iter().map(|fi| (-fi).ln()).sum::<f64>();
        v.is_finite().then_some(v)
    }

    fn grad_hess(&self, t: f64, z: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = z.len();
        let (_, g0, h0) = self.objective.eval(z, true);
        let mut g: Vec<f64> = g0.iter().map(|v| t * v).collect();
        let mut h = h0.map_or_else(|| vec![0.0; n * n], |h| h.into_iter().map(|v| t * v).collect());
        for c in self.constraints {
            let (f, gi, hi) = c.eval(z, true);
            let inv = -1.0 / f;
            axpy(inv, &gi, &mut g);
            if let Some(hi) = hi {
                axpy(inv, &hi, &mut h);
            }
            for i in 0..n {
                if gi[i] == 0.0 {
                    continue;
                }
                for j in 0..n {
                    h[i * n + j] += inv * inv * gi[i] * gi[j];
                }
            }
        }
        (g, h)
    }

    /// Newton step of the equality-constrained centering problem.
    fn newton_step(&self, g: &[f64], h: &[f64]) -> Option<Vec<f64>> {
        let n = g.len();
        let p = self.eq.rows();
        let size = n + p;
        let build = |ridge: f64| {
            let mut k = vec![0.0; size * size];
            for i in 0..n {
                k[i * size..i * size + n].copy_from_slice(&h[i * n..(i + 1) * n]);
                k[i * size + i] += ridge;
            }
            for r in 0..p {
                for j in 0..n {
                    let e = self.eq.e[r * n + j];
                    k[(n + r) * size + j] = e;
                    k[j * size + n + r] = e;
                }
            }
            let mut rhs: Vec<f64> = g.iter().map(|v| -v).collect();
            rhs.resize(size, 0.0);
            (k, rhs)
        };
        let scale = (0..n).map(|i| h[i * n + i].abs()).fold(0.0, f64::max).max(1.0);
        for ridge in [0.0, 1e-12 * scale, 1e-8 * scale] {
            let (mut k, mut rhs) = build(ridge);
            if solve_in_place(&mut k, &mut rhs).is_some() {
                rhs.truncate(n);
                return Some(rhs);
            }
        }
        None
    }

    fn run(&self, mut z: Vec<f64>, stop: impl Fn(&[f64]) -> bool) -> Outcome {
        let m = self.constraints.len() as f64;
        let mut t = self.t0;
        let mut iterations = 0;
        let mut stationarity = f64::INFINITY;
        loop {
            loop {
                let (g, h) = self.grad_hess(t, &z);
                let Some(dz) = self.newton_step(&g, &h) else {
                    break;
                };
                let decrement = -dot(&g, &dz);
                stationarity = decrement.max(0.0).sqrt() / t;
                let Some(phi0) = self.phi(t, &z) else {
                    break;
                };
                // Decreases below the rounding level of phi are not attainable.
                if decrement / 2.0 <= CENTERING_TOL.max(1e-14 * phi0.abs()) {
                    break;
                }
                let mut step = 1.0;
                let mut accepted = None;
                while step > 1e-14 {
                    let cand: Vec<f64> = z.iter().zip(&dz).map(|(a, b)| a + step * b).collect();
                    if let Some(phi) = self.phi(t, &cand) {
                        if phi <= phi0 - 0.25 * step * decrement {
                            accepted = Some(cand);
                            break;
                        }
                    }
                    step *= 0.5;
                }
                let Some(next) = accepted.filter(|c| *c != z) else {
                    break;
                };
                z = next;
                iterations += 1;
                if stop(&z) {
                    return Outcome { z, iterations, capped: false, kkt_residual: f64::NAN };
                }
                if iterations >= self.max_iters {
                    let kkt = stationarity.max(m / t);
                    return Outcome { z, iterations, capped: true, kkt_residual: kkt };
                }
            }
            if m == 0.0 || m / t < self.tol {
                break;
            }
            t *= MU;
        }
        let gap = if m == 0.0 { 0.0 } else { m / t };
        Outcome { z, iterations, capped: false, kkt_residual: stationarity.max(gap) }
    }
}

/// Solves `problem` with a two-phase barrier method in log variables.
///
/// Lower bounds become monomial constraints. A constant objective turns the
/// solve into a pure feasibility search.
pub fn solve_gp(problem: &GpProblem, opts: &GpOptions) -> Result<GpSolution> {
    problem.validate()?;
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidInput("tolerance must be positive".into()));
    }
    let n = problem.nvars();
    let objective = LogSumExp::from_posynomial(&problem.objective, n);
    let mut constraints: Vec<LogSumExp> =
        problem.inequalities.iter().map(|p| LogSumExp::from_posynomial(p, n)).collect();
    for (j, v) in problem.variables.iter().enumerate() {
        if let Some(l) = v.lower {
            let mut a = vec![0.0; n];
            a[j] = -1.0;
            constraints.push(LogSumExp { n, a, b: vec![l.ln()] });
        }
    }
    let eq = Equalities {
        e: problem.equalities.iter().flat_map(|m| m.exponents().to_vec()).collect(),
        f: problem.equalities.iter().map(|m| -m.coeff().ln()).collect(),
    };

    let mut y = match &opts.start {
        Some(x) => {
            super::check_point(x, n)?;
            x.iter().map(|v| v.ln()).collect()
        }
        None => vec![0.0; n],
    };
    eq.project(&mut y)?;

    let max_f = |y: &[f64]| constraints.iter().map(|c| c.value(y)).fold(f64::NEG_INFINITY, f64::max);
    let mut iterations = 0;

    if !constraints.is_empty() && max_f(&y) >= 0.0 {
        // Phase I: minimize s subject to f_i(y) <= s.
        let mut z = y.clone();
        z.push(max_f(&y) + 1.0);
        let lift = |c: &LogSumExp| {
            let mut a = Vec::with_capacity(c.terms() * (n + 1));
            for k in 0..c.terms() {
                a.extend_from_slice(c.row(k));
                a.push(-1.0);
            }
            LogSumExp { n: n + 1, a, b: c.b.clone() }
        };
        let mut lifted: Vec<LogSumExp> = constraints.iter().map(lift).collect();
        // Keeps phase I bounded: s >= -1.
        let mut floor = vec![0.0; n + 1];
        floor[n] = -1.0;
        lifted.push(LogSumExp { n: n + 1, a: floor, b: vec![-1.0] });
        let mut s_obj = vec![0.0; n + 1];
        s_obj[n] = 1.0;
        let s_objective = LogSumExp { n: n + 1, a: s_obj, b: vec![0.0] };
        let eq1 = Equalities {
            e: (0..eq.rows()).flat_map(|r| {
                let mut row = eq.e[r * n..(r + 1) * n].to_vec();
                row.push(0.0);
                row
            })
            .collect(),
            f: eq.f.clone(),
        };
        let phase1 = Barrier { objective: &s_objective, constraints: &lifted, eq: &eq1, tol: opts.tol, max_iters: opts.max_iters, t0: 1.0 };
        let out = phase1.run(z, |z| max_f(&z[..n]) < -1e-3);
        iterations += out.iterations;
        y = out.z[..n].to_vec();
        if max_f(&y) >= 0.0 {
            let status = if out.capped { GpStatus::MaxIters } else { GpStatus::Infeasible };
            return finish(problem, &y, f64::NAN, status, iterations);
        }
    }

    if problem.objective.is_constant() {
        return finish(problem, &y, 0.0, GpStatus::Optimal, iterations);
    }

    let phase2 = Barrier {
        objective: &objective,
        constraints: &constraints,
        eq: &eq,
        tol: opts.tol,
        max_iters: opts.max_iters,
        t0: opts.initial_barrier.max(1.0),
    };
    let out = phase2.run(y, |_| false);
    iterations += out.iterations;
    let status = if out.capped || !(out.kkt_residual < opts.tol) { GpStatus::MaxIters } else { GpStatus::Optimal };
    finish(problem, &out.z, out.kkt_residual, status, iterations)
}

fn finish(problem: &GpProblem, y: &[f64], kkt: f64, status: GpStatus, iterations: usize) -> Result<GpSolution> {
    let x: Vec<f64> = y.iter().map(|v| v.exp()).collect();
    let objective = problem.objective.eval(&x)?;
    Ok(GpSolution { x, objective, kkt_residual: kkt, status, iterations })
}
