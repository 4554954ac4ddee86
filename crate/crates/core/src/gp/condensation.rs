//! Successive single condensation for products of posynomial ratios.

use super::{condense, epigraph_reduce, solve_gp, GpOptions, GpProblem, GpSolution, GpStatus, Monomial, Posynomial, Variable, WeightedFactor};
use crate::error::{Error, Result};

/// `(num / den)^weight`.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioFactor {
    pub num: Posynomial,
    pub den: Posynomial,
    pub weight: f64,
}

/// Minimize `prod_i (num_i / den_i)^{w_i}` subject to `p <= 1` constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioProblem {
    pub variables: Vec<Variable>,
    pub factors: Vec<RatioFactor>,
    pub constraints: Vec<Posynomial>,
}

impl RatioProblem {
    pub fn objective(&self, x: &[f64]) -> Result<f64> {
        let mut v = 1.0;
        for f in &self.factors {
            if f.weight > 0.0 {
                v *= (f.num.eval(x)? / f.den.eval(x)?).powf(f.weight);
            }
        }
        Ok(v)
    }

    fn base(&self) -> Result<GpProblem> {
        let n = self.variables.len();
        let mut p = GpProblem::new(self.variables.clone(), Monomial::constant(n, 1.0)?.into());
        p.inequalities = self.constraints.clone();
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CondensedSolution {
    /// Final point; `objective` is the true ratio objective there.
    pub solution: GpSolution,
    /// True objective at the start point and after every accepted iteration.
    pub trace: Vec<f64>,
}

const REL_STOP: f64 = 1e-6;
const WARM_BARRIER: f64 = 100.0;

/// Condenses every denominator at the current point, solves the resulting GP
/// and repeats until the relative objective change drops below `1e-6` or
/// `max_iters` GPs have been solved. Never accepts a point that raises the
/// true objective.
pub fn solve_condensed_ratio(problem: &RatioProblem, x0: &[f64], max_iters: usize, opts: &GpOptions) -> Result<CondensedSolution> {
    let base = problem.base()?;
    let n = base.nvars();
    if base.max_violation(x0)? > 1.0 + 1e-9 {
        return Err(Error::InvalidInput("condensation start point is infeasible".into()));
    }
    let exact = problem.factors.iter().all(|f| f.den.is_monomial());

    let mut x = x0.to_vec();
    let mut current = problem.objective(&x)?;
    let mut trace = vec![current];
    let mut last = GpSolution { x: x.clone(), objective: current, kkt_residual: f64::NAN, status: GpStatus::MaxIters, iterations: 0 };
    let mut status = GpStatus::MaxIters;
    let mut kkt = f64::NAN;
    let mut iterations = 0;

    for it in 0..max_iters {
        let factors = problem
            .factors
            .iter()
            .map(|f| {
                let m = condense(&f.den, &x)?;
                Ok(WeightedFactor { posy: f.num.mul_monomial(&m.recip())?, weight: f.weight })
            })
            .collect::<Result<Vec<_>>>()?;
        let reduced = epigraph_reduce(&base, &factors)?;
        let mut start = x.clone();
        let mut prod = 1.0;
        for f in factors.iter().filter(|f| f.weight > 0.0) {
            let v = f.posy.eval(&x)? * 1.01;
            prod *= v.powf(f.weight);
            start.push(v);
        }
        if reduced.nvars() > n {
            start.push(prod * 1.01);
        }
        let warm = if it == 0 { opts.initial_barrier } else { WARM_BARRIER };
        let sol = solve_gp(&reduced, &GpOptions { start: Some(start), initial_barrier: warm, ..opts.clone() })?;
        iterations += sol.iterations;
        if sol.status != GpStatus::Optimal {
            if it == 0 {
                last = sol;
                last.x.truncate(n);
                last.objective = problem.objective(&last.x).unwrap_or(f64::NAN);
                last.iterations = iterations;
                return Ok(CondensedSolution { solution: last, trace });
            }
            break;
        }
        let candidate = sol.x[..n].to_vec();
        let value = problem.objective(&candidate)?;
        kkt = sol.kkt_residual;
        status = GpStatus::Optimal;
        if value > current {
            break;
        }
        let change = (current - value) / current;
        x = candidate;
        current = value;
        trace.push(current);
        if exact || change < REL_STOP {
            break;
        }
    }
    last.x = x;
    last.objective = current;
    last.kkt_residual = kkt;
    last.status = status;
    last.iterations = iterations;
    Ok(CondensedSolution { solution: last, trace })
}
