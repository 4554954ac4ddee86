//! Geometric programming.
//!
//! Monomials and posynomials over a fixed, dense list of positive variables,
//! a log-barrier interior-point solver, the epigraph reduction for weighted
//! products of posynomials and the single-condensation loop for products of
//! posynomial ratios.

mod condensation;
mod epigraph;
mod solver;

pub use condensation::{solve_condensed_ratio, CondensedSolution, RatioFactor, RatioProblem};
pub use epigraph::{epigraph_reduce, WeightedFactor};
pub use solver::{solve_gp, GpOptions, GpSolution, GpStatus};

use crate::error::{Error, Result};

/// Default lower bound applied to decision variables.
pub const VARIABLE_FLOOR: f64 = 1e-12;

/// `c * prod_j x_j^{a_j}` with `c > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    coeff: f64,
    exps: Vec<f64>,
}

impl Monomial {
    pub fn new(coeff: f64, exps: Vec<f64>) -> Result<Self> {
        if !(coeff.is_finite() && coeff > 0.0) {
            return Err(Error::InvalidInput(format!("monomial coefficient must be > 0, got {coeff}")));
        }
        if exps.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidInput("monomial exponents must be finite".into()));
        }
        Ok(Self { coeff, exps })
    }

    pub fn constant(n: usize, c: f64) -> Result<Self> {
        Self::new(c, vec![0.0; n])
    }

    /// `c * x_j^p`.
    pub fn power(n: usize, j: usize, c: f64, p: f64) -> Result<Self> {
        if j >= n {
            return Err(Error::InvalidInput(format!("variable {j} out of range for {n} variables")));
        }
        let mut exps = vec![0.0; n];
        exps[j] = p;
        Self::new(c, exps)
    }

    pub fn coeff(&self) -> f64 {
        self.coeff
    }

    pub fn exponents(&self) -> &[f64] {
        &self.exps
    }

    pub fn nvars(&self) -> usize {
        self.exps.len()
    }

    pub fn is_constant(&self) -> bool {
        self.exps.iter().all(|&e| e == 0.0)
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        check_point(x, self.nvars())?;
        Ok(self.eval_unchecked(x))
    }

    fn eval_unchecked(&self, x: &[f64]) -> f64 {
        self.coeff * self.exps.iter().zip(x).map(|(a, v)| v.powf(*a)).product::<f64>()
    }

    pub fn mul(&self, other: &Monomial) -> Result<Monomial> {
        same_vars(self.nvars(), other.nvars())?;
        Monomial::new(
            self.coeff * other.coeff,
            self.exps.iter().zip(&other.exps).map(|(a, b)| a + b).collect(),
        )
    }

    pub fn recip(&self) -> Monomial {
        Monomial { coeff: 1.0 / self.coeff, exps: self.exps.iter().map(|a| -a).collect() }
    }

    pub fn scale(&self, k: f64) -> Result<Monomial> {
        Monomial::new(self.coeff * k, self.exps.clone())
    }

    /// Appends `extra` variables with exponent zero.
    pub fn pad(&self, extra: usize) -> Monomial {
        let mut exps = self.exps.clone();
        exps.resize(self.exps.len() + extra, 0.0);
        Monomial { coeff: self.coeff, exps }
    }
}

/// Nonempty sum of monomials over the same variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Posynomial {
    terms: Vec<Monomial>,
}

impl Posynomial {
    pub fn new(terms: Vec<Monomial>) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| Error::InvalidInput("posynomial needs at least one term".into()))?;
        let n = first.nvars();
        for t in &terms {
            same_vars(n, t.nvars())?;
        }
        Ok(Self { terms })
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn nvars(&self) -> usize {
        self.terms[0].nvars()
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(Monomial::is_constant)
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        check_point(x, self.nvars())?;
        Ok(self.terms.iter().map(|t| t.eval_unchecked(x)).sum())
    }

    pub fn add(&self, other: &Posynomial) -> Result<Posynomial> {
        same_vars(self.nvars(), other.nvars())?;
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(Posynomial { terms })
    }

    pub fn mul_monomial(&self, m: &Monomial) -> Result<Posynomial> {
        Ok(Posynomial { terms: self.terms.iter().map(|t| t.mul(m)).collect::<Result<_>>()? })
    }

    pub fn pad(&self, extra: usize) -> Posynomial {
        Posynomial { terms: self.terms.iter().map(|t| t.pad(extra)).collect() }
    }
}

impl From<Monomial> for Posynomial {
    fn from(m: Monomial) -> Self {
        Posynomial { terms: vec![m] }
    }
}

/// Arithmetic-geometric mean monomial approximation of `p` at `x0`.
///
/// `m(x) = prod_k (u_k(x) / alpha_k)^alpha_k` with
/// `alpha_k = u_k(x0) / p(x0)`. `m(x0) = p(x0)` and `m <= p` everywhere.
pub fn condense(p: &Posynomial, x0: &[f64]) -> Result<Monomial> {
    check_point(x0, p.nvars())?;
    if p.is_monomial() {
        return Ok(p.terms[0].clone());
    }
    let values: Vec<f64> = p.terms.iter().map(|t| t.eval_unchecked(x0)).collect();
    let total: f64 = values.iter().sum();
    let mut log_c = 0.0;
    let mut exps = vec![0.0; p.nvars()];
    for (t, v) in p.terms.iter().zip(&values) {
        let alpha = v / total;
        if alpha == 0.0 {
            continue;
        }
        log_c += alpha * (t.coeff / alpha).ln();
        for (e, a) in exps.iter_mut().zip(&t.exps) {
            *e += alpha * a;
        }
    }
    Monomial::new(log_c.exp(), exps)
}

/// A decision variable. `lower` is an optional positive lower bound.
#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub lower: Option<f64>,
}

impl Variable {
    /// Variable floored at [`VARIABLE_FLOOR`].
    pub fn floored(name: impl Into<String>) -> Self {
        Self { name: name.into(), lower: Some(VARIABLE_FLOOR) }
    }

    pub fn free(name: impl Into<String>) -> Self {
        Self { name: name.into(), lower: None }
    }
}

/// Minimize `objective` subject to `p <= 1` for every inequality and
/// `m = 1` for every monomial equality.
#[derive(Debug, Clone, PartialEq)]
pub struct GpProblem {
    pub variables: Vec<Variable>,
    pub objective: Posynomial,
    pub inequalities: Vec<Posynomial>,
    pub equalities: Vec<Monomial>,
}

impl GpProblem {
    pub fn new(variables: Vec<Variable>, objective: Posynomial) -> Self {
        Self { variables, objective, inequalities: Vec::new(), equalities: Vec::new() }
    }

    pub fn nvars(&self) -> usize {
        self.variables.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.nvars();
        same_vars(n, self.objective.nvars())?;
        for p in &self.inequalities {
            same_vars(n, p.nvars())?;
        }
        for m in &self.equalities {
            same_vars(n, m.nvars())?;
        }
        for v in &self.variables {
            if let Some(l) = v.lower {
                if !(l.is_finite() && l > 0.0) {
                    return Err(Error::InvalidInput(format!("lower bound of {} must be > 0", v.name)));
                }
            }
        }
        Ok(())
    }

    /// Largest constraint value `max(p_i(x))`, or 0 without inequalities.
    pub fn max_violation(&self, x: &[f64]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for p in &self.inequalities {
            worst = worst.max(p.eval(x)?);
        }
        for (v, xi) in self.variables.iter().zip(x) {
            if let Some(l) = v.lower {
                worst = worst.max(l / xi);
            }
        }
        for m in &self.equalities {
            let v = m.eval(x)?;
            worst = worst.max(v).max(1.0 / v);
        }
        Ok(worst)
    }
}

fn same_vars(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch(format!("{a} variables vs {b}")));
    }
    Ok(())
}

fn check_point(x: &[f64], n: usize) -> Result<()> {
    same_vars(n, x.len())?;
    if let Some(v) = x.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::DomainError(format!("posynomial evaluated at nonpositive point ({v})")));
    }
    Ok(())
}
