//! Weighted products of posynomials as a standard GP.

use super::{GpProblem, Monomial, Posynomial, Variable};
use crate::error::{Error, Result};

/// `f^w` as one factor of a product objective.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedFactor {
    pub posy: Posynomial,
    pub weight: f64,
}

/// Rewrites `minimize prod_i f_i(x)^{w_i}` over the variables and constraints
/// of `base` (its objective is discarded).
///
/// Adds `t` and one `t_i` per factor with positive weight, minimizes `t`
/// subject to `prod_i t_i^{w_i} / t <= 1` and `f_i / t_i <= 1`. The original
/// variables keep their positions; auxiliaries follow in factor order with
/// `t` last. Zero-weight factors drop out.
pub fn epigraph_reduce(base: &GpProblem, factors: &[WeightedFactor]) -> Result<GpProblem> {
    let n = base.nvars();
    for f in factors {
        if !(f.weight.is_finite() && f.weight >= 0.0) {
            return Err(Error::InvalidInput(format!("factor weight must be >= 0, got {}", f.weight)));
        }
        if f.posy.nvars() != n {
            return Err(Error::DimensionMismatch(format!("factor has {} variables, problem {n}", f.posy.nvars())));
        }
    }
    let active: Vec<&WeightedFactor> = factors.iter().filter(|f| f.weight > 0.0).collect();
    if active.is_empty() {
        let mut p = base.clone();
        p.objective = Monomial::constant(n, 1.0)?.into();
        return Ok(p);
    }

    let k = active.len();
    let total = n + k + 1;
    let t_index = n + k;
    let mut variables = base.variables.clone();
    variables.extend((0..k).map(|i| Variable::free(format!("t_{i}"))));
    variables.push(Variable::free("t"));

    let mut product = vec![0.0; total];
    for (i, f) in active.iter().enumerate() {
        product[n + i] = f.weight;
    }
    product[t_index] = -1.0;

    let mut inequalities: Vec<Posynomial> = base.inequalities.iter().map(|p| p.pad(k + 1)).collect();
    inequalities.push(Monomial::new(1.0, product)?.into());
    for (i, f) in active.iter().enumerate() {
        inequalities.push(f.posy.pad(k + 1).mul_monomial(&Monomial::power(total, n + i, 1.0, -1.0)?)?);
    }

    Ok(GpProblem {
        variables,
        objective: Monomial::power(total, t_index, 1.0, 1.0)?.into(),
        inequalities,
        equalities: base.equalities.iter().map(|m| m.pad(k + 1)).collect(),
    })
}
