//! SVD, QR and LQ factorizations of dense complex matrices.
//!
//! The SVD uses one-sided (Hestenes) Jacobi rotations, which gives singular
//! values with high relative accuracy on the small matrices that show up in
//! relay precoding (at most a few tens of rows). QR uses Householder
//! reflectors. Both return full square factors so null-space blocks can be
//! read off directly.

use super::matrix::{ComplexMatrix, C64, ONE, ZERO};
use crate::error::{Error, Result};

/// Threshold on `sigma_min / sigma_max` below which a matrix is treated as
/// rank deficient.
pub const RANK_TOL: f64 = 1e-12;

const JACOBI_MAX_SWEEPS: usize = 80;

/// Full singular value decomposition `A = U diag(s) V^H`.
#[derive(Debug, Clone)]
pub struct SvdResult {
    /// `m x m` unitary.
    pub u: ComplexMatrix,
    /// `min(m, n)` singular values, descending.
    pub s: Vec<f64>,
    /// `n x n` unitary.
    pub v: ComplexMatrix,
}

impl SvdResult {
    /// Rebuilds `U diag(s) V^H`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let (m, n) = (self.u.rows(), self.v.rows());
        let mut us = ComplexMatrix::zeros(m, n);
        for (k, &sk) in self.s.iter().enumerate() {
            for i in 0..m {
                us[(i, k)] = self.u[(i, k)] * sk;
            }
        }
        us.matmul(&self.v.adjoint())
    }

    /// `sigma_max / sigma_min`; infinite when the smallest singular value is zero.
    pub fn condition_number(&self) -> f64 {
        match (self.s.first(), self.s.last()) {
            (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
            (Some(_), Some(_)) => f64::INFINITY,
            _ => 1.0,
        }
    }

    fn rank_ratio(&self) -> f64 {
        match (self.s.first(), self.s.last()) {
            (Some(&hi), Some(&lo)) if hi > 0.0 => lo / hi,
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct QrResult {
    pub q: ComplexMatrix,
    pub r: ComplexMatrix,
}

#[derive(Debug, Clone)]
pub struct LqResult {
    pub l: ComplexMatrix,
    pub q: ComplexMatrix,
}

pub fn svd(a: &ComplexMatrix) -> Result<SvdResult> {
    if a.rows() == 0 || a.cols() == 0 {
        return Err(Error::InvalidInput("svd of an empty matrix".into()));
    }
    a.ensure_finite()?;
    if a.rows() >= a.cols() {
        Ok(svd_tall(a))
    } else {
        let t = svd_tall(&a.adjoint());
        Ok(SvdResult {
            u: t.v,
            s: t.s,
            v: t.u,
        })
    }
}

/// One-sided Jacobi on the columns of a tall matrix.
fn svd_tall(a: &ComplexMatrix) -> SvdResult {
    let (m, n) = a.shape();
    // Work on columns for locality.
    let mut cols: Vec<Vec<C64>> = (0..n).map(|j| a.column(j)).collect();
    let mut vcols: Vec<Vec<C64>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { ONE } else { ZERO }).collect())
        .collect();

    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha: f64 = cols[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = cols[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma: C64 = cols[p].iter().zip(&cols[q]).map(|(x, y)| x.conj() * y).sum();
                let g = gamma.norm();
                if g == 0.0 || g <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g; // e^{i phi}
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let conj_phase = phase.conj();
                rotate_pair(&mut cols, p, q, c, s, conj_phase);
                rotate_pair(&mut vcols, p, q, c, s, conj_phase);
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<(usize, f64)> = cols
        .iter()
        .enumerate()
        .map(|(j, c)| (j, c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()))
        .collect();
    order.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));

    let smax = order.first().map_or(0.0, |x| x.1);
    let mut s = Vec::with_capacity(n);
    let mut u_cols: Vec<Vec<C64>> = Vec::with_capacity(m);
    let mut v = ComplexMatrix::zeros(n, n);
    for (k, &(j, sigma)) in order.iter().enumerate() {
        s.push(sigma);
        v.set_column(k, &vcols[j]);
        if sigma > smax * 1e-300 && sigma > 0.0 {
            u_cols.push(cols[j].iter().map(|z| z / sigma).collect());
        }
    }
    let u = complete_orthonormal(u_cols, m);
    SvdResult { u, s, v }
}

/// Applies the complex Jacobi rotation to columns `p`, `q`:
/// `x_p <- c x_p - s e^{-i phi} x_q`, `x_q <- s x_p + c e^{-i phi} x_q`.
fn rotate_pair(cols: &mut [Vec<C64>], p: usize, q: usize, c: f64, s: f64, conj_phase: C64) {
    let (left, right) = cols.split_at_mut(q);
    let xp = &mut left[p];
    let xq = &mut right[0];
    for (a, b) in xp.iter_mut().zip(xq.iter_mut()) {
        let bq = *b * conj_phase;
        let ap = *a;
        *a = ap * c - bq * s;
        *b = ap * s + bq * c;
    }
}

/// Extends a set of orthonormal columns to a full `m x m` unitary matrix.
///
/// The given columns are re-orthogonalized, then standard basis vectors are
/// appended greedily by largest residual norm. Deterministic.
fn complete_orthonormal(mut basis: Vec<Vec<C64>>, m: usize) -> ComplexMatrix {
    // Re-orthogonalize what we were handed (columns from Jacobi are already
    // orthogonal to machine precision; this tightens them).
    let mut ortho: Vec<Vec<C64>> = Vec::with_capacity(m);
    for v in basis.drain(..) {
        if let Some(w) = orthogonalize(&v, &ortho) {
            ortho.push(w);
        }
    }
    while ortho.len() < m {
        let mut best: Option<(f64, Vec<C64>)> = None;
        for e in 0..m {
            let mut v = vec![ZERO; m];
            v[e] = ONE;
            let r = project_out(&project_out(&v, &ortho), &ortho);
            let nrm = norm(&r);
            if best.as_ref().map_or(true, |(b, _)| nrm > *b + 1e-12) {
                best = Some((nrm, r));
            }
        }
        let (nrm, r) = best.expect("m > 0");
        ortho.push(r.iter().map(|z| z / nrm).collect());
    }
    let mut u = ComplexMatrix::zeros(m, m);
    for (j, c) in ortho.iter().enumerate() {
        u.set_column(j, c);
    }
    u
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn project_out(v: &[C64], basis: &[Vec<C64>]) -> Vec<C64> {
    let mut r = v.to_vec();
    for b in basis {
        let d: C64 = b.iter().zip(&r).map(|(x, y)| x.conj() * y).sum();
        for (ri, bi) in r.iter_mut().zip(b) {
            *ri -= d * bi;
        }
    }
    r
}

fn orthogonalize(v: &[C64], basis: &[Vec<C64>]) -> Option<Vec<C64>> {
    let r = project_out(&project_out(v, basis), basis);
    let nrm = norm(&r);
    (nrm > 1e-8 * norm(v).max(f64::MIN_POSITIVE)).then(|| r.iter().map(|z| z / nrm).collect())
}

/// Householder QR with full `Q`. Diagonal of `R` is real and nonnegative.
fn householder_qr(a: &ComplexMatrix) -> QrResult {
    let (m, n) = a.shape();
    let mut r = a.clone();
    let mut q = ComplexMatrix::identity(m);
    for k in 0..n.min(m.saturating_sub(1)) {
        let x: Vec<C64> = (k..m).map(|i| r[(i, k)]).collect();
        let xnorm = norm(&x);
        if xnorm == 0.0 {
            continue;
        }
        let phase = if x[0].norm() > 0.0 { x[0] / x[0].norm() } else { ONE };
        let alpha = -phase * xnorm;
        let mut v = x;
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        // R <- (I - 2 v v^H / |v|^2) R on rows k..m
        for j in k..n {
            let d: C64 = v.iter().enumerate().map(|(i, vi)| vi.conj() * r[(k + i, j)]).sum();
            let f = d * (2.0 / vnorm2);
            for (i, vi) in v.iter().enumerate() {
                r[(k + i, j)] -= vi * f;
            }
        }
        // Q <- Q (I - 2 v v^H / |v|^2) on columns k..m
        for i in 0..m {
            let d: C64 = v.iter().enumerate().map(|(jj, vj)| q[(i, k + jj)] * vj).sum();
            let f = d * (2.0 / vnorm2);
            for (jj, vj) in v.iter().enumerate() {
                q[(i, k + jj)] -= f * vj.conj();
            }
        }
        for i in (k + 1)..m {
            r[(i, k)] = ZERO;
        }
    }
    // Phase convention: real nonnegative diagonal on R.
    for k in 0..n.min(m) {
        let d = r[(k, k)];
        let mag = d.norm();
        if mag == 0.0 {
            continue;
        }
        let ph = d / mag;
        for j in 0..n {
            r[(k, j)] *= ph.conj();
        }
        r[(k, k)] = C64::new(mag, 0.0);
        for i in 0..m {
            q[(i, k)] *= ph;
        }
    }
    QrResult { q, r }
}

pub fn qr(a: &ComplexMatrix) -> Result<QrResult> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "qr expects a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    a.ensure_finite()?;
    Ok(householder_qr(a))
}

/// `A = L Q` with `L` lower triangular (real nonnegative diagonal) and `Q` unitary.
pub fn lq(a: &ComplexMatrix) -> Result<LqResult> {
    let QrResult { q, r } = qr(&a.adjoint())?;
    Ok(LqResult {
        l: r.adjoint(),
        q: q.adjoint(),
    })
}

/// Orthonormal basis `B` (`N x k`) with `B^H a = 0`, taken from the trailing
/// left singular vectors of `a` (`N x M`).
pub fn left_null_basis(a: &ComplexMatrix, k: usize) -> Result<ComplexMatrix> {
    let (n, m) = a.shape();
    let available = n.saturating_sub(m);
    if k > available {
        return Err(Error::NullSpaceTooSmall {
            requested: k,
            available,
        });
    }
    let f = svd(a)?;
    check_rank(&f)?;
    Ok(f.u.columns(m, k))
}

/// Orthonormal basis `B` (`N x k`) with `a B = 0`, taken from the trailing
/// right singular vectors of `a` (`M x N`).
pub fn null_basis(a: &ComplexMatrix, k: usize) -> Result<ComplexMatrix> {
    let (m, n) = a.shape();
    let available = n.saturating_sub(m);
    if k > available {
        return Err(Error::NullSpaceTooSmall {
            requested: k,
            available,
        });
    }
    let f = svd(a)?;
    check_rank(&f)?;
    Ok(f.v.columns(m, k))
}

pub(crate) fn check_rank(f: &SvdResult) -> Result<()> {
    let ratio = f.rank_ratio();
    if ratio < RANK_TOL {
        Err(Error::RankDeficient { ratio })
    } else {
        Ok(())
    }
}

/// Inverse of a square matrix via QR; fails when the condition number
/// exceeds `max_cond`.
pub fn inverse_checked(a: &ComplexMatrix, max_cond: f64) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch("inverse of a non-square matrix".into()));
    }
    let cond = svd(a)?.condition_number();
    if !(cond <= max_cond) {
        return Err(Error::IllConditioned { cond });
    }
    let QrResult { q, r } = householder_qr(a);
    let n = a.rows();
    // Solve R X = Q^H column by column.
    let qh = q.adjoint();
    let mut x = ComplexMatrix::zeros(n, n);
    for col in 0..n {
        for i in (0..n).rev() {
            let mut acc = qh[(i, col)];
            for j in (i + 1)..n {
                acc -= r[(i, j)] * x[(j, col)];
            }
            x[(i, col)] = acc / r[(i, i)];
        }
    }
    Ok(x)
}

/// `log2 det(A)` for Hermitian positive definite `A`, via Cholesky.
pub fn log2_det_hpd(a: &ComplexMatrix) -> Result<f64> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch("determinant of a non-square matrix".into()));
    }
    let n = a.rows();
    let mut l = ComplexMatrix::zeros(n, n);
    let mut acc = 0.0;
    for j in 0..n {
        let mut d = a[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > 0.0) {
            return Err(Error::InvalidInput("matrix is not positive definite".into()));
        }
        let djj = d.sqrt();
        l[(j, j)] = C64::new(djj, 0.0);
        acc += d.log2();
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / djj;
        }
    }
    Ok(acc)
}
