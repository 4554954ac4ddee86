//! One-way relaying over four slots with SVD-matched relay precoders.

use crate::channel::ChannelSet;
use crate::error::Result;
use crate::linalg::{svd, ComplexMatrix};

/// One eigenmode of a two-hop link: `A = rho s_h^2 s_g^2`,
/// `B = sigma_r^2 s_g^2`, `C = sigma^2`, power cost per unit allocation
/// `e = rho s_h^2 + sigma_r^2`, rate weight `c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigenmode {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub e: f64,
    pub weight: f64,
}

impl Eigenmode {
    /// `log2(1 + A d / (B d + C))`.
    pub fn rate(&self, d: f64) -> f64 {
        if d <= 0.0 || self.a == 0.0 {
            return 0.0;
        }
        (1.0 + self.a * d / (self.b * d + self.c)).log2()
    }

    /// Allocation at which the weighted marginal rate equals `mu` per unit
    /// power.
    fn allocation(&self, mu: f64) -> f64 {
        let (a, b, c) = (self.a, self.b, self.c);
        if a == 0.0 || self.weight == 0.0 {
            return 0.0;
        }
        // Weighted marginal rate (in nats): w A C / (((A+B)d + C)(B d + C)).
        let target = self.weight * a * c / (mu * self.e);
        let q2 = (a + b) * b;
        let q1 = c * (a + 2.0 * b);
        let q0 = c * c - target;
        if q0 >= 0.0 {
            return 0.0;
        }
        if q2 == 0.0 {
            return -q0 / q1;
        }
        // Positive root, written to avoid cancellation.
        let disc = (q1 * q1 - 4.0 * q2 * q0).sqrt();
        2.0 * -q0 / (q1 + disc)
    }
}

/// Maximizes `sum_k w_k log2(1 + A_k d_k / (B_k d_k + C))` subject to
/// `sum_k e_k d_k <= budget` by bisection on the multiplier. Returns the
/// allocations and the rate.
pub fn allocate_eigenmodes(modes: &[Eigenmode], budget: f64) -> (Vec<f64>, f64) {
    let active = modes.iter().any(|m| m.a > 0.0 && m.weight > 0.0 && m.c > 0.0);
    if !active || budget <= 0.0 {
        // Noise-free modes never bind; report zero rather than infinity.
        return (vec![0.0; modes.len()], 0.0);
    }
    let used = |mu: f64| modes.iter().map(|m| m.e * m.allocation(mu)).sum::<f64>();
    let mut hi = modes
        .iter()
        .filter(|m| m.a > 0.0)
        .map(|m| m.weight * m.a / (m.c * m.e))
        .fold(0.0, f64::max);
    let mut lo = hi;
    while used(lo) < budget {
        lo *= 0.5;
        if lo < 1e-300 {
            break;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if used(mid) > budget {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    let mut d: Vec<f64> = modes.iter().map(|m| m.allocation(hi)).collect();
    let total: f64 = modes.iter().zip(&d).map(|(m, x)| m.e * x).sum();
    if total > budget {
        let k = budget / total;
        d.iter_mut().for_each(|x| *x *= k);
    }
    let rate = modes.iter().zip(&d).map(|(m, x)| m.weight * m.rate(*x)).sum();
    (d, rate)
}

/// Eigenmodes of the hop pair `source -h-> relay -g-> destination` with
/// singular values paired in decreasing order.
pub fn link_eigenmodes(h: &ComplexMatrix, g: &ComplexMatrix, rho: f64, sigma2_r: f64, sigma2: f64, weights: &[f64]) -> Result<Vec<Eigenmode>> {
    let sh = svd(h)?.s;
    let sg = svd(g)?.s;
    Ok(sh
        .iter()
        .zip(&sg)
        .zip(weights)
        .map(|((h, g), w)| Eigenmode {
            a: rho * h * h * g * g,
            b: sigma2_r * g * g,
            c: sigma2,
            e: rho * h * h + sigma2_r,
            weight: *w,
        })
        .collect())
}

/// End-to-end rates `(R_u, R_b)` of the downlink and uplink relay phases,
/// each with its own relay power budget.
pub fn owr_rates(ch: &ChannelSet) -> Result<(f64, f64)> {
    let cfg = &ch.config;
    let ones = vec![1.0; ch.m()];
    let down = link_eigenmodes(&ch.h_b, &ch.g_u, cfg.rho_b(), cfg.sigma2_r, cfg.sigma2, &ones)?;
    let up = link_eigenmodes(&ch.h_u, &ch.g_b, cfg.rho_u(), cfg.sigma2_r, cfg.sigma2, &ones)?;
    Ok((allocate_eigenmodes(&down, cfg.p_r).1, allocate_eigenmodes(&up, cfg.p_r).1))
}

/// `1/4 (w_u R_u + w_b R_b)`.
pub fn owr_wsr(ch: &ChannelSet, w_u: f64, w_b: f64) -> Result<f64> {
    let (r_u, r_b) = owr_rates(ch)?;
    Ok(0.25 * (w_u * r_u + w_b * r_b))
}
