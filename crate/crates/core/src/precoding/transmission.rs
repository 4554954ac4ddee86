//! Symbol-level emulation of one MAC + BC exchange.

use rand::Rng;

use super::model::StreamSinrs;
use crate::channel::{sample_rayleigh, ChannelSet};
use crate::linalg::ComplexMatrix;

/// Sends `symbols` Gaussian symbol vectors through the relay with precoder
/// `w` and measures per-stream SINRs after the receivers' processing.
///
/// The BS subtracts its own contribution `G_b W H_b x_b`. Both receivers
/// then detect streams from the last to the first, subtracting already
/// detected streams exactly (genie-aided SIC). The returned SINR of a stream
/// is its measured signal energy over the measured residual energy of the
/// row it is read from.
pub fn simulate_transmission<R: Rng + ?Sized>(
    ch: &ChannelSet,
    w: &ComplexMatrix,
    symbols: usize,
    rng: &mut R,
) -> crate::error::Result<StreamSinrs> {
    let cfg = &ch.config;
    let (m, n) = (ch.m(), ch.n());
    let x_u = sample_rayleigh(m, symbols, cfg.rho_u(), rng)?;
    let x_b = sample_rayleigh(m, symbols, cfg.rho_b(), rng)?;
    let n_r = sample_rayleigh(n, symbols, cfg.sigma2_r, rng)?;
    let n_u = sample_rayleigh(m, symbols, cfg.sigma2, rng)?;
    let n_b = sample_rayleigh(m, symbols, cfg.sigma2, rng)?;

    // MAC phase, relay transform, BC phase.
    let y_r = &(&ch.h_u.matmul(&x_u) + &ch.h_b.matmul(&x_b)) + &n_r;
    let x_r = w.matmul(&y_r);
    let y_u = &ch.g_u.matmul(&x_r) + &n_u;
    let y_b_raw = &ch.g_b.matmul(&x_r) + &n_b;
    let own = ch.g_b.matmul(w).matmul(&ch.h_b).matmul(&x_b);
    let y_b = &y_b_raw - &own;

    let c_u = ch.g_u.matmul(w).matmul(&ch.h_b);
    let c_b = ch.g_b.matmul(w).matmul(&ch.h_u);
    Ok(StreamSinrs {
        rue: sic_measure(&y_u, &c_u, &x_b),
        bs: sic_measure(&y_b, &c_b, &x_u),
    })
}

fn sic_measure(y: &ComplexMatrix, c: &ComplexMatrix, x: &ComplexMatrix) -> Vec<f64> {
    let m = c.rows();
    let t = y.cols();
    (0..m)
        .map(|s| {
            let row = m - 1 - s;
            let mut signal = 0.0;
            let mut residual = 0.0;
            for k in 0..t {
                let desired = c[(row, s)] * x[(s, k)];
                let detected: num_complex::Complex64 = ((s + 1)..m).map(|j| c[(row, j)] * x[(j, k)]).sum();
                let r = y[(row, k)] - desired - detected;
                signal += desired.norm_sqr();
                residual += r.norm_sqr();
            }
            if signal == 0.0 {
                0.0
            } else {
                signal / residual
            }
        })
        .collect()
}
