//! Single-hop transmission over two slots.

use crate::error::{Error, Result};
use crate::linalg::{log2_det_hpd, ComplexMatrix};

/// `log2 det(I + snr H H^H)` for square `H`.
pub fn mimo_capacity(h: &ComplexMatrix, snr: f64) -> Result<f64> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch(format!("direct channel must be square, got {:?}", h.shape())));
    }
    if !(snr.is_finite() && snr >= 0.0) {
        return Err(Error::InvalidInput(format!("SNR must be >= 0, got {snr}")));
    }
    let m = h.rows();
    let gram = &ComplexMatrix::identity(m) + &h.matmul(&h.adjoint()).scale(snr);
    log2_det_hpd(&gram)
}

/// Transmit powers and noise of the direct links.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectPowers {
    /// BS power, to which the relay's budget is added.
    pub p_down: f64,
    /// TUE power.
    pub p_up: f64,
    pub sigma2: f64,
}

/// `1/2 (w_u R_u + w_b R_b)` with `R_u` over the BS -> RUE channel `h` and
/// `R_b` over the TUE -> BS channel `g`, no CSI at the transmitters.
pub fn direct_wsr(h: &ComplexMatrix, g: &ComplexMatrix, powers: DirectPowers, w_u: f64, w_b: f64) -> Result<f64> {
    if h.shape() != g.shape() {
        return Err(Error::DimensionMismatch("direct channels differ in size".into()));
    }
    let m = h.rows() as f64;
    let r_u = mimo_capacity(h, powers.p_down / (m * powers.sigma2))?;
    let r_b = mimo_capacity(g, powers.p_up / (m * powers.sigma2))?;
    Ok(0.5 * (w_u * r_u + w_b * r_b))
}
