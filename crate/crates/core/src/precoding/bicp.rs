//! Block zero-forcing "channel parallelization" baseline.

use super::bi::BiCancellers;
use super::model::{anti_diagonal, compose_w, DeltaVector};
use super::triangular::CompoundBlocks;
use crate::channel::ChannelSet;
use crate::error::Result;
use crate::linalg::{inverse_checked, ComplexMatrix};

/// Condition numbers above this are refused rather than inverted.
pub const MAX_CONDITION: f64 = 1e12;

/// Inverted compound-channel blocks; `W(delta)` is then two small products.
#[derive(Debug, Clone)]
pub struct BiCpFactors {
    bc: BiCancellers,
    g_u_inv: ComplexMatrix,
    g_b_inv: ComplexMatrix,
    h_u_inv: ComplexMatrix,
    h_b_inv: ComplexMatrix,
}

impl BiCpFactors {
    pub fn new(ch: &ChannelSet, bc: &BiCancellers) -> Result<Self> {
        let blocks = CompoundBlocks::new(ch, bc);
        Ok(Self {
            bc: bc.clone(),
            g_u_inv: inverse_checked(&blocks.g_u, MAX_CONDITION)?,
            g_b_inv: inverse_checked(&blocks.g_b, MAX_CONDITION)?,
            h_u_inv: inverse_checked(&blocks.h_u, MAX_CONDITION)?,
            h_b_inv: inverse_checked(&blocks.h_b, MAX_CONDITION)?,
        })
    }

    /// `W = M D F` with `D_i = G~_i^{-1} Delta_i H~_i^{-1}`.
    pub fn w(&self, delta: &DeltaVector) -> Result<ComplexMatrix> {
        delta.validate(self.g_u_inv.rows())?;
        let d_u = self.g_u_inv.matmul(&anti_diagonal(&delta.u)).matmul(&self.h_u_inv);
        let d_b = self.g_b_inv.matmul(&anti_diagonal(&delta.b)).matmul(&self.h_b_inv);
        Ok(compose_w(&self.bc, &d_u, &d_b))
    }
}

pub fn build_bi_cp(ch: &ChannelSet, bc: &BiCancellers, delta: &DeltaVector) -> Result<ComplexMatrix> {
    BiCpFactors::new(ch, bc)?.w(delta)
}
