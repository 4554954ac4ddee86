use super::bi::BiCancellers;
use crate::channel::ChannelSet;
use crate::error::Result;
use crate::linalg::{lq, qr, ComplexMatrix};

/// `M x M` blocks of the compound channels `G~ = G M` and `H~ = F H`.
///
/// ```text
/// G~ = [ G~_u   0   ]      H~ = [ H~_b  H~_n ]
///      [ G~_n  G~_b ]           [  0    H~_u ]
/// ```
///
/// `H~_u = F_b H_b` carries BS data towards the RUE and `H~_b = F_u H_u`
/// carries TUE data towards the BS.
#[derive(Debug, Clone)]
pub struct CompoundBlocks {
    pub g_u: ComplexMatrix,
    pub g_n: ComplexMatrix,
    pub g_b: ComplexMatrix,
    pub h_u: ComplexMatrix,
    pub h_n: ComplexMatrix,
    pub h_b: ComplexMatrix,
}

impl CompoundBlocks {
    pub fn new(ch: &ChannelSet, bc: &BiCancellers) -> Self {
        let m = ch.m();
        let gt = ch.g().matmul(&bc.m);
        let ht = bc.f.matmul(&ch.h());
        Self {
            g_u: gt.block(0, 0, m, m),
            g_n: gt.block(m, 0, m, m),
            g_b: gt.block(m, m, m, m),
            h_b: ht.block(0, 0, m, m),
            h_n: ht.block(0, m, m, m),
            h_u: ht.block(m, m, m, m),
        }
    }
}

/// LQ / QR factors that triangularize the two end-to-end channels.
#[derive(Debug, Clone)]
pub struct TriangularFactors {
    pub blocks: CompoundBlocks,
    /// `G~_u = L_u Q^_u`.
    pub l_u: ComplexMatrix,
    pub l_b: ComplexMatrix,
    /// `H~_u = Q_u R_u`.
    pub r_u: ComplexMatrix,
    pub r_b: ComplexMatrix,
    /// `Pi_i = Q^_i^H`, so `G~_i Pi_i = L_i`.
    pub pi_u: ComplexMatrix,
    pub pi_b: ComplexMatrix,
    /// `Theta_i = Q_i^H`, so `Theta_i H~_i = R_i`.
    pub theta_u: ComplexMatrix,
    pub theta_b: ComplexMatrix,
    /// Coupling of the RUE power variables into the BS noise, `G~_n Pi_u`.
    pub g_n_pi_u: ComplexMatrix,
}

impl TriangularFactors {
    pub fn streams(&self) -> usize {
        self.l_u.rows()
    }
}

pub fn triangularize(ch: &ChannelSet, bc: &BiCancellers) -> Result<TriangularFactors> {
    let blocks = CompoundBlocks::new(ch, bc);
    let lq_u = lq(&blocks.g_u)?;
    let lq_b = lq(&blocks.g_b)?;
    let qr_u = qr(&blocks.h_u)?;
    let qr_b = qr(&blocks.h_b)?;
    let pi_u = lq_u.q.adjoint();
    let g_n_pi_u = blocks.g_n.matmul(&pi_u);
    Ok(TriangularFactors {
        l_u: lq_u.l,
        l_b: lq_b.l,
        r_u: qr_u.r,
        r_b: qr_b.r,
        pi_u,
        pi_b: lq_b.q.adjoint(),
        theta_u: qr_u.q.adjoint(),
        theta_b: qr_b.q.adjoint(),
        g_n_pi_u,
        blocks,
    })
}
