use crate::channel::ChannelSet;
use crate::error::Result;
use crate::linalg::{check_rank, svd, ComplexMatrix};

/// Uplink and downlink back-propagating-interference cancellers.
#[derive(Debug, Clone)]
pub struct BiCancellers {
    /// `2M x N`, rows `[F_u; F_b]`. Orthonormal rows, `F_b H_u = 0`.
    pub f: ComplexMatrix,
    /// `N x 2M`, columns `[M_u M_b]`. Orthonormal columns, `G_u M_b = 0`.
    pub m: ComplexMatrix,
}

impl BiCancellers {
    pub fn streams(&self) -> usize {
        self.f.rows() / 2
    }

    pub fn f_u(&self) -> ComplexMatrix {
        self.f.rows_range(0, self.streams())
    }

    pub fn f_b(&self) -> ComplexMatrix {
        let m = self.streams();
        self.f.rows_range(m, m)
    }

    pub fn m_u(&self) -> ComplexMatrix {
        self.m.columns(0, self.streams())
    }

    pub fn m_b(&self) -> ComplexMatrix {
        let m = self.streams();
        self.m.columns(m, m)
    }
}

/// `F = [U1^H; U0(:, 1..M)^H]` from the SVD of `H_u` and
/// `M = [V1, V0(:, 1..M)]` from the SVD of `G_u`.
pub fn build_bi_cancellers(ch: &ChannelSet) -> Result<BiCancellers> {
    ch.config.validate()?;
    let m = ch.m();

    let hu = svd(&ch.h_u)?;
    check_rank(&hu)?;
    // Signal subspace, then the first M vectors of the left null space.
    let f_u = hu.u.columns(0, m).adjoint();
    let f_b = hu.u.columns(m, m).adjoint();

    let gu = svd(&ch.g_u)?;
    check_rank(&gu)?;
    let m_u = gu.v.columns(0, m);
    let m_b = gu.v.columns(m, m);

    Ok(BiCancellers {
        f: f_u.vstack(&f_b),
        m: m_u.hstack(&m_b),
    })
}
