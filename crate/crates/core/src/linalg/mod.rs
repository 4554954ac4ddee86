//! Dense complex linear algebra used by the precoder construction.

mod decomp;
mod matrix;
pub(crate) mod real;

pub use decomp::{
    inverse_checked, left_null_basis, log2_det_hpd, lq, null_basis, qr, svd, LqResult, QrResult,
    SvdResult, RANK_TOL,
};
pub use matrix::{ComplexMatrix, C64};
pub(crate) use decomp::check_rank;
