//! Relay precoder construction.
//!
//! `W = M D F`: `F` and `M` remove the TUE's data from the RUE's broadcast
//! signal, `D` (built from LQ/QR factors of the compound channels)
//! triangularizes both end-to-end channels and carries the per-stream power
//! variables.

mod bi;
mod bicp;
mod model;
mod transmission;
mod triangular;

pub use bi::{build_bi_cancellers, BiCancellers};
pub use bicp::{build_bi_cp, BiCpFactors, MAX_CONDITION};
pub use model::{
    assemble_w, power_model, relay_power, sic_stream_sinrs, snr_model, DeltaVector, PowerModel,
    Receiver, SnrModel, StreamCoefficients, StreamSinrs,
};
pub use transmission::simulate_transmission;
pub use triangular::{triangularize, CompoundBlocks, TriangularFactors};

use crate::channel::ChannelSet;
use crate::error::Result;

/// Everything needed to evaluate the triangularizing precoder of one
/// channel realization.
#[derive(Debug, Clone)]
pub struct BiCtPrecoder {
    pub cancellers: BiCancellers,
    pub factors: TriangularFactors,
    pub snr: SnrModel,
    pub power: PowerModel,
}

impl BiCtPrecoder {
    pub fn new(ch: &ChannelSet) -> Result<Self> {
        let cancellers = build_bi_cancellers(ch)?;
        let factors = triangularize(ch, &cancellers)?;
        let snr = snr_model(&factors, &ch.config);
        let power = power_model(&cancellers, &factors, ch)?;
        Ok(Self { cancellers, factors, snr, power })
    }

    pub fn w(&self, delta: &DeltaVector) -> Result<crate::linalg::ComplexMatrix> {
        assemble_w(&self.cancellers, &self.factors, delta)
    }
}
