//! Linear precoding for non-regenerative asymmetric two-way relaying.
//!
//! A base station (BS) and a transmitting user (TUE) send `M` streams each to
//! an `N`-antenna relay in the multiple-access phase. In the broadcast phase
//! the relay forwards a linear transform of what it received to the BS and to
//! a different receiving user (RUE). The relay precoder built here removes the
//! TUE's data from the RUE's signal, triangularizes both end-to-end channels
//! so the receivers can use successive interference cancellation, and splits
//! relay power across streams by geometric programming.
//!
//! Module map:
//! - [`linalg`]: complex SVD / QR / LQ and null-space bases
//! - [`channel`]: Rayleigh fading, link gains, scenario configuration
//! - [`precoding`]: interference-cancelling and triangularizing precoders,
//!   per-stream SNR and relay power models
//! - [`gp`]: posynomials and a log-barrier geometric program solver
//! - [`problems`]: weighted sum-rate and power-minimization problems
//! - [`simulate`]: Monte Carlo sweeps, baseline schemes, CSV output

pub mod channel;
pub mod error;
pub mod gp;
pub mod linalg;
pub mod precoding;
pub mod problems;
pub mod simulate;

pub use error::{Error, Result};
