//! Fading realizations, link gains and system parameters.

mod geometry;

pub use geometry::{
    link_gain, per_hz_power_dbm, snr_parameterized_gains, LinkKind, PathLossModel, RadioParams,
    ScenarioFile, ScenarioGeometry, ScenarioMode,
};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};

/// Per-realization random generator.
pub type RealizationRng = ChaCha8Rng;

/// Independent generator for realization `index` under `master_seed`.
///
/// Each index maps to its own ChaCha stream, so realizations can be drawn in
/// any order (or concurrently) and still reproduce bit for bit.
pub fn substream(master_seed: u64, index: u64) -> RealizationRng {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// Antenna counts, powers, noise variances and per-stream weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    /// Antennas (and streams) at the BS, TUE and RUE.
    pub m_antennas: usize,
    /// Relay antennas.
    pub n_antennas: usize,
    pub p_u: f64,
    pub p_b: f64,
    pub p_r: f64,
    pub sigma2_r: f64,
    pub sigma2: f64,
    /// Weights of the RUE (downlink) streams.
    pub weights_u: Vec<f64>,
    /// Weights of the BS (uplink) streams.
    pub weights_b: Vec<f64>,
}

impl SystemConfig {
    /// Unit powers and noise variances with per-direction weights `(w_u, w_b)`
    /// replicated over the `m` streams.
    pub fn unit(n: usize, m: usize, weights: (f64, f64)) -> Self {
        Self {
            m_antennas: m,
            n_antennas: n,
            p_u: 1.0,
            p_b: 1.0,
            p_r: 1.0,
            sigma2_r: 1.0,
            sigma2: 1.0,
            weights_u: vec![weights.0; m],
            weights_b: vec![weights.1; m],
        }
    }

    pub fn rho_u(&self) -> f64 {
        self.p_u / self.m_antennas as f64
    }

    pub fn rho_b(&self) -> f64 {
        self.p_b / self.m_antennas as f64
    }

    pub fn validate(&self) -> Result<()> {
        let (m, n) = (self.m_antennas, self.n_antennas);
        if m == 0 {
            return Err(Error::InvalidInput("M must be at least 1".into()));
        }
        if n < 2 * m {
            return Err(Error::InvalidInput(format!("relay needs N >= 2M antennas (N={n}, M={m})")));
        }
        let nonneg = [self.p_u, self.p_b, self.p_r, self.sigma2_r, self.sigma2];
        if nonneg.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidInput("powers and noise variances must be finite and >= 0".into()));
        }
        if self.weights_u.len() != m || self.weights_b.len() != m {
            return Err(Error::InvalidInput(format!("expected {m} weights per direction")));
        }
        if self.weights_u.iter().chain(&self.weights_b).any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidInput("weights must be finite and >= 0".into()));
        }
        Ok(())
    }
}

/// Per-entry variances of the four relay channels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkGains {
    /// TUE -> relay.
    pub h_u2: f64,
    /// BS -> relay.
    pub h_b2: f64,
    /// Relay -> RUE.
    pub g_u2: f64,
    /// Relay -> BS.
    pub g_b2: f64,
}

impl LinkGains {
    pub fn uniform(g: f64) -> Self {
        Self { h_u2: g, h_b2: g, g_u2: g, g_b2: g }
    }
}

/// One multiple-access plus broadcast channel realization.
#[derive(Debug, Clone)]
pub struct ChannelSet {
    /// `N x M`, TUE -> relay.
    pub h_u: ComplexMatrix,
    /// `N x M`, BS -> relay.
    pub h_b: ComplexMatrix,
    /// `M x N`, relay -> RUE.
    pub g_u: ComplexMatrix,
    /// `M x N`, relay -> BS.
    pub g_b: ComplexMatrix,
    pub config: SystemConfig,
}

impl ChannelSet {
    /// Wraps explicit matrices, checking their shapes against `config`.
    pub fn new(
        h_u: ComplexMatrix,
        h_b: ComplexMatrix,
        g_u: ComplexMatrix,
        g_b: ComplexMatrix,
        config: SystemConfig,
    ) -> Result<Self> {
        config.validate()?;
        let (n, m) = (config.n_antennas, config.m_antennas);
        for (name, mat, shape) in [
            ("H_u", &h_u, (n, m)),
            ("H_b", &h_b, (n, m)),
            ("G_u", &g_u, (m, n)),
            ("G_b", &g_b, (m, n)),
        ] {
            if mat.shape() != shape {
                return Err(Error::DimensionMismatch(format!(
                    "{name} is {:?}, expected {:?}",
                    mat.shape(),
                    shape
                )));
            }
            mat.ensure_finite()?;
        }
        Ok(Self { h_u, h_b, g_u, g_b, config })
    }

    /// Composite uplink channel `[H_u H_b]`.
    pub fn h(&self) -> ComplexMatrix {
        self.h_u.hstack(&self.h_b)
    }

    /// Composite downlink channel `[G_u; G_b]`.
    pub fn g(&self) -> ComplexMatrix {
        self.g_u.vstack(&self.g_b)
    }

    pub fn m(&self) -> usize {
        self.config.m_antennas
    }

    pub fn n(&self) -> usize {
        self.config.n_antennas
    }
}

/// I.i.d. circularly-symmetric complex Gaussian entries with second moment
/// `variance`.
pub fn sample_rayleigh<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    variance: f64,
    rng: &mut R,
) -> Result<ComplexMatrix> {
    if !(variance.is_finite() && variance >= 0.0) {
        return Err(Error::InvalidInput(format!("variance must be >= 0, got {variance}")));
    }
    let scale = (variance / 2.0).sqrt();
    Ok(ComplexMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re * scale, im * scale)
    }))
}

/// Draws `H_u, H_b, G_u, G_b` (in that order) with the given variances.
pub fn build_channel_set<R: Rng + ?Sized>(
    config: &SystemConfig,
    gains: &LinkGains,
    rng: &mut R,
) -> Result<ChannelSet> {
    config.validate()?;
    let (n, m) = (config.n_antennas, config.m_antennas);
    let h_u = sample_rayleigh(n, m, gains.h_u2, rng)?;
    let h_b = sample_rayleigh(n, m, gains.h_b2, rng)?;
    let g_u = sample_rayleigh(m, n, gains.g_u2, rng)?;
    let g_b = sample_rayleigh(m, n, gains.g_b2, rng)?;
    Ok(ChannelSet { h_u, h_b, g_u, g_b, config: config.clone() })
}
