//! Monte Carlo sweeps over channel realizations and comparator schemes.

mod bicp;
mod direct;
mod output;
mod owr;

pub use bicp::{bicp_wsr, BiCpAllocation, BiCpModel};
pub use direct::{direct_wsr, mimo_capacity, DirectPowers};
pub use output::{emit_csv, parse_csv, write_csv, ParsedSweep, CSV_HEADER};
pub use owr::{allocate_eigenmodes, link_eigenmodes, owr_rates, owr_wsr, Eigenmode};

use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::{build_channel_set, sample_rayleigh, snr_parameterized_gains, substream, LinkGains, ScenarioGeometry, SystemConfig};
use crate::error::{Error, Result};
use crate::gp::GpStatus;
use crate::precoding::BiCtPrecoder;
use crate::problems::{maximize_wsr, SolverMode, StreamWeights};

pub const DEFAULT_REALIZATIONS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    /// Triangularizing precoder with optimized power allocation.
    BiCt,
    /// Block zero-forcing (parallelizing) precoder.
    BiCp,
    /// One-way relaying in four slots.
    Owr,
    /// Single-hop BS <-> UE links in two slots.
    Direct,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::BiCt, Scheme::BiCp, Scheme::Owr, Scheme::Direct];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::BiCt => "bi-ct",
            Scheme::BiCp => "bi-cp",
            Scheme::Owr => "owr",
            Scheme::Direct => "direct",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown scheme '{s}'")))
    }
}

/// What the sweep axis means and what stays fixed.
#[derive(Debug, Clone, PartialEq)]
pub enum Scenario {
    /// Unit powers and noise; both hop classes at the axis SNR (dB).
    Balanced,
    /// Unit powers and noise; BS-relay hops fixed, UE hops at the axis SNR.
    Unbalanced { snr_b_db: f64 },
    /// Path-loss layout; the axis is the TUE-relay distance in meters.
    Coverage(ScenarioGeometry),
}

impl Scenario {
    pub fn is_coverage(&self) -> bool {
        matches!(self, Scenario::Coverage(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub scenario: Scenario,
    pub axis: Vec<f64>,
    pub n_antennas: usize,
    pub m_antennas: usize,
    pub schemes: Vec<Scheme>,
    pub realizations: usize,
    pub seed: u64,
    /// `(w_u, w_b)`, replicated over streams.
    pub weights: (f64, f64),
    pub solver: SolverMode,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.realizations == 0 {
            return Err(Error::Config("realizations must be >= 1".into()));
        }
        if self.schemes.is_empty() {
            return Err(Error::Config("at least one scheme is required".into()));
        }
        if self.axis.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("axis values must be finite".into()));
        }
        match &self.scenario {
            Scenario::Coverage(geo) => {
                geo.validate()?;
                if self.axis.iter().any(|d| *d <= 0.0) {
                    return Err(Error::Config("distances must be > 0".into()));
                }
            }
            _ => {
                if self.schemes.contains(&Scheme::Direct) {
                    return Err(Error::Config("direct transmission needs a coverage scenario".into()));
                }
                if let Scenario::Unbalanced { snr_b_db } = self.scenario {
                    if !snr_b_db.is_finite() {
                        return Err(Error::Config("BS-relay SNR must be finite".into()));
                    }
                }
            }
        }
        self.point(self.axis.first().copied().unwrap_or(10.0))?.config.validate().map_err(|e| Error::Config(e.to_string()))
    }

    /// Stable digest of the sweep definition, stored alongside emitted results.
    pub fn config_hash(&self) -> u64 {
        let mut h = DefaultHasher::new();
        format!("{self:?}").hash(&mut h);
        h.finish()
    }

    /// Everything that depends on one axis value.
    pub fn point(&self, axis: f64) -> Result<SweepPoint> {
        let (n, m) = (self.n_antennas, self.m_antennas);
        let db = |x: f64| 10.0 * x.log10();
        Ok(match &self.scenario {
            Scenario::Balanced | Scenario::Unbalanced { .. } => {
                let snr_b = match self.scenario {
                    Scenario::Unbalanced { snr_b_db } => snr_b_db,
                    _ => axis,
                };
                SweepPoint {
                    config: SystemConfig::unit(n, m, self.weights),
                    gains: snr_parameterized_gains(snr_b, axis),
                    direct: None,
                    min_hop_snr_db: snr_b.min(axis),
                }
            }
            Scenario::Coverage(geo) => {
                let config = geo.system_config(n, m, self.weights);
                let gains = geo.relay_gains(axis);
                let hops = [
                    config.p_u * gains.h_u2 / config.sigma2_r,
                    config.p_b * gains.h_b2 / config.sigma2_r,
                    config.p_r * gains.g_u2 / config.sigma2,
                    config.p_r * gains.g_b2 / config.sigma2,
                ];
                SweepPoint {
                    min_hop_snr_db: db(hops.into_iter().fold(f64::INFINITY, f64::min)),
                    direct: Some(geo.direct_gains(axis)),
                    config,
                    gains,
                }
            }
        })
    }
}

/// Configuration of one axis point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub config: SystemConfig,
    pub gains: LinkGains,
    /// `(BS -> RUE, TUE -> BS)` variances when direct links exist.
    pub direct: Option<(f64, f64)>,
    pub min_hop_snr_db: f64,
}

/// Weighted sum rate of each requested scheme in one realization; `None`
/// marks a failed realization.
pub fn evaluate_realization(spec: &SweepSpec, point: &SweepPoint, index: u64) -> Result<Vec<Option<f64>>> {
    let mut rng = substream(spec.seed, index);
    let ch = build_channel_set(&point.config, &point.gains, &mut rng)?;
    let m = ch.m();
    let direct = match point.direct {
        Some((bs_rue, tue_bs)) => Some((sample_rayleigh(m, m, bs_rue, &mut rng)?, sample_rayleigh(m, m, tue_bs, &mut rng)?)),
        None => None,
    };
    let weights = StreamWeights::from_config(&point.config);
    let (w_u, w_b) = spec.weights;
    let cfg = &point.config;
    let bict = || -> Option<BiCtPrecoder> { BiCtPrecoder::new(&ch).ok() };
    let mut cache = None;
    Ok(spec
        .schemes
        .iter()
        .map(|scheme| match scheme {
            Scheme::BiCt => {
                let pre = cache.get_or_insert_with(bict).as_ref()?;
                let r = maximize_wsr(&pre.snr, &pre.power, &weights, cfg.p_r, spec.solver, point.min_hop_snr_db).ok()?;
                (r.status == GpStatus::Optimal && r.power <= cfg.p_r * (1.0 + 1e-8)).then_some(r.wsr_bits_per_hz)
            }
            Scheme::BiCp => {
                let pre = cache.get_or_insert_with(bict).as_ref()?;
                bicp_wsr(&ch, &pre.cancellers, &weights).ok().map(|a| a.wsr_bits_per_hz)
            }
            Scheme::Owr => owr_wsr(&ch, w_u, w_b).ok(),
            Scheme::Direct => {
                let (h, g) = direct.as_ref()?;
                let powers = DirectPowers { p_down: cfg.p_b + cfg.p_r, p_up: cfg.p_u, sigma2: cfg.sigma2 };
                direct_wsr(h, g, powers, w_u, w_b).ok()
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis: f64,
    pub scheme: Scheme,
    /// Mean over successful realizations; NaN if none succeeded.
    pub mean_wsr: f64,
    pub stderr: f64,
    /// Realizations attempted.
    pub realizations: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub seed: u64,
    pub config_hash: u64,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn row(&self, axis: f64, scheme: Scheme) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.axis == axis && r.scheme == scheme)
    }
}

/// Mean and standard error of the samples, in index order.
pub fn mean_stderr(samples: &[f64]) -> (f64, f64) {
    let n = samples.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

#[cfg(feature = "parallel")]
fn map_indexed<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_indexed<T>(n: usize, f: impl Fn(usize) -> T) -> Vec<T> {
    (0..n).map(f).collect()
}

/// Runs every axis point over the same realization substreams.
///
/// Results are collected per realization index and reduced in index order,
/// so they do not depend on how realizations are scheduled.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let mut rows = Vec::with_capacity(spec.axis.len() * spec.schemes.len());
    for &axis in &spec.axis {
        let point = spec.point(axis)?;
        let outcomes = map_indexed(spec.realizations, |r| evaluate_realization(spec, &point, r as u64));
        let outcomes: Vec<Vec<Option<f64>>> = outcomes.into_iter().collect::<Result<_>>()?;
        for (k, &scheme) in spec.schemes.iter().enumerate() {
            let ok: Vec<f64> = outcomes.iter().filter_map(|o| o[k]).collect();
            let (mean_wsr, stderr) = mean_stderr(&ok);
            rows.push(SweepRow {
                axis,
                scheme,
                mean_wsr,
                stderr,
                realizations: spec.realizations,
                failures: spec.realizations - ok.len(),
            });
        }
    }
    Ok(SweepResult { seed: spec.seed, config_hash: spec.config_hash(), rows })
}
