//! Browser bindings: a WSR-vs-SNR curve, one realization's power split, and
//! the end-to-end channel magnitude pattern of either relay precoder.
//!
//! Every export has a plain Rust twin (`*_native`) returning
//! [`atwr_core::Result`], which is what the native tests call. The exported
//! wrappers only convert errors into JS exceptions.

use atwr_core::channel::{build_channel_set, snr_parameterized_gains, substream, ChannelSet, SystemConfig};
use atwr_core::linalg::ComplexMatrix;
use atwr_core::precoding::{build_bi_cancellers, BiCtPrecoder, DeltaVector};
use atwr_core::problems::{maximize_wsr, SolverMode, StreamWeights};
use atwr_core::simulate::{bicp_wsr, run_sweep, BiCpModel, Scenario, Scheme, SweepSpec};
use atwr_core::{Error, Result};
use wasm_bindgen::prelude::*;

/// Upper bound on realizations per point, to keep the page responsive.
pub const MAX_REALIZATIONS: usize = 500;

fn js(e: Error) -> JsError {
    JsError::new(&e.to_string())
}

fn solver(condense: bool) -> SolverMode {
    if condense {
        SolverMode::Condense
    } else {
        SolverMode::Gp
    }
}

#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct Curve {
    axis: Vec<f64>,
    schemes: Vec<Scheme>,
    /// `means[k][i]`: scheme `k` at axis point `i`.
    means: Vec<Vec<f64>>,
    stderrs: Vec<Vec<f64>>,
}

impl Curve {
    fn index(&self, scheme: &str) -> Option<usize> {
        let s: Scheme = scheme.parse().ok()?;
        self.schemes.iter().position(|k| *k == s)
    }
}

#[wasm_bindgen]
impl Curve {
    #[wasm_bindgen(getter)]
    pub fn axis(&self) -> Vec<f64> {
        self.axis.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn schemes(&self) -> Vec<String> {
        self.schemes.iter().map(|s| s.as_str().to_string()).collect()
    }

    /// Mean WSR per axis point; empty for an unknown scheme.
    pub fn mean(&self, scheme: &str) -> Vec<f64> {
        self.index(scheme).map(|k| self.means[k].clone()).unwrap_or_default()
    }

    pub fn stderr(&self, scheme: &str) -> Vec<f64> {
        self.index(scheme).map(|k| self.stderrs[k].clone()).unwrap_or_default()
    }
}

/// Mean WSR of BI-CT, BI-CP and OWR over `snr_db` (UE-relay hops) with the
/// BS-relay hops fixed at `snr_b_db`.
#[allow(clippy::too_many_arguments)]
pub fn wsr_curve_native(
    n: usize,
    m: usize,
    snr_b_db: f64,
    snr_db: &[f64],
    realizations: usize,
    seed: u64,
    w_u: f64,
    w_b: f64,
    condense: bool,
) -> Result<Curve> {
    if realizations > MAX_REALIZATIONS {
        return Err(Error::InvalidInput(format!("at most {MAX_REALIZATIONS} realizations in the demo")));
    }
    let schemes = vec![Scheme::BiCt, Scheme::BiCp, Scheme::Owr];
    let spec = SweepSpec {
        scenario: Scenario::Unbalanced { snr_b_db },
        axis: snr_db.to_vec(),
        n_antennas: n,
        m_antennas: m,
        schemes: schemes.clone(),
        realizations,
        seed,
        weights: (w_u, w_b),
        solver: solver(condense),
    };
    let result = run_sweep(&spec)?;
    let pick = |f: &dyn Fn(&atwr_core::simulate::SweepRow) -> f64| -> Vec<Vec<f64>> {
        schemes
            .iter()
            .map(|s| result.rows.iter().filter(|r| r.scheme == *s).map(f).collect())
            .collect()
    };
    Ok(Curve {
        axis: spec.axis.clone(),
        means: pick(&|r| r.mean_wsr),
        stderrs: pick(&|r| r.stderr),
        schemes,
    })
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn wsr_curve(
    n: usize,
    m: usize,
    snr_b_db: f64,
    snr_db: Vec<f64>,
    realizations: usize,
    seed: u64,
    w_u: f64,
    w_b: f64,
    condense: bool,
) -> std::result::Result<Curve, JsError> {
    wsr_curve_native(n, m, snr_b_db, &snr_db, realizations, seed, w_u, w_b, condense).map_err(js)
}

/// Relay power split of one channel draw.
#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct Allocation {
    delta_u: Vec<f64>,
    delta_b: Vec<f64>,
    rates_u: Vec<f64>,
    rates_b: Vec<f64>,
    wsr: f64,
    power: f64,
}

#[wasm_bindgen]
impl Allocation {
    /// Power variables of the RUE-bound streams.
    #[wasm_bindgen(getter)]
    pub fn delta_u(&self) -> Vec<f64> {
        self.delta_u.clone()
    }

    /// Power variables of the BS-bound streams.
    #[wasm_bindgen(getter)]
    pub fn delta_b(&self) -> Vec<f64> {
        self.delta_b.clone()
    }

    /// Per-stream rates in bit/s/Hz at the RUE.
    #[wasm_bindgen(getter)]
    pub fn rates_u(&self) -> Vec<f64> {
        self.rates_u.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn rates_b(&self) -> Vec<f64> {
        self.rates_b.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn wsr(&self) -> f64 {
        self.wsr
    }

    #[wasm_bindgen(getter)]
    pub fn power(&self) -> f64 {
        self.power
    }
}

fn draw(n: usize, m: usize, snr_u_db: f64, snr_b_db: f64, weights: (f64, f64), seed: u64) -> Result<ChannelSet> {
    let cfg = SystemConfig::unit(n, m, weights);
    build_channel_set(&cfg, &snr_parameterized_gains(snr_b_db, snr_u_db), &mut substream(seed, 0))
}

fn rates(snrs: &[f64]) -> Vec<f64> {
    snrs.iter().map(|s| 0.5 * (1.0 + s).log2()).collect()
}

/// Power split for one realization under `scheme` (`bi-ct` or `bi-cp`).
#[allow(clippy::too_many_arguments)]
pub fn allocate_native(
    scheme: &str,
    n: usize,
    m: usize,
    snr_u_db: f64,
    snr_b_db: f64,
    w_u: f64,
    w_b: f64,
    seed: u64,
    condense: bool,
) -> Result<Allocation> {
    let ch = draw(n, m, snr_u_db, snr_b_db, (w_u, w_b), seed)?;
    let weights = StreamWeights::uniform(m, w_u, w_b);
    let p_r = ch.config.p_r;
    let (delta, wsr, power, (su, sb)) = match scheme.parse::<Scheme>()? {
        Scheme::BiCt => {
            let pre = BiCtPrecoder::new(&ch)?;
            let r = maximize_wsr(&pre.snr, &pre.power, &weights, p_r, solver(condense), snr_u_db.min(snr_b_db))?;
            let snrs = pre.snr.snrs(&r.delta);
            (r.delta, r.wsr_bits_per_hz, r.power, snrs)
        }
        Scheme::BiCp => {
            let bc = build_bi_cancellers(&ch)?;
            let model = BiCpModel::new(&ch, &bc, &weights)?;
            let a = bicp_wsr(&ch, &bc, &weights)?;
            let power = model.power(&a.delta);
            let snrs = model.sinrs(&a.delta);
            (a.delta, a.wsr_bits_per_hz, power, snrs)
        }
        other => return Err(Error::InvalidInput(format!("no power split for '{other}'"))),
    };
    Ok(Allocation { rates_u: rates(&su), rates_b: rates(&sb), delta_u: delta.u, delta_b: delta.b, wsr, power })
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn allocate(
    scheme: &str,
    n: usize,
    m: usize,
    snr_u_db: f64,
    snr_b_db: f64,
    w_u: f64,
    w_b: f64,
    seed: u64,
    condense: bool,
) -> std::result::Result<Allocation, JsError> {
    allocate_native(scheme, n, m, snr_u_db, snr_b_db, w_u, w_b, seed, condense).map_err(js)
}

/// `|G W H|` in row-major order, `2M x 2M`, normalized to a peak of 1.
///
/// Rows are `[RUE; BS]` antennas, columns `[TUE; BS]` streams, with equal
/// power on every stream. The top-left block is what the relay cancels.
pub fn channel_pattern_native(scheme: &str, n: usize, m: usize, seed: u64) -> Result<Vec<f64>> {
    let ch = draw(n, m, 20.0, 20.0, (1.0, 1.0), seed)?;
    let delta = DeltaVector::uniform(m, 1.0);
    let w: ComplexMatrix = match scheme.parse::<Scheme>()? {
        Scheme::BiCt => BiCtPrecoder::new(&ch)?.w(&delta)?,
        Scheme::BiCp => {
            let bc = build_bi_cancellers(&ch)?;
            BiCpModel::new(&ch, &bc, &StreamWeights::uniform(m, 1.0, 1.0))?.w(&delta)?
        }
        other => return Err(Error::InvalidInput(format!("no relay precoder for '{other}'"))),
    };
    let e = ch.g().matmul(&w).matmul(&ch.h());
    let mags: Vec<f64> = e.as_slice().iter().map(|z| z.norm()).collect();
    let peak = mags.iter().cloned().fold(0.0, f64::max);
    Ok(if peak > 0.0 { mags.iter().map(|v| v / peak).collect() } else { mags })
}

#[wasm_bindgen]
pub fn channel_pattern(scheme: &str, n: usize, m: usize, seed: u64) -> std::result::Result<Vec<f64>, JsError> {
    channel_pattern_native(scheme, n, m, seed).map_err(js)
}
