//! Power allocation problems over the triangularizing precoder.
//!
//! Decision variables are the per-stream power variables `delta`, internally
//! rescaled so that a unit value is of the order of the optimum. Streams
//! whose signal coefficient vanishes are excluded and their variable pinned
//! to zero.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::SystemConfig;
use crate::error::{Error, Result};
use crate::gp::{
    epigraph_reduce, solve_condensed_ratio, solve_gp, GpOptions, GpProblem, GpStatus, Monomial, Posynomial,
    RatioFactor, RatioProblem, Variable, WeightedFactor, VARIABLE_FLOOR,
};
use crate::precoding::{DeltaVector, PowerModel, Receiver, SnrModel};

/// Per-stream rate weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamWeights {
    pub u: Vec<f64>,
    pub b: Vec<f64>,
}

impl StreamWeights {
    pub fn uniform(m: usize, w_u: f64, w_b: f64) -> Self {
        Self { u: vec![w_u; m], b: vec![w_b; m] }
    }

    pub fn from_config(cfg: &SystemConfig) -> Self {
        Self { u: cfg.weights_u.clone(), b: cfg.weights_b.clone() }
    }

    pub fn side(&self, rx: Receiver) -> &[f64] {
        match rx {
            Receiver::Rue => &self.u,
            Receiver::Bs => &self.b,
        }
    }

    fn validate(&self, m: usize) -> Result<()> {
        if self.u.len() != m || self.b.len() != m {
            return Err(Error::DimensionMismatch(format!("expected {m} weights per direction")));
        }
        if self.u.iter().chain(&self.b).any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidInput("weights must be finite and >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WsrResult {
    pub delta: DeltaVector,
    /// Exact weighted sum rate at `delta`.
    pub wsr_bits_per_hz: f64,
    /// Value of the surrogate the solver worked on.
    pub approx_objective: f64,
    pub power: f64,
    pub status: GpStatus,
    /// Streams left out because their signal coefficient is zero.
    pub excluded_streams: usize,
    /// Condensation iterations, or 1 for a single GP solve.
    pub gp_solves: usize,
    /// True ratio objective `prod (den / (den + signal))^w` at the start
    /// and after each accepted condensation step; empty for single solves.
    pub trace: Vec<f64>,
}

/// Quality-of-service targets for power minimization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum QosSpec {
    /// Lower bounds on `sum_m log2 SNR` per direction.
    Rate { r_u: f64, r_b: f64 },
    /// Per-stream linear SNR floors.
    Snr { s_u: Vec<f64>, s_b: Vec<f64> },
}

/// How WSR maximization treats the rate function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverMode {
    /// High-SNR approximation, one GP.
    Gp,
    /// Exact rate by successive condensation.
    Condense,
    /// Condensation when the weakest hop is below [`AUTO_THRESHOLD_DB`].
    Auto,
}

pub const AUTO_THRESHOLD_DB: f64 = 15.0;

impl SolverMode {
    pub fn uses_condensation(self, min_hop_snr_db: f64) -> bool {
        match self {
            SolverMode::Gp => false,
            SolverMode::Condense => true,
            SolverMode::Auto => min_hop_snr_db < AUTO_THRESHOLD_DB,
        }
    }
}

impl FromStr for SolverMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gp" => Ok(Self::Gp),
            "condense" => Ok(Self::Condense),
            "auto" => Ok(Self::Auto),
            other => Err(Error::InvalidInput(format!("unknown solver mode '{other}'"))),
        }
    }
}

/// `1/2 sum w log2(1 + SNR)`.
pub fn wsr_value(snr: &SnrModel, delta: &DeltaVector, weights: &StreamWeights) -> f64 {
    let (u, b) = snr.snrs(delta);
    let sum: f64 = u.iter().zip(&weights.u).chain(b.iter().zip(&weights.b)).map(|(s, w)| w * (1.0 + s).log2()).sum();
    0.5 * sum
}

/// Active power variables and the posynomial pieces built on them.
struct Layout<'a> {
    snr: &'a SnrModel,
    power: &'a PowerModel,
    /// `(receiver, index)` of each GP variable.
    vars: Vec<(Receiver, usize)>,
    scale: f64,
    excluded: usize,
}

impl<'a> Layout<'a> {
    /// `keep(rx, stream)` selects streams to optimize; streams with zero
    /// signal coefficient are always dropped.
    fn new(snr: &'a SnrModel, power: &'a PowerModel, keep: impl Fn(Receiver, usize) -> bool) -> Self {
        let m = snr.streams();
        let mut vars = Vec::new();
        let mut excluded = 0;
        for rx in Receiver::BOTH {
            for k in 0..m {
                let s = snr.own_index(k);
                if snr.coefficients(rx).gain[s] > 0.0 {
                    if keep(rx, s) {
                        vars.push((rx, k));
                    }
                } else {
                    excluded += 1;
                }
            }
        }
        Self { snr, power, vars, scale: 1.0, excluded }
    }

    fn n(&self) -> usize {
        self.vars.len()
    }

    fn index(&self, rx: Receiver, k: usize) -> Option<usize> {
        self.vars.iter().position(|v| *v == (rx, k))
    }

    fn variables(&self) -> Vec<Variable> {
        self.vars
            .iter()
            .map(|(rx, k)| Variable::floored(format!("delta_{}{k}", if *rx == Receiver::Rue { 'u' } else { 'b' })))
            .collect()
    }

    fn active_power_sum(&self) -> f64 {
        self.vars.iter().map(|(rx, k)| self.power.coefficient(*rx, *k)).sum()
    }

    /// Relay power in scaled variables, divided by `limit`.
    fn power_posynomial(&self, limit: f64) -> Result<Option<Posynomial>> {
        let n = self.n();
        let terms: Vec<Monomial> = self
            .vars
            .iter()
            .enumerate()
            .filter_map(|(j, (rx, k))| {
                let c = self.power.coefficient(*rx, *k) * self.scale / limit;
                (c > 0.0).then(|| Monomial::power(n, j, c, 1.0))
            })
            .collect::<Result<_>>()?;
        if terms.is_empty() {
            Ok(None)
        } else {
            Posynomial::new(terms).map(Some)
        }
    }

    /// Noise denominator of `stream` at `rx`.
    fn denominator(&self, rx: Receiver, stream: usize) -> Result<Posynomial> {
        let n = self.n();
        let c = self.snr.coefficients(rx);
        let mut terms = Vec::new();
        if self.snr.sigma2 > 0.0 {
            terms.push(Monomial::constant(n, self.snr.sigma2)?);
        }
        for (j, (side, k)) in self.vars.iter().enumerate() {
            let row = match side {
                Receiver::Rue => &c.relay_u[stream],
                Receiver::Bs => &c.relay_b[stream],
            };
            let coeff = self.snr.sigma2_r * row[*k] * self.scale;
            if coeff > 0.0 {
                terms.push(Monomial::power(n, j, coeff, 1.0)?);
            }
        }
        if terms.is_empty() {
            return Err(Error::InvalidInput("noise-free stream has unbounded SNR".into()));
        }
        Posynomial::new(terms)
    }

    fn signal(&self, rx: Receiver, stream: usize) -> Result<Monomial> {
        let k = self.snr.own_index(stream);
        let j = self.index(rx, k).ok_or_else(|| Error::InvalidInput("stream is not active".into()))?;
        Monomial::power(self.n(), j, self.snr.coefficients(rx).gain[stream] * self.scale, 1.0)
    }

    /// Active `(receiver, stream)` pairs.
    fn streams(&self) -> Vec<(Receiver, usize)> {
        self.vars.iter().map(|(rx, k)| (*rx, self.snr.own_index(*k))).collect()
    }

    fn isnr(&self, rx: Receiver, stream: usize) -> Result<Posynomial> {
        self.denominator(rx, stream)?.mul_monomial(&self.signal(rx, stream)?.recip())
    }

    fn delta(&self, x: &[f64]) -> DeltaVector {
        let m = self.snr.streams();
        let mut d = DeltaVector::zeros(m);
        for ((rx, k), xi) in self.vars.iter().zip(x) {
            let v = if *xi <= 10.0 * VARIABLE_FLOOR { 0.0 } else { xi * self.scale };
            match rx {
                Receiver::Rue => d.u[*k] = v,
                Receiver::Bs => d.b[*k] = v,
            }
        }
        d
    }
}

fn check_models(snr: &SnrModel, power: &PowerModel) -> Result<()> {
    let m = snr.streams();
    if power.p_u.len() != m || power.p_b.len() != m {
        return Err(Error::DimensionMismatch("SNR and power models disagree on stream count".into()));
    }
    Ok(())
}

fn check_budget(p_r: f64) -> Result<()> {
    if !(p_r.is_finite() && p_r > 0.0) {
        return Err(Error::InvalidInput(format!("relay power must be > 0, got {p_r}")));
    }
    Ok(())
}

fn wsr_layout<'a>(snr: &'a SnrModel, power: &'a PowerModel, p_r: f64) -> Layout<'a> {
    let mut layout = Layout::new(snr, power, |_, _| true);
    let sum = layout.active_power_sum();
    layout.scale = if sum > 0.0 { p_r / sum } else { 1.0 };
    layout
}

fn finish_wsr(
    layout: &Layout,
    weights: &StreamWeights,
    x: &[f64],
    approx: f64,
    status: GpStatus,
    gp_solves: usize,
) -> WsrResult {
    let delta = layout.delta(x);
    WsrResult {
        wsr_bits_per_hz: wsr_value(layout.snr, &delta, weights),
        power: layout.power.power(&delta),
        approx_objective: approx,
        delta,
        status,
        excluded_streams: layout.excluded,
        gp_solves,
        trace: Vec::new(),
    }
}

fn empty_result(snr: &SnrModel, excluded: usize) -> WsrResult {
    WsrResult {
        delta: DeltaVector::zeros(snr.streams()),
        wsr_bits_per_hz: 0.0,
        approx_objective: 0.0,
        power: 0.0,
        status: GpStatus::Optimal,
        excluded_streams: excluded,
        gp_solves: 0,
        trace: Vec::new(),
    }
}

/// Maximizes the high-SNR approximation `1/2 sum w log2 SNR` under the relay
/// power budget.
pub fn maximize_wsr_high_snr(snr: &SnrModel, power: &PowerModel, weights: &StreamWeights, p_r: f64) -> Result<WsrResult> {
    check_models(snr, power)?;
    check_budget(p_r)?;
    weights.validate(snr.streams())?;
    let layout = wsr_layout(snr, power, p_r);
    if layout.n() == 0 {
        return Ok(empty_result(snr, layout.excluded));
    }
    let n = layout.n();
    let mut base = GpProblem::new(layout.variables(), Monomial::constant(n, 1.0)?.into());
    base.inequalities.extend(layout.power_posynomial(p_r)?);
    let factors = layout
        .streams()
        .into_iter()
        .map(|(rx, s)| Ok(WeightedFactor { posy: layout.isnr(rx, s)?, weight: weights.side(rx)[s] }))
        .collect::<Result<Vec<_>>>()?;
    let reduced = epigraph_reduce(&base, &factors)?;
    let sol = solve_gp(&reduced, &GpOptions::default())?;
    let x = &sol.x[..n];
    let approx = -0.5 * sol.objective.log2();
    Ok(finish_wsr(&layout, weights, x, approx, sol.status, 1))
}

/// Maximizes the exact weighted sum rate by condensing `den + a delta`
/// around the current point, starting from an equal split of the budget.
pub fn maximize_wsr_exact(snr: &SnrModel, power: &PowerModel, weights: &StreamWeights, p_r: f64) -> Result<WsrResult> {
    check_models(snr, power)?;
    check_budget(p_r)?;
    weights.validate(snr.streams())?;
    let layout = wsr_layout(snr, power, p_r);
    if layout.n() == 0 {
        return Ok(empty_result(snr, layout.excluded));
    }
    let n = layout.n();
    let factors = layout
        .streams()
        .into_iter()
        .map(|(rx, s)| {
            let num = layout.denominator(rx, s)?;
            let den = num.add(&layout.signal(rx, s)?.into())?;
            Ok(RatioFactor { num, den, weight: weights.side(rx)[s] })
        })
        .collect::<Result<Vec<_>>>()?;
    let problem = RatioProblem {
        variables: layout.variables(),
        factors,
        constraints: layout.power_posynomial(p_r)?.into_iter().collect(),
    };
    let out = solve_condensed_ratio(&problem, &vec![1.0; n], 50, &GpOptions::default())?;
    let approx = -0.5 * out.solution.objective.log2();
    let mut result = finish_wsr(&layout, weights, &out.solution.x, approx, out.solution.status, out.trace.len() - 1);
    result.trace = out.trace;
    Ok(result)
}

/// Dispatches on `mode`; `min_hop_snr_db` feeds [`SolverMode::Auto`].
pub fn maximize_wsr(
    snr: &SnrModel,
    power: &PowerModel,
    weights: &StreamWeights,
    p_r: f64,
    mode: SolverMode,
    min_hop_snr_db: f64,
) -> Result<WsrResult> {
    if mode.uses_condensation(min_hop_snr_db) {
        maximize_wsr_exact(snr, power, weights, p_r)
    } else {
        maximize_wsr_high_snr(snr, power, weights, p_r)
    }
}

fn qos_layout<'a>(snr: &'a SnrModel, power: &'a PowerModel, keep: impl Fn(Receiver, usize) -> bool) -> Layout<'a> {
    let mut layout = Layout::new(snr, power, keep);
    // Unit variables give roughly unit SNR.
    let gains: Vec<f64> = layout.streams().iter().map(|(rx, s)| snr.coefficients(*rx).gain[*s]).collect();
    if !gains.is_empty() {
        let mean_log = gains.iter().map(|g| g.ln()).sum::<f64>() / gains.len() as f64;
        let noise = if snr.sigma2 > 0.0 { snr.sigma2 } else { 1.0 };
        layout.scale = noise / mean_log.exp();
    }
    layout
}

fn finish_qos(layout: &Layout, x: &[f64], status: GpStatus) -> WsrResult {
    let m = layout.snr.streams();
    let mut r = finish_wsr(layout, &StreamWeights::uniform(m, 1.0, 1.0), x, 0.0, status, 1);
    r.approx_objective = r.power;
    r
}

/// Minimizes relay power subject to `sum_m log2 SNR_{i,m} >= r_i` in the
/// high-SNR sense, i.e. `prod_m ISNR_{i,m} <= 2^{-r_i}`. A zero target
/// switches that direction off.
pub fn minimize_power_rate_qos(snr: &SnrModel, power: &PowerModel, r_u: f64, r_b: f64) -> Result<WsrResult> {
    check_models(snr, power)?;
    for r in [r_u, r_b] {
        if !(r.is_finite() && r >= 0.0) {
            return Err(Error::InvalidInput(format!("rate targets must be >= 0, got {r}")));
        }
    }
    let target = |rx: Receiver| if rx == Receiver::Rue { r_u } else { r_b };
    let layout = qos_layout(snr, power, |rx, _| target(rx) > 0.0);
    if layout.n() == 0 {
        return Ok(empty_result(snr, layout.excluded));
    }
    let n = layout.n();
    let Some(objective) = layout.power_posynomial(1.0)? else {
        return Err(Error::InvalidInput("power model has no positive coefficient".into()));
    };
    let streams = layout.streams();
    // One auxiliary per stream bounds its ISNR; their product meets the target.
    let total = n + streams.len();
    let mut variables = layout.variables();
    variables.extend((0..streams.len()).map(|i| Variable::free(format!("t_{i}"))));
    let mut problem = GpProblem::new(variables, objective.pad(streams.len()));
    for rx in Receiver::BOTH {
        let mut exps = vec![0.0; total];
        let mut any = false;
        for (i, (side, s)) in streams.iter().enumerate() {
            if *side != rx {
                continue;
            }
            any = true;
            exps[n + i] = 1.0;
            let isnr = layout.isnr(rx, *s)?.pad(streams.len());
            problem.inequalities.push(isnr.mul_monomial(&Monomial::power(total, n + i, 1.0, -1.0)?)?);
        }
        if any {
            problem.inequalities.push(Monomial::new(2f64.powf(target(rx)), exps)?.into());
        }
    }
    let sol = solve_gp(&problem, &GpOptions::default())?;
    Ok(finish_qos(&layout, &sol.x[..n], sol.status))
}

/// Minimizes relay power subject to `SNR_{i,m} >= s_{i,m}`. Streams with a
/// zero floor are switched off.
pub fn minimize_power_snr_qos(snr: &SnrModel, power: &PowerModel, s_u: &[f64], s_b: &[f64]) -> Result<WsrResult> {
    check_models(snr, power)?;
    let m = snr.streams();
    if s_u.len() != m || s_b.len() != m {
        return Err(Error::DimensionMismatch(format!("expected {m} SNR floors per direction")));
    }
    if s_u.iter().chain(s_b).any(|s| !(s.is_finite() && *s >= 0.0)) {
        return Err(Error::InvalidInput("SNR floors must be finite and >= 0".into()));
    }
    let floor = |rx: Receiver, s: usize| if rx == Receiver::Rue { s_u[s] } else { s_b[s] };
    let unreachable = Receiver::BOTH
        .into_iter()
        .any(|rx| (0..m).any(|s| floor(rx, s) > 0.0 && snr.coefficients(rx).gain[s] == 0.0));
    let layout = qos_layout(snr, power, |rx, s| floor(rx, s) > 0.0);
    if unreachable {
        let mut r = empty_result(snr, layout.excluded);
        r.status = GpStatus::Infeasible;
        return Ok(r);
    }
    if layout.n() == 0 {
        return Ok(empty_result(snr, layout.excluded));
    }
    let Some(objective) = layout.power_posynomial(1.0)? else {
        return Err(Error::InvalidInput("power model has no positive coefficient".into()));
    };
    let mut problem = GpProblem::new(layout.variables(), objective);
    for (rx, s) in layout.streams() {
        let isnr = layout.isnr(rx, s)?;
        problem.inequalities.push(isnr.mul_monomial(&Monomial::constant(layout.n(), floor(rx, s))?)?);
    }
    let sol = solve_gp(&problem, &GpOptions::default())?;
    Ok(finish_qos(&layout, &sol.x, sol.status))
}

/// Dispatches on the kind of targets.
pub fn minimize_power(snr: &SnrModel, power: &PowerModel, qos: &QosSpec) -> Result<WsrResult> {
    match qos {
        QosSpec::Rate { r_u, r_b } => minimize_power_rate_qos(snr, power, *r_u, *r_b),
        QosSpec::Snr { s_u, s_b } => minimize_power_snr_qos(snr, power, s_u, s_b),
    }
}
