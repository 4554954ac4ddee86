//! Power allocation for the channel-parallelizing precoder.
//!
//! `W` is linear in `s = sqrt(delta)`, so relay power and every stream's
//! signal and noise terms are real quadratic forms in `s`. The allocation is
//! found by projected gradient ascent on the exact weighted rate over the
//! surface where the relay power budget is met with equality.

use crate::channel::ChannelSet;
use crate::error::Result;
use crate::linalg::ComplexMatrix;
use crate::precoding::{BiCancellers, BiCpFactors, DeltaVector};
use crate::problems::StreamWeights;

/// Row-major symmetric `k x k` matrix.
#[derive(Debug, Clone)]
struct Form {
    k: usize,
    a: Vec<f64>,
}

impl Form {
    fn zeros(k: usize) -> Self {
        Self { k, a: vec![0.0; k * k] }
    }

    fn value(&self, s: &[f64]) -> f64 {
        let k = self.k;
        (0..k).map(|i| s[i] * (0..k).map(|j| self.a[i * k + j] * s[j]).sum::<f64>()).sum()
    }

    /// Gradient `2 A s`.
    fn grad(&self, s: &[f64]) -> Vec<f64> {
        let k = self.k;
        (0..k).map(|i| 2.0 * (0..k).map(|j| self.a[i * k + j] * s[j]).sum::<f64>()).collect()
    }

    /// Adds `scale * Re(conj(u) v^T)` symmetrized, i.e. the form of
    /// `scale * Re sum_n conj(u_n(s)) v_n(s)` with `u`, `v` linear in `s`.
    fn add_gram(&mut self, scale: f64, cols: &[Vec<num_complex::Complex64>]) {
        let k = self.k;
        for i in 0..k {
            for j in 0..k {
                let v: f64 = cols[i].iter().zip(&cols[j]).map(|(x, y)| (x.conj() * y).re).sum();
                self.a[i * k + j] += scale * v;
            }
        }
    }
}

#[derive(Debug, Clone)]
struct StreamForm {
    weight: f64,
    signal: Form,
    noise: Form,
}

/// Quadratic-form model of one realization under the parallelizing precoder.
#[derive(Debug, Clone)]
pub struct BiCpModel {
    factors: BiCpFactors,
    m: usize,
    power: Form,
    streams: Vec<StreamForm>,
    sigma2: f64,
}

fn unit_delta(m: usize, k: usize) -> DeltaVector {
    let mut d = DeltaVector::zeros(m);
    if k < m {
        d.u[k] = 1.0;
    } else {
        d.b[k - m] = 1.0;
    }
    d
}

fn flatten(a: &ComplexMatrix) -> Vec<num_complex::Complex64> {
    a.as_slice().to_vec()
}

impl BiCpModel {
    pub fn new(ch: &ChannelSet, bc: &BiCancellers, weights: &StreamWeights) -> Result<Self> {
        let factors = BiCpFactors::new(ch, bc)?;
        let cfg = &ch.config;
        let m = ch.m();
        let k = 2 * m;
        let basis: Vec<ComplexMatrix> = (0..k).map(|i| factors.w(&unit_delta(m, i))).collect::<Result<_>>()?;

        let mut power = Form::zeros(k);
        power.add_gram(cfg.rho_u(), &basis.iter().map(|w| flatten(&w.matmul(&ch.h_u))).collect::<Vec<_>>());
        power.add_gram(cfg.rho_b(), &basis.iter().map(|w| flatten(&w.matmul(&ch.h_b))).collect::<Vec<_>>());
        power.add_gram(cfg.sigma2_r, &basis.iter().map(flatten).collect::<Vec<_>>());

        let mut streams = Vec::with_capacity(k);
        // (receive channel, source channel, source power, weights)
        let links = [
            (&ch.g_u, &ch.h_b, cfg.rho_b(), &weights.u),
            (&ch.g_b, &ch.h_u, cfg.rho_u(), &weights.b),
        ];
        for (g, h, rho, w) in links {
            let gw: Vec<ComplexMatrix> = basis.iter().map(|b| g.matmul(b)).collect();
            let c: Vec<ComplexMatrix> = gw.iter().map(|x| x.matmul(h)).collect();
            for s in 0..m {
                let row = m - 1 - s;
                let mut signal = Form::zeros(k);
                signal.add_gram(rho, &c.iter().map(|x| vec![x[(row, s)]]).collect::<Vec<_>>());
                let mut noise = Form::zeros(k);
                noise.add_gram(cfg.sigma2_r, &gw.iter().map(|x| x.row(row).to_vec()).collect::<Vec<_>>());
                // Streams detected later leak into this one.
                if s > 0 {
                    noise.add_gram(rho, &c.iter().map(|x| x.row(row)[..s].to_vec()).collect::<Vec<_>>());
                }
                streams.push(StreamForm { weight: w[s], signal, noise });
            }
        }
        Ok(Self { factors, m, power, streams, sigma2: cfg.sigma2 })
    }

    pub fn power(&self, delta: &DeltaVector) -> f64 {
        self.power.value(&sqrt_stack(delta))
    }

    /// Per-stream SINRs `(rue, bs)`.
    pub fn sinrs(&self, delta: &DeltaVector) -> (Vec<f64>, Vec<f64>) {
        let s = sqrt_stack(delta);
        let all: Vec<f64> = self.streams.iter().map(|f| sinr(f, &s, self.sigma2)).collect();
        (all[..self.m].to_vec(), all[self.m..].to_vec())
    }

    pub fn wsr(&self, delta: &DeltaVector) -> f64 {
        self.rate(&sqrt_stack(delta))
    }

    fn rate(&self, s: &[f64]) -> f64 {
        0.5 * self.streams.iter().map(|f| f.weight * (1.0 + sinr(f, s, self.sigma2)).log2()).sum::<f64>()
    }

    fn rate_grad(&self, s: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; s.len()];
        for f in &self.streams {
            if f.weight == 0.0 {
                continue;
            }
            let num = f.signal.value(s);
            let den = f.noise.value(s) + self.sigma2;
            let gn = f.signal.grad(s);
            let gd = f.noise.grad(s);
            // d/ds log2(1 + num/den) = (gn den - num gd) / (den (den + num) ln 2)
            let scale = 0.5 * f.weight / (den * (den + num) * std::f64::consts::LN_2);
            for i in 0..s.len() {
                g[i] += scale * (gn[i] * den - num * gd[i]);
            }
        }
        g
    }

    /// Rescales `s >= 0` onto `power(s) = p_r`.
    fn project(&self, s: &mut [f64], p_r: f64) -> bool {
        for v in s.iter_mut() {
            *v = v.max(0.0);
        }
        let p = self.power.value(s);
        if !(p > 0.0 && p.is_finite()) {
            return false;
        }
        let c = (p_r / p).sqrt();
        for v in s.iter_mut() {
            *v *= c;
        }
        true
    }

    /// Locally optimal allocation from a few deterministic starting splits.
    pub fn optimize(&self, p_r: f64) -> BiCpAllocation {
        let k = 2 * self.m;
        let starts: [(f64, f64); 3] = [(1.0, 1.0), (3.0, 1.0), (1.0, 3.0)];
        let mut best: Option<(f64, Vec<f64>)> = None;
        for (a, b) in starts {
            let mut s: Vec<f64> = (0..k).map(|i| if i < self.m { a } else { b }).collect();
            if !self.project(&mut s, p_r) {
                continue;
            }
            let (value, s) = self.ascend(s, p_r);
            if best.as_ref().is_none_or(|(v, _)| value > *v) {
                best = Some((value, s));
            }
        }
        let (value, s) = best.unwrap_or((0.0, vec![0.0; k]));
        let delta = DeltaVector::from_stacked(&s.iter().map(|v| v * v).collect::<Vec<_>>());
        BiCpAllocation { wsr_bits_per_hz: value, delta }
    }

    fn ascend(&self, mut s: Vec<f64>, p_r: f64) -> (f64, Vec<f64>) {
        let mut value = self.rate(&s);
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let mut step = 0.1 * norm(&s) / norm(&self.rate_grad(&s)).max(1e-300);
        for _ in 0..200 {
            let g = self.rate_grad(&s);
            let mut improved = false;
            for _ in 0..40 {
                let mut cand: Vec<f64> = s.iter().zip(&g).map(|(x, d)| x + step * d).collect();
                if self.project(&mut cand, p_r) {
                    let v = self.rate(&cand);
                    if v > value {
                        let gain = v - value;
                        s = cand;
                        value = v;
                        improved = gain > 1e-10 * value.abs().max(1e-12);
                        step *= 2.0;
                        break;
                    }
                }
                step *= 0.5;
            }
            if !improved {
                break;
            }
        }
        (value, s)
    }

    pub fn w(&self, delta: &DeltaVector) -> Result<ComplexMatrix> {
        self.factors.w(delta)
    }
}

fn sinr(f: &StreamForm, s: &[f64], sigma2: f64) -> f64 {
    let num = f.signal.value(s);
    if num <= 0.0 {
        return 0.0;
    }
    num / (f.noise.value(s) + sigma2)
}

fn sqrt_stack(delta: &DeltaVector) -> Vec<f64> {
    delta.stacked().iter().map(|d| d.max(0.0).sqrt()).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiCpAllocation {
    pub delta: DeltaVector,
    pub wsr_bits_per_hz: f64,
}

/// Best found weighted sum rate of the parallelizing precoder.
pub fn bicp_wsr(ch: &ChannelSet, bc: &BiCancellers, weights: &StreamWeights) -> Result<BiCpAllocation> {
    Ok(BiCpModel::new(ch, bc, weights)?.optimize(ch.config.p_r))
}
