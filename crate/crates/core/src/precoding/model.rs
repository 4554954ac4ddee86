//! Relay precoder assembly and the closed-form SNR and power models.
//!
//! Stream indexing: the RUE (resp. BS) receives `M` streams. Row `m` of the
//! triangularized channel detects stream `M - 1 - m` (0-based) and is scaled
//! by the power variable `delta_{i,m}`. Tables below are indexed by stream.

use serde::{Deserialize, Serialize};

use super::bi::BiCancellers;
use super::triangular::TriangularFactors;
use crate::channel::{ChannelSet, SystemConfig};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};

/// Which BC-phase receiver a stream belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Receiver {
    /// Receiving user; gets the BS data `x_b`.
    Rue,
    /// Base station; gets the TUE data `x_u` after removing its own signal.
    Bs,
}

impl Receiver {
    pub const BOTH: [Receiver; 2] = [Receiver::Rue, Receiver::Bs];
}

/// Power-distribution variables `delta_{u,m}` (RUE side) and
/// `delta_{b,m}` (BS side).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaVector {
    pub u: Vec<f64>,
    pub b: Vec<f64>,
}

impl DeltaVector {
    pub fn zeros(m: usize) -> Self {
        Self { u: vec![0.0; m], b: vec![0.0; m] }
    }

    pub fn uniform(m: usize, value: f64) -> Self {
        Self { u: vec![value; m], b: vec![value; m] }
    }

    /// From `[delta_u; delta_b]`.
    pub fn from_stacked(v: &[f64]) -> Self {
        assert!(v.len() % 2 == 0, "stacked delta must have even length");
        let m = v.len() / 2;
        Self { u: v[..m].to_vec(), b: v[m..].to_vec() }
    }

    pub fn stacked(&self) -> Vec<f64> {
        self.u.iter().chain(&self.b).copied().collect()
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn side(&self, rx: Receiver) -> &[f64] {
        match rx {
            Receiver::Rue => &self.u,
            Receiver::Bs => &self.b,
        }
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            u: self.u.iter().map(|x| x * k).collect(),
            b: self.b.iter().map(|x| x * k).collect(),
        }
    }

    pub fn validate(&self, m: usize) -> Result<()> {
        if self.u.len() != m || self.b.len() != m {
            return Err(Error::DimensionMismatch(format!("delta needs {m} entries per side")));
        }
        if self.u.iter().chain(&self.b).any(|d| !(d.is_finite() && *d >= 0.0)) {
            return Err(Error::InvalidInput("delta entries must be finite and >= 0".into()));
        }
        Ok(())
    }
}

/// Anti-diagonal `M x M` matrix with `sqrt(delta_m)` at `(m, M-1-m)`.
pub(crate) fn anti_diagonal(delta: &[f64]) -> ComplexMatrix {
    let m = delta.len();
    let mut a = ComplexMatrix::zeros(m, m);
    for (i, d) in delta.iter().enumerate() {
        a[(i, m - 1 - i)] = C64::new(d.sqrt(), 0.0);
    }
    a
}

/// `W = M [0 D_u; D_b 0] F` for given `D_u`, `D_b`.
pub(crate) fn compose_w(bc: &BiCancellers, d_u: &ComplexMatrix, d_b: &ComplexMatrix) -> ComplexMatrix {
    let m = d_u.rows();
    let mut d = ComplexMatrix::zeros(2 * m, 2 * m);
    d.set_block(0, m, d_u);
    d.set_block(m, 0, d_b);
    bc.m.matmul(&d).matmul(&bc.f)
}

/// Relay precoder `W = M Pi Delta Theta F` (triangularizing design).
pub fn assemble_w(bc: &BiCancellers, tf: &TriangularFactors, delta: &DeltaVector) -> Result<ComplexMatrix> {
    delta.validate(tf.streams())?;
    let d_u = tf.pi_u.matmul(&anti_diagonal(&delta.u)).matmul(&tf.theta_u);
    let d_b = tf.pi_b.matmul(&anti_diagonal(&delta.b)).matmul(&tf.theta_b);
    Ok(compose_w(bc, &d_u, &d_b))
}

/// Average relay transmit power `Tr(W H Q H^H W^H + sigma_r^2 W W^H)`.
pub fn relay_power(ch: &ChannelSet, w: &ComplexMatrix) -> f64 {
    let cfg = &ch.config;
    cfg.rho_u() * w.matmul(&ch.h_u).frobenius_norm_sqr()
        + cfg.rho_b() * w.matmul(&ch.h_b).frobenius_norm_sqr()
        + cfg.sigma2_r * w.frobenius_norm_sqr()
}

/// Coefficients of one receiver's stream SNRs:
///
/// ```text
/// SNR[s] = gain[s] * delta_own(s) / (sigma_r^2 * sum_k (relay_u[s][k] delta_u[k]
///                                     + relay_b[s][k] delta_b[k]) + sigma^2)
/// ```
///
/// with `own(s) = M - 1 - s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamCoefficients {
    pub gain: Vec<f64>,
    pub relay_u: Vec<Vec<f64>>,
    pub relay_b: Vec<Vec<f64>>,
}

/// Per-stream SNRs as rational functions of the power variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnrModel {
    pub rue: StreamCoefficients,
    pub bs: StreamCoefficients,
    pub sigma2_r: f64,
    pub sigma2: f64,
}

impl SnrModel {
    pub fn streams(&self) -> usize {
        self.rue.gain.len()
    }

    pub fn coefficients(&self, rx: Receiver) -> &StreamCoefficients {
        match rx {
            Receiver::Rue => &self.rue,
            Receiver::Bs => &self.bs,
        }
    }

    /// Index of the power variable that feeds `stream`.
    pub fn own_index(&self, stream: usize) -> usize {
        self.streams() - 1 - stream
    }

    /// Noise-plus-relay-noise denominator of `stream` at `rx`.
    pub fn denominator(&self, rx: Receiver, stream: usize, delta: &DeltaVector) -> f64 {
        let c = self.coefficients(rx);
        let relay: f64 = c.relay_u[stream].iter().zip(&delta.u).map(|(a, d)| a * d).sum::<f64>()
            + c.relay_b[stream].iter().zip(&delta.b).map(|(a, d)| a * d).sum::<f64>();
        self.sigma2_r * relay + self.sigma2
    }

    pub fn signal(&self, rx: Receiver, stream: usize, delta: &DeltaVector) -> f64 {
        self.coefficients(rx).gain[stream] * delta.side(rx)[self.own_index(stream)]
    }

    pub fn snr(&self, rx: Receiver, stream: usize, delta: &DeltaVector) -> f64 {
        let den = self.denominator(rx, stream, delta);
        let sig = self.signal(rx, stream, delta);
        if sig == 0.0 {
            0.0
        } else {
            sig / den
        }
    }

    /// All stream SNRs, `(rue, bs)`, indexed by stream.
    pub fn snrs(&self, delta: &DeltaVector) -> (Vec<f64>, Vec<f64>) {
        let m = self.streams();
        (
            (0..m).map(|s| self.snr(Receiver::Rue, s, delta)).collect(),
            (0..m).map(|s| self.snr(Receiver::Bs, s, delta)).collect(),
        )
    }
}

/// Build the SNR coefficient tables from the triangular factors.
pub fn snr_model(tf: &TriangularFactors, config: &SystemConfig) -> SnrModel {
    let m = tf.streams();
    let table = |l: &ComplexMatrix, r: &ComplexMatrix, rho: f64, coupling: Option<&ComplexMatrix>| {
        let mut gain = vec![0.0; m];
        let mut relay_u = vec![vec![0.0; m]; m];
        let mut relay_b = vec![vec![0.0; m]; m];
        for row in 0..m {
            let stream = m - 1 - row;
            gain[stream] = (l[(row, row)] * r[(stream, stream)]).norm_sqr() * rho;
            // Only the lower triangle of L is populated.
            let own: Vec<f64> = (0..m).map(|k| l[(row, k)].norm_sqr()).collect();
            match coupling {
                // BS: G~_n Pi_u couples delta_u, L_b couples delta_b.
                Some(gn) => {
                    relay_u[stream] = (0..m).map(|k| gn[(row, k)].norm_sqr()).collect();
                    relay_b[stream] = own;
                }
                // RUE: only its own delta_u through L_u.
                None => relay_u[stream] = own,
            }
        }
        StreamCoefficients { gain, relay_u, relay_b }
    };
    SnrModel {
        rue: table(&tf.l_u, &tf.r_u, config.rho_b(), None),
        bs: table(&tf.l_b, &tf.r_b, config.rho_u(), Some(&tf.g_n_pi_u)),
        sigma2_r: config.sigma2_r,
        sigma2: config.sigma2,
    }
}

/// Relay power as a linear function of the power variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerModel {
    pub p_u: Vec<f64>,
    pub p_b: Vec<f64>,
}

impl PowerModel {
    pub fn power(&self, delta: &DeltaVector) -> f64 {
        self.p_u.iter().zip(&delta.u).map(|(p, d)| p * d).sum::<f64>()
            + self.p_b.iter().zip(&delta.b).map(|(p, d)| p * d).sum::<f64>()
    }

    pub fn coefficient(&self, rx: Receiver, index: usize) -> f64 {
        match rx {
            Receiver::Rue => self.p_u[index],
            Receiver::Bs => self.p_b[index],
        }
    }
}

/// Extracts the power coefficients by evaluating the exact trace power at
/// each unit vector of `delta`. The trace is linear in `delta` because
/// `M Pi` has orthonormal columns and `Theta F` orthonormal rows.
pub fn power_model(bc: &BiCancellers, tf: &TriangularFactors, ch: &ChannelSet) -> Result<PowerModel> {
    let m = tf.streams();
    let mut p_u = vec![0.0; m];
    let mut p_b = vec![0.0; m];
    for k in 0..m {
        let mut e = DeltaVector::zeros(m);
        e.u[k] = 1.0;
        p_u[k] = relay_power(ch, &assemble_w(bc, tf, &e)?);
        let mut e = DeltaVector::zeros(m);
        e.b[k] = 1.0;
        p_b[k] = relay_power(ch, &assemble_w(bc, tf, &e)?);
    }
    Ok(PowerModel { p_u, p_b })
}

/// Per-stream SINRs of an arbitrary relay precoder with genie-aided SIC.
///
/// Stream `s` is read from row `M - 1 - s` of the end-to-end channel.
/// Interference from streams with a larger index counts as already
/// cancelled; anything else that leaks into the row (lower-index streams,
/// TUE data at the RUE) is treated as noise. The BS removes its own data.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamSinrs {
    pub rue: Vec<f64>,
    pub bs: Vec<f64>,
}

pub fn sic_stream_sinrs(ch: &ChannelSet, w: &ComplexMatrix) -> StreamSinrs {
    let cfg = &ch.config;
    let m = ch.m();
    let sinrs = |g: &ComplexMatrix, desired: &ComplexMatrix, rho_d: f64, leak: Option<(&ComplexMatrix, f64)>| {
        let gw = g.matmul(w);
        let c = gw.matmul(desired);
        let leak_c = leak.map(|(h, rho)| (gw.matmul(h), rho));
        (0..m)
            .map(|s| {
                let row = m - 1 - s;
                let sig = rho_d * c[(row, s)].norm_sqr();
                let mut noise = cfg.sigma2 + cfg.sigma2_r * gw.row(row).iter().map(|z| z.norm_sqr()).sum::<f64>();
                noise += rho_d * (0..s).map(|k| c[(row, k)].norm_sqr()).sum::<f64>();
                if let Some((lc, rho)) = &leak_c {
                    noise += rho * lc.row(row).iter().map(|z| z.norm_sqr()).sum::<f64>();
                }
                if sig == 0.0 {
                    0.0
                } else {
                    sig / noise
                }
            })
            .collect()
    };
    StreamSinrs {
        rue: sinrs(&ch.g_u, &ch.h_b, cfg.rho_b(), Some((&ch.h_u, cfg.rho_u()))),
        bs: sinrs(&ch.g_b, &ch.h_u, cfg.rho_u(), None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{build_channel_set, substream, LinkGains};
    use crate::precoding::{build_bi_cancellers, triangularize};

    struct Setup {
        ch: ChannelSet,
        bc: BiCancellers,
        tf: TriangularFactors,
    }

    fn setup(n: usize, m: usize, seed: u64, cfg_fn: impl FnOnce(&mut SystemConfig)) -> Setup {
        let mut cfg = SystemConfig::unit(n, m, (1.0, 1.0));
        cfg_fn(&mut cfg);
        let ch = build_channel_set(&cfg, &LinkGains::uniform(2.0), &mut substream(seed, 7)).unwrap();
        let bc = build_bi_cancellers(&ch).unwrap();
        let tf = triangularize(&ch, &bc).unwrap();
        Setup { ch, bc, tf }
    }

    fn random_delta(m: usize, seed: u64) -> DeltaVector {
        use rand::Rng;
        let mut rng = substream(seed, 99);
        DeltaVector {
            u: (0..m).map(|_| rng.random_range(0.1..2.0)).collect(),
            b: (0..m).map(|_| rng.random_range(0.1..2.0)).collect(),
        }
    }

    #[test]
    fn zero_delta_gives_zero_precoder() {
        let s = setup(4, 2, 1, |_| {});
        let w = assemble_w(&s.bc, &s.tf, &DeltaVector::zeros(2)).unwrap();
        assert_eq!(w.max_abs(), 0.0);
        assert_eq!(relay_power(&s.ch, &w), 0.0);
    }

    #[test]
    fn negative_delta_rejected() {
        let s = setup(4, 2, 1, |_| {});
        let mut d = DeltaVector::zeros(2);
        d.b[1] = -0.5;
        assert!(matches!(assemble_w(&s.bc, &s.tf, &d), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn interference_cancelled_and_reflected_triangular() {
        for (n, m) in [(4, 2), (5, 2), (8, 4), (6, 3)] {
            let s = setup(n, m, 3, |_| {});
            let w = assemble_w(&s.bc, &s.tf, &random_delta(m, 4)).unwrap();
            let bi = s.ch.g_u.matmul(&w).matmul(&s.ch.h_u);
            assert!(bi.frobenius_norm() < 1e-10 * w.frobenius_norm());
            for c in [s.ch.g_u.matmul(&w).matmul(&s.ch.h_b), s.ch.g_b.matmul(&w).matmul(&s.ch.h_u)] {
                let scale = c.max_abs();
                for row in 0..m {
                    for col in 0..(m - 1 - row) {
                        assert!(c[(row, col)].norm() < 1e-10 * scale, "({row},{col})");
                    }
                }
            }
        }
    }

    #[test]
    fn noiseless_relay_snr() {
        let s = setup(4, 2, 5, |c| c.sigma2_r = 0.0);
        let model = snr_model(&s.tf, &s.ch.config);
        let d = random_delta(2, 6);
        for stream in 0..2 {
            let row = 1 - stream;
            let expect = d.u[row] * (s.tf.l_u[(row, row)] * s.tf.r_u[(stream, stream)]).norm_sqr()
                * s.ch.config.rho_b()
                / s.ch.config.sigma2;
            assert!((model.snr(Receiver::Rue, stream, &d) - expect).abs() < 1e-12 * expect);
        }
    }

    #[test]
    fn single_stream_structure() {
        let s = setup(2, 1, 8, |_| {});
        let model = snr_model(&s.tf, &s.ch.config);
        assert_eq!(model.rue.relay_u[0].len(), 1);
        assert!(model.rue.relay_b[0].iter().all(|&c| c == 0.0));
        assert!(model.rue.relay_u[0][0] > 0.0);
    }

    #[test]
    fn model_matches_sic_evaluation() {
        for (n, m) in [(4, 2), (8, 4)] {
            let s = setup(n, m, 9, |_| {});
            let model = snr_model(&s.tf, &s.ch.config);
            let d = random_delta(m, 10);
            let w = assemble_w(&s.bc, &s.tf, &d).unwrap();
            let direct = sic_stream_sinrs(&s.ch, &w);
            let (rue, bs) = model.snrs(&d);
            for k in 0..m {
                assert!((rue[k] / direct.rue[k] - 1.0).abs() < 1e-9);
                assert!((bs[k] / direct.bs[k] - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn power_model_tracks_trace() {
        let s = setup(5, 2, 11, |c| {
            c.p_u = 3.0;
            c.p_b = 0.5;
            c.sigma2_r = 0.7;
        });
        let pm = power_model(&s.bc, &s.tf, &s.ch).unwrap();
        assert!(pm.p_u.iter().chain(&pm.p_b).all(|&p| p >= 0.7 - 1e-12));
        let d = random_delta(2, 12);
        let trace = relay_power(&s.ch, &assemble_w(&s.bc, &s.tf, &d).unwrap());
        assert!((pm.power(&d) - trace).abs() < 1e-8 * trace);
        assert_eq!(pm.power(&DeltaVector::zeros(2)), 0.0);
    }

    #[test]
    fn power_with_silent_sources_counts_delta() {
        let s = setup(4, 2, 13, |c| {
            c.p_u = 0.0;
            c.p_b = 0.0;
            c.sigma2_r = 1.0;
        });
        let pm = power_model(&s.bc, &s.tf, &s.ch).unwrap();
        for p in pm.p_u.iter().chain(&pm.p_b) {
            assert!((p - 1.0).abs() < 1e-12);
        }
    }
}
