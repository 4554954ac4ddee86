//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use atwr_core::channel::{build_channel_set, substream, ChannelSet, LinkGains, SystemConfig};
use atwr_core::linalg::{ComplexMatrix, C64};
use atwr_core::precoding::{BiCtPrecoder, DeltaVector, Receiver, SnrModel};
use rand::Rng;

pub fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Prints the single verdict line of an acceptance criterion.
pub fn report(id: u32, title: &str, pass: bool, detail: &str) -> bool {
    println!("criterion {id} [{}] {title}: {detail}", if pass { "PASS" } else { "FAIL" });
    pass
}

pub fn unit_channels(n: usize, m: usize, gains: LinkGains, seed: u64, index: u64) -> ChannelSet {
    let cfg = SystemConfig::unit(n, m, (1.0, 1.0));
    build_channel_set(&cfg, &gains, &mut substream(seed, index)).unwrap()
}

pub fn db(x: f64) -> f64 {
    10f64.powf(x / 10.0)
}

pub fn random_delta<R: Rng>(m: usize, rng: &mut R) -> DeltaVector {
    DeltaVector {
        u: (0..m).map(|_| rng.random_range(0.05..3.0)).collect(),
        b: (0..m).map(|_| rng.random_range(0.05..3.0)).collect(),
    }
}

/// Random single-stream BI-CT instance with per-hop SNRs drawn from
/// `[lo_db, hi_db]`.
pub fn scalar_instance(seed: u64, index: u64, lo_db: f64, hi_db: f64) -> BiCtPrecoder {
    let mut rng = substream(seed ^ 0x5eed, index);
    loop {
        let gains = LinkGains {
            h_u2: db(rng.random_range(lo_db..hi_db)),
            h_b2: db(rng.random_range(lo_db..hi_db)),
            g_u2: db(rng.random_range(lo_db..hi_db)),
            g_b2: db(rng.random_range(lo_db..hi_db)),
        };
        let ch = build_channel_set(&SystemConfig::unit(2, 1, (1.0, 1.0)), &gains, &mut rng).unwrap();
        if let Ok(p) = BiCtPrecoder::new(&ch) {
            return p;
        }
    }
}

fn sum_sqr(v: impl IntoIterator<Item = C64>) -> f64 {
    v.into_iter().map(|z| z.norm_sqr()).sum()
}

/// Per-stream SINRs from the end-to-end covariance, stream `s` read from
/// row `M - 1 - s` with streams `> s` already removed by SIC.
///
/// Built from `G W H` and the noise covariance
/// `sigma_r^2 G W W^H G^H + sigma^2 I` without touching any coefficient
/// table of the library.
pub fn covariance_sinrs(ch: &ChannelSet, w: &ComplexMatrix) -> (Vec<f64>, Vec<f64>) {
    let cfg = &ch.config;
    let m = ch.m();
    let one = |g: &ComplexMatrix, desired: &ComplexMatrix, rho: f64, other: Option<(&ComplexMatrix, f64)>| -> Vec<f64> {
        let gw = g.matmul(w);
        let noise_cov = gw.matmul(&gw.adjoint()).scale(cfg.sigma2_r);
        let c = gw.matmul(desired);
        let leak = other.map(|(h, r)| (gw.matmul(h), r));
        (0..m)
            .map(|s| {
                let row = m - 1 - s;
                let signal = rho * c[(row, s)].norm_sqr();
                if signal == 0.0 {
                    return 0.0;
                }
                let mut noise = noise_cov[(row, row)].re + cfg.sigma2;
                noise += rho * sum_sqr((0..s).map(|k| c[(row, k)]));
                if let Some((l, r)) = &leak {
                    noise += r * sum_sqr((0..m).map(|k| l[(row, k)]));
                }
                signal / noise
            })
            .collect()
    };
    (
        one(&ch.g_u, &ch.h_b, cfg.rho_b(), Some((&ch.h_u, cfg.rho_u()))),
        one(&ch.g_b, &ch.h_u, cfg.rho_u(), None),
    )
}

/// `Tr(W H Q H^H W^H + sigma_r^2 W W^H)` with `Q = diag(rho_u I, rho_b I)`.
pub fn trace_power(ch: &ChannelSet, w: &ComplexMatrix) -> f64 {
    let cfg = &ch.config;
    let m = ch.m();
    let mut q = ComplexMatrix::zeros(2 * m, 2 * m);
    for k in 0..m {
        q[(k, k)] = C64::new(cfg.rho_u(), 0.0);
        q[(m + k, m + k)] = C64::new(cfg.rho_b(), 0.0);
    }
    let wh = w.matmul(&ch.h());
    let signal = wh.matmul(&q).matmul(&wh.adjoint()).trace().re;
    let noise = w.matmul(&w.adjoint()).trace().re;
    signal + cfg.sigma2_r * noise
}

/// Minimum of `f` over a log-spaced grid on `[lo, hi]^2` with `points` per
/// axis, then refined `refinements` times on a 400-point grid spanning ten
/// cells either side of the incumbent. `f` returns `None` outside the
/// feasible set.
pub fn log_grid_min_2d(
    f: impl Fn(f64, f64) -> Option<f64>,
    lo: f64,
    hi: f64,
    points: usize,
    refinements: usize,
) -> (f64, (f64, f64)) {
    let (mut a, mut b) = ((lo.ln(), hi.ln()), (lo.ln(), hi.ln()));
    let mut best = (f64::INFINITY, (lo, lo));
    let mut points = points;
    for _ in 0..=refinements {
        let step = ((a.1 - a.0) / (points - 1) as f64, (b.1 - b.0) / (points - 1) as f64);
        for i in 0..points {
            let x = (a.0 + step.0 * i as f64).exp();
            for j in 0..points {
                let y = (b.0 + step.1 * j as f64).exp();
                if let Some(v) = f(x, y) {
                    if v < best.0 {
                        best = (v, (x, y));
                    }
                }
            }
        }
        let (cx, cy) = (best.1 .0.ln(), best.1 .1.ln());
        a = (cx - 10.0 * step.0, cx + 10.0 * step.0);
        b = (cy - 10.0 * step.1, cy + 10.0 * step.1);
        points = 400;
    }
    best
}

/// Same as [`log_grid_min_2d`] for one variable.
pub fn log_grid_min_1d(f: impl Fn(f64) -> Option<f64>, lo: f64, hi: f64, points: usize, refinements: usize) -> (f64, f64) {
    let mut a = (lo.ln(), hi.ln());
    let mut best = (f64::INFINITY, lo);
    for _ in 0..=refinements {
        let step = (a.1 - a.0) / (points - 1) as f64;
        for i in 0..points {
            let x = (a.0 + step * i as f64).exp();
            if let Some(v) = f(x) {
                if v < best.0 {
                    best = (v, x);
                }
            }
        }
        a = (best.1.ln() - 3.0 * step, best.1.ln() + 3.0 * step);
    }
    best
}

/// Maximizer of a unimodal `f` on `[a, b]`.
pub fn golden_section_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol * (a.abs() + b.abs()).max(1e-300) {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// `delta` for a single-stream instance.
pub fn scalar_delta(u: f64, b: f64) -> DeltaVector {
    DeltaVector { u: vec![u], b: vec![b] }
}

/// `prod_i ISNR_i^{w_i}` of a single-stream model, `None` if a stream is off.
pub fn isnr_product(snr: &SnrModel, d: &DeltaVector, w: (f64, f64)) -> Option<f64> {
    let su = snr.snr(Receiver::Rue, 0, d);
    let sb = snr.snr(Receiver::Bs, 0, d);
    (su > 0.0 && sb > 0.0).then(|| su.powf(-w.0) * sb.powf(-w.1))
}

/// Exact half-duplex weighted sum rate of a single-stream model.
pub fn scalar_wsr(snr: &SnrModel, d: &DeltaVector, w: (f64, f64)) -> f64 {
    0.5 * (w.0 * (1.0 + snr.snr(Receiver::Rue, 0, d)).log2() + w.1 * (1.0 + snr.snr(Receiver::Bs, 0, d)).log2())
}
