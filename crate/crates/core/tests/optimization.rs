mod common;

use atwr_core::channel::{substream, LinkGains};
use atwr_core::gp::GpStatus;
use atwr_core::precoding::{BiCtPrecoder, DeltaVector, Receiver};
use atwr_core::problems::{maximize_wsr_exact, maximize_wsr_high_snr, minimize_power, wsr_value, QosSpec, StreamWeights};
use common::*;
use rand::Rng;

/// Best exact WSR on the power boundary `p_u u + p_b b = 1`, by golden
/// section over the share of power given to the RUE stream.
fn boundary_wsr(pre: &BiCtPrecoder, w: (f64, f64)) -> f64 {
    let (pu, pb) = (pre.power.p_u[0], pre.power.p_b[0]);
    let f = |t: f64| scalar_wsr(&pre.snr, &scalar_delta(t / pu, (1.0 - t) / pb), w);
    let (_, best) = golden_section_max(f, 0.0, 1.0, 1e-12);
    // The rate is not always unimodal in t, so also scan coarsely.
    (0..=2000).map(|i| f(i as f64 / 2000.0)).fold(best, f64::max)
}

#[test]
fn exact_wsr_matches_boundary_search() {
    let mut worst = 0.0f64;
    for i in 0..100u64 {
        let pre = scalar_instance(31, i, -5.0, 20.0);
        let w = (1.0 + (i % 3) as f64 * 0.5, 0.5 + (i % 2) as f64);
        let r = maximize_wsr_exact(&pre.snr, &pre.power, &StreamWeights::uniform(1, w.0, w.1), 1.0).unwrap();
        let oracle = boundary_wsr(&pre, w);
        assert!(r.power <= 1.0 + 1e-8, "instance {i}: power {}", r.power);
        // Solver results may only lose to the oracle, never beat it.
        assert!(r.wsr_bits_per_hz <= oracle * (1.0 + 1e-9), "instance {i}");
        worst = worst.max(rel(r.wsr_bits_per_hz, oracle));
    }
    assert!(worst < 5e-3, "worst relative gap {worst}");
}

#[test]
fn high_snr_beats_equal_power() {
    let weights = StreamWeights::uniform(2, 1.5, 0.5);
    let mut wins = 0;
    for i in 0..500u64 {
        let ch = unit_channels(4, 2, LinkGains::uniform(db(30.0)), 41, i);
        let pre = BiCtPrecoder::new(&ch).unwrap();
        let r = maximize_wsr_high_snr(&pre.snr, &pre.power, &weights, 1.0).unwrap();
        let ones = DeltaVector::uniform(2, 1.0);
        let equal = ones.scaled(1.0 / pre.power.power(&ones));
        if r.wsr_bits_per_hz >= wsr_value(&pre.snr, &equal, &weights) * (1.0 - 1e-9) {
            wins += 1;
        }
    }
    assert!(wins >= 495, "{wins}/500");
}

#[test]
fn wsr_value_matches_covariance_path() {
    let mut rng = substream(42, 0);
    for i in 0..50u64 {
        let ch = unit_channels(5, 2, LinkGains::uniform(db(12.0)), 43, i);
        let pre = BiCtPrecoder::new(&ch).unwrap();
        let d = random_delta(2, &mut rng);
        let weights = StreamWeights::uniform(2, 0.7, 1.3);
        let (u, b) = covariance_sinrs(&ch, &pre.w(&d).unwrap());
        let oracle = 0.5
            * (u.iter().map(|s| 0.7 * (1.0 + s).log2()).sum::<f64>() + b.iter().map(|s| 1.3 * (1.0 + s).log2()).sum::<f64>());
        assert!(rel(wsr_value(&pre.snr, &d, &weights), oracle) < 1e-9, "realization {i}");
    }
}

#[test]
fn power_minimization_inverts_rate_maximization() {
    // Asking for the SNRs the WSR optimum reached should cost its full budget.
    let weights = StreamWeights::uniform(2, 1.0, 1.0);
    for i in 0..30u64 {
        let ch = unit_channels(4, 2, LinkGains::uniform(db(20.0)), 44, i);
        let pre = BiCtPrecoder::new(&ch).unwrap();
        let best = maximize_wsr_high_snr(&pre.snr, &pre.power, &weights, 1.0).unwrap();
        let (s_u, s_b) = pre.snr.snrs(&best.delta);
        let r = minimize_power(&pre.snr, &pre.power, &QosSpec::Snr { s_u, s_b }).unwrap();
        assert_eq!(r.status, GpStatus::Optimal);
        assert!(rel(r.power, best.power) < 1e-5, "realization {i}: {} vs {}", r.power, best.power);
    }
}

#[test]
fn larger_budget_never_hurts() {
    let mut rng = substream(45, 0);
    let weights = StreamWeights::uniform(1, 1.0, 1.0);
    for i in 0..50u64 {
        let pre = scalar_instance(46, i, 0.0, 25.0);
        let p: f64 = rng.random_range(0.2..5.0);
        let small = maximize_wsr_exact(&pre.snr, &pre.power, &weights, p).unwrap();
        let large = maximize_wsr_exact(&pre.snr, &pre.power, &weights, 2.0 * p).unwrap();
        assert!(large.wsr_bits_per_hz >= small.wsr_bits_per_hz * (1.0 - 1e-6), "instance {i}");
    }
}

#[test]
fn unreachable_snr_target_is_reported() {
    let pre = scalar_instance(47, 0, 0.0, 10.0);
    let c = pre.snr.coefficients(Receiver::Rue);
    let ceiling = c.gain[0] / (pre.snr.sigma2_r * c.relay_u[0][0]);
    let r = minimize_power(&pre.snr, &pre.power, &QosSpec::Snr { s_u: vec![2.0 * ceiling], s_b: vec![1.0] });
    assert!(r.map(|r| r.status != GpStatus::Optimal).unwrap_or(true));
}
