mod common;

use atwr_core::channel::{sample_rayleigh, substream, LinkGains};
use atwr_core::linalg::ComplexMatrix;
use atwr_core::simulate::{allocate_eigenmodes, direct_wsr, mimo_capacity, owr_rates, DirectPowers, Eigenmode};
use common::*;
use rand::Rng;

fn random_mode<R: Rng>(rng: &mut R) -> Eigenmode {
    Eigenmode {
        a: db(rng.random_range(-10.0..30.0)),
        b: db(rng.random_range(-10.0..10.0)),
        c: 1.0,
        e: db(rng.random_range(-5.0..15.0)),
        weight: rng.random_range(0.2..2.0),
    }
}

#[test]
fn two_mode_allocation_matches_golden_section() {
    let mut rng = substream(51, 0);
    for i in 0..300 {
        let modes = [random_mode(&mut rng), random_mode(&mut rng)];
        let budget: f64 = db(rng.random_range(-10.0..20.0));
        let (d, rate) = allocate_eigenmodes(&modes, budget);
        let used: f64 = modes.iter().zip(&d).map(|(m, x)| m.e * x).sum();
        assert!(used <= budget * (1.0 + 1e-12), "case {i}: used {used} of {budget}");

        // Weighted rate of a concave sum along the budget line.
        let f = |t: f64| {
            modes[0].weight * modes[0].rate(t * budget / modes[0].e)
                + modes[1].weight * modes[1].rate((1.0 - t) * budget / modes[1].e)
        };
        let (_, oracle) = golden_section_max(f, 0.0, 1.0, 1e-13);
        assert!(rel(rate, oracle) < 1e-7, "case {i}: {rate} vs {oracle}");
    }
}

#[test]
fn single_mode_spends_everything() {
    let mut rng = substream(52, 0);
    for _ in 0..50 {
        let m = random_mode(&mut rng);
        let (d, rate) = allocate_eigenmodes(&[m], 3.0);
        assert!(rel(d[0] * m.e, 3.0) < 1e-12);
        assert!(rel(rate, m.weight * m.rate(3.0 / m.e)) < 1e-12);
    }
}

#[test]
fn zero_budget_gives_zero_rate() {
    let mut rng = substream(53, 0);
    let modes = [random_mode(&mut rng), random_mode(&mut rng)];
    assert_eq!(allocate_eigenmodes(&modes, 0.0), (vec![0.0, 0.0], 0.0));
}

#[test]
fn owr_rates_grow_with_snr() {
    for i in 0..20u64 {
        let lo = owr_rates(&unit_channels(4, 2, LinkGains::uniform(db(5.0)), 54, i)).unwrap();
        let hi = owr_rates(&unit_channels(4, 2, LinkGains::uniform(db(25.0)), 54, i)).unwrap();
        assert!(hi.0 > lo.0 && hi.1 > lo.1, "realization {i}");
    }
}

/// `log2 det(I + s H H^H)` of a 2 x 2 channel written out by hand.
fn capacity_2x2(h: &ComplexMatrix, s: f64) -> f64 {
    let g = h.matmul(&h.adjoint());
    let (a, d) = (g[(0, 0)].re, g[(1, 1)].re);
    let off = g[(0, 1)].norm_sqr();
    ((1.0 + s * a) * (1.0 + s * d) - s * s * off).log2()
}

#[test]
fn direct_capacity_matches_determinant() {
    let mut rng = substream(55, 0);
    for _ in 0..200 {
        let h = sample_rayleigh(2, 2, 1.0, &mut rng).unwrap();
        let s: f64 = db(rng.random_range(-10.0..30.0));
        assert!(rel(mimo_capacity(&h, s).unwrap(), capacity_2x2(&h, s)) < 1e-10);
    }
}

#[test]
fn direct_wsr_splits_power_evenly() {
    let mut rng = substream(56, 0);
    for _ in 0..50 {
        let h = sample_rayleigh(2, 2, 1.0, &mut rng).unwrap();
        let g = sample_rayleigh(2, 2, 0.3, &mut rng).unwrap();
        let p = DirectPowers { p_down: 4.0, p_up: 1.0, sigma2: 0.5 };
        let oracle = 0.5 * (1.5 * capacity_2x2(&h, 4.0 / 1.0) + 0.5 * capacity_2x2(&g, 1.0 / 1.0));
        assert!(rel(direct_wsr(&h, &g, p, 1.5, 0.5).unwrap(), oracle) < 1e-10);
    }
}

#[test]
fn direct_rejects_mismatched_links() {
    let mut rng = substream(57, 0);
    let h = sample_rayleigh(2, 2, 1.0, &mut rng).unwrap();
    let g = sample_rayleigh(3, 3, 1.0, &mut rng).unwrap();
    let p = DirectPowers { p_down: 1.0, p_up: 1.0, sigma2: 1.0 };
    assert!(direct_wsr(&h, &g, p, 1.0, 1.0).is_err());
}
