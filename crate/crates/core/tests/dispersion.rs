//! RMS delay spread against closed forms and its invariances.

use csi_prism::dispersion::{cdf_summary, delay_spread_series, gate_pdp, rms_delay_spread};
use csi_prism::synth::{gen_tapped_delay, DopplerMode, Tap, TapSpec};
use csi_prism::{CsiMeta, Dims, Error};
use proptest::prelude::*;

const DTAU: f64 = 1.0 / 18e6;

/// Weighted standard deviation of bin delays, straight from the definition.
/// Raw-moment spread `sqrt(E[tau^2] - E[tau]^2)` and the square-root
/// amplified cancellation bound of that difference.
fn reference_spread(pdp: &[f64], dtau: f64) -> (f64, f64) {
    let p: f64 = pdp.iter().sum();
    let m1: f64 = pdp.iter().enumerate().map(|(k, w)| w * k as f64 * dtau).sum::<f64>() / p;
    let m2: f64 = pdp
        .iter()
        .enumerate()
        .map(|(k, w)| w * (k as f64 * dtau).powi(2))
        .sum::<f64>()
        / p;
    ((m2 - m1 * m1).max(0.0).sqrt(), (8.0 * f64::EPSILON * m2).sqrt())
}

#[test]
fn two_equal_taps_hundred_ns_apart() {
    // Bins of exactly 100 ns: taps at bins 0 and 1.
    let m = rms_delay_spread(&[1.0, 1.0, 0.0, 0.0], 100e-9).unwrap();
    assert!((m.rms_spread - 50e-9).abs() <= 1e-9 * 50e-9);
    assert!((m.mean_delay - 50e-9).abs() <= 1e-9 * 50e-9);
    assert_eq!(m.power, 2.0);
}

#[test]
fn exponential_profile_within_one_percent() {
    let sigma = 10.0 * DTAU;
    let pdp: Vec<f64> = (0..100).map(|k| (-(k as f64) * DTAU / sigma).exp()).collect();
    let m = rms_delay_spread(&pdp, DTAU).unwrap();
    assert!((m.rms_spread - sigma).abs() / sigma < 0.01, "{}", m.rms_spread / sigma);
}

#[test]
fn single_tap_is_exactly_zero() {
    for bin in [0, 1, 37, 99] {
        for power in [3.7, 0.6469181014564959, 1e-30, 1e30] {
            let mut pdp = vec![0.0; 100];
            pdp[bin] = power;
            assert_eq!(rms_delay_spread(&pdp, DTAU).unwrap().rms_spread, 0.0);
        }
    }
}

#[test]
fn null_and_negative_profiles_are_rejected() {
    assert!(matches!(rms_delay_spread(&[0.0; 8], DTAU), Err(Error::NullProfile)));
    assert!(rms_delay_spread(&[1.0, -1.0], DTAU).is_err());
    assert!(rms_delay_spread(&[1.0, f64::NAN], DTAU).is_err());
}

#[test]
fn gate_keeps_bins_within_range_of_peak() {
    let g = gate_pdp(&[1.0, 0.011, 0.009, 0.5], 20.0);
    assert_eq!(g, vec![1.0, 0.011, 0.0, 0.5]);
}

#[test]
fn synthetic_two_tap_series_is_constant() {
    let meta = CsiMeta::new(1e-3, 2.61e9, 20e6);
    let spec = TapSpec::new(
        vec![
            Tap::new(0.0, 1.0, DopplerMode::Static),
            Tap::new(100e-9, 1.0, DopplerMode::Static),
        ],
        11,
    );
    let t = gen_tapped_delay(&spec, Dims::new(500, 4, 100), meta).unwrap();
    let s = delay_spread_series(&t.view(), None, 100, 20.0).unwrap();
    assert_eq!(s.points.len(), 5);
    for p in &s.points {
        assert!((p.rms_spread - 50e-9).abs() <= 1e-6 * 50e-9, "{}", p.rms_spread);
    }
}

#[test]
fn cdf_plotting_positions() {
    let c = cdf_summary(&[4.0, 2.0, 1.0, 3.0]).unwrap();
    assert_eq!(c.values, vec![1.0, 2.0, 3.0, 4.0]);
    assert_eq!(c.cdf, vec![0.125, 0.375, 0.625, 0.875]);
    assert!(cdf_summary(&[1.0]).is_err());
}

fn profile() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![Just(0.0), 1e-6f64..1.0], 2..64)
        .prop_filter("needs a positive bin", |v| v.iter().any(|&x| x > 0.0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn matches_weighted_std(pdp in profile()) {
        let got = rms_delay_spread(&pdp, DTAU).unwrap().rms_spread;
        let (want, cancel) = reference_spread(&pdp, DTAU);
        prop_assert!((got - want).abs() <= 1e-9 * DTAU * pdp.len() as f64 + cancel);
    }

    #[test]
    fn scale_invariant(pdp in profile(), alpha in 1e-6f64..1e6) {
        let a = rms_delay_spread(&pdp, DTAU).unwrap();
        let scaled: Vec<f64> = pdp.iter().map(|p| p * alpha).collect();
        let b = rms_delay_spread(&scaled, DTAU).unwrap();
        prop_assert!((a.rms_spread - b.rms_spread).abs() <= 1e-9 * (a.rms_spread + DTAU));
        prop_assert!((a.mean_delay - b.mean_delay).abs() <= 1e-9 * (a.mean_delay + DTAU));
    }

    #[test]
    fn shift_invariant_without_wrap(pdp in profile(), shift in 0usize..40) {
        let mut shifted = vec![0.0; shift];
        shifted.extend_from_slice(&pdp);
        let a = rms_delay_spread(&pdp, DTAU).unwrap();
        let b = rms_delay_spread(&shifted, DTAU).unwrap();
        prop_assert!((a.rms_spread - b.rms_spread).abs() <= 1e-9 * (a.rms_spread + DTAU));
        let moved = a.mean_delay + shift as f64 * DTAU;
        prop_assert!((b.mean_delay - moved).abs() <= 1e-9 * (moved + DTAU));
    }

    #[test]
    fn trailing_zero_bins_change_nothing(pdp in profile(), tail in 1usize..20) {
        let mut padded = pdp.clone();
        padded.extend(std::iter::repeat_n(0.0, tail));
        let a = rms_delay_spread(&pdp, DTAU).unwrap();
        let b = rms_delay_spread(&padded, DTAU).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn bounded_by_half_the_delay_span(pdp in profile()) {
        let s = rms_delay_spread(&pdp, DTAU).unwrap().rms_spread;
        prop_assert!(s >= 0.0);
        prop_assert!(s <= pdp.len() as f64 * DTAU / 2.0);
    }

    #[test]
    fn cdf_is_monotone_from_zero_to_one(xs in prop::collection::vec(-1e3f64..1e3, 2..200)) {
        let c = cdf_summary(&xs).unwrap();
        prop_assert!(c.cdf.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(c.values.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(c.cdf[0] > 0.0 && *c.cdf.last().unwrap() < 1.0);
    }
}
