use patchfront::eigen::{critical_length, lambda1_analytic};
use patchfront::speed::{
    decay_rate, predict_single_transition, predict_two_interface, predict_with_lambda1, Regime,
};
use patchfront::GrowthParams;
use proptest::prelude::*;

fn rates() -> impl Strategy<Value = (f64, f64, f64)> {
    (0.5f64..5.0, 0.5f64..5.0, 0.5f64..20.0).prop_map(|(r1, r3, gap)| (r1, r1.max(r3) + gap, r3))
}

#[test]
fn figure_parameter_sets() {
    let a = |c| predict_with_lambda1(1.0, 1.0, -4.0, c).unwrap();
    assert_eq!((a(1.0).regime, a(1.0).c_star), (Regime::Slow, 2.0));
    assert_eq!((a(3.0).regime, a(3.0).c_star), (Regime::Locked, 3.0));
    assert_eq!(a(5.0).regime, Regime::NonlocallyPulled);
    // F(5) = (5 - 2 sqrt 3)/2 + 2/(5 - 2 sqrt 3)
    let z = 5.0 - 2.0 * 3f64.sqrt();
    assert!((a(5.0).c_star - (0.5 * z + 2.0 / z)).abs() < 1e-14);
    assert!((a(5.0).c_star - 2.0701187).abs() < 1e-7);
    assert_eq!((a(6.0).regime, a(6.0).c_star), (Regime::Fast, 2.0));
    let b = predict_with_lambda1(4.0, 1.0, -8.0, 5.0).unwrap();
    assert_eq!((b.regime, b.c_star), (Regime::Locked, 5.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn short_patch_reduces_to_single_transition((r1, r2, r3) in rates(), frac in 0.0f64..1.0) {
        let l = (frac * critical_length(r1, r2, r3).unwrap()).max(1e-6);
        let p = GrowthParams::new(r1, r2, r3, l).unwrap();
        for k in 0..100 {
            let c = 0.05 + 0.1 * k as f64;
            let two = predict_two_interface(&p, c).unwrap();
            let one = predict_single_transition(r1, r3, c).unwrap();
            prop_assert!((two.c_star - one.c_star).abs() < 1e-10, "cA = {c}: {two:?} vs {one:?}");
        }
    }

    #[test]
    fn speed_is_continuous_at_thresholds((r1, r2, r3) in rates(), l in 0.05f64..5.0) {
        let p = GrowthParams::new(r1, r2, r3, l).unwrap();
        let lambda1 = lambda1_analytic(&p).unwrap().lambda1;
        let t = predict_with_lambda1(r1, r3, lambda1, 1.0).unwrap().thresholds;
        for &c in &t {
            let below = predict_with_lambda1(r1, r3, lambda1, c * (1.0 - 1e-10)).unwrap().c_star;
            let above = predict_with_lambda1(r1, r3, lambda1, c * (1.0 + 1e-10)).unwrap().c_star;
            prop_assert!((below - above).abs() < 1e-6, "threshold {c}: {below} vs {above}");
        }
    }

    #[test]
    fn speed_bounds((r1, r2, r3) in rates(), l in 0.05f64..5.0, c in 0.01f64..15.0) {
        let p = GrowthParams::new(r1, r2, r3, l).unwrap();
        let pred = predict_two_interface(&p, c).unwrap();
        // never below either free speed on the side the front runs into,
        // never above the patch-locked speed 2 sqrt(-lambda1)
        prop_assert!(pred.c_star >= 2.0 * r1.sqrt().min(r3.sqrt()) - 1e-12);
        prop_assert!(pred.c_star <= pred.thresholds[1].max(pred.thresholds[0]) + 1e-12);
        if pred.regime == Regime::NonlocallyPulled {
            // F(cA) lies between the far-field speed and the patch speed
            prop_assert!(pred.c_star > 2.0 * r1.sqrt() && pred.c_star < c);
            prop_assert!(decay_rate(r1, pred.c_star).is_ok());
        }
    }
}
