use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use skewdim::{
    baker_map, birkhoff_on_orbit, encode_point, gamma_c, periodic_orbit_logg_average, pressure_collocation,
    pressure_transfer, pullback_value, reconstruct_v, sample_with_backward_orbit, BakerPoint, Collocation, Direction,
    FibreParams, Forcing, PotentialWindow, SymbolWord,
};

fn interior() -> impl Strategy<Value = f64> {
    0.0f64..0.999
}

fn partition() -> impl Strategy<Value = f64> {
    0.05f64..0.95
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn baker_forward_then_inverse_is_identity(u in interior(), v in interior(), a in partition()) {
        let p = BakerPoint::new(u, v).unwrap();
        let back = baker_map(baker_map(p, a, Direction::Forward), a, Direction::Inverse);
        prop_assert!((back.u - u).abs() <= 1e-15 && (back.v - v).abs() <= 1e-15, "{p:?} -> {back:?}");
    }

    #[test]
    fn encoding_is_shift_equivariant(u in interior(), v in interior(), a in partition()) {
        let p = BakerPoint::new(u, v).unwrap();
        let here = encode_point(p, a, 8, 9).unwrap();
        let there = encode_point(baker_map(p, a, Direction::Forward), a, 9, 8).unwrap();
        prop_assert_eq!(there.future.symbols(), &here.future.symbols()[1..]);
        prop_assert_eq!(there.past.symbols()[0], here.future.symbols()[0]);
        prop_assert_eq!(&there.past.symbols()[1..], here.past.symbols());
    }

    #[test]
    fn reconstruction_is_within_the_cylinder_width(
        u in interior(), v in 0.0f64..=1.0, a in partition(), m in 1usize..30, anchor in 0.0f64..=1.0,
    ) {
        let p = BakerPoint::new(u, v).unwrap();
        let past = encode_point(p, a, m, 0).unwrap().past;
        let bound = a.max(1.0 - a).powi(m as i32);
        let err = (reconstruct_v(&past, a, anchor).unwrap() - v).abs();
        prop_assert!(err <= bound + 1e-14, "err {err} bound {bound}");
    }

    #[test]
    fn periodic_averages_are_rotation_invariant(bits in any::<u64>(), len in 1usize..16, k in 0usize..16, a in partition()) {
        let word = SymbolWord::from_bits(bits, len);
        let forcing = Forcing::cosine(1.001).unwrap();
        let x = periodic_orbit_logg_average(&word, a, &forcing).unwrap();
        let y = periodic_orbit_logg_average(&word.rotated(k % len), a, &forcing).unwrap();
        prop_assert!((x - y).abs() <= 1e-12);
    }

    #[test]
    fn pullbacks_decrease_in_n_and_t(seed in any::<u64>(), t in -1.5f64..0.5, dt in 0.0f64..0.5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (_, orbit) = sample_with_backward_orbit(&mut rng, 0.45, 400).unwrap();
        let low = FibreParams::cosine(0.45, t, 1.001).unwrap();
        let high = FibreParams::cosine(0.45, t + dt, 1.001).unwrap();
        let mut last = f64::INFINITY;
        for n in 1..=400 {
            let v = pullback_value(&orbit, &low, n);
            prop_assert!(v <= last, "n = {n}: {v} > {last}");
            prop_assert!(pullback_value(&orbit, &high, n) <= v);
            last = v;
        }
    }

    #[test]
    fn pressure_is_convex_in_q(delta in 0.0f64..2.0, t in -1.0f64..0.5, q in -2.0f64..2.0) {
        let win = PotentialWindow::new(6, 0.45, Forcing::cosine(1.001).unwrap()).unwrap();
        let h = 0.05;
        let v = |q: f64| pressure_transfer(q, delta, t, &win).unwrap().value;
        prop_assert!(v(q - h) - 2.0 * v(q) + v(q + h) >= -1e-10);
    }

    #[test]
    fn window_derivatives_match_differences(q in -1.5f64..1.5, delta in 0.0f64..2.0, t in -1.0f64..0.5) {
        let win = PotentialWindow::new(6, 0.45, Forcing::cosine(1.001).unwrap()).unwrap();
        let h = 1e-5;
        let v = |q: f64, d: f64| pressure_transfer(q, d, t, &win).unwrap().value;
        let r = pressure_transfer(q, delta, t, &win).unwrap();
        prop_assert!((r.dq_dq - (v(q + h, delta) - v(q - h, delta)) / (2.0 * h)).abs() <= 1e-7);
        prop_assert!((r.dq_ddelta - (v(q, delta + h) - v(q, delta - h)) / (2.0 * h)).abs() <= 1e-7);
        let (lo, hi) = (0.45f64.ln(), 0.55f64.ln());
        prop_assert!(r.dq_ddelta >= lo - 1e-12 && r.dq_ddelta <= hi + 1e-12);
    }

    #[test]
    fn bowen_identity_for_every_window(m in 1usize..12, delta in 0.0f64..3.0, t in -2.0f64..2.0, a in partition()) {
        let win = PotentialWindow::new(m, a, Forcing::cosine(1.001).unwrap()).unwrap();
        let expected = (a.powf(delta) + (1.0 - a).powf(delta)).ln();
        prop_assert!((pressure_transfer(0.0, delta, t, &win).unwrap().value - expected).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn collocation_derivatives_match_differences(q in -1.5f64..1.5, delta in 0.0f64..2.0, t in -1.0f64..0.5) {
        let grid = Collocation::new(0.45, Forcing::cosine(1.001).unwrap(), 24).unwrap();
        let h = 1e-5;
        let v = |q: f64, d: f64| pressure_collocation(q, d, t, &grid).unwrap().value;
        let r = pressure_collocation(q, delta, t, &grid).unwrap();
        prop_assert!((r.dq_dq - (v(q + h, delta) - v(q - h, delta)) / (2.0 * h)).abs() <= 1e-7);
        prop_assert!((r.dq_ddelta - (v(q, delta + h) - v(q, delta - h)) / (2.0 * h)).abs() <= 1e-7);
    }
}

#[test]
fn backward_averages_of_typical_points_approach_gamma_c() {
    let forcing = Forcing::cosine(1.001).unwrap();
    let gc = gamma_c(0.45, &forcing).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let close = (0..100)
        .filter(|_| {
            let (_, orbit) = sample_with_backward_orbit(&mut rng, 0.45, 10_000).unwrap();
            (birkhoff_on_orbit(&orbit, &forcing) - gc).abs() <= 0.05
        })
        .count();
    assert!(close >= 90, "{close}/100");
}
