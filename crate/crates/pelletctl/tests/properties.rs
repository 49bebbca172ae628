//! Randomized invariants of the flow propagator and the design bounds.

use pelletctl::flow::{flow_state, flow_x, flow_xi, zero_crossing_time};
use pelletctl::params::{SystemParams, ValidatedParams};
use pelletctl::HybridState;
use proptest::prelude::*;

fn paper() -> ValidatedParams {
    SystemParams::new(0.1, 7e19, 1e19, 0.01, 1.0)
        .validate()
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1024))]

    #[test]
    fn flow_x_semigroup(x0 in -7e19..7e19f64, a in 0.0..0.05f64, b in 0.0..0.05f64) {
        let p = paper();
        let two = flow_x(flow_x(x0, a, &p).unwrap(), b, &p).unwrap();
        let one = flow_x(x0, a + b, &p).unwrap();
        prop_assert!((two - one).abs() <= 1e-12 * p.r);
    }

    #[test]
    fn flow_x_monotone_in_x0(x0 in -7e19..7e19f64, y0 in -7e19..7e19f64, dt in 0.0..0.1f64) {
        let p = paper();
        let (lo, hi) = (x0.min(y0), x0.max(y0));
        prop_assert!(flow_x(lo, dt, &p).unwrap() <= flow_x(hi, dt, &p).unwrap());
    }

    #[test]
    fn flow_x_stays_below_r(x0 in -7e19..7e19f64, dt in 0.0..1.0f64) {
        let p = paper();
        let x = flow_x(x0, dt, &p).unwrap();
        prop_assert!(x <= p.r);
        // contraction towards the equilibrium
        prop_assert!((p.r - x) <= (p.r - x0) * (1.0 + 1e-12));
    }

    #[test]
    fn xi_additive_across_split(x0 in -7e19..7e19f64, a in 0.0..0.05f64, b in 0.0..0.05f64) {
        let p = paper();
        let x_mid = flow_x(x0, a, &p).unwrap();
        let split = flow_xi(x_mid, flow_xi(x0, 0.0, a, &p).unwrap(), b, &p).unwrap();
        let whole = flow_xi(x0, 0.0, a + b, &p).unwrap();
        prop_assert!((split - whole).abs() <= 1e-10 * p.r * (a + b).max(1e-6));
    }

    #[test]
    fn xi_nondecreasing_and_nonnegative(x0 in -7e19..7e19f64, a in 0.0..0.05f64, b in 0.0..0.05f64) {
        let p = paper();
        let xi_a = flow_xi(x0, 0.0, a, &p).unwrap();
        let xi_ab = flow_xi(x0, 0.0, a + b, &p).unwrap();
        prop_assert!(xi_a >= 0.0);
        prop_assert!(xi_ab >= xi_a);
    }

    #[test]
    fn zero_crossing_matches_flow(x0 in -7e19..-1e15f64) {
        let p = paper();
        let t_star = zero_crossing_time(x0, &p).unwrap();
        let x_at = flow_x(x0, t_star, &p).unwrap();
        prop_assert!(x_at.abs() <= 1e-9 * p.r);
    }

    #[test]
    fn flow_state_consistent_with_components(x0 in -7e19..7e19f64, dt in 0.0..0.01f64) {
        let p = paper();
        let q = HybridState::new(x0, 1.0, 0.0);
        let out = flow_state(&q, dt, &p).unwrap();
        prop_assert_eq!(out.x, flow_x(x0, dt, &p).unwrap());
        prop_assert_eq!(out.xi, flow_xi(x0, 1.0, dt, &p).unwrap());
    }

    #[test]
    fn tc_bound_monotone_in_alpha(a1 in 0.05f64..0.5, a2 in 0.05f64..0.5) {
        // larger pellets permit slower actuators
        let r = 7e19;
        let bound = |frac: f64| {
            SystemParams::new(0.1, r, r * frac, 1e-3, 0.0)
                .validate()
                .unwrap()
                .tc_upper_bound()
        };
        let (lo, hi) = (a1.min(a2), a1.max(a2));
        prop_assert!(bound(lo) <= bound(hi) * (1.0 + 1e-12));
    }

    #[test]
    fn delta_bound_decreasing_in_t_c(u1 in 0.01f64..0.99, u2 in 0.01f64..0.99) {
        // a faster actuator leaves more threshold headroom
        let base = SystemParams::new(0.1, 7e19, 1e19, 1e-3, 0.0).validate().unwrap();
        let t_max = base.tc_upper_bound();
        let bound = |u: f64| {
            SystemParams::new(0.1, 7e19, 1e19, u * t_max, 0.0)
                .validate()
                .unwrap()
                .delta_upper_bound()
                .unwrap()
        };
        let (lo, hi) = (u1.min(u2), u1.max(u2));
        prop_assert!(bound(lo) >= bound(hi) * (1.0 - 1e-12) - 1e-6);
    }
}
