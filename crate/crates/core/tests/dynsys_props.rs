mod common;

use levelta_core::dynsys::{
    approximate_manifold, find_equilibria, flow, flow_until_level, Branch, LevelCrossing,
};
use levelta_core::expr::parse;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rk4_matches_the_closed_form(x1 in -4.0..4.0f64, x2 in -0.02..0.02f64, t in 0.0..5.0f64) {
        let m = common::saddle();
        let s = flow(&m.system, &[x1, x2], t, 1e-3).unwrap();
        prop_assume!(s.exit_time.is_none());
        for (tt, x) in s.times.iter().zip(&s.states) {
            prop_assert!((x[0] - x1 * (-tt).exp()).abs() < 1e-8);
            prop_assert!((x[1] - x2 * tt.exp()).abs() < 1e-8);
        }
    }

    #[test]
    fn flow_is_bitwise_deterministic(x1 in -4.0..4.0f64, x2 in -4.0..4.0f64) {
        let m = common::saddle();
        let a = flow(&m.system, &[x1, x2], 1.0, 1e-3).unwrap();
        let b = flow(&m.system, &[x1, x2], 1.0, 1e-3).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn crossing_time_is_monotone_in_target(x1 in 3.0..4.0f64, a in 0.1..8.0f64, b in 0.1..8.0f64) {
        let m = common::saddle();
        let phi = parse("x1^2", 2).unwrap();
        let time = |target: f64| match flow_until_level(&m.system, &[x1, 0.0], &phi, target, 50.0, 1e-3).unwrap() {
            LevelCrossing::Crossed { time, .. } => time,
            other => panic!("{other:?}"),
        };
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assume!(hi - lo > 1e-6);
        let (t_lo, t_hi) = (time(lo), time(hi));
        prop_assert!(t_lo >= t_hi);
        prop_assert!((t_lo - (x1 * x1 / lo).ln() / 2.0).abs() < 1e-8);
    }
}

#[test]
fn equilibria_have_tiny_residuals() {
    for (f1, f2) in [
        ("-x1", "x2"),
        ("x2", "-sin(x1) - 0.5 * x2"),
        ("x1 - x1^3", "-x2"),
    ] {
        let src = common::SADDLE
            .replace("f1 = -x1", &format!("f1 = {f1}"))
            .replace("f2 = x2", &format!("f2 = {f2}"));
        let m = levelta_core::io::parse_model(&src).unwrap();
        let eqs = find_equilibria(&m.system, 9).unwrap();
        assert!(!eqs.is_empty());
        for e in eqs {
            let f = m.system.field_at(&e.point).unwrap();
            assert!(
                f.iter().map(|v| v * v).sum::<f64>().sqrt() < 1e-10,
                "{f1}, {f2}: {:?}",
                e.point
            );
        }
    }
}

#[test]
fn saddle_manifolds_lie_on_the_axes() {
    let m = common::saddle();
    let eq = find_equilibria(&m.system, 9).unwrap().remove(0);
    let u = approximate_manifold(&m.system, &eq, Branch::Unstable, 1e-4, 50.0, 1e-3).unwrap();
    let s = approximate_manifold(&m.system, &eq, Branch::Stable, 1e-4, 50.0, 1e-3).unwrap();
    let max_abs = |ms: &[levelta_core::dynsys::ManifoldApprox], axis: usize| {
        ms.iter()
            .flat_map(|m| &m.points)
            .map(|p| p[axis].abs())
            .fold(0.0, f64::max)
    };
    assert!(max_abs(&u, 0) < 1e-6);
    assert!(max_abs(&s, 1) < 1e-6);
    // both branches reach the domain boundary
    assert!(max_abs(&u, 1) > 3.9 && max_abs(&s, 0) > 3.9);
}
