use levelta_core::expr::{lie_derivative, parse, Expr, Func};
use proptest::prelude::*;

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (-3.0..3.0f64).prop_map(Expr::constant),
        (1..=2usize).prop_map(Expr::var),
    ]
}

/// Smooth on all of R^2: divisions and logs only see `1 + e^2`.
fn smooth() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(4, 24, 2, |inner| {
        let safe = |e: Expr| Expr::add(Expr::constant(1.0), Expr::pow(e, 2.0));
        prop_oneof![
            inner.clone().prop_map(Expr::neg),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::add(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::sub(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::mul(a, b)),
            (inner.clone(), inner.clone()).prop_map(move |(a, b)| Expr::div(a, safe(b))),
            (inner.clone(), 2..=3i32).prop_map(|(a, k)| Expr::pow(a, k as f64)),
            inner.clone().prop_map(|a| Expr::call(Func::Sin, a)),
            inner.clone().prop_map(|a| Expr::call(Func::Cos, a)),
            inner.clone().prop_map(|a| Expr::call(Func::Tanh, a)),
            inner
                .clone()
                .prop_map(|a| Expr::call(Func::Exp, Expr::call(Func::Tanh, a))),
            inner
                .clone()
                .prop_map(move |a| Expr::call(Func::Ln, safe(a))),
            inner.prop_map(move |a| Expr::call(Func::Sqrt, safe(a))),
        ]
    })
}

fn point() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.5..1.5f64, 2)
}

fn same(a: f64, b: f64) -> bool {
    a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn print_parse_round_trip(e in smooth(), pts in prop::collection::vec(point(), 100)) {
        let text = e.to_string();
        let back = parse(&text, 2).unwrap();
        for x in &pts {
            let (a, b) = (e.eval(x), back.eval(x));
            match (a, b) {
                (Ok(a), Ok(b)) => prop_assert!(same(a, b), "{text}: {a} vs {b}"),
                (a, b) => prop_assert_eq!(a.is_err(), b.is_err()),
            }
        }
    }

    #[test]
    fn derivative_matches_central_difference(e in smooth(), x in point(), i in 1..=2usize) {
        let d = e.differentiate(i).eval(&x).unwrap();
        let h = 1e-6;
        let (mut lo, mut hi) = (x.clone(), x.clone());
        lo[i - 1] -= h;
        hi[i - 1] += h;
        let fd = (e.eval(&hi).unwrap() - e.eval(&lo).unwrap()) / (2.0 * h);
        let scale = 1.0f64.max(d.abs()).max(e.eval(&x).unwrap().abs());
        prop_assume!(d.is_finite() && scale < 1e4);
        prop_assert!((d - fd).abs() < 1e-5 * scale, "{e}: d = {d}, fd = {fd}");
    }

    #[test]
    fn lie_derivative_is_gradient_dot_field(
        phi in smooth(), f1 in smooth(), f2 in smooth(), x in point()
    ) {
        let psi = lie_derivative(&phi, &[f1.clone(), f2.clone()]).eval(&x).unwrap();
        // fourth-order central differences for the gradient
        let h = 1e-3;
        let grad: Vec<f64> = (0..2).map(|j| {
            let at = |s: f64| {
                let mut y = x.clone();
                y[j] += s * h;
                phi.eval(&y).unwrap()
            };
            (8.0 * (at(1.0) - at(-1.0)) - (at(2.0) - at(-2.0))) / (12.0 * h)
        }).collect();
        let f = [f1.eval(&x).unwrap(), f2.eval(&x).unwrap()];
        let num = grad[0] * f[0] + grad[1] * f[1];
        let symbolic_grad = [phi.differentiate(1).eval(&x).unwrap(), phi.differentiate(2).eval(&x).unwrap()];
        let exact = symbolic_grad[0] * f[0] + symbolic_grad[1] * f[1];
        let scale = 1.0f64.max(f[0].abs() + f[1].abs()) * 1.0f64.max(phi.eval(&x).unwrap().abs());
        prop_assume!(scale < 1e3);
        prop_assert!((psi - exact).abs() < 1e-8 * scale, "{phi}: {psi} vs {exact}");
        prop_assert!((psi - num).abs() < 1e-8 * scale, "{phi}: {psi} vs fd {num}");
    }
}

#[test]
fn saddle_lie_derivatives_at_random_points() {
    use rand::{Rng, SeedableRng};
    let f = [parse("-x1", 2).unwrap(), parse("x2", 2).unwrap()];
    let psi1 = lie_derivative(&parse("x1^2", 2).unwrap(), &f);
    let psi2 = lie_derivative(&parse("-x2^2", 2).unwrap(), &f);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let x = [rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0)];
        assert!((psi1.eval(&x).unwrap() + 2.0 * x[0] * x[0]).abs() < 1e-12);
        assert!((psi2.eval(&x).unwrap() + 2.0 * x[1] * x[1]).abs() < 1e-12);
    }
}
