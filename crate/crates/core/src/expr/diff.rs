use super::{Expr, Func};

// Constructors folding the trivial identities that differentiation produces
// in bulk (0 * e, 1 * e, e + 0). Anything beyond that is left alone.

fn folded(v: f64) -> Option<Expr> {
    v.is_finite().then_some(Expr::Const(v))
}

fn neg(a: Expr) -> Expr {
    match a {
        Expr::Const(c) => Expr::Const(-c),
        Expr::Neg(inner) => *inner,
        a => Expr::neg(a),
    }
}

fn add(a: Expr, b: Expr) -> Expr {
    match (a.is_const(), b.is_const()) {
        (Some(x), _) if x == 0.0 => b,
        (_, Some(y)) if y == 0.0 => a,
        (Some(x), Some(y)) => folded(x + y).unwrap_or_else(|| Expr::add(a, b)),
        _ => Expr::add(a, b),
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    match (a.is_const(), b.is_const()) {
        (_, Some(y)) if y == 0.0 => a,
        (Some(x), _) if x == 0.0 => neg(b),
        (Some(x), Some(y)) => folded(x - y).unwrap_or_else(|| Expr::sub(a, b)),
        _ => Expr::sub(a, b),
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    match (a.is_const(), b.is_const()) {
        (Some(x), _) if x == 0.0 => Expr::Const(0.0),
        (_, Some(y)) if y == 0.0 => Expr::Const(0.0),
        (Some(x), _) if x == 1.0 => b,
        (_, Some(y)) if y == 1.0 => a,
        (Some(x), _) if x == -1.0 => neg(b),
        (_, Some(y)) if y == -1.0 => neg(a),
        (Some(x), Some(y)) => folded(x * y).unwrap_or_else(|| Expr::mul(a, b)),
        _ => Expr::mul(a, b),
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    match (a.is_const(), b.is_const()) {
        (Some(x), _) if x == 0.0 => Expr::Const(0.0),
        (_, Some(y)) if y == 1.0 => a,
        _ => Expr::div(a, b),
    }
}

fn pow(a: Expr, n: f64) -> Expr {
    if n == 1.0 {
        a
    } else if n == 0.0 {
        Expr::Const(1.0)
    } else {
        Expr::pow(a, n)
    }
}

impl Expr {
    /// Symbolic partial derivative with respect to `x{i}`.
    ///
    /// `IfPos` is differentiated branch-wise, which is exact everywhere except
    /// on the switching surface `cond = 0` itself.
    pub fn differentiate(&self, i: usize) -> Expr {
        match self {
            Expr::Const(_) => Expr::Const(0.0),
            Expr::Var(j) => Expr::Const(if *j == i { 1.0 } else { 0.0 }),
            Expr::Neg(a) => neg(a.differentiate(i)),
            Expr::Add(a, b) => add(a.differentiate(i), b.differentiate(i)),
            Expr::Sub(a, b) => sub(a.differentiate(i), b.differentiate(i)),
            Expr::Mul(a, b) => add(
                mul(a.differentiate(i), (**b).clone()),
                mul((**a).clone(), b.differentiate(i)),
            ),
            Expr::Div(a, b) => {
                let da = a.differentiate(i);
                let db = b.differentiate(i);
                if db.is_const() == Some(0.0) {
                    return div(da, (**b).clone());
                }
                div(
                    sub(mul(da, (**b).clone()), mul((**a).clone(), db)),
                    pow((**b).clone(), 2.0),
                )
            }
            Expr::Pow(a, n) => mul(
                mul(Expr::Const(*n), pow((**a).clone(), n - 1.0)),
                a.differentiate(i),
            ),
            Expr::Call(f, a) => {
                let da = a.differentiate(i);
                if da.is_const() == Some(0.0) {
                    return Expr::Const(0.0);
                }
                let arg = (**a).clone();
                let outer = match f {
                    Func::Sin => Expr::call(Func::Cos, arg),
                    Func::Cos => neg(Expr::call(Func::Sin, arg)),
                    Func::Exp => Expr::call(Func::Exp, arg),
                    Func::Ln => return div(da, arg),
                    Func::Sqrt => {
                        return div(da, mul(Expr::Const(2.0), Expr::call(Func::Sqrt, arg)))
                    }
                    Func::Tanh => sub(
                        Expr::Const(1.0),
                        Expr::pow(Expr::call(Func::Tanh, arg), 2.0),
                    ),
                };
                mul(outer, da)
            }
            Expr::IfPos(c, a, b) => {
                let da = a.differentiate(i);
                let db = b.differentiate(i);
                if da.is_const() == Some(0.0) && db.is_const() == Some(0.0) {
                    return Expr::Const(0.0);
                }
                Expr::if_pos((**c).clone(), da, db)
            }
        }
    }
}

/// `[d e / d x1, ..., d e / d x{dim}]`.
pub fn gradient(e: &Expr, dim: usize) -> Vec<Expr> {
    (1..=dim).map(|i| e.differentiate(i)).collect()
}

/// Lie derivative of `phi` along the vector field `field`:
/// `sum_j (d phi / d xj) * field[j]`.
pub fn lie_derivative(phi: &Expr, field: &[Expr]) -> Expr {
    field
        .iter()
        .enumerate()
        .fold(Expr::Const(0.0), |acc, (j, fj)| {
            add(acc, mul(phi.differentiate(j + 1), fj.clone()))
        })
}
