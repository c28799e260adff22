use super::Expr;
use std::fmt::{self, Write};

const SUM: u8 = 1;
const PRODUCT: u8 = 2;
const FACTOR: u8 = 3;
const POWER: u8 = 4;
const ATOM: u8 = 5;

fn level(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => SUM,
        Expr::Mul(..) | Expr::Div(..) => PRODUCT,
        Expr::Neg(_) => FACTOR,
        Expr::Const(c) if c.is_sign_negative() => FACTOR,
        Expr::Pow(..) => POWER,
        _ => ATOM,
    }
}

pub(crate) fn write_number(f: &mut impl Write, v: f64) -> fmt::Result {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        write!(f, "{}", v as i64)
    } else {
        write!(f, "{v:?}")
    }
}

fn write_at(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    if level(e) < min {
        f.write_char('(')?;
        write_expr(f, e)?;
        f.write_char(')')
    } else {
        write_expr(f, e)
    }
}

/// Writes `e` in the surface grammar with the minimal parentheses needed for
/// the parser to rebuild the same tree.
pub(crate) fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
    match e {
        Expr::Const(c) => {
            if c.is_sign_negative() {
                f.write_char('-')?;
            }
            write_number(f, c.abs())
        }
        Expr::Var(i) => write!(f, "x{i}"),
        Expr::Neg(a) => {
            f.write_char('-')?;
            // `- atom` or `- atom ^ n` only
            write_at(f, a, POWER)
        }
        Expr::Add(a, b) => {
            write_at(f, a, SUM)?;
            f.write_str(" + ")?;
            write_at(f, b, PRODUCT)
        }
        Expr::Sub(a, b) => {
            write_at(f, a, SUM)?;
            f.write_str(" - ")?;
            write_at(f, b, PRODUCT)
        }
        Expr::Mul(a, b) => {
            write_at(f, a, PRODUCT)?;
            f.write_str(" * ")?;
            write_at(f, b, FACTOR)
        }
        Expr::Div(a, b) => {
            write_at(f, a, PRODUCT)?;
            f.write_str(" / ")?;
            write_at(f, b, FACTOR)
        }
        Expr::Pow(a, n) => {
            write_at(f, a, ATOM)?;
            f.write_char('^')?;
            if n.is_sign_negative() {
                f.write_char('-')?;
            }
            write_number(f, n.abs())
        }
        Expr::Call(func, a) => {
            write!(f, "{}(", func.name())?;
            write_expr(f, a)?;
            f.write_char(')')
        }
        Expr::IfPos(c, a, b) => {
            f.write_str("ifpos(")?;
            write_expr(f, c)?;
            f.write_str(", ")?;
            write_expr(f, a)?;
            f.write_str(", ")?;
            write_expr(f, b)?;
            f.write_char(')')
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::expr::{parse, Expr};

    #[test]
    fn prints_minimal_parentheses() {
        for src in [
            "x1^2",
            "-x1",
            "-x2^2",
            "x1 - (x2 - 3)",
            "(x1 + x2) * x1",
            "x1 / (x2 * 2)",
            "(-x1)^3",
            "x1 * -x2",
            "ifpos(x1 - 1, exp(-1 / x1), 0)",
            "sqrt(x1^2 + 0.5)",
        ] {
            let e = parse(src, 2).unwrap();
            assert_eq!(e.to_string(), src);
        }
    }

    #[test]
    fn negative_constants_survive() {
        let e = Expr::mul(Expr::Const(-2.0), Expr::pow(Expr::Const(-1.5), 2.0));
        let back = parse(&e.to_string(), 1).unwrap();
        assert_eq!(back.to_string(), e.to_string());
    }
}
