use super::{Expr, Func};
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum EvalError {
    #[error("variable x{index} missing from a point of dimension {dim}")]
    MissingVariable { index: usize, dim: usize },
    #[error("{op} undefined at argument {arg} in `{subexpr}`")]
    Domain {
        op: &'static str,
        arg: f64,
        subexpr: String,
    },
}

fn domain(op: &'static str, arg: f64, e: &Expr) -> EvalError {
    EvalError::Domain {
        op,
        arg,
        subexpr: e.to_string(),
    }
}

impl Expr {
    /// Evaluates at `x`, where `x[i - 1]` is the value of `xi`.
    pub fn eval(&self, x: &[f64]) -> Result<f64, EvalError> {
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Var(i) => *x.get(i.wrapping_sub(1)).ok_or(EvalError::MissingVariable {
                index: *i,
                dim: x.len(),
            })?,
            Expr::Neg(a) => -a.eval(x)?,
            Expr::Add(a, b) => a.eval(x)? + b.eval(x)?,
            Expr::Sub(a, b) => a.eval(x)? - b.eval(x)?,
            Expr::Mul(a, b) => a.eval(x)? * b.eval(x)?,
            Expr::Div(a, b) => {
                let num = a.eval(x)?;
                let den = b.eval(x)?;
                if den == 0.0 {
                    return Err(domain("division", den, self));
                }
                num / den
            }
            Expr::Pow(a, n) => {
                let base = a.eval(x)?;
                if base == 0.0 && *n < 0.0 {
                    return Err(domain("power", base, self));
                }
                if base < 0.0 && n.fract() != 0.0 {
                    return Err(domain("power", base, self));
                }
                if n.fract() == 0.0 && n.abs() <= i32::MAX as f64 {
                    base.powi(*n as i32)
                } else {
                    base.powf(*n)
                }
            }
            Expr::Call(f, a) => {
                let v = a.eval(x)?;
                match f {
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Exp => v.exp(),
                    Func::Tanh => v.tanh(),
                    Func::Ln => {
                        if v <= 0.0 {
                            return Err(domain("ln", v, self));
                        }
                        v.ln()
                    }
                    Func::Sqrt => {
                        if v < 0.0 {
                            return Err(domain("sqrt", v, self));
                        }
                        v.sqrt()
                    }
                }
            }
            Expr::IfPos(c, a, b) => {
                if c.eval(x)? > 0.0 {
                    a.eval(x)?
                } else {
                    b.eval(x)?
                }
            }
        })
    }
}
