use super::{BinOp, Expr, Func, Var};
use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Scalar};

/// Arguments of an integrand: `t`, `y^σ(t)` and `y^Δ(t)`.
#[derive(Debug, Clone, Copy)]
pub struct Point<'a, T> {
    pub t: T,
    pub y: &'a [T],
    pub v: &'a [T],
}

impl<'a, T: Scalar> Point<'a, T> {
    pub fn new(t: T, y: &'a [T], v: &'a [T]) -> Self {
        Point { t, y, v }
    }
}

impl Expr {
    pub fn eval<T: Scalar>(&self, at: &Point<'_, T>) -> Result<T> {
        let fail = |message: &str| Error::Evaluation {
            t: to_f64(at.t),
            message: message.to_string(),
        };
        let value = match self {
            Expr::Num(x) => lit(*x),
            Expr::Var(Var::T) => at.t,
            Expr::Var(Var::Y(k)) => *at.y.get(*k).ok_or_else(|| fail("y index out of range"))?,
            Expr::Var(Var::V(k)) => *at.v.get(*k).ok_or_else(|| fail("v index out of range"))?,
            Expr::Neg(a) => -a.eval(at)?,
            Expr::Bin(op, a, b) => {
                let x = a.eval(at)?;
                match op {
                    BinOp::Add => x + b.eval(at)?,
                    BinOp::Sub => x - b.eval(at)?,
                    BinOp::Mul => x * b.eval(at)?,
                    BinOp::Div => {
                        let y = b.eval(at)?;
                        if y == T::zero() {
                            return Err(fail("division by zero"));
                        }
                        x / y
                    }
                    BinOp::Pow => power(x, b.eval(at)?).map_err(&fail)?,
                }
            }
            Expr::Call(func, a) => {
                let x = a.eval(at)?;
                match func {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Exp => x.exp(),
                    Func::Log => {
                        if x <= T::zero() {
                            return Err(fail("log of a non-positive number"));
                        }
                        x.ln()
                    }
                    Func::Sqrt => {
                        if x < T::zero() {
                            return Err(fail("sqrt of a negative number"));
                        }
                        x.sqrt()
                    }
                    Func::Abs => x.abs(),
                    Func::Sign => {
                        if x > T::zero() {
                            T::one()
                        } else if x < T::zero() {
                            -T::one()
                        } else {
                            T::zero()
                        }
                    }
                }
            }
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(fail("non-finite result"))
        }
    }
}

/// Integer exponents accept any base; others need a positive base.
fn power<T: Scalar>(base: T, exp: T) -> std::result::Result<T, &'static str> {
    if exp.fract() == T::zero() && exp.abs() <= lit(1024.0) {
        if base == T::zero() && exp < T::zero() {
            return Err("division by zero");
        }
        return Ok(base.powi(exp.to_i32().unwrap()));
    }
    if base > T::zero() {
        Ok(base.powf(exp))
    } else if base == T::zero() && exp > T::zero() {
        Ok(T::zero())
    } else {
        Err("non-integer power of a non-positive base")
    }
}
