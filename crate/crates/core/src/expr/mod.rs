//! Scalar expressions in `t`, `y1..yn` and `v1..vn`.
//!
//! Inside an integrand `y_k` stands for the k-th component of `y^σ(t)` and
//! `v_k` for the k-th component of `y^Δ(t)`.

mod diff;
mod eval;
mod parse;

use std::fmt;

pub use eval::Point;
pub use parse::parse;

/// A variable of an integrand. Indices are zero-based (`Y(0)` prints as `y1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    T,
    Y(usize),
    V(usize),
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::T => f.write_str("t"),
            Var::Y(k) => write!(f, "y{}", k + 1),
            Var::V(k) => write!(f, "v{}", k + 1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Abs,
    /// Derivative of `abs`; `sign(0) = 0`.
    Sign,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Sign => "sign",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "sign" => Func::Sign,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
            BinOp::Pow => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

const PREC_NEG: u8 = 3;
const PREC_ATOM: u8 = 5;

#[allow(clippy::should_implement_trait)]
impl Expr {
    pub fn num(x: f64) -> Self {
        Expr::Num(x)
    }

    pub fn var(v: Var) -> Self {
        Expr::Var(v)
    }

    pub fn as_num(&self) -> Option<f64> {
        match self {
            Expr::Num(x) => Some(*x),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_num() == Some(0.0)
    }

    pub fn depends_on(&self, var: Var) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::Var(v) => *v == var,
            Expr::Neg(a) | Expr::Call(_, a) => a.depends_on(var),
            Expr::Bin(_, a, b) => a.depends_on(var) || b.depends_on(var),
        }
    }

    /// Largest one-based `y`/`v` index used, 0 if none.
    pub fn max_index(&self) -> usize {
        match self {
            Expr::Num(_) | Expr::Var(Var::T) => 0,
            Expr::Var(Var::Y(k)) | Expr::Var(Var::V(k)) => k + 1,
            Expr::Neg(a) | Expr::Call(_, a) => a.max_index(),
            Expr::Bin(_, a, b) => a.max_index().max(b.max_index()),
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Expr::Num(_) | Expr::Var(_) => 1,
            Expr::Neg(a) | Expr::Call(_, a) => 1 + a.node_count(),
            Expr::Bin(_, a, b) => 1 + a.node_count() + b.node_count(),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Num(x) if x.is_sign_negative() => PREC_NEG,
            Expr::Num(_) | Expr::Var(_) | Expr::Call(..) => PREC_ATOM,
            Expr::Neg(_) => PREC_NEG,
            Expr::Bin(op, ..) => op.precedence(),
        }
    }

    // Smart constructors with constant folding.

    pub fn add(a: Expr, b: Expr) -> Expr {
        match (a.as_num(), b.as_num()) {
            (Some(x), Some(y)) => fold_or(x + y, || Expr::Bin(BinOp::Add, a.into(), b.into())),
            (Some(0.0), _) => b,
            (_, Some(0.0)) => a,
            _ => Expr::Bin(BinOp::Add, a.into(), b.into()),
        }
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        match (a.as_num(), b.as_num()) {
            (Some(x), Some(y)) => fold_or(x - y, || Expr::Bin(BinOp::Sub, a.into(), b.into())),
            (_, Some(0.0)) => a,
            (Some(0.0), _) => Expr::neg(b),
            _ => Expr::Bin(BinOp::Sub, a.into(), b.into()),
        }
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        match (a.as_num(), b.as_num()) {
            (Some(x), Some(y)) => fold_or(x * y, || Expr::Bin(BinOp::Mul, a.into(), b.into())),
            (Some(0.0), _) | (_, Some(0.0)) => Expr::Num(0.0),
            (Some(1.0), _) => b,
            (_, Some(1.0)) => a,
            (Some(-1.0), _) => Expr::neg(b),
            (_, Some(-1.0)) => Expr::neg(a),
            _ => Expr::Bin(BinOp::Mul, a.into(), b.into()),
        }
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        match (a.as_num(), b.as_num()) {
            (Some(x), Some(y)) if y != 0.0 => {
                fold_or(x / y, || Expr::Bin(BinOp::Div, a.into(), b.into()))
            }
            (Some(0.0), _) => Expr::Num(0.0),
            (_, Some(1.0)) => a,
            _ => Expr::Bin(BinOp::Div, a.into(), b.into()),
        }
    }

    pub fn pow(a: Expr, b: Expr) -> Expr {
        match (a.as_num(), b.as_num()) {
            (_, Some(1.0)) => a,
            (_, Some(0.0)) => Expr::Num(1.0),
            (Some(x), Some(y)) if x > 0.0 || y.fract() == 0.0 => {
                fold_or(x.powf(y), || Expr::Bin(BinOp::Pow, a.into(), b.into()))
            }
            _ => Expr::Bin(BinOp::Pow, a.into(), b.into()),
        }
    }

    pub fn neg(a: Expr) -> Expr {
        match a {
            Expr::Num(x) => Expr::Num(-x),
            Expr::Neg(inner) => *inner,
            other => Expr::Neg(other.into()),
        }
    }

    pub fn call(f: Func, a: Expr) -> Expr {
        Expr::Call(f, a.into())
    }
}

fn fold_or(value: f64, otherwise: impl FnOnce() -> Expr) -> Expr {
    if value.is_finite() {
        Expr::Num(value)
    } else {
        otherwise()
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(x) => write!(f, "{x}"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Neg(a) => {
                f.write_str("-")?;
                write_child(f, a, PREC_NEG)
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
            Expr::Bin(op, a, b) => {
                let p = op.precedence();
                match op {
                    // right-associative; the exponent is parsed as a unary
                    BinOp::Pow => {
                        write_child(f, a, PREC_ATOM)?;
                        write!(f, "{}", op.symbol())?;
                        write_child(f, b, PREC_NEG)
                    }
                    BinOp::Add | BinOp::Mul => {
                        write_child(f, a, p)?;
                        write!(f, "{}", op.symbol())?;
                        write_child(f, b, p)
                    }
                    BinOp::Sub | BinOp::Div => {
                        write_child(f, a, p)?;
                        write!(f, "{}", op.symbol())?;
                        write_child(f, b, p + 1)
                    }
                }
            }
        }
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, e: &Expr, min_prec: u8) -> fmt::Result {
    if e.precedence() < min_prec {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_uses_minimal_parentheses() {
        let cases = [
            ("(y1-2)^2", "(y1-2)^2"),
            ("v1^2", "v1^2"),
            ("-v1^2", "-v1^2"),
            ("(-v1)^2", "(-v1)^2"),
            ("1-(2-t)", "1-(2-t)"),
            ("(1-2)-t", "1-2-t"),
            ("2^3^t", "2^3^t"),
            ("(2^3)^t", "(2^3)^t"),
            ("t/(y1*v1)", "t/(y1*v1)"),
            ("t*-y1", "t*-y1"),
            ("sin(t)^2+cos(t)^2", "sin(t)^2+cos(t)^2"),
        ];
        for (src, want) in cases {
            let e = parse(src, 1).unwrap();
            assert_eq!(e.to_string(), want, "{src}");
        }
    }

    #[test]
    fn folding_rules() {
        let x = Expr::var(Var::Y(0));
        assert_eq!(Expr::mul(Expr::num(0.0), x.clone()), Expr::num(0.0));
        assert_eq!(Expr::add(x.clone(), Expr::num(0.0)), x);
        assert_eq!(Expr::mul(x.clone(), Expr::num(1.0)), x);
        assert_eq!(Expr::pow(x.clone(), Expr::num(1.0)), x);
        assert_eq!(Expr::add(Expr::num(2.0), Expr::num(3.0)), Expr::num(5.0));
        assert_eq!(Expr::neg(Expr::neg(x.clone())), x);
        // no folding into a non-finite literal
        assert!(matches!(
            Expr::div(Expr::num(1.0), Expr::num(0.0)),
            Expr::Bin(BinOp::Div, ..)
        ));
    }

    #[test]
    fn max_index_and_dependence() {
        let e = parse("y2*sin(t)+v3", 3).unwrap();
        assert_eq!(e.max_index(), 3);
        assert!(e.depends_on(Var::T));
        assert!(!e.depends_on(Var::Y(0)));
    }
}
