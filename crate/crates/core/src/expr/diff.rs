use super::{BinOp, Expr, Func, Var};

impl Expr {
    /// Symbolic partial derivative with respect to `var`.
    ///
    /// `abs` differentiates to `sign`, which is 0 at 0.
    pub fn diff(&self, var: Var) -> Expr {
        if !self.depends_on(var) {
            return Expr::Num(0.0);
        }
        match self {
            Expr::Num(_) => Expr::Num(0.0),
            Expr::Var(v) => Expr::Num(if *v == var { 1.0 } else { 0.0 }),
            Expr::Neg(a) => Expr::neg(a.diff(var)),
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.as_ref(), b.as_ref());
                match op {
                    BinOp::Add => Expr::add(a.diff(var), b.diff(var)),
                    BinOp::Sub => Expr::sub(a.diff(var), b.diff(var)),
                    BinOp::Mul => Expr::add(
                        Expr::mul(a.diff(var), b.clone()),
                        Expr::mul(a.clone(), b.diff(var)),
                    ),
                    BinOp::Div => Expr::div(
                        Expr::sub(
                            Expr::mul(a.diff(var), b.clone()),
                            Expr::mul(a.clone(), b.diff(var)),
                        ),
                        Expr::pow(b.clone(), Expr::Num(2.0)),
                    ),
                    BinOp::Pow => diff_pow(a, b, var),
                }
            }
            Expr::Call(func, a) => {
                let inner = a.diff(var);
                let a = a.as_ref().clone();
                let outer = match func {
                    Func::Sin => Expr::call(Func::Cos, a),
                    Func::Cos => Expr::neg(Expr::call(Func::Sin, a)),
                    Func::Exp => Expr::call(Func::Exp, a),
                    Func::Log => Expr::div(Expr::Num(1.0), a),
                    Func::Sqrt => Expr::div(
                        Expr::Num(1.0),
                        Expr::mul(Expr::Num(2.0), Expr::call(Func::Sqrt, a)),
                    ),
                    Func::Abs => Expr::call(Func::Sign, a),
                    Func::Sign => Expr::Num(0.0),
                };
                Expr::mul(outer, inner)
            }
        }
    }
}

fn diff_pow(base: &Expr, exp: &Expr, var: Var) -> Expr {
    let d_base = base.diff(var);
    if !exp.depends_on(var) {
        // c * u^(c-1) * u'
        let lowered = Expr::pow(base.clone(), Expr::sub(exp.clone(), Expr::Num(1.0)));
        return Expr::mul(Expr::mul(exp.clone(), lowered), d_base);
    }
    let d_exp = exp.diff(var);
    let whole = Expr::pow(base.clone(), exp.clone());
    if !base.depends_on(var) {
        let ln = Expr::call(Func::Log, base.clone());
        return Expr::mul(whole, Expr::mul(d_exp, ln));
    }
    // u^w * (w' ln u + w u' / u)
    let ln = Expr::call(Func::Log, base.clone());
    let rate = Expr::add(
        Expr::mul(d_exp, ln),
        Expr::div(Expr::mul(exp.clone(), d_base), base.clone()),
    );
    Expr::mul(whole, rate)
}
