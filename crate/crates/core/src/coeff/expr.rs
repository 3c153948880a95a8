//! Scalar expression trees over the spatial variables `x_1, x_2`.

use std::fmt;

/// Built-in unary functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            _ => None,
        }
    }

    #[inline]
    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
        }
    }
}

/// Named constants folded to binary64 at parse time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NamedConst {
    Pi,
    Sqrt2,
}

impl NamedConst {
    pub fn value(self) -> f64 {
        match self {
            NamedConst::Pi => std::f64::consts::PI,
            NamedConst::Sqrt2 => std::f64::consts::SQRT_2,
        }
    }

    fn name(self) -> &'static str {
        match self {
            NamedConst::Pi => "pi",
            NamedConst::Sqrt2 => "sqrt2",
        }
    }
}

/// Expression AST. Variables are zero-based axis indices.
#[derive(Debug, Clone, PartialEq)]
pub enum ScalarExpr {
    Num(f64),
    Const(NamedConst),
    Var(usize),
    Neg(Box<ScalarExpr>),
    Binary(BinOp, Box<ScalarExpr>, Box<ScalarExpr>),
    Call(Func, Box<ScalarExpr>),
}

impl ScalarExpr {
    pub fn num(v: f64) -> Self {
        ScalarExpr::Num(v)
    }

    pub fn var(axis: usize) -> Self {
        ScalarExpr::Var(axis)
    }

    pub fn binary(op: BinOp, lhs: ScalarExpr, rhs: ScalarExpr) -> Self {
        ScalarExpr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn call(f: Func, arg: ScalarExpr) -> Self {
        ScalarExpr::Call(f, Box::new(arg))
    }

    /// Evaluates at `point`; variables beyond `point.len()` read as zero.
    pub fn eval(&self, point: &[f64]) -> f64 {
        match self {
            ScalarExpr::Num(v) => *v,
            ScalarExpr::Const(c) => c.value(),
            ScalarExpr::Var(i) => point.get(*i).copied().unwrap_or(0.0),
            ScalarExpr::Neg(e) => -e.eval(point),
            ScalarExpr::Binary(op, a, b) => {
                let (a, b) = (a.eval(point), b.eval(point));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                }
            }
            ScalarExpr::Call(f, e) => f.apply(e.eval(point)),
        }
    }

    /// Highest variable index used plus one.
    pub fn arity(&self) -> usize {
        match self {
            ScalarExpr::Num(_) | ScalarExpr::Const(_) => 0,
            ScalarExpr::Var(i) => i + 1,
            ScalarExpr::Neg(e) | ScalarExpr::Call(_, e) => e.arity(),
            ScalarExpr::Binary(_, a, b) => a.arity().max(b.arity()),
        }
    }

    /// True when the tree contains no variables.
    pub fn is_constant(&self) -> bool {
        self.arity() == 0
    }

    /// Visits every divisor subexpression.
    pub fn divisors(&self) -> Vec<&ScalarExpr> {
        let mut out = Vec::new();
        self.collect_divisors(&mut out);
        out
    }

    fn collect_divisors<'a>(&'a self, out: &mut Vec<&'a ScalarExpr>) {
        match self {
            ScalarExpr::Num(_) | ScalarExpr::Const(_) | ScalarExpr::Var(_) => {}
            ScalarExpr::Neg(e) | ScalarExpr::Call(_, e) => e.collect_divisors(out),
            ScalarExpr::Binary(op, a, b) => {
                if *op == BinOp::Div {
                    out.push(b);
                }
                a.collect_divisors(out);
                b.collect_divisors(out);
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            ScalarExpr::Binary(op, _, _) => op.precedence(),
            ScalarExpr::Neg(_) => 3,
            _ => 4,
        }
    }

    fn write_child(&self, f: &mut fmt::Formatter<'_>, parens: bool) -> fmt::Result {
        if parens {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

impl fmt::Display for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarExpr::Num(v) => {
                // `{:?}` is the shortest round-trip representation.
                if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) {
                    write!(f, "(-{:?})", -v)
                } else {
                    write!(f, "{v:?}")
                }
            }
            ScalarExpr::Const(c) => f.write_str(c.name()),
            ScalarExpr::Var(i) => write!(f, "x_{}", i + 1),
            ScalarExpr::Neg(e) => {
                f.write_str("-")?;
                e.write_child(f, e.precedence() < 3)
            }
            ScalarExpr::Binary(op, a, b) => {
                let p = op.precedence();
                a.write_child(f, a.precedence() < p)?;
                write!(f, " {} ", op.symbol())?;
                // Right operands of equal precedence keep their parentheses so the
                // reparsed tree (and its rounding) is unchanged.
                b.write_child(f, b.precedence() <= p)
            }
            ScalarExpr::Call(func, e) => write!(f, "{}({e})", func.name()),
        }
    }
}
