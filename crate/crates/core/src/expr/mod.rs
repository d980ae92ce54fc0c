//! Closed-form scalar expressions.
//!
//! Metric components, warping functions and vector-field components all arrive
//! as text in a small infix grammar (see `docs/grammar.md` at the repository
//! root). [`parse_expr`] turns the text into an [`Expr`] tree and
//! [`eval_jet2`] evaluates the tree together with its exact gradient and
//! Hessian using truncated second-order forward-mode differentiation.

mod jet;
mod parse;

use std::collections::BTreeSet;
use std::fmt;

pub use jet::{eval_jet2, eval_value, EvalError, Jet2};
pub use parse::{parse_expr, ParseError, ParseErrorKind};

/// Elementary functions accepted in `name(arg)` position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
    Sinh,
    Cosh,
    Tanh,
    Abs,
}

impl Func {
    pub const ALL: [Func; 10] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Exp,
        Func::Ln,
        Func::Sqrt,
        Func::Sinh,
        Func::Cosh,
        Func::Tanh,
        Func::Abs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Abs => "abs",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.iter().copied().find(|f| f.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }
}

/// Expression tree. Powers only take constant real exponents; `f^g` with a
/// variable exponent has to be written as `exp(g*ln(f))`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(String),
    Neg(Box<Expr>),
    Func(Func, Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, f64),
}

impl Expr {
    pub fn constant(c: f64) -> Expr {
        Expr::Const(c)
    }

    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Var(name.into())
    }

    pub fn zero() -> Expr {
        Expr::Const(0.0)
    }

    pub fn one() -> Expr {
        Expr::Const(1.0)
    }

    /// `true` only for the literal constant zero. No algebraic simplification
    /// is attempted.
    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == 0.0)
    }

    pub fn is_constant(&self) -> bool {
        self.variables().is_empty()
    }

    pub fn add(self, rhs: Expr) -> Expr {
        Expr::Bin(BinOp::Add, Box::new(self), Box::new(rhs))
    }

    pub fn sub(self, rhs: Expr) -> Expr {
        Expr::Bin(BinOp::Sub, Box::new(self), Box::new(rhs))
    }

    pub fn mul(self, rhs: Expr) -> Expr {
        Expr::Bin(BinOp::Mul, Box::new(self), Box::new(rhs))
    }

    pub fn div(self, rhs: Expr) -> Expr {
        Expr::Bin(BinOp::Div, Box::new(self), Box::new(rhs))
    }

    pub fn powf(self, exponent: f64) -> Expr {
        Expr::Pow(Box::new(self), exponent)
    }

    pub fn apply(func: Func, arg: Expr) -> Expr {
        Expr::Func(func, Box::new(arg))
    }

    pub fn scale(self, c: f64) -> Expr {
        Expr::Const(c).mul(self)
    }

    /// Names of all variables referenced by the expression, sorted.
    pub fn variables(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(name) => {
                out.insert(name.as_str());
            }
            Expr::Neg(a) | Expr::Func(_, a) | Expr::Pow(a, _) => a.collect_vars(out),
            Expr::Bin(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Variables that are not listed in `allowed`.
    pub fn foreign_variables<'a>(&'a self, allowed: &[String]) -> Vec<&'a str> {
        self.variables()
            .into_iter()
            .filter(|v| !allowed.iter().any(|a| a == v))
            .collect()
    }

    pub fn depth(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) => 1,
            Expr::Neg(a) | Expr::Func(_, a) | Expr::Pow(a, _) => 1 + a.depth(),
            Expr::Bin(_, a, b) => 1 + a.depth().max(b.depth()),
        }
    }
}

impl std::str::FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_expr(s)
    }
}

fn write_number(f: &mut fmt::Formatter<'_>, c: f64) -> fmt::Result {
    if c < 0.0 {
        write!(f, "(-{:?})", -c)
    } else {
        write!(f, "{:?}", c)
    }
}

/// Fully parenthesised output that parses back to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write_number(f, *c),
            Expr::Var(name) => f.write_str(name),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Func(func, a) => write!(f, "{}({a})", func.name()),
            Expr::Bin(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::Pow(a, p) => {
                if p.is_sign_negative() {
                    write!(f, "({a}^-{:?})", -p)
                } else {
                    write!(f, "({a}^{:?})", p)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variables_are_collected_once() {
        let e = parse_expr("x*y + sin(x)^2").unwrap();
        let vars: Vec<_> = e.variables().into_iter().collect();
        assert_eq!(vars, vec!["x", "y"]);
        assert_eq!(e.foreign_variables(&["x".to_string()]), vec!["y"]);
    }

    #[test]
    fn display_round_trips() {
        for src in ["-x^2", "2^-1", "sin(psi)*sin(theta)", "a/b/c", "1e-7 + 3.5e20*x", "(x^2)^0.5"] {
            let e = parse_expr(src).unwrap();
            let back = parse_expr(&e.to_string()).unwrap();
            assert_eq!(e, back, "{src} -> {e}");
        }
    }

    #[test]
    fn function_names_are_unique() {
        for f in Func::ALL {
            assert_eq!(Func::from_name(f.name()), Some(f));
        }
        assert_eq!(Func::from_name("log"), None);
    }
}
