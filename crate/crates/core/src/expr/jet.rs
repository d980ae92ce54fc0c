use super::{BinOp, Expr, Func};

/// Value, gradient and Hessian of an expression at a point, with respect to an
/// ordered tuple of variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet2 {
    pub value: f64,
    pub grad: Vec<f64>,
    /// Row-major `n x n`, symmetric by construction.
    hess: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("domain error: {reason} in `{subexpr}`")]
    Domain { reason: &'static str, subexpr: String },
    #[error("variable `{0}` is not bound")]
    UnboundVariable(String),
    #[error("point has {got} coordinates but {expected} variables were declared")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Below this magnitude `abs` is treated as non-differentiable.
const ABS_KINK: f64 = 1e-12;

impl Jet2 {
    pub fn constant(value: f64, n: usize) -> Jet2 {
        Jet2 { value, grad: vec![0.0; n], hess: vec![0.0; n * n] }
    }

    pub fn variable(value: f64, index: usize, n: usize) -> Jet2 {
        let mut j = Jet2::constant(value, n);
        j.grad[index] = 1.0;
        j
    }

    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    pub fn hess(&self, i: usize, j: usize) -> f64 {
        self.hess[i * self.dim() + j]
    }

    /// Hessian rows as nested vectors.
    pub fn hessian(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        (0..n).map(|i| self.hess[i * n..(i + 1) * n].to_vec()).collect()
    }

    fn fill_hess(n: usize, mut entry: impl FnMut(usize, usize) -> f64) -> Vec<f64> {
        let mut h = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = entry(i, j);
                h[i * n + j] = v;
                h[j * n + i] = v;
            }
        }
        h
    }

    pub fn add(&self, o: &Jet2) -> Jet2 {
        let n = self.dim();
        Jet2 {
            value: self.value + o.value,
            grad: self.grad.iter().zip(&o.grad).map(|(a, b)| a + b).collect(),
            hess: Jet2::fill_hess(n, |i, j| self.hess(i, j) + o.hess(i, j)),
        }
    }

    pub fn sub(&self, o: &Jet2) -> Jet2 {
        let n = self.dim();
        Jet2 {
            value: self.value - o.value,
            grad: self.grad.iter().zip(&o.grad).map(|(a, b)| a - b).collect(),
            hess: Jet2::fill_hess(n, |i, j| self.hess(i, j) - o.hess(i, j)),
        }
    }

    pub fn scale(&self, c: f64) -> Jet2 {
        let n = self.dim();
        Jet2 {
            value: c * self.value,
            grad: self.grad.iter().map(|g| c * g).collect(),
            hess: Jet2::fill_hess(n, |i, j| c * self.hess(i, j)),
        }
    }

    pub fn mul(&self, o: &Jet2) -> Jet2 {
        let n = self.dim();
        let (a, b) = (self.value, o.value);
        Jet2 {
            value: a * b,
            grad: self.grad.iter().zip(&o.grad).map(|(ga, gb)| a * gb + b * ga).collect(),
            hess: Jet2::fill_hess(n, |i, j| {
                a * o.hess(i, j)
                    + b * self.hess(i, j)
                    + self.grad[i] * o.grad[j]
                    + self.grad[j] * o.grad[i]
            }),
        }
    }

    /// Compose with a scalar function given its value and first two
    /// derivatives at `self.value`.
    pub fn chain(&self, phi: f64, d1: f64, d2: f64) -> Jet2 {
        let n = self.dim();
        Jet2 {
            value: phi,
            grad: self.grad.iter().map(|g| d1 * g).collect(),
            hess: Jet2::fill_hess(n, |i, j| d1 * self.hess(i, j) + d2 * self.grad[i] * self.grad[j]),
        }
    }
}

struct Evaluator<'a> {
    point: &'a [f64],
    vars: &'a [String],
}

fn domain(reason: &'static str, e: &Expr) -> EvalError {
    EvalError::Domain { reason, subexpr: e.to_string() }
}

impl Evaluator<'_> {
    fn lookup(&self, name: &str) -> Result<usize, EvalError> {
        self.vars
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| EvalError::UnboundVariable(name.to_string()))
    }

    fn jet(&self, e: &Expr) -> Result<Jet2, EvalError> {
        let n = self.vars.len();
        Ok(match e {
            Expr::Const(c) => Jet2::constant(*c, n),
            Expr::Var(name) => {
                let i = self.lookup(name)?;
                Jet2::variable(self.point[i], i, n)
            }
            Expr::Neg(a) => self.jet(a)?.scale(-1.0),
            Expr::Bin(op, a, b) => {
                let ja = self.jet(a)?;
                let jb = self.jet(b)?;
                match op {
                    BinOp::Add => ja.add(&jb),
                    BinOp::Sub => ja.sub(&jb),
                    BinOp::Mul => ja.mul(&jb),
                    BinOp::Div => {
                        let d = jb.value;
                        if d == 0.0 {
                            return Err(domain("division by zero", b));
                        }
                        ja.mul(&jb.chain(1.0 / d, -1.0 / (d * d), 2.0 / (d * d * d)))
                    }
                }
            }
            Expr::Pow(a, p) => {
                let ja = self.jet(a)?;
                pow_jet(&ja, *p).ok_or_else(|| domain("power of non-positive base", e))?
            }
            Expr::Func(func, a) => {
                let ja = self.jet(a)?;
                let x = ja.value;
                match func {
                    Func::Sin => ja.chain(x.sin(), x.cos(), -x.sin()),
                    Func::Cos => ja.chain(x.cos(), -x.sin(), -x.cos()),
                    Func::Tan => {
                        let c = x.cos();
                        if c == 0.0 {
                            return Err(domain("tan at a pole", e));
                        }
                        let t = x.tan();
                        let sec2 = 1.0 / (c * c);
                        ja.chain(t, sec2, 2.0 * t * sec2)
                    }
                    Func::Exp => {
                        let v = x.exp();
                        ja.chain(v, v, v)
                    }
                    Func::Ln => {
                        if x <= 0.0 {
                            return Err(domain("ln of non-positive value", e));
                        }
                        ja.chain(x.ln(), 1.0 / x, -1.0 / (x * x))
                    }
                    Func::Sqrt => {
                        if x < 0.0 {
                            return Err(domain("sqrt of negative value", e));
                        }
                        if x == 0.0 {
                            return Err(domain("sqrt is not differentiable at zero", e));
                        }
                        let s = x.sqrt();
                        ja.chain(s, 0.5 / s, -0.25 / (s * x))
                    }
                    Func::Sinh => ja.chain(x.sinh(), x.cosh(), x.sinh()),
                    Func::Cosh => ja.chain(x.cosh(), x.sinh(), x.cosh()),
                    Func::Tanh => {
                        let t = x.tanh();
                        let s = 1.0 - t * t;
                        ja.chain(t, s, -2.0 * t * s)
                    }
                    Func::Abs => {
                        if x.abs() < ABS_KINK {
                            return Err(domain("abs is not differentiable at zero", e));
                        }
                        ja.chain(x.abs(), x.signum(), 0.0)
                    }
                }
            }
        })
    }

    fn value(&self, e: &Expr) -> Result<f64, EvalError> {
        Ok(match e {
            Expr::Const(c) => *c,
            Expr::Var(name) => self.point[self.lookup(name)?],
            Expr::Neg(a) => -self.value(a)?,
            Expr::Bin(op, a, b) => {
                let (x, y) = (self.value(a)?, self.value(b)?);
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => {
                        if y == 0.0 {
                            return Err(domain("division by zero", b));
                        }
                        x / y
                    }
                }
            }
            Expr::Pow(a, p) => {
                let x = self.value(a)?;
                pow_value(x, *p).ok_or_else(|| domain("power of non-positive base", e))?
            }
            Expr::Func(func, a) => {
                let x = self.value(a)?;
                match func {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Tan => x.tan(),
                    Func::Exp => x.exp(),
                    Func::Ln => {
                        if x <= 0.0 {
                            return Err(domain("ln of non-positive value", e));
                        }
                        x.ln()
                    }
                    Func::Sqrt => {
                        if x < 0.0 {
                            return Err(domain("sqrt of negative value", e));
                        }
                        x.sqrt()
                    }
                    Func::Sinh => x.sinh(),
                    Func::Cosh => x.cosh(),
                    Func::Tanh => x.tanh(),
                    Func::Abs => x.abs(),
                }
            }
        })
    }
}

fn integer_exponent(p: f64) -> Option<i32> {
    (p.fract() == 0.0 && p.abs() <= i32::MAX as f64).then_some(p as i32)
}

fn pow_value(x: f64, p: f64) -> Option<f64> {
    match integer_exponent(p) {
        Some(k) if k < 0 && x == 0.0 => None,
        Some(k) => Some(x.powi(k)),
        None if x > 0.0 => Some(x.powf(p)),
        None => None,
    }
}

fn pow_jet(a: &Jet2, p: f64) -> Option<Jet2> {
    let x = a.value;
    let n = a.dim();
    match integer_exponent(p) {
        Some(0) => Some(Jet2::constant(1.0, n)),
        Some(k) if k < 0 && x == 0.0 => None,
        Some(k) => {
            let kf = k as f64;
            let d1 = kf * x.powi(k - 1);
            let d2 = if k == 1 { 0.0 } else { kf * (kf - 1.0) * x.powi(k - 2) };
            Some(a.chain(x.powi(k), d1, d2))
        }
        None if x > 0.0 => Some(a.chain(x.powf(p), p * x.powf(p - 1.0), p * (p - 1.0) * x.powf(p - 2.0))),
        None => None,
    }
}

/// Evaluate `e` and its exact first and second partial derivatives at `point`,
/// where `point[i]` is the value of `vars[i]`.
pub fn eval_jet2(e: &Expr, point: &[f64], vars: &[String]) -> Result<Jet2, EvalError> {
    if point.len() != vars.len() {
        return Err(EvalError::DimensionMismatch { expected: vars.len(), got: point.len() });
    }
    Evaluator { point, vars }.jet(e)
}

/// Value only.
pub fn eval_value(e: &Expr, point: &[f64], vars: &[String]) -> Result<f64, EvalError> {
    if point.len() != vars.len() {
        return Err(EvalError::DimensionMismatch { expected: vars.len(), got: point.len() });
    }
    Evaluator { point, vars }.value(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn square() {
        let j = eval_jet2(&parse_expr("x^2").unwrap(), &[3.0], &names(&["x"])).unwrap();
        assert_eq!(j.value, 9.0);
        assert_eq!(j.grad, vec![6.0]);
        assert_eq!(j.hessian(), vec![vec![2.0]]);
    }

    #[test]
    fn sine_at_zero() {
        let j = eval_jet2(&parse_expr("sin(x)").unwrap(), &[0.0], &names(&["x"])).unwrap();
        assert_eq!(j.value, 0.0);
        assert_eq!(j.grad, vec![1.0]);
        assert_eq!(j.hessian(), vec![vec![0.0]]);
    }

    #[test]
    fn exp_times_y_matches_hand_derivatives_and_differences() {
        let e = parse_expr("exp(x)*y").unwrap();
        let vars = names(&["x", "y"]);
        let j = eval_jet2(&e, &[0.0, 2.0], &vars).unwrap();
        assert_eq!(j.value, 2.0);
        assert_eq!(j.grad, vec![2.0, 1.0]);
        assert_eq!(j.hessian(), vec![vec![2.0, 1.0], vec![1.0, 0.0]]);

        // central differences, h = 1e-5
        let h = 1e-5;
        let f = |x: f64, y: f64| eval_value(&e, &[x, y], &vars).unwrap();
        let gx = (f(h, 2.0) - f(-h, 2.0)) / (2.0 * h);
        let gy = (f(0.0, 2.0 + h) - f(0.0, 2.0 - h)) / (2.0 * h);
        let hxx = (f(h, 2.0) - 2.0 * f(0.0, 2.0) + f(-h, 2.0)) / (h * h);
        let hxy = (f(h, 2.0 + h) - f(h, 2.0 - h) - f(-h, 2.0 + h) + f(-h, 2.0 - h)) / (4.0 * h * h);
        assert!((gx - j.grad[0]).abs() < 1e-6);
        assert!((gy - j.grad[1]).abs() < 1e-6);
        assert!((hxx - j.hess(0, 0)).abs() < 1e-4);
        assert!((hxy - j.hess(0, 1)).abs() < 1e-6);
    }

    #[test]
    fn constants_have_zero_derivatives() {
        let j = eval_jet2(&parse_expr("3*sin(2)").unwrap(), &[1.0, 2.0], &names(&["a", "b"])).unwrap();
        assert!(j.grad.iter().all(|g| *g == 0.0));
        assert!(j.hessian().iter().flatten().all(|h| *h == 0.0));
    }

    #[test]
    fn domain_errors_name_the_subexpression() {
        let vars = names(&["x"]);
        let err = eval_jet2(&parse_expr("1 + ln(x - 2)").unwrap(), &[1.0], &vars).unwrap_err();
        match err {
            EvalError::Domain { subexpr, .. } => assert_eq!(subexpr, "ln((x - 2.0))"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(eval_jet2(&parse_expr("sqrt(x)").unwrap(), &[-1.0], &vars).is_err());
        assert!(eval_jet2(&parse_expr("1/x").unwrap(), &[0.0], &vars).is_err());
        assert!(eval_jet2(&parse_expr("abs(x)").unwrap(), &[1e-13], &vars).is_err());
        assert!(eval_jet2(&parse_expr("x^0.5").unwrap(), &[-1.0], &vars).is_err());
        assert!(eval_jet2(&parse_expr("abs(x)").unwrap(), &[-2.0], &vars).is_ok());
    }

    #[test]
    fn unbound_and_mismatched() {
        let e = parse_expr("x + z").unwrap();
        assert_eq!(eval_jet2(&e, &[1.0], &names(&["x"])), Err(EvalError::UnboundVariable("z".into())));
        assert!(matches!(
            eval_jet2(&e, &[1.0], &names(&["x", "z"])),
            Err(EvalError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn integer_powers_at_zero() {
        let vars = names(&["x"]);
        let j = eval_jet2(&parse_expr("x^1").unwrap(), &[0.0], &vars).unwrap();
        assert_eq!((j.value, j.grad[0], j.hess(0, 0)), (0.0, 1.0, 0.0));
        let j = eval_jet2(&parse_expr("x^3").unwrap(), &[0.0], &vars).unwrap();
        assert_eq!((j.value, j.grad[0], j.hess(0, 0)), (0.0, 0.0, 0.0));
        assert!(eval_jet2(&parse_expr("x^-1").unwrap(), &[0.0], &vars).is_err());
    }
}
