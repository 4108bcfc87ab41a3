//! Real expressions in one variable `x`.
//!
//! Expressions are immutable trees shared through `Arc`, so cloning is cheap
//! and derivative caches can hold many overlapping subtrees. Constructors fold
//! constants and absorb `0` and `1`; no other algebraic simplification is done.

mod parse;

use std::fmt;
use std::ops;
use std::sync::Arc;

pub use parse::{parse, ParseError, ParseErrorKind};

/// Elementary functions accepted by the parser.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Tanh,
    Cosh,
    Sinh,
}

impl Func {
    pub const ALL: [Func; 8] = [
        Func::Sin,
        Func::Cos,
        Func::Exp,
        Func::Log,
        Func::Sqrt,
        Func::Tanh,
        Func::Cosh,
        Func::Sinh,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Tanh => "tanh",
            Func::Cosh => "cosh",
            Func::Sinh => "sinh",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }

    fn apply(self, v: f64) -> Result<f64, EvalError> {
        match self {
            Func::Sin => Ok(v.sin()),
            Func::Cos => Ok(v.cos()),
            Func::Exp => Ok(v.exp()),
            Func::Log if v <= 0.0 => Err(EvalError::Domain { func: "log", arg: v }),
            Func::Log => Ok(v.ln()),
            Func::Sqrt if v < 0.0 => Err(EvalError::Domain { func: "sqrt", arg: v }),
            Func::Sqrt => Ok(v.sqrt()),
            Func::Tanh => Ok(v.tanh()),
            Func::Cosh => Ok(v.cosh()),
            Func::Sinh => Ok(v.sinh()),
        }
    }
}

/// Failure while evaluating an expression or a function built on one.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("{func} evaluated outside its domain at argument {arg}")]
    Domain { func: &'static str, arg: f64 },
    #[error("non-finite value {value} produced at x = {x}")]
    NonFinite { x: f64, value: f64 },
    #[error("{0} has no closed-form derivatives")]
    NotDifferentiable(String),
    #[error("{0}")]
    Other(String),
}

/// A named opaque function of `x` with a known symbolic derivative.
///
/// Used for quantities such as a tabulated antiderivative whose derivative is
/// available in closed form.
pub struct Primitive {
    name: String,
    eval: Box<dyn Fn(f64) -> Result<f64, EvalError> + Send + Sync>,
    derivative: Expr,
}

impl Primitive {
    pub fn new(
        name: impl Into<String>,
        eval: impl Fn(f64) -> Result<f64, EvalError> + Send + Sync + 'static,
        derivative: Expr,
    ) -> Self {
        Primitive { name: name.into(), eval: Box::new(eval), derivative }
    }
}

pub(crate) enum Node {
    Const(f64),
    X,
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Pow(Expr, i32),
    Neg(Expr),
    Call(Func, Expr),
    Prim(Arc<Primitive>),
}

#[derive(Clone)]
pub struct Expr(Arc<Node>);

impl Expr {
    fn node(n: Node) -> Expr {
        Expr(Arc::new(n))
    }

    pub fn constant(c: f64) -> Expr {
        Expr::node(Node::Const(c))
    }

    pub fn zero() -> Expr {
        Expr::constant(0.0)
    }

    pub fn one() -> Expr {
        Expr::constant(1.0)
    }

    pub fn x() -> Expr {
        Expr::node(Node::X)
    }

    pub fn primitive(p: Primitive) -> Expr {
        Expr::node(Node::Prim(Arc::new(p)))
    }

    pub fn as_const(&self) -> Option<f64> {
        match *self.0 {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    pub fn is_one(&self) -> bool {
        self.as_const() == Some(1.0)
    }

    pub fn ptr_eq(&self, other: &Expr) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    pub fn add(a: &Expr, b: &Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(p), Some(q)) => Expr::constant(p + q),
            (Some(p), _) if p == 0.0 => b.clone(),
            (_, Some(q)) if q == 0.0 => a.clone(),
            _ => Expr::node(Node::Add(a.clone(), b.clone())),
        }
    }

    pub fn sub(a: &Expr, b: &Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(p), Some(q)) => Expr::constant(p - q),
            (Some(p), _) if p == 0.0 => Expr::neg(b),
            (_, Some(q)) if q == 0.0 => a.clone(),
            _ if a.ptr_eq(b) => Expr::zero(),
            _ => Expr::node(Node::Sub(a.clone(), b.clone())),
        }
    }

    pub fn mul(a: &Expr, b: &Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(p), Some(q)) => Expr::constant(p * q),
            (Some(p), _) if p == 0.0 => Expr::zero(),
            (_, Some(q)) if q == 0.0 => Expr::zero(),
            (Some(p), _) if p == 1.0 => b.clone(),
            (_, Some(q)) if q == 1.0 => a.clone(),
            (Some(p), _) if p == -1.0 => Expr::neg(b),
            (_, Some(q)) if q == -1.0 => Expr::neg(a),
            _ => Expr::node(Node::Mul(a.clone(), b.clone())),
        }
    }

    pub fn div(a: &Expr, b: &Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(p), Some(q)) if q != 0.0 => Expr::constant(p / q),
            (Some(p), _) if p == 0.0 => Expr::zero(),
            (_, Some(q)) if q == 1.0 => a.clone(),
            _ => {
                // c / (d / e) = (c / d) e
                if let (Some(c), Node::Div(num, den)) = (a.as_const(), &*b.0) {
                    if let Some(d) = num.as_const() {
                        if d != 0.0 {
                            return Expr::mul(&Expr::constant(c / d), den);
                        }
                    }
                }
                Expr::node(Node::Div(a.clone(), b.clone()))
            }
        }
    }

    pub fn powi(a: &Expr, n: i32) -> Expr {
        match (a.as_const(), n) {
            (_, 0) => Expr::one(),
            (_, 1) => a.clone(),
            (Some(c), _) if c != 0.0 || n > 0 => Expr::constant(c.powi(n)),
            _ => Expr::node(Node::Pow(a.clone(), n)),
        }
    }

    pub fn neg(a: &Expr) -> Expr {
        match &*a.0 {
            Node::Const(c) => Expr::constant(-c),
            Node::Neg(inner) => inner.clone(),
            _ => Expr::node(Node::Neg(a.clone())),
        }
    }

    pub fn call(f: Func, a: &Expr) -> Expr {
        if let Some(c) = a.as_const() {
            if let Ok(v) = f.apply(c) {
                if v.is_finite() {
                    return Expr::constant(v);
                }
            }
        }
        Expr::node(Node::Call(f, a.clone()))
    }

    pub fn sin(&self) -> Expr {
        Expr::call(Func::Sin, self)
    }
    pub fn cos(&self) -> Expr {
        Expr::call(Func::Cos, self)
    }
    pub fn exp(&self) -> Expr {
        Expr::call(Func::Exp, self)
    }
    pub fn ln(&self) -> Expr {
        Expr::call(Func::Log, self)
    }
    pub fn sqrt(&self) -> Expr {
        Expr::call(Func::Sqrt, self)
    }
    pub fn tanh(&self) -> Expr {
        Expr::call(Func::Tanh, self)
    }
    pub fn cosh(&self) -> Expr {
        Expr::call(Func::Cosh, self)
    }
    pub fn sinh(&self) -> Expr {
        Expr::call(Func::Sinh, self)
    }
    pub fn pow(&self, n: i32) -> Expr {
        Expr::powi(self, n)
    }

    /// Evaluates at `x`. Every intermediate value must be finite.
    pub fn eval(&self, x: f64) -> Result<f64, EvalError> {
        let v = match &*self.0 {
            Node::Const(c) => *c,
            Node::X => x,
            Node::Add(a, b) => a.eval(x)? + b.eval(x)?,
            Node::Sub(a, b) => a.eval(x)? - b.eval(x)?,
            Node::Mul(a, b) => {
                let p = a.eval(x)?;
                if p == 0.0 {
                    // a vanishing factor annihilates whatever it multiplies
                    0.0
                } else {
                    p * b.eval(x)?
                }
            }
            Node::Div(a, b) => {
                let d = b.eval(x)?;
                if d == 0.0 {
                    return Err(EvalError::DivisionByZero);
                }
                a.eval(x)? / d
            }
            Node::Pow(a, n) => {
                let base = a.eval(x)?;
                if base == 0.0 && *n < 0 {
                    return Err(EvalError::DivisionByZero);
                }
                base.powi(*n)
            }
            Node::Neg(a) => -a.eval(x)?,
            Node::Call(f, a) => f.apply(a.eval(x)?)?,
            Node::Prim(p) => (p.eval)(x)?,
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite { x, value: v })
        }
    }

    /// Symbolic derivative with respect to `x`.
    pub fn derivative(&self) -> Expr {
        match &*self.0 {
            Node::Const(_) => Expr::zero(),
            Node::X => Expr::one(),
            Node::Add(a, b) => Expr::add(&a.derivative(), &b.derivative()),
            Node::Sub(a, b) => Expr::sub(&a.derivative(), &b.derivative()),
            Node::Mul(a, b) => Expr::add(
                &Expr::mul(&a.derivative(), b),
                &Expr::mul(a, &b.derivative()),
            ),
            Node::Div(a, b) => {
                let db = b.derivative();
                if let Some(c) = a.as_const() {
                    // (c / b)' = -c b' / b^2
                    return Expr::div(&Expr::mul(&Expr::constant(-c), &db), &Expr::powi(b, 2));
                }
                let num = Expr::sub(&Expr::mul(&a.derivative(), b), &Expr::mul(a, &db));
                Expr::div(&num, &Expr::powi(b, 2))
            }
            Node::Pow(a, n) => Expr::mul(
                &Expr::mul(&Expr::constant(*n as f64), &Expr::powi(a, n - 1)),
                &a.derivative(),
            ),
            Node::Neg(a) => Expr::neg(&a.derivative()),
            Node::Call(f, a) => {
                let da = a.derivative();
                let outer = match f {
                    Func::Sin => a.cos(),
                    Func::Cos => Expr::neg(&a.sin()),
                    Func::Exp => a.exp(),
                    Func::Log => return Expr::div(&da, a),
                    Func::Sqrt => {
                        return Expr::div(&da, &Expr::mul(&Expr::constant(2.0), &a.sqrt()))
                    }
                    Func::Tanh => Expr::sub(&Expr::one(), &Expr::powi(&a.tanh(), 2)),
                    Func::Cosh => a.sinh(),
                    Func::Sinh => a.cosh(),
                };
                Expr::mul(&outer, &da)
            }
            Node::Prim(p) => p.derivative.clone(),
        }
    }

    /// `[self, self', ..., self^(order)]`.
    pub fn derivatives(&self, order: usize) -> Vec<Expr> {
        let mut out = Vec::with_capacity(order + 1);
        out.push(self.clone());
        for j in 0..order {
            let next = out[j].derivative();
            out.push(next);
        }
        out
    }

    /// Number of nodes, counting shared subtrees once per occurrence.
    pub fn size(&self) -> usize {
        match &*self.0 {
            Node::Const(_) | Node::X | Node::Prim(_) => 1,
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                1 + a.size() + b.size()
            }
            Node::Pow(a, _) | Node::Neg(a) | Node::Call(_, a) => 1 + a.size(),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.0 {
            Node::Const(c) if *c < 0.0 => write!(f, "({c:?})"),
            Node::Const(c) => write!(f, "{c:?}"),
            Node::X => write!(f, "x"),
            Node::Add(a, b) => write!(f, "({a} + {b})"),
            Node::Sub(a, b) => write!(f, "({a} - {b})"),
            Node::Mul(a, b) => write!(f, "({a} * {b})"),
            Node::Div(a, b) => write!(f, "({a} / {b})"),
            Node::Pow(a, n) if *n < 0 => write!(f, "({a}^({n}))"),
            Node::Pow(a, n) => write!(f, "({a}^{n})"),
            Node::Neg(a) => write!(f, "(-{a})"),
            Node::Call(func, a) => write!(f, "{}({a})", func.name()),
            Node::Prim(p) => write!(f, "{}(x)", p.name),
        }
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

impl std::str::FromStr for Expr {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

impl From<f64> for Expr {
    fn from(c: f64) -> Self {
        Expr::constant(c)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $ctor:path) => {
        impl ops::$trait<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                $ctor(&self, &rhs)
            }
        }
        impl ops::$trait<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                $ctor(self, rhs)
            }
        }
        impl ops::$trait<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                $ctor(&self, rhs)
            }
        }
        impl ops::$trait<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                $ctor(self, &rhs)
            }
        }
        impl ops::$trait<f64> for Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                $ctor(&self, &Expr::constant(rhs))
            }
        }
        impl ops::$trait<f64> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                $ctor(self, &Expr::constant(rhs))
            }
        }
        impl ops::$trait<Expr> for f64 {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                $ctor(&Expr::constant(self), &rhs)
            }
        }
        impl ops::$trait<&Expr> for f64 {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                $ctor(&Expr::constant(self), rhs)
            }
        }
    };
}

binop!(Add, add, Expr::add);
binop!(Sub, sub, Expr::sub);
binop!(Mul, mul, Expr::mul);
binop!(Div, div, Expr::div);

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(&self)
    }
}

impl ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}
