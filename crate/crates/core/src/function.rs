//! Functions of one real variable that operators act on and pairings integrate.

use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::expr::{EvalError, Expr};
use crate::families::FamilyMember;
use crate::jet::Jet;

/// Jets of test functions are available up to this order.
pub const MAX_FUNCTION_JET: usize = 6;

/// A complex-valued function on the real line.
pub trait Function1d: Send + Sync {
    fn value(&self, x: f64) -> Result<C64, EvalError>;

    /// Derivatives `f, f', ..., f^(order)` at `x`.
    fn jet(&self, _x: f64, _order: usize) -> Result<Jet, EvalError> {
        Err(EvalError::NotDifferentiable(self.label()))
    }

    /// Closed interval outside which the function vanishes identically.
    fn support(&self) -> Option<(f64, f64)> {
        None
    }

    /// Interval outside which the function is negligible (below `1e-300`).
    fn decay_window(&self) -> Option<(f64, f64)> {
        self.support()
    }

    fn as_member(&self) -> Option<&FamilyMember> {
        None
    }

    fn label(&self) -> String;
}

/// A real function given by an expression, with cached derivatives.
#[derive(Clone, Debug)]
pub struct ExprFn {
    derivs: Vec<Expr>,
    label: String,
}

impl ExprFn {
    pub fn new(expr: Expr) -> ExprFn {
        let label = expr.to_string();
        ExprFn { derivs: expr.derivatives(MAX_FUNCTION_JET), label }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> ExprFn {
        self.label = label.into();
        self
    }

    pub fn expr(&self) -> &Expr {
        &self.derivs[0]
    }

    pub fn parse(src: &str) -> Result<ExprFn, crate::expr::ParseError> {
        Ok(ExprFn::new(crate::expr::parse(src)?))
    }
}

impl Function1d for ExprFn {
    fn value(&self, x: f64) -> Result<C64, EvalError> {
        Ok(C64::new(self.derivs[0].eval(x)?, 0.0))
    }

    fn jet(&self, x: f64, order: usize) -> Result<Jet, EvalError> {
        if order > MAX_FUNCTION_JET {
            return Err(EvalError::Other(format!("jet order {order} exceeds {MAX_FUNCTION_JET}")));
        }
        let d: Result<Vec<f64>, _> = self.derivs[..=order].iter().map(|e| e.eval(x)).collect();
        Ok(Jet::from_real(&d?))
    }

    fn label(&self) -> String {
        self.label.clone()
    }
}

/// Parity of a [`Bump`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BumpShape {
    /// `amplitude * exp(-1/(1-t^2))`, `t = (x-c)/w`.
    Even,
    /// The even bump multiplied by `t`.
    Odd,
}

/// Smooth compactly supported bump on `[c - w, c + w]`.
///
/// With `amplitude = e` the even bump has unit height.
#[derive(Clone, Debug)]
pub struct Bump {
    centre: f64,
    half_width: f64,
    amplitude: f64,
    shape: BumpShape,
    body: ExprFn,
}

// exp(-1/(1-t^2)) is below exp(-700) once 1 - t^2 < 1/700
const BUMP_EDGE: f64 = 1.0 / 700.0;

impl Bump {
    pub fn new(centre: f64, half_width: f64, amplitude: f64, shape: BumpShape) -> Bump {
        assert!(half_width > 0.0, "bump half-width must be positive");
        let t = (Expr::x() - centre) / half_width;
        let mut body = amplitude * (-1.0 / (1.0 - t.pow(2))).exp();
        if shape == BumpShape::Odd {
            body = body * t;
        }
        let label = match shape {
            BumpShape::Even => format!("bump(c={centre}, w={half_width})"),
            BumpShape::Odd => format!("odd_bump(c={centre}, w={half_width})"),
        };
        Bump { centre, half_width, amplitude, shape, body: ExprFn::new(body).with_label(label) }
    }

    /// Even bump of unit height.
    pub fn unit(centre: f64, half_width: f64) -> Bump {
        Bump::new(centre, half_width, std::f64::consts::E, BumpShape::Even)
    }

    pub fn centre(&self) -> f64 {
        self.centre
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn shape(&self) -> BumpShape {
        self.shape
    }

    fn inside(&self, x: f64) -> bool {
        let t = (x - self.centre) / self.half_width;
        1.0 - t * t > BUMP_EDGE
    }
}

impl Function1d for Bump {
    fn value(&self, x: f64) -> Result<C64, EvalError> {
        if !self.inside(x) {
            return Ok(C64::new(0.0, 0.0));
        }
        self.body.value(x)
    }

    fn jet(&self, x: f64, order: usize) -> Result<Jet, EvalError> {
        if !self.inside(x) {
            return Ok(Jet::zero(order));
        }
        self.body.jet(x, order)
    }

    fn support(&self) -> Option<(f64, f64)> {
        Some((self.centre - self.half_width, self.centre + self.half_width))
    }

    fn label(&self) -> String {
        self.body.label()
    }
}

/// Value-only function from a closure.
pub struct ClosureFn<F> {
    f: F,
    label: String,
    support: Option<(f64, f64)>,
}

impl<F> ClosureFn<F>
where
    F: Fn(f64) -> C64 + Send + Sync,
{
    pub fn new(label: impl Into<String>, f: F) -> Self {
        ClosureFn { f, label: label.into(), support: None }
    }

    pub fn with_support(mut self, a: f64, b: f64) -> Self {
        self.support = Some((a, b));
        self
    }
}

impl<F> Function1d for ClosureFn<F>
where
    F: Fn(f64) -> C64 + Send + Sync,
{
    fn value(&self, x: f64) -> Result<C64, EvalError> {
        if let Some((a, b)) = self.support {
            if x < a || x > b {
                return Ok(C64::new(0.0, 0.0));
            }
        }
        Ok((self.f)(x))
    }

    fn support(&self) -> Option<(f64, f64)> {
        self.support
    }

    fn label(&self) -> String {
        self.label.clone()
    }
}

/// Finite linear combination `sum_i c_i f_i`.
#[derive(Clone)]
pub struct LinearCombination {
    terms: Vec<(C64, Arc<dyn Function1d>)>,
}

impl LinearCombination {
    pub fn new(terms: Vec<(C64, Arc<dyn Function1d>)>) -> Self {
        LinearCombination { terms }
    }
}

impl Function1d for LinearCombination {
    fn value(&self, x: f64) -> Result<C64, EvalError> {
        let mut s = C64::new(0.0, 0.0);
        for (c, f) in &self.terms {
            s += c * f.value(x)?;
        }
        Ok(s)
    }

    fn jet(&self, x: f64, order: usize) -> Result<Jet, EvalError> {
        let mut s = Jet::zero(order);
        for (c, f) in &self.terms {
            s = s.add(&f.jet(x, order)?.scale(*c));
        }
        Ok(s)
    }

    fn support(&self) -> Option<(f64, f64)> {
        let mut out: Option<(f64, f64)> = None;
        for (_, f) in &self.terms {
            let (a, b) = f.support()?;
            out = Some(match out {
                None => (a, b),
                Some((lo, hi)) => (lo.min(a), hi.max(b)),
            });
        }
        out
    }

    fn decay_window(&self) -> Option<(f64, f64)> {
        let mut out: Option<(f64, f64)> = None;
        for (_, f) in &self.terms {
            let (a, b) = f.decay_window()?;
            out = Some(match out {
                None => (a, b),
                Some((lo, hi)) => (lo.min(a), hi.max(b)),
            });
        }
        out
    }

    fn label(&self) -> String {
        let parts: Vec<String> = self.terms.iter().map(|(c, f)| format!("({c})*{}", f.label())).collect();
        parts.join(" + ")
    }
}

/// The five smooth, decaying functions used by operator identity checks.
pub fn standard_test_functions() -> Vec<Arc<dyn Function1d>> {
    let gauss = |src: &str, label: &str| -> Arc<dyn Function1d> {
        Arc::new(ExprFn::parse(src).expect("valid test function").with_label(label))
    };
    vec![
        Arc::new(Bump::unit(0.0, 1.5)),
        Arc::new(Bump::new(0.4, 2.0, std::f64::consts::E, BumpShape::Odd)),
        gauss("exp(-x^2)", "gaussian"),
        gauss("(1+x)*exp(-(x-0.5)^2/2)", "shifted_gaussian"),
        gauss("sin(2*x)*exp(-x^2/3)", "modulated_gaussian"),
    ]
}
