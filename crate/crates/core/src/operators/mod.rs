//! Second-order differential operators `p2 D^2 + p1 D + p0` with complex
//! symbolic coefficients, the named operators built from a profile, and three
//! independent ways of applying them.

mod apply;
mod build;
mod catalog;
mod ladder;

use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::expr::{EvalError, Expr};
use crate::jet::Jet;
use crate::profile::ProfileError;

pub use apply::{apply, apply_chain, OperatorImage, OperatorSum, Strategy};
pub use build::{
    build_ab, build_squeeze_operators, build_su11, casimir, casimir_sum, coefficient_table_mismatch,
    squeeze_identity_gaps, LadderOperators, SqueezeIdentityGaps, SqueezeOperators, Su11Triples, Triple,
};
pub use catalog::{
    ladder_residual, relation_ids, residual_on_grid, ResidualEntry, ResidualReport, GRID_HALF_WIDTH,
    GRID_POINTS,
};
pub use ladder::{LadderForm, Letter};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OperatorError {
    #[error("composition has order {0}, above the supported order 2")]
    OrderExceeded(usize),
    #[error("strategy {strategy:?} unavailable: {reason}")]
    StrategyUnavailable { strategy: Strategy, reason: String },
    #[error("coefficient table of {label} disagrees with its composition at x = {x}: relative error {error:e}")]
    CoefficientMismatch { label: String, x: f64, error: f64 },
    #[error("order-4 terms failed to cancel: residual {0:e}")]
    CancellationFailure(f64),
    #[error("squeeze operators need k = 1, got k = {0}")]
    RequiresUnitK(f64),
    #[error("identity check {label} failed: residual {residual:e}")]
    IdentityFailure { label: String, residual: f64 },
    #[error("unknown relation id {0:?}")]
    UnknownRelation(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
}

/// Complex coefficient `re(x) + i im(x)`.
#[derive(Clone, Debug)]
pub struct CExpr {
    pub re: Expr,
    pub im: Expr,
}

impl CExpr {
    pub fn new(re: Expr, im: Expr) -> CExpr {
        CExpr { re, im }
    }

    pub fn real(re: Expr) -> CExpr {
        CExpr { re, im: Expr::zero() }
    }

    pub fn zero() -> CExpr {
        CExpr::real(Expr::zero())
    }

    pub fn constant(c: C64) -> CExpr {
        CExpr { re: Expr::constant(c.re), im: Expr::constant(c.im) }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn eval(&self, x: f64) -> Result<C64, EvalError> {
        let re = self.re.eval(x)?;
        let im = if self.im.is_zero() { 0.0 } else { self.im.eval(x)? };
        Ok(C64::new(re, im))
    }

    pub fn derivative(&self) -> CExpr {
        CExpr { re: self.re.derivative(), im: self.im.derivative() }
    }

    pub fn add(&self, o: &CExpr) -> CExpr {
        CExpr { re: &self.re + &o.re, im: &self.im + &o.im }
    }

    pub fn sub(&self, o: &CExpr) -> CExpr {
        CExpr { re: &self.re - &o.re, im: &self.im - &o.im }
    }

    pub fn mul(&self, o: &CExpr) -> CExpr {
        CExpr {
            re: Expr::sub(&(&self.re * &o.re), &(&self.im * &o.im)),
            im: Expr::add(&(&self.re * &o.im), &(&self.im * &o.re)),
        }
    }

    pub fn scale(&self, c: C64) -> CExpr {
        self.mul(&CExpr::constant(c))
    }

    pub fn conj(&self) -> CExpr {
        CExpr { re: self.re.clone(), im: Expr::neg(&self.im) }
    }
}

/// Number of cached derivative levels of each coefficient.
const COEFF_DERIVS: usize = 2;

/// `p2(x) D^2 + p1(x) D + p0(x)`.
#[derive(Clone)]
pub struct DiffOperator {
    label: String,
    // derivs[l][j]: l-th derivative of the coefficient of D^j
    derivs: Arc<Vec<[CExpr; 3]>>,
    ladder: Option<LadderForm>,
}

impl std::fmt::Debug for DiffOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let c = &self.derivs[0];
        write!(
            f,
            "{}: ({} + i{}) D^2 + ({} + i{}) D + ({} + i{})",
            self.label, c[2].re, c[2].im, c[1].re, c[1].im, c[0].re, c[0].im
        )
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

impl DiffOperator {
    /// Operator from its coefficients of `D^2`, `D`, `1`.
    pub fn new(label: impl Into<String>, p2: CExpr, p1: CExpr, p0: CExpr) -> DiffOperator {
        let mut derivs = vec![[p0, p1, p2]];
        for l in 0..COEFF_DERIVS {
            let prev = &derivs[l];
            let next = [prev[0].derivative(), prev[1].derivative(), prev[2].derivative()];
            derivs.push(next);
        }
        DiffOperator { label: label.into(), derivs: Arc::new(derivs), ladder: None }
    }

    pub fn real(label: impl Into<String>, p2: Expr, p1: Expr, p0: Expr) -> DiffOperator {
        DiffOperator::new(label, CExpr::real(p2), CExpr::real(p1), CExpr::real(p0))
    }

    /// Multiplication by the constant `c`.
    pub fn scalar(label: impl Into<String>, c: C64) -> DiffOperator {
        DiffOperator::new(label, CExpr::zero(), CExpr::zero(), CExpr::constant(c))
            .with_ladder(LadderForm::scalar(c))
    }

    pub fn identity() -> DiffOperator {
        DiffOperator::scalar("1", C64::new(1.0, 0.0))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> DiffOperator {
        self.label = label.into();
        self
    }

    pub fn with_ladder(mut self, form: LadderForm) -> DiffOperator {
        self.ladder = Some(form);
        self
    }

    /// Word representation in `a, b, a^dagger, b^dagger`, when known.
    pub fn ladder(&self) -> Option<&LadderForm> {
        self.ladder.as_ref()
    }

    /// Coefficient of `D^j`.
    pub fn coefficient(&self, j: usize) -> &CExpr {
        &self.derivs[0][j]
    }

    /// Structural order: highest `j` whose coefficient is not identically zero.
    pub fn order(&self) -> usize {
        (0..3).rev().find(|&j| !self.derivs[0][j].is_zero()).unwrap_or(0)
    }

    /// `[p0(x), p1(x), p2(x)]`.
    pub fn eval_coefficients(&self, x: f64) -> Result<[C64; 3], EvalError> {
        let c = &self.derivs[0];
        Ok([c[0].eval(x)?, c[1].eval(x)?, c[2].eval(x)?])
    }

    /// Jet of the coefficient of `D^j` up to `order <= 2`.
    pub fn coefficient_jet(&self, j: usize, x: f64, order: usize) -> Result<Jet, EvalError> {
        assert!(order <= COEFF_DERIVS, "coefficient derivatives cached to order 2");
        let d: Result<Vec<C64>, _> = (0..=order).map(|l| self.derivs[l][j].eval(x)).collect();
        Ok(Jet::new(d?))
    }

    /// Jet of `L f` at `x` given the jet of `f` at `x`.
    pub fn apply_jet_at(&self, x: f64, f: &Jet) -> Result<Jet, OperatorError> {
        let ord = self.order();
        let out = f.order().checked_sub(ord).ok_or(OperatorError::OrderExceeded(ord))?;
        if out > COEFF_DERIVS {
            return Err(OperatorError::OrderExceeded(out + ord));
        }
        let mut acc = Jet::zero(out);
        let mut df = f.clone();
        for j in 0..=ord {
            if !self.derivs[0][j].is_zero() {
                let c = self.coefficient_jet(j, x, out)?;
                acc = acc.add(&c.mul(&df.truncate(out)));
            }
            if j < ord {
                df = df.derivative();
            }
        }
        Ok(acc)
    }

    /// Coefficients of `D^0 ..= D^4` of `self ∘ other`.
    pub(crate) fn expand_product(&self, other: &DiffOperator) -> [CExpr; 5] {
        let mut out: [CExpr; 5] = std::array::from_fn(|_| CExpr::zero());
        for j in 0..3 {
            let pj = &self.derivs[0][j];
            if pj.is_zero() {
                continue;
            }
            for i in 0..3 {
                for l in 0..=j {
                    let q = &other.derivs[l][i];
                    if q.is_zero() {
                        continue;
                    }
                    let term = pj.mul(q).scale(C64::new(binomial(j, l), 0.0));
                    let s = i + j - l;
                    out[s] = out[s].add(&term);
                }
            }
        }
        out
    }

    /// `self ∘ other`, rejected if the product has order above 2.
    pub fn compose(&self, other: &DiffOperator) -> Result<DiffOperator, OperatorError> {
        let c = self.expand_product(other);
        if let Some(s) = (3..5).rev().find(|&s| !c[s].is_zero()) {
            return Err(OperatorError::OrderExceeded(s));
        }
        let [c0, c1, c2, _, _] = c;
        let mut op = DiffOperator::new(format!("{}*{}", self.label, other.label), c2, c1, c0);
        if let (Some(l), Some(r)) = (&self.ladder, &other.ladder) {
            op.ladder = Some(l.mul(r));
        }
        Ok(op)
    }

    pub fn add(&self, other: &DiffOperator) -> DiffOperator {
        let a = &self.derivs[0];
        let b = &other.derivs[0];
        let mut op = DiffOperator::new(
            format!("({} + {})", self.label, other.label),
            a[2].add(&b[2]),
            a[1].add(&b[1]),
            a[0].add(&b[0]),
        );
        if let (Some(l), Some(r)) = (&self.ladder, &other.ladder) {
            op.ladder = Some(l.add(r));
        }
        op
    }

    pub fn sub(&self, other: &DiffOperator) -> DiffOperator {
        self.add(&other.scale(C64::new(-1.0, 0.0))).with_label(format!("({} - {})", self.label, other.label))
    }

    pub fn scale(&self, c: C64) -> DiffOperator {
        let a = &self.derivs[0];
        let mut op = DiffOperator::new(format!("{c}*{}", self.label), a[2].scale(c), a[1].scale(c), a[0].scale(c));
        op.ladder = self.ladder.as_ref().map(|l| l.scale(c));
        op
    }

    /// Formal adjoint `p̄2 D^2 + (2 p̄2' - p̄1) D + (p̄2'' - p̄1' + p̄0)`.
    pub fn adjoint(&self) -> DiffOperator {
        let d = &self.derivs;
        let p2 = d[0][2].conj();
        let p1 = d[1][2].conj().scale(C64::new(2.0, 0.0)).sub(&d[0][1].conj());
        let p0 = d[2][2].conj().sub(&d[1][1].conj()).add(&d[0][0].conj());
        let mut op = DiffOperator::new(format!("{}^dag", self.label), p2, p1, p0);
        op.ladder = self.ladder.as_ref().map(LadderForm::adjoint);
        op
    }
}
