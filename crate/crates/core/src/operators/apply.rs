//! Three independent ways of evaluating `(L f)(x)`.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64 as C64;

use super::{DiffOperator, LadderForm, OperatorError};
use crate::expr::EvalError;
use crate::families::{FamilyMember, Side};
use crate::function::Function1d;
use crate::jet::Jet;

/// How derivatives of the operand are obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Strategy {
    /// Exact derivatives from the operand's closed form.
    Symbolic,
    /// Exact ladder image of a family member; no differentiation at all.
    FamilyCalculus,
    /// Fourth-order central differences of the operand's values.
    FiniteDifference,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Symbolic, Strategy::FamilyCalculus, Strategy::FiniteDifference];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Symbolic => "symbolic",
            Strategy::FamilyCalculus => "family",
            Strategy::FiniteDifference => "fd",
        }
    }

    pub fn from_name(name: &str) -> Option<Strategy> {
        Strategy::ALL.into_iter().find(|s| s.name() == name)
    }
}

/// `(op f)(x)`.
pub fn apply(op: &DiffOperator, f: &dyn Function1d, x: f64, strategy: Strategy) -> Result<C64, OperatorError> {
    apply_chain(&[op], f, x, strategy)
}

/// `(ops[0] ∘ ops[1] ∘ ... f)(x)`; the last operator acts first.
pub fn apply_chain(ops: &[&DiffOperator], f: &dyn Function1d, x: f64, strategy: Strategy) -> Result<C64, OperatorError> {
    match strategy {
        Strategy::Symbolic => chain_symbolic(ops, f, x),
        Strategy::FamilyCalculus => chain_family(ops, f, x),
        Strategy::FiniteDifference => {
            if ops.len() != 1 {
                return Err(OperatorError::StrategyUnavailable {
                    strategy,
                    reason: "finite differences apply a single operator".into(),
                });
            }
            finite_difference(ops[0], f, x)
        }
    }
}

fn chain_symbolic(ops: &[&DiffOperator], f: &dyn Function1d, x: f64) -> Result<C64, OperatorError> {
    let total: usize = ops.iter().map(|op| op.order()).sum();
    let mut jet = f.jet(x, total).map_err(|e| match e {
        EvalError::NotDifferentiable(label) => OperatorError::StrategyUnavailable {
            strategy: Strategy::Symbolic,
            reason: format!("{label} has no closed-form derivatives"),
        },
        other => OperatorError::Eval(other),
    })?;
    for op in ops.iter().rev() {
        jet = op.apply_jet_at(x, &jet)?;
    }
    Ok(jet.value())
}

fn chain_family(ops: &[&DiffOperator], f: &dyn Function1d, x: f64) -> Result<C64, OperatorError> {
    let unavailable = |reason: String| OperatorError::StrategyUnavailable { strategy: Strategy::FamilyCalculus, reason };
    let member = f.as_member().ok_or_else(|| unavailable(format!("{} is not a family member", f.label())))?;
    let side = member.side();
    let profile = match (side, member.profile()) {
        (Side::Phi | Side::Psi, Some(p)) => Arc::clone(p),
        _ => return Err(unavailable("only phi- and psi-side members have ladder images".into())),
    };
    let mut form = LadderForm::scalar(C64::new(1.0, 0.0));
    for op in ops {
        let l = op.ladder().ok_or_else(|| unavailable(format!("{} has no ladder form", op.label())))?;
        form = form.mul(l);
    }
    let input = BTreeMap::from([(member.hermite_index(), C64::new(member.scale(), 0.0))]);
    let image = form
        .apply(side, &input)
        .ok_or_else(|| unavailable(format!("ladder form does not act within the {side:?} family")))?;
    let mut acc = C64::new(0.0, 0.0);
    for (n, c) in image {
        if c != C64::new(0.0, 0.0) {
            acc += c * FamilyMember::on_side(&profile, side, n).eval(x)?;
        }
    }
    Ok(acc)
}

fn finite_difference(op: &DiffOperator, f: &dyn Function1d, x: f64) -> Result<C64, OperatorError> {
    let h = 1e-4 * x.abs().max(1.0);
    let v = |t: f64| f.value(t);
    let (fm2, fm1, f0, fp1, fp2) = (v(x - 2.0 * h)?, v(x - h)?, v(x)?, v(x + h)?, v(x + 2.0 * h)?);
    let d1 = (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h);
    let d2 = (-fm2 + 16.0 * fm1 - 30.0 * f0 + 16.0 * fp1 - fp2) / (12.0 * h * h);
    let [p0, p1, p2] = op.eval_coefficients(x)?;
    Ok(p2 * d2 + p1 * d1 + p0 * f0)
}

/// `sum_i c_i (L_i1 ∘ L_i2 ∘ ...)`, kept factored so fourth-order products
/// are evaluated by nested application rather than stored.
#[derive(Clone, Debug)]
pub struct OperatorSum {
    pub label: String,
    pub terms: Vec<(C64, Vec<DiffOperator>)>,
}

impl OperatorSum {
    pub fn new(label: impl Into<String>) -> OperatorSum {
        OperatorSum { label: label.into(), terms: Vec::new() }
    }

    pub fn term(mut self, c: f64, ops: &[&DiffOperator]) -> OperatorSum {
        self.terms.push((C64::new(c, 0.0), ops.iter().map(|&o| o.clone()).collect()));
        self
    }

    pub fn eval(&self, f: &dyn Function1d, x: f64, strategy: Strategy) -> Result<C64, OperatorError> {
        let mut acc = C64::new(0.0, 0.0);
        for (c, ops) in &self.terms {
            let refs: Vec<&DiffOperator> = ops.iter().collect();
            acc += c * apply_chain(&refs, f, x, strategy)?;
        }
        Ok(acc)
    }
}

/// The function `L f`, evaluated symbolically.
pub struct OperatorImage {
    op: DiffOperator,
    f: Arc<dyn Function1d>,
}

impl OperatorImage {
    pub fn new(op: DiffOperator, f: Arc<dyn Function1d>) -> OperatorImage {
        OperatorImage { op, f }
    }
}

fn to_eval(e: OperatorError) -> EvalError {
    match e {
        OperatorError::Eval(e) => e,
        other => EvalError::Other(other.to_string()),
    }
}

impl Function1d for OperatorImage {
    fn value(&self, x: f64) -> Result<C64, EvalError> {
        apply(&self.op, self.f.as_ref(), x, Strategy::Symbolic).map_err(to_eval)
    }

    fn jet(&self, x: f64, order: usize) -> Result<Jet, EvalError> {
        let fj = self.f.jet(x, order + self.op.order())?;
        self.op.apply_jet_at(x, &fj).map_err(to_eval)
    }

    fn support(&self) -> Option<(f64, f64)> {
        self.f.support()
    }

    fn decay_window(&self) -> Option<(f64, f64)> {
        self.f.decay_window()
    }

    fn label(&self) -> String {
        format!("{}[{}]", self.op.label(), self.f.label())
    }
}
