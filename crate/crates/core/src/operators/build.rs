//! Named operators of a profile: the pseudo-bosonic pair, the two deformed
//! su(1,1) triples, their Casimirs, and the squeezing operators.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::apply::{OperatorSum, Strategy};
use super::catalog::{grid, residual_on_grid, GRID_HALF_WIDTH, GRID_POINTS};
use super::ladder::{LadderForm, Letter};
use super::{CExpr, DiffOperator, OperatorError};
use crate::expr::Expr;
use crate::function::standard_test_functions;
use crate::profile::PbProfile;
use crate::squeeze::SqueezeParams;

/// Tables and compositions must agree to this relative accuracy.
const TABLE_TOL: f64 = 1e-12;
/// Cancelled orders of a Casimir may not exceed this relative size.
const CANCELLATION_TOL: f64 = 1e-8;
/// `H` and `BA` must agree to this relative accuracy.
const SQUEEZE_H_TOL: f64 = 1e-10;
/// `[A, B] f = f` must hold to this relative accuracy on the test functions.
const SQUEEZE_COMMUTATOR_TOL: f64 = 1e-8;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// `a`, `b` and their formal adjoints.
#[derive(Clone, Debug)]
pub struct LadderOperators {
    pub a: DiffOperator,
    pub b: DiffOperator,
    pub a_dag: DiffOperator,
    pub b_dag: DiffOperator,
}

struct Pieces {
    k: Expr,
    alpha: Expr,
    alpha1: Expr,
    alpha2: Expr,
    beta: Expr,
}

fn pieces(profile: &PbProfile) -> Pieces {
    Pieces {
        k: Expr::constant(profile.k()),
        alpha: profile.alpha_expr().clone(),
        alpha1: profile.alpha_derivative_expr(1).clone(),
        alpha2: profile.alpha_derivative_expr(2).clone(),
        beta: profile.beta_a_expr().clone(),
    }
}

/// `a = k alpha D + beta_a`, `b = -alpha D`, `a^dagger = -k alpha D + beta_a - k alpha'`,
/// `b^dagger = alpha D + alpha'`.
pub fn build_ab(profile: &PbProfile) -> LadderOperators {
    let p = pieces(profile);
    let zero = Expr::zero();
    let a = DiffOperator::real("a", zero.clone(), &p.k * &p.alpha, p.beta.clone())
        .with_ladder(LadderForm::letter(Letter::A));
    let b = DiffOperator::real("b", zero.clone(), -&p.alpha, zero.clone()).with_ladder(LadderForm::letter(Letter::B));
    let a_dag = DiffOperator::real("a_dag", zero.clone(), -(&p.k * &p.alpha), &p.beta - &p.k * &p.alpha1)
        .with_ladder(LadderForm::letter(Letter::ADag));
    let b_dag = DiffOperator::real("b_dag", zero, p.alpha.clone(), p.alpha1.clone())
        .with_ladder(LadderForm::letter(Letter::BDag));
    LadderOperators { a, b, a_dag, b_dag }
}

/// Which deformed su(1,1) triple.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Triple {
    K,
    P,
}

/// `k_+, k_-, k_0` acting on the phi side and `p_+, p_-, p_0` on the psi side.
#[derive(Clone, Debug)]
pub struct Su11Triples {
    pub k_plus: DiffOperator,
    pub k_minus: DiffOperator,
    pub k_zero: DiffOperator,
    pub p_plus: DiffOperator,
    pub p_minus: DiffOperator,
    pub p_zero: DiffOperator,
}

impl Su11Triples {
    /// `(x_+, x_-, x_0)` of the chosen triple.
    pub fn triple(&self, which: Triple) -> (&DiffOperator, &DiffOperator, &DiffOperator) {
        match which {
            Triple::K => (&self.k_plus, &self.k_minus, &self.k_zero),
            Triple::P => (&self.p_plus, &self.p_minus, &self.p_zero),
        }
    }
}

/// The six operators written out coefficient by coefficient.
fn tables(profile: &PbProfile) -> [DiffOperator; 6] {
    let Pieces { k, alpha: a, alpha1: a1, alpha2: a2, beta: b } = pieces(profile);
    let half = |e: Expr| 0.5 * e;
    let k_plus = DiffOperator::real("k_plus", half(&a * &a), half(&a * &a1), Expr::zero());
    let k_minus = DiffOperator::real(
        "k_minus",
        half(&k * &k * &a * &a),
        half(&k * &a * (&k * &a1 + 2.0 * &b)),
        half(&b * &b + &k),
    );
    let k_zero = DiffOperator::real(
        "k_zero",
        -half(&k * &a * &a),
        -half(&a * (&b + &k * &a1)),
        Expr::constant(-0.25),
    );
    let p_plus = DiffOperator::real(
        "p_plus",
        half(&k * &k * &a * &a),
        half(&k * &a * (3.0 * &k * &a1 - 2.0 * &b)),
        half(&b * &b - &k + &k * &k * &a1 * &a1 + &k * &k * &a * &a2 - 2.0 * &k * &a1 * &b),
    );
    let p_minus = DiffOperator::real(
        "p_minus",
        half(&a * &a),
        half(3.0 * &a * &a1),
        half(&a * &a2 + &a1 * &a1),
    );
    let p_zero = DiffOperator::real(
        "p_zero",
        half(-(&k * &a * &a)),
        half(&a * (&b - 3.0 * &k * &a1)),
        half(&b * &a1 - &k * &a1 * &a1 - &k * &a * &a2 + 0.5),
    );
    [k_plus, k_minus, k_zero, p_plus, p_minus, p_zero]
}

/// The same six operators composed from `a, b, a^dagger, b^dagger`.
fn compositions(ab: &LadderOperators) -> Result<[DiffOperator; 6], OperatorError> {
    let quarter = DiffOperator::scalar("1/4", c(0.25));
    let half = c(0.5);
    Ok([
        ab.b.compose(&ab.b)?.scale(half),
        ab.a.compose(&ab.a)?.scale(half),
        ab.b.compose(&ab.a)?.scale(half).add(&quarter),
        ab.a_dag.compose(&ab.a_dag)?.scale(half),
        ab.b_dag.compose(&ab.b_dag)?.scale(half),
        ab.a_dag.compose(&ab.b_dag)?.scale(half).add(&quarter),
    ])
}

fn relative_gap(u: C64, v: C64) -> f64 {
    (u - v).norm() / v.norm().max(1.0)
}

/// Largest relative disagreement of two operators' coefficients on the
/// standard grid, with the point where it occurs.
fn coefficient_gap(l: &DiffOperator, r: &DiffOperator) -> Result<(f64, f64), OperatorError> {
    let xs = grid(GRID_HALF_WIDTH, GRID_POINTS);
    let gaps: Result<Vec<(f64, f64)>, OperatorError> = xs
        .par_iter()
        .map(|&x| {
            let (u, v) = (l.eval_coefficients(x)?, r.eval_coefficients(x)?);
            let g = (0..3).map(|j| relative_gap(u[j], v[j])).fold(0.0, f64::max);
            Ok((g, x))
        })
        .collect();
    Ok(gaps?.into_iter().fold((0.0, 0.0), |acc, g| if g.0 > acc.0 { g } else { acc }))
}

/// Per operator, the largest relative gap between the written-out table and
/// the composition of ladder operators, and the point where it occurs.
pub fn coefficient_table_mismatch(profile: &PbProfile) -> Result<Vec<(String, f64, f64)>, OperatorError> {
    let t = tables(profile);
    let comp = compositions(&build_ab(profile))?;
    t.iter()
        .zip(comp.iter())
        .map(|(tab, com)| {
            let (gap, x) = coefficient_gap(tab, com)?;
            Ok((tab.label().to_string(), gap, x))
        })
        .collect()
}

/// Builds both triples from their tables, checking each table against the
/// composition of ladder operators.
pub fn build_su11(profile: &PbProfile) -> Result<Su11Triples, OperatorError> {
    for (label, error, x) in coefficient_table_mismatch(profile)? {
        if !(error <= TABLE_TOL) {
            return Err(OperatorError::CoefficientMismatch { label, x, error });
        }
    }
    let half = c(0.5);
    let quarter = LadderForm::scalar(c(0.25));
    let word = |l1, l2| LadderForm::word(half, &[l1, l2]);
    let [k_plus, k_minus, k_zero, p_plus, p_minus, p_zero] = tables(profile);
    Ok(Su11Triples {
        k_plus: k_plus.with_ladder(word(Letter::B, Letter::B)),
        k_minus: k_minus.with_ladder(word(Letter::A, Letter::A)),
        k_zero: k_zero.with_ladder(word(Letter::B, Letter::A).add(&quarter)),
        p_plus: p_plus.with_ladder(word(Letter::ADag, Letter::ADag)),
        p_minus: p_minus.with_ladder(word(Letter::BDag, Letter::BDag)),
        p_zero: p_zero.with_ladder(word(Letter::ADag, Letter::BDag).add(&quarter)),
    })
}

/// `x_0 x_0 + x_0 - x_- x_+` kept as a sum of nested applications.
pub fn casimir_sum(triples: &Su11Triples, which: Triple) -> OperatorSum {
    let (plus, minus, zero) = triples.triple(which);
    let label = match which {
        Triple::K => "k^2",
        Triple::P => "p^2",
    };
    OperatorSum::new(label).term(1.0, &[zero, zero]).term(1.0, &[zero]).term(-1.0, &[minus, plus])
}

/// The Casimir as an operator: expands the fourth-order products, verifies
/// that every derivative order above zero cancels on the standard grid, and
/// returns the remaining multiplication operator.
pub fn casimir(profile: &PbProfile, which: Triple) -> Result<DiffOperator, OperatorError> {
    let t = build_su11(profile)?;
    let (plus, minus, zero) = t.triple(which);
    let zz = zero.expand_product(zero);
    let mp = minus.expand_product(plus);
    let z = [zero.coefficient(0).clone(), zero.coefficient(1).clone(), zero.coefficient(2).clone()];
    let total: Vec<CExpr> = (0..5)
        .map(|s| {
            let lin = if s < 3 { z[s].clone() } else { CExpr::zero() };
            zz[s].add(&lin).sub(&mp[s])
        })
        .collect();
    let xs = grid(GRID_HALF_WIDTH, GRID_POINTS);
    let worst = xs
        .par_iter()
        .map(|&x| -> Result<f64, OperatorError> {
            let mut w: f64 = 0.0;
            for s in 1..5 {
                let scale = zz[s].eval(x)?.norm() + mp[s].eval(x)?.norm();
                w = w.max(total[s].eval(x)?.norm() / scale.max(1.0));
            }
            Ok(w)
        })
        .collect::<Result<Vec<f64>, _>>()?
        .into_iter()
        .fold(0.0, f64::max);
    if !(worst <= CANCELLATION_TOL) {
        return Err(OperatorError::CancellationFailure(worst));
    }
    let ladder = match (zero.ladder(), plus.ladder(), minus.ladder()) {
        (Some(z), Some(p), Some(m)) => Some(z.mul(z).add(z).add(&m.mul(p).scale(c(-1.0)))),
        _ => None,
    };
    let label = match which {
        Triple::K => "k^2",
        Triple::P => "p^2",
    };
    let op = DiffOperator::new(label, CExpr::zero(), CExpr::zero(), total[0].clone());
    Ok(match ladder {
        Some(l) => op.with_ladder(l),
        None => op,
    })
}

/// `A`, `B`, their adjoints, and `H = B A` for a squeeze parameter.
#[derive(Clone, Debug)]
pub struct SqueezeOperators {
    pub a_op: DiffOperator,
    pub b_op: DiffOperator,
    pub a_dag: DiffOperator,
    pub b_dag: DiffOperator,
    pub h: DiffOperator,
}

fn squeeze_pair(profile: &PbProfile, z: &SqueezeParams) -> Result<(LadderOperators, DiffOperator, DiffOperator), OperatorError> {
    if profile.k() != 1.0 {
        return Err(OperatorError::RequiresUnitK(profile.k()));
    }
    let ab = build_ab(profile);
    let (ch, sh) = (z.r().cosh(), z.r().sinh());
    let phase = C64::from_polar(1.0, z.theta());
    let a_op = ab.a.scale(c(ch)).add(&ab.b.scale(phase * sh)).with_label("A");
    let b_op = ab.b.scale(c(ch)).add(&ab.a.scale(phase.conj() * sh)).with_label("B");
    Ok((ab, a_op, b_op))
}

/// Measured gaps of the two squeeze identities.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct SqueezeIdentityGaps {
    /// Worst relative coefficient gap of `B A` against its expansion, and where.
    pub hamiltonian: f64,
    pub hamiltonian_x: f64,
    /// Worst relative residual of `[A, B] f - f` over the standard test functions.
    pub commutator: f64,
}

/// `B A` against `mu b a + lambda(z) a^2 + lambda(conj z) b^2 + sinh^2 r`
/// on the standard grid, and `[A, B] f = f` on the standard test functions.
pub fn squeeze_identity_gaps(profile: &PbProfile, z: &SqueezeParams) -> Result<SqueezeIdentityGaps, OperatorError> {
    let (ab, a_op, b_op) = squeeze_pair(profile, z)?;
    let sh = z.r().sinh();
    let h = b_op.compose(&a_op)?;
    let expanded = ab
        .b
        .compose(&ab.a)?
        .scale(c(z.mu()))
        .add(&ab.a.compose(&ab.a)?.scale(z.lambda()))
        .add(&ab.b.compose(&ab.b)?.scale(z.lambda_conj()))
        .add(&DiffOperator::scalar("sinh^2 r", c(sh * sh)));
    let (hamiltonian, hamiltonian_x) = coefficient_gap(&h, &expanded)?;
    let comm = OperatorSum::new("[A,B]").term(1.0, &[&a_op, &b_op]).term(-1.0, &[&b_op, &a_op]);
    let mut commutator: f64 = 0.0;
    for f in standard_test_functions() {
        let residual = residual_on_grid(GRID_HALF_WIDTH, GRID_POINTS, |x| {
            Ok((comm.eval(f.as_ref(), x, Strategy::Symbolic)?, f.value(x)?))
        })?;
        commutator = commutator.max(residual);
    }
    Ok(SqueezeIdentityGaps { hamiltonian, hamiltonian_x, commutator })
}

/// `A = cosh r a + e^{i theta} sinh r b`, `B = cosh r b + e^{-i theta} sinh r a`
/// with `k = 1`, after both squeeze identities hold.
pub fn build_squeeze_operators(profile: &PbProfile, z: &SqueezeParams) -> Result<SqueezeOperators, OperatorError> {
    let gaps = squeeze_identity_gaps(profile, z)?;
    if !(gaps.hamiltonian <= SQUEEZE_H_TOL) {
        return Err(OperatorError::CoefficientMismatch { label: "H".into(), x: gaps.hamiltonian_x, error: gaps.hamiltonian });
    }
    if !(gaps.commutator <= SQUEEZE_COMMUTATOR_TOL) {
        return Err(OperatorError::IdentityFailure { label: "[A,B]".into(), residual: gaps.commutator });
    }
    let (_, a_op, b_op) = squeeze_pair(profile, z)?;
    let h = b_op.compose(&a_op)?.with_label("H");
    Ok(SqueezeOperators { a_dag: a_op.adjoint().with_label("A_dag"), b_dag: b_op.adjoint().with_label("B_dag"), a_op, b_op, h })
}
