//! Weak squeezed states: the functionals `F_tau[z]`, `F_kappa[z]` given by
//! series over the even family members, their closed forms, and the checks
//! that `A` and `B^dagger` annihilate them against compactly supported tests.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::expr::EvalError;
use crate::families::{transformed_norm, Side, TransformKind};
use crate::function::{Bump, BumpShape, Function1d};
use crate::hermite::ln_factorial;
use crate::jet::Jet;
use crate::operators::{build_squeeze_operators, OperatorError, OperatorImage};
use crate::pairing::{family_pairings, inner_product, Method, PairingError, PairingOptions};
use crate::profile::{PbProfile, ProfileError};

/// Largest number of series terms an automatic truncation may use.
pub const MAX_SERIES_TERMS: usize = 1500;
/// Coefficient cancellation is evaluated up to this index.
pub const MAX_CANCELLATION_INDEX: usize = 40;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SqueezeError {
    #[error("squeezed states need k = 1, got k = {0}")]
    RequiresUnitK(f64),
    #[error("invalid squeeze parameter: {0}")]
    InvalidParameter(String),
    #[error("test function is not in the common domain: {0}")]
    NotInDomain(String),
    #[error("series tail bound {bound:e} still above tolerance after {terms} terms")]
    SeriesNotConverged { terms: usize, bound: f64 },
    #[error(transparent)]
    Pairing(#[from] PairingError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// `z = r e^{i theta}` with the derived scalars.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SqueezeParams {
    r: f64,
    theta: f64,
}

impl SqueezeParams {
    pub fn new(r: f64, theta: f64) -> Result<SqueezeParams, SqueezeError> {
        if !(r >= 0.0 && r.is_finite()) {
            return Err(SqueezeError::InvalidParameter(format!("r must be finite and non-negative, got {r}")));
        }
        if !theta.is_finite() {
            return Err(SqueezeError::InvalidParameter(format!("theta must be finite, got {theta}")));
        }
        Ok(SqueezeParams { r, theta })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    fn phase(&self) -> C64 {
        C64::from_polar(1.0, self.theta)
    }

    /// `cosh 2r`.
    pub fn mu(&self) -> f64 {
        (2.0 * self.r).cosh()
    }

    /// `lambda(z) = e^{-i theta} cosh r sinh r`.
    pub fn lambda(&self) -> C64 {
        self.phase().conj() * (self.r.cosh() * self.r.sinh())
    }

    /// `lambda(conj z) = e^{i theta} cosh r sinh r`.
    pub fn lambda_conj(&self) -> C64 {
        self.lambda().conj()
    }

    /// `-ln(cosh r)/2`.
    pub fn nu(&self) -> f64 {
        -0.5 * self.r.cosh().ln()
    }

    /// `eta(z) = -e^{i theta} tanh(r)/2`.
    pub fn eta(&self) -> C64 {
        self.phase() * (-0.5 * self.r.tanh())
    }

    /// `1/(1 - e^{i theta} tanh r)`.
    pub fn d_tau(&self) -> C64 {
        1.0 / (1.0 - self.phase() * self.r.tanh())
    }

    /// `d_tau - 1`.
    pub fn d_kappa(&self) -> C64 {
        self.d_tau() - 1.0
    }

    /// `(cosh r - e^{i theta} sinh r)^{-1/2}` on the principal branch: the
    /// factor relating the closed forms to the vacuum normalizations.
    pub fn norm_factor(&self) -> C64 {
        let w = self.r.cosh() - self.phase() * self.r.sinh();
        1.0 / w.sqrt()
    }
}

/// How many series terms to sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Truncation {
    /// Terms `k = 0 ..= K`.
    Fixed(usize),
    /// The fewest terms whose tail bound is below `tol`.
    Auto { tol: f64 },
}

/// Partial sums of a squeezed-state functional.
#[derive(Debug, Clone, Serialize)]
pub struct SeriesReport {
    /// `S_0 ..= S_K`.
    pub partial_sums: Vec<C64>,
    pub value: C64,
    /// Index `K` of the last term.
    pub terms: usize,
    /// Bound on `|sum_{k > K} ...|`.
    pub tail_bound: f64,
    /// Sum of the quadrature error estimates weighted by the coefficients.
    pub quadrature_error: f64,
    /// Ratios `t_{k+1}/t_k` of the coefficient magnitudes; they increase to `tanh r`.
    pub last_ratio: f64,
}

/// `ln |e^nu eta^k sqrt((2k)!)/k!|`.
fn ln_coefficient(z: &SqueezeParams, k: usize) -> f64 {
    let ln_eta = (0.5 * z.r.tanh()).ln();
    let power = if k == 0 { 0.0 } else { k as f64 * ln_eta };
    z.nu() + power + 0.5 * ln_factorial(2 * k) - ln_factorial(k)
}

/// `e^nu eta(conj z)^k sqrt((2k)!)/k!`.
fn coefficient(z: &SqueezeParams, k: usize) -> C64 {
    if k > 0 && z.r == 0.0 {
        return C64::new(0.0, 0.0);
    }
    let arg = z.eta().conj().arg();
    C64::from_polar(ln_coefficient(z, k).exp(), k as f64 * arg)
}

/// Bound on the tail `sum_{k > K} |c_k|` using that `|c_{k+1}/c_k|` increases to `tanh r`.
fn coefficient_tail(z: &SqueezeParams, last: usize) -> f64 {
    if z.r == 0.0 {
        return 0.0;
    }
    ln_coefficient(z, last + 1).exp() / (1.0 - z.r.tanh())
}

fn require_unit_k(profile: &PbProfile) -> Result<(), SqueezeError> {
    if profile.k() == 1.0 {
        Ok(())
    } else {
        Err(SqueezeError::RequiresUnitK(profile.k()))
    }
}

fn functional(
    profile: &Arc<PbProfile>,
    z: &SqueezeParams,
    g: Arc<dyn Function1d>,
    truncation: Truncation,
    side: Side,
) -> Result<SeriesReport, SqueezeError> {
    require_unit_k(profile)?;
    let (kind, norm_const) = match side {
        Side::Phi => (TransformKind::Plus, profile.n_phi()),
        _ => (TransformKind::Minus, profile.n_psi()),
    };
    let membership = transformed_norm(profile, Arc::clone(&g), TransformKind::Minus)
        .map_err(|e| SqueezeError::NotInDomain(e.to_string()))?;
    if !membership.converged {
        return Err(SqueezeError::NotInDomain(format!("{} has unbounded transformed norm", g.label())));
    }
    let g_norm = if kind == TransformKind::Minus {
        membership.norm
    } else {
        transformed_norm(profile, Arc::clone(&g), kind)
            .map_err(|e| SqueezeError::NotInDomain(e.to_string()))?
            .norm
    };
    // |<h_n, g>| <= |N| pi^{1/4} sqrt(2) ||g_t||
    let pairing_bound = norm_const.abs() * PI.powf(0.25) * 2f64.sqrt() * g_norm;
    let last = match truncation {
        Truncation::Fixed(k) => k,
        Truncation::Auto { tol } => {
            let mut k = 0;
            while coefficient_tail(z, k) * pairing_bound >= tol {
                k += 1;
                if k > MAX_SERIES_TERMS {
                    return Err(SqueezeError::SeriesNotConverged {
                        terms: k,
                        bound: coefficient_tail(z, k) * pairing_bound,
                    });
                }
            }
            k
        }
    };
    let pairings = family_pairings(profile, side, 2 * last, g.as_ref(), &PairingOptions::default())?;
    let mut acc = C64::new(0.0, 0.0);
    let mut quadrature_error = 0.0;
    let mut partial_sums = Vec::with_capacity(last + 1);
    for k in 0..=last {
        let c = coefficient(z, k);
        acc += c * pairings[2 * k].value;
        quadrature_error += c.norm() * pairings[2 * k].abs_error_estimate;
        partial_sums.push(acc);
    }
    let last_ratio = if z.r == 0.0 {
        0.0
    } else {
        (ln_coefficient(z, last + 1) - ln_coefficient(z, last)).exp()
    };
    Ok(SeriesReport {
        value: acc,
        partial_sums,
        terms: last,
        tail_bound: coefficient_tail(z, last) * pairing_bound,
        quadrature_error,
        last_ratio,
    })
}

/// `F_tau[z](g) = e^nu sum_k eta(conj z)^k sqrt((2k)!)/k! <phi_{2k}, g>`.
pub fn functional_tau(
    profile: &Arc<PbProfile>,
    z: &SqueezeParams,
    g: Arc<dyn Function1d>,
    truncation: Truncation,
) -> Result<SeriesReport, SqueezeError> {
    functional(profile, z, g, truncation, Side::Phi)
}

/// `F_kappa[z](g) = e^nu sum_k eta(conj z)^k sqrt((2k)!)/k! <psi_{2k}, g>`.
pub fn functional_kappa(
    profile: &Arc<PbProfile>,
    z: &SqueezeParams,
    g: Arc<dyn Function1d>,
    truncation: Truncation,
) -> Result<SeriesReport, SqueezeError> {
    functional(profile, z, g, truncation, Side::Psi)
}

/// Which closed-form state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SqueezedKind {
    Tau,
    Kappa,
}

/// `tau(z) = N_tau exp(-d_tau beta_a^2/2)` or
/// `kappa(z) = N_kappa exp(-d_kappa beta_a^2/2) beta_a'`.
#[derive(Clone)]
pub struct SqueezedState {
    profile: Arc<PbProfile>,
    kind: SqueezedKind,
    d: C64,
    norm: C64,
    z: SqueezeParams,
}

impl SqueezedState {
    pub fn new(profile: &Arc<PbProfile>, z: &SqueezeParams, kind: SqueezedKind) -> SqueezedState {
        let (d, n) = match kind {
            SqueezedKind::Tau => (z.d_tau(), profile.n_phi()),
            SqueezedKind::Kappa => (z.d_kappa(), profile.n_psi()),
        };
        SqueezedState { profile: Arc::clone(profile), kind, d, norm: n * z.norm_factor(), z: *z }
    }

    pub fn kind(&self) -> SqueezedKind {
        self.kind
    }

    /// `N_tau` or `N_kappa`.
    pub fn normalization(&self) -> C64 {
        self.norm
    }

    /// `d_tau` or `d_kappa`.
    pub fn exponent_coefficient(&self) -> C64 {
        self.d
    }
}

impl Function1d for SqueezedState {
    fn value(&self, x: f64) -> Result<C64, EvalError> {
        let b = self.profile.beta_a(x)?;
        let mut v = self.norm * (-0.5 * self.d * b * b).exp();
        if self.kind == SqueezedKind::Kappa {
            v *= self.profile.inv_alpha(x)?;
        }
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite { x, value: v.norm() })
        }
    }

    fn jet(&self, x: f64, order: usize) -> Result<Jet, EvalError> {
        let b = self.profile.beta_jet(x, order)?;
        let mut out = b.mul(&b).scale(-0.5 * self.d).exp().scale(self.norm);
        if self.kind == SqueezedKind::Kappa {
            out = out.mul(&self.profile.inv_alpha_jet(x, order)?);
        }
        Ok(out)
    }

    fn label(&self) -> String {
        let name = match self.kind {
            SqueezedKind::Tau => "tau",
            SqueezedKind::Kappa => "kappa",
        };
        format!("{name}(r={}, theta={})", self.z.r, self.z.theta)
    }
}

/// `(tau(z), kappa(z))`.
pub fn closed_form_states(
    profile: &Arc<PbProfile>,
    z: &SqueezeParams,
) -> Result<(SqueezedState, SqueezedState), SqueezeError> {
    require_unit_k(profile)?;
    Ok((SqueezedState::new(profile, z, SqueezedKind::Tau), SqueezedState::new(profile, z, SqueezedKind::Kappa)))
}

/// `<A^dagger g, tau(z)>` and `<B g, kappa(z)>` with `||g||`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AnnihilationResidual {
    pub tau: C64,
    pub kappa: C64,
    pub g_norm: f64,
}

impl AnnihilationResidual {
    /// `max(|tau|, |kappa|)/||g||`.
    pub fn relative(&self) -> f64 {
        self.tau.norm().max(self.kappa.norm()) / self.g_norm
    }
}

fn pair(f: &dyn Function1d, g: &dyn Function1d) -> Result<C64, SqueezeError> {
    Ok(inner_product(f, g, Method::AdaptiveX)?.value)
}

/// Annihilation residuals against the closed forms, by adaptive quadrature.
pub fn annihilation_residual(
    profile: &Arc<PbProfile>,
    z: &SqueezeParams,
    g: Arc<dyn Function1d>,
) -> Result<AnnihilationResidual, SqueezeError> {
    let ops = build_squeeze_operators(profile, z)?;
    let (tau, kappa) = closed_form_states(profile, z)?;
    let a_dag_g = OperatorImage::new(ops.a_dag.clone(), Arc::clone(&g));
    let b_g = OperatorImage::new(ops.b_op.clone(), Arc::clone(&g));
    Ok(AnnihilationResidual {
        tau: pair(&a_dag_g, &tau)?,
        kappa: pair(&b_g, &kappa)?,
        g_norm: pair(g.as_ref(), g.as_ref())?.re.sqrt(),
    })
}

/// Annihilation residuals `conj(F_tau[z](A^dagger g))`, `conj(F_kappa[z](B g))`
/// from the truncated series.
pub fn annihilation_residual_series(
    profile: &Arc<PbProfile>,
    z: &SqueezeParams,
    g: Arc<dyn Function1d>,
    truncation: Truncation,
) -> Result<(SeriesReport, SeriesReport), SqueezeError> {
    let ops = build_squeeze_operators(profile, z)?;
    let a_dag_g: Arc<dyn Function1d> = Arc::new(OperatorImage::new(ops.a_dag.clone(), Arc::clone(&g)));
    let b_g: Arc<dyn Function1d> = Arc::new(OperatorImage::new(ops.b_op.clone(), g));
    Ok((
        functional_tau(profile, z, a_dag_g, truncation)?,
        functional_kappa(profile, z, b_g, truncation)?,
    ))
}

/// `alpha_tau(2n+2) + beta_tau(2n)` relative to the larger term, per `n`.
#[derive(Debug, Clone, Serialize)]
pub struct Cancellation {
    pub relative: Vec<f64>,
    pub max_relative: f64,
}

/// Evaluates both coefficient formulas in the log domain with `N_phi = 1`
/// and returns their relative sums for `n = 0 ..= n_max`.
pub fn coefficient_cancellation(z: &SqueezeParams, n_max: usize) -> Result<Cancellation, SqueezeError> {
    if n_max > MAX_CANCELLATION_INDEX {
        return Err(SqueezeError::InvalidParameter(format!(
            "cancellation index {n_max} above {MAX_CANCELLATION_INDEX}"
        )));
    }
    let eta = z.eta();
    let (ln_eta, arg_eta) = (eta.norm().ln(), eta.arg());
    let ln_root_pi = 0.5 * PI.ln();
    // ln|.| and phase of alpha_tau(n) and beta_tau(n) for even n = 2j
    let common = |j: usize| -> (f64, f64) {
        let power = if j == 0 { 0.0 } else { j as f64 * ln_eta };
        (z.nu() + 0.5 * ln_factorial(2 * j) - ln_factorial(j) + power, j as f64 * arg_eta)
    };
    let alpha_tau = |j: usize| -> (f64, f64) {
        let (l, p) = common(j);
        (l + z.r.cosh().ln() + 0.5 * (2.0 * (2 * j) as f64).ln() + 0.5 * ln_root_pi, p)
    };
    let beta_tau = |j: usize| -> (f64, f64) {
        let (l, p) = common(j);
        (l + z.r.sinh().ln() + 0.5 * (2.0 * (2 * j + 1) as f64).ln() + 0.5 * ln_root_pi, p + z.theta)
    };
    let relative: Vec<f64> = (0..=n_max)
        .map(|n| {
            let (la, pa) = alpha_tau(n + 1);
            let (lb, pb) = beta_tau(n);
            if la == f64::NEG_INFINITY && lb == f64::NEG_INFINITY {
                return 0.0;
            }
            let (big, small) = if la >= lb { ((la, pa), (lb, pb)) } else { ((lb, pb), (la, pa)) };
            // |e^{big} + e^{small}| / e^{big}
            (C64::new(1.0, 0.0) + C64::from_polar((small.0 - big.0).exp(), small.1 - big.1)).norm()
        })
        .collect();
    let max_relative = relative.iter().copied().fold(0.0, f64::max);
    Ok(Cancellation { relative, max_relative })
}

/// `exp(-1/(1-x^2))` on `|x| < 1`.
pub fn standard_bump() -> Bump {
    Bump::new(0.0, 1.0, 1.0, BumpShape::Even)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::ProfileKind;

    fn unit_profile() -> Arc<PbProfile> {
        Arc::new(PbProfile::builtin(ProfileKind::Constant { alpha: 1.0 }, 1.0).unwrap())
    }

    #[test]
    fn zero_squeeze_scalars() {
        let z = SqueezeParams::new(0.0, 1.3).unwrap();
        assert_eq!(z.nu(), 0.0);
        assert_eq!(z.eta().norm(), 0.0);
        assert_eq!(z.d_tau(), C64::new(1.0, 0.0));
        assert_eq!(z.d_kappa().norm(), 0.0);
        assert_eq!(z.norm_factor(), C64::new(1.0, 0.0));
    }

    #[test]
    fn negative_r_is_rejected() {
        assert!(SqueezeParams::new(-0.1, 0.0).is_err());
    }

    #[test]
    fn cancellation_holds() {
        let z = SqueezeParams::new(1.2, 2.0).unwrap();
        let c = coefficient_cancellation(&z, 20).unwrap();
        assert!(c.max_relative <= 1e-12, "{c:?}");
    }

    #[test]
    fn zero_squeeze_functional_is_vacuum_pairing() {
        let p = unit_profile();
        let z = SqueezeParams::new(0.0, 0.0).unwrap();
        let g: Arc<dyn Function1d> = Arc::new(standard_bump());
        let s = functional_tau(&p, &z, Arc::clone(&g), Truncation::Auto { tol: 1e-10 }).unwrap();
        let direct = inner_product(&crate::families::FamilyMember::phi(&p, 0), g.as_ref(), Method::AdaptiveX).unwrap();
        assert_eq!(s.terms, 0);
        assert!((s.value - direct.value).norm() < 1e-14);
    }

    #[test]
    fn closed_form_jet_matches_difference() {
        let p = unit_profile();
        let z = SqueezeParams::new(0.4, 0.7).unwrap();
        let (tau, kappa) = closed_form_states(&p, &z).unwrap();
        let h = 1e-5;
        for s in [&tau, &kappa] {
            let x = 0.3;
            let fd = (s.value(x + h).unwrap() - s.value(x - h).unwrap()) / (2.0 * h);
            assert!((s.jet(x, 1).unwrap().deriv(1) - fd).norm() < 1e-8);
        }
    }
}
