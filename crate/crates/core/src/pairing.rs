//! Sesquilinear pairings `<f, g> = integral conj(f(x)) g(x) dx`, the
//! biorthonormality matrix and quasi-basis partial sums.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::expr::EvalError;
use crate::families::{family_values, membership, FamilyMember, Side};
use crate::function::Function1d;
use crate::hermite::normalized_hermite;
use crate::profile::{PbProfile, ProfileError};
use crate::quadrature::{gauss_hermite, integrate_vec, QuadratureError, Tolerance};

/// How a pairing is computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Method {
    /// Adaptive Gauss–Kronrod in `x` over a window grown until the tails vanish.
    AdaptiveX,
    /// Gauss–Hermite in `u = beta_a/sqrt(2k)`; exact for family pairs.
    TransformedGaussHermite,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::AdaptiveX => "adaptive_x",
            Method::TransformedGaussHermite => "transformed_gauss_hermite",
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PairingError {
    #[error("integrand does not decay: tail {tail:e} on window half-width {window}")]
    NonDecaying { tail: f64, window: f64 },
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error("{method:?} is not available here: {reason}")]
    MethodUnavailable { method: Method, reason: String },
    #[error("function is not in the common domain: {0}")]
    NotInDomain(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairingResult {
    pub value: C64,
    pub abs_error_estimate: f64,
    pub method: Method,
    pub truncation_window: (f64, f64),
}

/// Tolerances for [`Method::AdaptiveX`].
#[derive(Debug, Clone, Copy)]
pub struct PairingOptions {
    pub tol: Tolerance,
    /// Tail contributions must fall below `max(tail_abs, tail_rel |I|)`.
    pub tail_abs: f64,
    pub tail_rel: f64,
    /// Window used when neither function reports a support or decay window.
    pub default_half_width: f64,
    pub max_doublings: usize,
    pub initial_panels: usize,
}

impl Default for PairingOptions {
    fn default() -> Self {
        PairingOptions {
            tol: Tolerance { abs: 1e-13, rel: 1e-12 },
            tail_abs: 1e-13,
            tail_rel: 1e-13,
            default_half_width: 8.0,
            max_doublings: 12,
            initial_panels: 32,
        }
    }
}

/// Window of the product `conj(f) g`: intersection of supports, else of decay windows.
fn product_window(fs: &[&dyn Function1d], default: f64) -> ((f64, f64), bool) {
    let mut compact: Option<(f64, f64)> = None;
    for f in fs {
        if let Some((a, b)) = f.support() {
            compact = Some(match compact {
                None => (a, b),
                Some((lo, hi)) => (lo.max(a), hi.min(b)),
            });
        }
    }
    if let Some((a, b)) = compact {
        return ((a, b.max(a)), true);
    }
    let mut decay: Option<(f64, f64)> = None;
    for f in fs {
        if let Some((a, b)) = f.decay_window() {
            decay = Some(match decay {
                None => (a, b),
                Some((lo, hi)) => (lo.max(a), hi.min(b)),
            });
        }
    }
    (decay.unwrap_or((-default, default)), false)
}

/// Integrates a vector of products over the window with tail control.
fn integrate_products<F>(
    integrand: F,
    dim: usize,
    window: (f64, f64),
    compact: bool,
    opts: &PairingOptions,
) -> Result<(Vec<C64>, Vec<f64>, (f64, f64)), PairingError>
where
    F: Fn(f64) -> Result<Vec<C64>, EvalError> + Sync,
{
    let (a, b) = window;
    let core = integrate_vec(&integrand, a, b, dim, opts.tol, opts.initial_panels)?;
    let mut values = core.values;
    let mut errors = core.errors;
    if compact {
        return Ok((values, errors, window));
    }
    let (mut lo, mut hi) = (a, b);
    let mut last_tail = f64::INFINITY;
    let mut stalls = 0;
    for _ in 0..opts.max_doublings {
        let width = (hi - lo).max(1.0);
        let left = integrate_vec(&integrand, lo - width, lo, dim, opts.tol, opts.initial_panels / 4)?;
        let right = integrate_vec(&integrand, hi, hi + width, dim, opts.tol, opts.initial_panels / 4)?;
        let mut tail = 0.0f64;
        let mut scale = 0.0f64;
        for d in 0..dim {
            let t = left.values[d] + right.values[d];
            values[d] += t;
            errors[d] += left.errors[d] + right.errors[d];
            tail = tail.max(t.norm());
            scale = scale.max(values[d].norm());
        }
        lo -= width;
        hi += width;
        let edge = integrand(lo)?.iter().chain(integrand(hi)?.iter()).map(|v| v.norm()).fold(0.0, f64::max);
        if tail <= opts.tail_abs.max(opts.tail_rel * scale) && edge <= 1e-16 * scale.max(1e-300) {
            return Ok((values, errors, (lo, hi)));
        }
        if tail >= 0.5 * last_tail {
            stalls += 1;
            if stalls >= 2 {
                return Err(PairingError::NonDecaying { tail, window: hi.abs().max(lo.abs()) });
            }
        } else {
            stalls = 0;
        }
        last_tail = tail;
    }
    Err(PairingError::NonDecaying { tail: last_tail, window: hi.abs().max(lo.abs()) })
}

fn adaptive(f: &dyn Function1d, g: &dyn Function1d, opts: &PairingOptions) -> Result<PairingResult, PairingError> {
    let (window, compact) = product_window(&[f, g], opts.default_half_width);
    let integrand = |x: f64| -> Result<Vec<C64>, EvalError> {
        let gv = g.value(x)?;
        if gv == C64::new(0.0, 0.0) {
            return Ok(vec![gv]);
        }
        Ok(vec![f.value(x)?.conj() * gv])
    };
    let (v, e, w) = integrate_products(integrand, 1, window, compact, opts)?;
    Ok(PairingResult { value: v[0], abs_error_estimate: e[0], method: Method::AdaptiveX, truncation_window: w })
}

fn same_profile(a: &Arc<PbProfile>, b: &Arc<PbProfile>) -> bool {
    Arc::ptr_eq(a, b)
        || (a.k() == b.k()
            && a.n_phi() == b.n_phi()
            && a.n_psi() == b.n_psi()
            && a.kind() == b.kind()
            && a.source() == b.source())
}

/// `sum_i w_i hhat_n(u_i) hhat_m(u_i)` with enough nodes to be exact.
fn hermite_overlap(n: usize, m: usize) -> f64 {
    let (u, w) = gauss_hermite(n + m + 8);
    let top = n.max(m);
    u.iter()
        .zip(&w)
        .map(|(&ui, &wi)| {
            let h = normalized_hermite(top, ui);
            wi * h[n] * h[m]
        })
        .sum()
}

fn member_pair(f: &FamilyMember, g: &FamilyMember) -> Option<Result<PairingResult, PairingError>> {
    let gh = |value: f64| PairingResult {
        value: C64::new(value, 0.0),
        abs_error_estimate: 0.0,
        method: Method::TransformedGaussHermite,
        truncation_window: (f64::NEG_INFINITY, f64::INFINITY),
    };
    let (n, m) = (f.hermite_index(), g.hermite_index());
    match (f.side(), g.side()) {
        (Side::Oscillator, Side::Oscillator) => {
            Some(Ok(gh(hermite_overlap(n, m) * f.scale() * g.scale())))
        }
        (Side::Psi, Side::Phi) | (Side::Phi, Side::Psi) => {
            let (pf, pg) = (f.profile()?, g.profile()?);
            if !same_profile(pf, pg) {
                return None;
            }
            let (psi_n, phi_m) = if f.side() == Side::Psi { (n, m) } else { (m, n) };
            let k = pf.k();
            let pre = pf.n_psi() * pf.n_phi() * (2.0 * PI * k).sqrt() * k.powf(0.5 * (psi_n as f64 - phi_m as f64));
            Some(Ok(gh(pre * hermite_overlap(n, m) * f.scale() * g.scale())))
        }
        _ => None,
    }
}

fn transformed_generic(
    profile: &Arc<PbProfile>,
    f: &dyn Function1d,
    g: &dyn Function1d,
) -> Result<PairingResult, PairingError> {
    let k = profile.k();
    let s = (2.0 * k).sqrt();
    let rule = |n: usize| -> Result<C64, PairingError> {
        let (u, w) = gauss_hermite(n);
        let mut total = C64::new(0.0, 0.0);
        for (&ui, &wi) in u.iter().zip(&w) {
            let x = profile.beta_a_inverse(s * ui)?;
            let gv = g.value(x)?;
            if gv == C64::new(0.0, 0.0) {
                continue;
            }
            let jac = s * profile.alpha(x)?;
            total += wi * (ui * ui).exp() * jac * f.value(x)?.conj() * gv;
        }
        Ok(total)
    };
    let coarse = rule(64)?;
    let fine = rule(128)?;
    Ok(PairingResult {
        value: fine,
        abs_error_estimate: (fine - coarse).norm(),
        method: Method::TransformedGaussHermite,
        truncation_window: (f64::NEG_INFINITY, f64::INFINITY),
    })
}

/// `<f, g>` with default options.
pub fn inner_product(f: &dyn Function1d, g: &dyn Function1d, method: Method) -> Result<PairingResult, PairingError> {
    inner_product_with(f, g, method, &PairingOptions::default())
}

/// `<f, g>`.
///
/// The Gauss–Hermite route is exact for a psi/phi member pair of one profile
/// or a pair of oscillator functions; for other arguments it needs one of them
/// to be a family member so the change of variables is known.
pub fn inner_product_with(
    f: &dyn Function1d,
    g: &dyn Function1d,
    method: Method,
    opts: &PairingOptions,
) -> Result<PairingResult, PairingError> {
    match method {
        Method::AdaptiveX => adaptive(f, g, opts),
        Method::TransformedGaussHermite => {
            if let (Some(fm), Some(gm)) = (f.as_member(), g.as_member()) {
                if let Some(r) = member_pair(fm, gm) {
                    return r;
                }
            }
            let profile = f
                .as_member()
                .and_then(|m| m.profile())
                .or_else(|| g.as_member().and_then(|m| m.profile()))
                .cloned()
                .ok_or_else(|| PairingError::MethodUnavailable {
                    method,
                    reason: "neither argument fixes a profile for the change of variables".into(),
                })?;
            transformed_generic(&profile, f, g)
        }
    }
}

/// `<member_n, g>` for `n = 0 ..= n_max` on one side, in a single adaptive pass.
pub fn family_pairings(
    profile: &Arc<PbProfile>,
    side: Side,
    n_max: usize,
    g: &dyn Function1d,
    opts: &PairingOptions,
) -> Result<Vec<PairingResult>, PairingError> {
    let probe = FamilyMember::on_side(profile, side, n_max);
    let (window, compact) = product_window(&[&probe, g], opts.default_half_width);
    let integrand = |x: f64| -> Result<Vec<C64>, EvalError> {
        let gv = g.value(x)?;
        if gv == C64::new(0.0, 0.0) {
            return Ok(vec![gv; n_max + 1]);
        }
        let vals = family_values(profile, side, n_max, x)?;
        Ok(vals.into_iter().map(|v| v * gv).collect())
    };
    let (v, e, w) = integrate_products(integrand, n_max + 1, window, compact, opts)?;
    Ok(v.into_iter()
        .zip(e)
        .map(|(value, err)| PairingResult {
            value,
            abs_error_estimate: err,
            method: Method::AdaptiveX,
            truncation_window: w,
        })
        .collect())
}

/// Gram matrix `G[n][m] = <psi_n, phi_m>` for `n, m < size`.
#[derive(Debug, Clone, Serialize)]
pub struct Biorthonormality {
    pub matrix: Vec<Vec<C64>>,
    pub errors: Vec<Vec<f64>>,
    /// `max |G - I|`.
    pub max_deviation: f64,
    pub max_error_estimate: f64,
    pub method: Method,
}

pub fn biorthonormality_matrix(
    profile: &Arc<PbProfile>,
    size: usize,
    method: Method,
) -> Result<Biorthonormality, PairingError> {
    let entries: Result<Vec<Vec<PairingResult>>, PairingError> = (0..size)
        .into_par_iter()
        .map(|n| {
            let psi = FamilyMember::psi(profile, n);
            (0..size)
                .map(|m| inner_product(&psi, &FamilyMember::phi(profile, m), method))
                .collect()
        })
        .collect();
    let entries = entries?;
    let mut max_dev: f64 = 0.0;
    let mut max_err: f64 = 0.0;
    for (n, row) in entries.iter().enumerate() {
        for (m, r) in row.iter().enumerate() {
            let target = if n == m { 1.0 } else { 0.0 };
            max_dev = max_dev.max((r.value - target).norm());
            max_err = max_err.max(r.abs_error_estimate);
        }
    }
    Ok(Biorthonormality {
        matrix: entries.iter().map(|row| row.iter().map(|r| r.value).collect()).collect(),
        errors: entries.iter().map(|row| row.iter().map(|r| r.abs_error_estimate).collect()).collect(),
        max_deviation: max_dev,
        max_error_estimate: max_err,
        method,
    })
}

/// Partial sums of the resolution of the identity in both orderings.
#[derive(Debug, Clone, Serialize)]
pub struct QuasiBasisSums {
    /// `S_N = sum_{n<=N} <f, phi_n><psi_n, g>`.
    pub phi_psi: Vec<C64>,
    /// `S_N = sum_{n<=N} <f, psi_n><phi_n, g>`.
    pub psi_phi: Vec<C64>,
    /// `<f, g>` by adaptive quadrature.
    pub reference: PairingResult,
}

impl QuasiBasisSums {
    /// `|S_N - <f,g>| / |<f,g>|` for the first ordering.
    pub fn relative_errors(&self) -> Vec<f64> {
        let r = self.reference.value;
        self.phi_psi.iter().map(|s| (s - r).norm() / r.norm()).collect()
    }

    /// `|S_N - S'_N| / |<f,g>|` at the largest `N`.
    pub fn ordering_gap(&self) -> f64 {
        match (self.phi_psi.last(), self.psi_phi.last()) {
            (Some(a), Some(b)) => (a - b).norm() / self.reference.value.norm(),
            _ => 0.0,
        }
    }

    /// `max_{N-window <= n <= N} |S_n - S_N| / |<f,g>|` for each ordering, a
    /// reference-free estimate of the remaining truncation error.
    pub fn tail_movement(&self, window: usize) -> (f64, f64) {
        let r = self.reference.value.norm();
        let movement = |s: &[C64]| -> f64 {
            let last = match s.last() {
                Some(v) => *v,
                None => return 0.0,
            };
            s.iter().rev().take(window + 1).map(|v| (v - last).norm() / r).fold(0.0, f64::max)
        };
        (movement(&self.phi_psi), movement(&self.psi_phi))
    }

    /// Relative error of the second ordering at the largest `N`.
    pub fn dual_relative_error(&self) -> f64 {
        let r = self.reference.value;
        self.psi_phi.last().map_or(0.0, |s| (s - r).norm() / r.norm())
    }
}

/// Quasi-basis partial sums `S_0 ..= S_{n_max}` for `f, g` in the common domain.
pub fn quasi_basis_partial_sums(
    profile: &Arc<PbProfile>,
    f: Arc<dyn Function1d>,
    g: Arc<dyn Function1d>,
    n_max: usize,
) -> Result<QuasiBasisSums, PairingError> {
    for h in [&f, &g] {
        let m = membership(profile, Arc::clone(h)).map_err(|e| PairingError::NotInDomain(e.to_string()))?;
        if !m.converged {
            return Err(PairingError::NotInDomain(format!("{} has unbounded transformed norm", h.label())));
        }
    }
    let opts = PairingOptions::default();
    let phi_f = family_pairings(profile, Side::Phi, n_max, f.as_ref(), &opts)?;
    let psi_g = family_pairings(profile, Side::Psi, n_max, g.as_ref(), &opts)?;
    let psi_f = family_pairings(profile, Side::Psi, n_max, f.as_ref(), &opts)?;
    let phi_g = family_pairings(profile, Side::Phi, n_max, g.as_ref(), &opts)?;
    let partial = |left: &[PairingResult], right: &[PairingResult]| -> Vec<C64> {
        let mut acc = C64::new(0.0, 0.0);
        left.iter()
            .zip(right)
            .map(|(l, r)| {
                // <f, h_n> = conj(<h_n, f>)
                acc += l.value.conj() * r.value;
                acc
            })
            .collect()
    };
    Ok(QuasiBasisSums {
        phi_psi: partial(&phi_f, &psi_g),
        psi_phi: partial(&psi_f, &phi_g),
        reference: inner_product(f.as_ref(), g.as_ref(), Method::AdaptiveX)?,
    })
}
