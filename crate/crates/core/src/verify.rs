//! Runs the relation catalog and reports one record per relation.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::function::{Bump, ClosureFn, Function1d};
use crate::hermite::{pi_n, sigma_n, RecursiveFamily};
use crate::operators::{
    ladder_residual, relation_ids, squeeze_identity_gaps, OperatorError, Strategy, GRID_HALF_WIDTH,
};
use crate::pairing::{biorthonormality_matrix, inner_product, quasi_basis_partial_sums, Method};
use crate::profile::PbProfile;
use crate::squeeze::{
    annihilation_residual, closed_form_states, coefficient_cancellation, functional_kappa, functional_tau,
    standard_bump, SqueezeParams, Truncation,
};

/// Relative residual bound for exact-derivative and ladder-image paths.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Relative residual bound for finite-difference paths.
pub const FD_TOL: f64 = 1e-5;
/// Coefficient tables must match compositions to this accuracy.
pub const TABLE_TOL: f64 = 1e-12;
pub const BIORTHONORMALITY_GH_TOL: f64 = 1e-10;
pub const BIORTHONORMALITY_ADAPTIVE_TOL: f64 = 1e-7;
pub const RECURSION_TOL: f64 = 1e-10;
pub const QUASI_BASIS_TOL: f64 = 1e-5;
pub const SQUEEZE_IDENTITY_TOL: f64 = 1e-8;
pub const CANCELLATION_TOL: f64 = 1e-12;
pub const ANNIHILATION_TOL: f64 = 1e-7;
pub const SERIES_TOL: f64 = 1e-8;

/// Highest tower index `m` in ladder checks.
pub const LADDER_M_MAX: usize = 5;
/// Gram matrices cover `n, m <= 10`.
pub const BIORTHONORMALITY_SIZE: usize = 11;
pub const RECURSION_ORDER: usize = 12;
pub const RECURSION_POINTS: usize = 101;
/// Quasi-basis sums run to `S_30`.
pub const QUASI_BASIS_TERMS: usize = 30;
/// Tail of the series certified below this before comparing to the closed form.
pub const SERIES_TAIL: f64 = 1e-10;

/// `(r, theta)` samples for the cancellation identity.
pub const CANCELLATION_SAMPLES: [(f64, f64); 5] = [(0.0, 0.0), (0.3, 0.7), (1.2, 2.0), (2.0, -1.0), (0.8, 3.1)];
/// `(r, theta)` samples for annihilation and series checks, all with `r <= 1`.
pub const SQUEEZE_SAMPLES: [(f64, f64); 3] = [(0.3, std::f64::consts::FRAC_PI_4), (0.5, 0.0), (1.0, 2.0)];

/// One checked relation.
#[derive(Debug, Clone, Serialize)]
pub struct Record {
    pub id: String,
    pub description: String,
    /// `None` when the check could not be evaluated.
    pub residual: Option<f64>,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
}

/// Result of a full catalog run.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub profile: String,
    pub k: f64,
    pub n_phi: f64,
    pub n_psi: f64,
    pub passed: bool,
    pub records: Vec<Record>,
}

/// Tolerance overrides; `None` keeps each relation's own bound.
#[derive(Debug, Clone, Copy, Default)]
pub struct VerifyOptions {
    /// Replaces every bound except the finite-difference one.
    pub tolerance: Option<f64>,
    pub fd_tolerance: Option<f64>,
}

struct Outcome {
    residual: f64,
    detail: String,
    /// Extra pass condition besides `residual <= tolerance`.
    shape_ok: bool,
}

impl Outcome {
    fn new(residual: f64, detail: String) -> Outcome {
        Outcome { residual, detail, shape_ok: true }
    }
}

struct Check {
    id: String,
    description: String,
    tolerance: f64,
    run: Box<dyn Fn() -> Result<Outcome, String> + Send + Sync>,
}

fn check<F>(id: &str, description: &str, tolerance: f64, run: F) -> Check
where
    F: Fn() -> Result<Outcome, String> + Send + Sync + 'static,
{
    Check { id: id.into(), description: description.into(), tolerance, run: Box::new(run) }
}

fn record(c: &Check) -> Record {
    match (c.run)() {
        // a zero tolerance certifies nothing numerically
        Ok(o) => Record {
            passed: o.residual.is_finite() && o.residual <= c.tolerance && c.tolerance > 0.0 && o.shape_ok,
            id: c.id.clone(),
            description: c.description.clone(),
            residual: Some(o.residual).filter(|r| r.is_finite()),
            tolerance: c.tolerance,
            detail: o.detail,
        },
        Err(e) => Record {
            id: c.id.clone(),
            description: c.description.clone(),
            residual: None,
            tolerance: c.tolerance,
            passed: false,
            detail: e,
        },
    }
}

fn relation_check(profile: &Arc<PbProfile>, id: &'static str, description: &'static str, tol: f64) -> Check {
    let p = Arc::clone(profile);
    check(id, description, tol, move || {
        let symbolic = ladder_residual(&p, id, LADDER_M_MAX, Strategy::Symbolic).map_err(|e| e.to_string())?;
        let mut residual = symbolic.max();
        let mut detail = format!("symbolic {:.3e}", symbolic.max());
        match ladder_residual(&p, id, LADDER_M_MAX, Strategy::FamilyCalculus) {
            Ok(family) => {
                residual = residual.max(family.max());
                detail.push_str(&format!(", family {:.3e}", family.max()));
            }
            Err(OperatorError::StrategyUnavailable { .. }) => {}
            Err(e) => return Err(e.to_string()),
        }
        let informational: Vec<String> = symbolic
            .entries
            .iter()
            .filter(|e| !e.counted)
            .map(|e| format!("{} {:.3e} (informational)", e.label, e.residual))
            .collect();
        if !informational.is_empty() {
            detail.push_str(&format!("; {}", informational.join(", ")));
        }
        Ok(Outcome::new(residual, detail))
    })
}

fn finite_difference_check(profile: &Arc<PbProfile>, tol: f64) -> Check {
    let p = Arc::clone(profile);
    check(
        "finite_difference",
        "single-operator relations re-evaluated with fourth-order finite differences",
        tol,
        move || {
            let mut worst = (0.0f64, "none");
            for (id, _) in relation_ids() {
                match ladder_residual(&p, id, LADDER_M_MAX, Strategy::FiniteDifference) {
                    Ok(r) if r.max() > worst.0 => worst = (r.max(), id),
                    Ok(_) | Err(OperatorError::StrategyUnavailable { .. }) => {}
                    Err(e) => return Err(e.to_string()),
                }
            }
            Ok(Outcome::new(worst.0, format!("worst relation {}", worst.1)))
        },
    )
}

fn biorthonormality_check(profile: &Arc<PbProfile>, method: Method, tol: f64) -> Check {
    let p = Arc::clone(profile);
    let id = match method {
        Method::TransformedGaussHermite => "biorthonormality_gh",
        Method::AdaptiveX => "biorthonormality_adaptive",
    };
    check(id, "max |<psi_n, phi_m> - delta_nm| for n, m <= 10", tol, move || {
        let b = biorthonormality_matrix(&p, BIORTHONORMALITY_SIZE, method).map_err(|e| e.to_string())?;
        Ok(Outcome::new(b.max_deviation, format!("quadrature error estimate {:.3e}", b.max_error_estimate)))
    })
}

fn recursion_check(profile: &Arc<PbProfile>, tol: f64) -> Check {
    let p = Arc::clone(profile);
    check(
        "recursion",
        "recursive pi_n, sigma_n against the Hermite closed form, n <= 12",
        tol,
        move || {
            let family = RecursiveFamily::new(RECURSION_ORDER);
            let k = p.k();
            let mut worst: f64 = 0.0;
            for i in 0..RECURSION_POINTS {
                let x = -GRID_HALF_WIDTH + 2.0 * GRID_HALF_WIDTH * i as f64 / (RECURSION_POINTS - 1) as f64;
                let beta = p.beta_a(x).map_err(|e| e.to_string())?;
                for n in 0..=RECURSION_ORDER {
                    let pi = pi_n(n, beta, k).map_err(|e| e.to_string())?;
                    let sigma = sigma_n(n, beta, k).map_err(|e| e.to_string())?;
                    worst = worst
                        .max((family.pi(n, beta, k) - pi).abs() / pi.abs().max(1.0))
                        .max((family.sigma(n, beta, k) - sigma).abs() / sigma.abs().max(1.0));
                }
            }
            Ok(Outcome::new(worst, format!("{RECURSION_POINTS} points on |x| <= {GRID_HALF_WIDTH}")))
        },
    )
}

/// A bump in the oscillator variable `u = beta_a(x)/sqrt(2k)`, pulled back to
/// `x` and divided by `alpha^power`.
pub fn oscillator_bump(
    profile: &Arc<PbProfile>,
    centre: f64,
    half_width: f64,
    alpha_power: i32,
) -> Result<Arc<dyn Function1d>, String> {
    let s = (2.0 * profile.k()).sqrt();
    let lo = profile.beta_a_inverse(s * (centre - half_width)).map_err(|e| e.to_string())?;
    let hi = profile.beta_a_inverse(s * (centre + half_width)).map_err(|e| e.to_string())?;
    let bump = Bump::unit(centre, half_width);
    let p = Arc::clone(profile);
    let label = format!("bump_u(c={centre}, w={half_width})/alpha^{alpha_power}");
    let value = move |x: f64| -> Result<C64, String> {
        let u = p.beta_a(x).map_err(|e| e.to_string())? / s;
        let alpha = p.alpha(x).map_err(|e| e.to_string())?;
        Ok(bump.value(u).map_err(|e| e.to_string())? / alpha.powi(alpha_power))
    };
    Ok(Arc::new(
        ClosureFn::new(label, move |x: f64| value(x).unwrap_or(C64::new(f64::NAN, 0.0))).with_support(lo, hi),
    ))
}

/// The quasi-basis test pair: bumps fixed in the oscillator variable, with
/// `f` carrying `1/alpha` so that `<f, phi_n>` does not depend on the profile.
pub fn quasi_basis_pair(profile: &Arc<PbProfile>) -> Result<(Arc<dyn Function1d>, Arc<dyn Function1d>), String> {
    Ok((oscillator_bump(profile, 0.0, 4.0, 1)?, oscillator_bump(profile, 0.3, 3.5, 0)?))
}

fn quasi_basis_check(profile: &Arc<PbProfile>, tol: f64) -> Check {
    let p = Arc::clone(profile);
    check(
        "quasi_basis",
        "resolution of the identity sum_n <f,phi_n><psi_n,g> -> <f,g> at N = 30",
        tol,
        move || {
            let (f, g) = quasi_basis_pair(&p)?;
            let sums = quasi_basis_partial_sums(&p, f, g, QUASI_BASIS_TERMS).map_err(|e| e.to_string())?;
            let errors = sums.relative_errors();
            // the tail trends down when sampled every ten terms
            let samples: Vec<f64> = (1..=3).map(|i| errors[i * QUASI_BASIS_TERMS / 3]).collect();
            let trending = samples.windows(2).all(|w| w[1] < w[0]);
            let (own, dual) = sums.tail_movement(QUASI_BASIS_TERMS / 3);
            let agree = sums.ordering_gap() <= own + dual;
            Ok(Outcome {
                residual: errors[QUASI_BASIS_TERMS],
                detail: format!(
                    "errors at N = 10, 20, 30: {:.2e}, {:.2e}, {:.2e}; other ordering {:.2e}; ordering gap {:.2e} against tail movement {:.2e}",
                    samples[0],
                    samples[1],
                    samples[2],
                    sums.dual_relative_error(),
                    sums.ordering_gap(),
                    own + dual
                ),
                shape_ok: trending && agree,
            })
        },
    )
}

fn unit_copy(profile: &PbProfile) -> Result<Arc<PbProfile>, String> {
    profile.with_k(1.0).map(Arc::new).map_err(|e| e.to_string())
}

fn params(r: f64, theta: f64) -> Result<SqueezeParams, String> {
    SqueezeParams::new(r, theta).map_err(|e| e.to_string())
}

fn squeeze_checks(profile: &Arc<PbProfile>, opts: &VerifyOptions) -> Vec<Check> {
    let tol = |t: f64| opts.tolerance.unwrap_or(t);
    let note = if profile.k() == 1.0 { "" } else { " (on the k = 1 copy)" };
    let (p1, p2, p3) = (Arc::clone(profile), Arc::clone(profile), Arc::clone(profile));
    vec![
        check(
            "squeeze_identities",
            "B A against its mu/lambda expansion and [A, B] = 1",
            tol(SQUEEZE_IDENTITY_TOL),
            move || {
                let p = unit_copy(&p1)?;
                let mut worst: f64 = 0.0;
                for (r, theta) in SQUEEZE_SAMPLES {
                    let gaps = squeeze_identity_gaps(&p, &params(r, theta)?).map_err(|e| e.to_string())?;
                    worst = worst.max(gaps.hamiltonian).max(gaps.commutator);
                }
                Ok(Outcome::new(worst, format!("{} samples{note}", SQUEEZE_SAMPLES.len())))
            },
        ),
        check(
            "squeeze_cancellation",
            "alpha_tau(2n+2) + beta_tau(2n) = 0 for n <= 20",
            tol(CANCELLATION_TOL),
            move || {
                let mut worst: f64 = 0.0;
                for (r, theta) in CANCELLATION_SAMPLES {
                    let c = coefficient_cancellation(&params(r, theta)?, 20).map_err(|e| e.to_string())?;
                    worst = worst.max(c.max_relative);
                }
                Ok(Outcome::new(worst, format!("{} samples", CANCELLATION_SAMPLES.len())))
            },
        ),
        check(
            "squeeze_annihilation",
            "<A^dagger g, tau(z)> and <B g, kappa(z)> relative to ||g|| for the standard bump",
            tol(ANNIHILATION_TOL),
            move || {
                let p = unit_copy(&p2)?;
                let mut worst: f64 = 0.0;
                for (r, theta) in SQUEEZE_SAMPLES {
                    let g: Arc<dyn Function1d> = Arc::new(standard_bump());
                    let a = annihilation_residual(&p, &params(r, theta)?, g).map_err(|e| e.to_string())?;
                    worst = worst.max(a.relative());
                }
                Ok(Outcome::new(worst, format!("{} samples{note}", SQUEEZE_SAMPLES.len())))
            },
        ),
        check(
            "squeeze_series",
            "series functionals F_tau, F_kappa against closed-form pairings",
            tol(SERIES_TOL),
            move || {
                let p = unit_copy(&p3)?;
                let g: Arc<dyn Function1d> = Arc::new(standard_bump());
                let mut worst: f64 = 0.0;
                let mut terms = 0;
                for (r, theta) in SQUEEZE_SAMPLES {
                    let z = params(r, theta)?;
                    let (tau, kappa) = closed_form_states(&p, &z).map_err(|e| e.to_string())?;
                    let truncation = Truncation::Auto { tol: SERIES_TAIL };
                    let ft = functional_tau(&p, &z, Arc::clone(&g), truncation).map_err(|e| e.to_string())?;
                    let fk = functional_kappa(&p, &z, Arc::clone(&g), truncation).map_err(|e| e.to_string())?;
                    let ct = inner_product(&tau, g.as_ref(), Method::AdaptiveX).map_err(|e| e.to_string())?.value;
                    let ck = inner_product(&kappa, g.as_ref(), Method::AdaptiveX).map_err(|e| e.to_string())?.value;
                    worst = worst
                        .max((ft.value - ct).norm() / ct.norm().max(1.0))
                        .max((fk.value - ck).norm() / ck.norm().max(1.0));
                    terms = terms.max(ft.terms).max(fk.terms);
                }
                Ok(Outcome::new(worst, format!("up to K = {terms} terms{note}")))
            },
        ),
    ]
}

/// Runs every relation on `profile`; records keep catalog order.
pub fn run_catalog(profile: &Arc<PbProfile>, opts: &VerifyOptions) -> VerifyReport {
    let tol = |t: f64| opts.tolerance.unwrap_or(t);
    let mut checks: Vec<Check> = relation_ids()
        .iter()
        .map(|&(id, description)| {
            let bound = if id.starts_with("table") { TABLE_TOL } else { DEFAULT_TOL };
            relation_check(profile, id, description, tol(bound))
        })
        .collect();
    checks.push(finite_difference_check(profile, opts.fd_tolerance.unwrap_or(FD_TOL)));
    checks.push(biorthonormality_check(profile, Method::TransformedGaussHermite, tol(BIORTHONORMALITY_GH_TOL)));
    checks.push(biorthonormality_check(profile, Method::AdaptiveX, tol(BIORTHONORMALITY_ADAPTIVE_TOL)));
    checks.push(recursion_check(profile, tol(RECURSION_TOL)));
    checks.push(quasi_basis_check(profile, tol(QUASI_BASIS_TOL)));
    checks.extend(squeeze_checks(profile, opts));
    let records: Vec<Record> = checks.par_iter().map(record).collect();
    VerifyReport {
        profile: profile.describe(),
        k: profile.k(),
        n_phi: profile.n_phi(),
        n_psi: profile.n_psi(),
        passed: records.iter().all(|r| r.passed),
        records,
    }
}
