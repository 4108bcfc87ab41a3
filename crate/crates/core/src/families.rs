//! The biorthogonal families generated from the vacua, the `m`-indexed towers
//! carrying the deformed su(1,1) representations, and the maps to the
//! oscillator basis.
//!
//! With `u = beta_a(x)/sqrt(2k)` and `e_n` the normalized Hermite functions,
//!
//! ```text
//! phi_n(x) = N_phi pi^(1/4) k^(-n/2) e_n(u) exp(-u^2/2)
//! psi_n(x) = N_psi pi^(1/4) k^( n/2) e_n(u) exp(+u^2/2) / alpha(x)
//! ```

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::expr::EvalError;
use crate::function::Function1d;
use crate::hermite::{hermite_functions_scaled, ln_factorial, ln_odd_double_factorial};
use crate::jet::Jet;
use crate::profile::{PbProfile, ProfileError, MAX_INV_ALPHA_ORDER};
use crate::quadrature::{integrate_real, Tolerance};

/// Which of the three bases a member belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    /// Gaussian-decaying, raised by `b`, lowered by `a`.
    Phi,
    /// Polynomially growing, raised by `a^dagger`, lowered by `b^dagger`.
    Psi,
    /// Orthonormal Hermite functions of the undeformed oscillator.
    Oscillator,
}

/// Labelling scheme of a member.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    Phi,
    Psi,
    PhiEvenTower,
    PsiEvenTower,
    PhiOddTower,
    PsiOddTower,
    Oscillator,
}

impl Family {
    pub fn side(self) -> Side {
        match self {
            Family::Phi | Family::PhiEvenTower | Family::PhiOddTower => Side::Phi,
            Family::Psi | Family::PsiEvenTower | Family::PsiOddTower => Side::Psi,
            Family::Oscillator => Side::Oscillator,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Phi => "phi",
            Family::Psi => "psi",
            Family::PhiEvenTower => "phi_even_tower",
            Family::PsiEvenTower => "psi_even_tower",
            Family::PhiOddTower => "phi_odd_tower",
            Family::PsiOddTower => "psi_odd_tower",
            Family::Oscillator => "oscillator",
        }
    }
}

/// Tower label `(j, q)` with `j = -1/4` and `q = m + 1/4` (even) or
/// `q = m + 3/4` (odd).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TowerIndex {
    pub m: usize,
    pub odd: bool,
}

impl TowerIndex {
    pub const J: f64 = -0.25;

    pub fn even(m: usize) -> TowerIndex {
        TowerIndex { m, odd: false }
    }

    pub fn odd(m: usize) -> TowerIndex {
        TowerIndex { m, odd: true }
    }

    pub fn q(self) -> f64 {
        self.m as f64 + if self.odd { 0.75 } else { 0.25 }
    }

    /// Hermite index `2m` or `2m + 1`.
    pub fn hermite_index(self) -> usize {
        2 * self.m + usize::from(self.odd)
    }
}

/// One element of `F_phi`, `F_psi`, a tower, or the oscillator basis.
#[derive(Clone)]
pub struct FamilyMember {
    family: Family,
    index: usize,
    hermite_index: usize,
    ln_extra: f64,
    profile: Option<Arc<PbProfile>>,
}

impl std::fmt::Debug for FamilyMember {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}[{}]", self.family.name(), self.index)
    }
}

impl FamilyMember {
    pub fn phi(profile: &Arc<PbProfile>, n: usize) -> FamilyMember {
        FamilyMember {
            family: Family::Phi,
            index: n,
            hermite_index: n,
            ln_extra: 0.0,
            profile: Some(Arc::clone(profile)),
        }
    }

    pub fn psi(profile: &Arc<PbProfile>, n: usize) -> FamilyMember {
        FamilyMember {
            family: Family::Psi,
            index: n,
            hermite_index: n,
            ln_extra: 0.0,
            profile: Some(Arc::clone(profile)),
        }
    }

    /// Side-indexed constructor.
    pub fn on_side(profile: &Arc<PbProfile>, side: Side, n: usize) -> FamilyMember {
        match side {
            Side::Phi => FamilyMember::phi(profile, n),
            Side::Psi => FamilyMember::psi(profile, n),
            Side::Oscillator => FamilyMember::oscillator(n),
        }
    }

    /// Orthonormal Hermite function `e_n`.
    pub fn oscillator(n: usize) -> FamilyMember {
        FamilyMember { family: Family::Oscillator, index: n, hermite_index: n, ln_extra: 0.0, profile: None }
    }

    /// Tower member as a rescaled family element:
    ///
    /// ```text
    /// phi even:  sqrt((2m)!)  /(2m-1)!!   phi_{2m}
    /// psi even:  (2m-1)!!/sqrt((2m)!)     psi_{2m}
    /// phi odd:   sqrt((2m+1)!)/(2m-1)!!   phi_{2m+1}
    /// psi odd:   (2m-1)!!/sqrt((2m+1)!)   psi_{2m+1}
    /// ```
    pub fn tower(profile: &Arc<PbProfile>, side: Side, index: TowerIndex) -> FamilyMember {
        let n = index.hermite_index();
        let ln_ratio = 0.5 * ln_factorial(n) - ln_odd_double_factorial(index.m);
        let (family, ln_extra) = match (side, index.odd) {
            (Side::Phi, false) => (Family::PhiEvenTower, ln_ratio),
            (Side::Phi, true) => (Family::PhiOddTower, ln_ratio),
            (Side::Psi, false) => (Family::PsiEvenTower, -ln_ratio),
            (Side::Psi, true) => (Family::PsiOddTower, -ln_ratio),
            (Side::Oscillator, _) => panic!("towers live on the phi or psi side"),
        };
        FamilyMember { family, index: index.m, hermite_index: n, ln_extra, profile: Some(Arc::clone(profile)) }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn side(&self) -> Side {
        self.family.side()
    }

    /// Family-specific index (`n` for families, `m` for towers).
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn hermite_index(&self) -> usize {
        self.hermite_index
    }

    pub fn profile(&self) -> Option<&Arc<PbProfile>> {
        self.profile.as_ref()
    }

    /// Multiplier relative to the plain family element with the same Hermite index.
    pub fn scale(&self) -> f64 {
        self.ln_extra.exp()
    }

    /// `ln` of the full constant prefactor in front of `e_n(u) exp(-+u^2/2)`.
    pub fn ln_prefactor(&self) -> f64 {
        let n = self.hermite_index as f64;
        match (self.side(), &self.profile) {
            (Side::Oscillator, _) => self.ln_extra,
            (Side::Phi, Some(p)) => p.n_phi().ln() + 0.25 * PI.ln() - 0.5 * n * p.k().ln() + self.ln_extra,
            (Side::Psi, Some(p)) => p.n_psi().ln() + 0.25 * PI.ln() + 0.5 * n * p.k().ln() + self.ln_extra,
            _ => unreachable!("profile-backed member without a profile"),
        }
    }

    fn u_of(&self, x: f64) -> Result<f64, EvalError> {
        match &self.profile {
            Some(p) => Ok(p.beta_a(x)? / (2.0 * p.k()).sqrt()),
            None => Ok(x),
        }
    }

    /// Value at `x`.
    pub fn eval(&self, x: f64) -> Result<f64, EvalError> {
        let n = self.hermite_index;
        let u = self.u_of(x)?;
        let e = hermite_functions_scaled(n, u)[n];
        let ln_pre = self.ln_prefactor();
        let v = match self.side() {
            Side::Oscillator => e.to_f64_times(ln_pre),
            Side::Phi => e.to_f64_times(ln_pre - 0.5 * u * u),
            Side::Psi => {
                let p = self.profile.as_ref().expect("psi member carries a profile");
                e.to_f64_times(ln_pre + 0.5 * u * u) * p.inv_alpha(x)?
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite { x, value: v })
        }
    }

    /// Derivatives with respect to `x` up to `order`.
    pub fn jet_real(&self, x: f64, order: usize) -> Result<Jet, EvalError> {
        let n = self.hermite_index;
        let ln_pre = self.ln_prefactor();
        let (u_jet, inv_alpha) = match &self.profile {
            Some(p) => {
                if order > MAX_INV_ALPHA_ORDER {
                    return Err(EvalError::Other(format!("jet order {order} exceeds {MAX_INV_ALPHA_ORDER}")));
                }
                let s = 1.0 / (2.0 * p.k()).sqrt();
                (p.beta_jet(x, order)?.scale(C64::new(s, 0.0)), Some(p.inv_alpha_jet(x, order)?))
            }
            None => {
                let mut d = vec![0.0; order + 1];
                d[0] = x;
                if order >= 1 {
                    d[1] = 1.0;
                }
                (Jet::from_real(&d), None)
            }
        };
        let u = u_jet.value().re;
        let e = hermite_functions_scaled(n + order, u);
        let mut outer = Vec::with_capacity(order + 1);
        match self.side() {
            Side::Phi => {
                // d^j/du^j [e_n(u) e^{-u^2/2}] = (-1)^j sqrt(2^j (n+j)!/n!) e_{n+j}(u) e^{-u^2/2}
                for j in 0..=order {
                    let ln_c = 0.5 * (j as f64 * 2f64.ln() + ln_factorial(n + j) - ln_factorial(n));
                    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                    outer.push(C64::new(sign * e[n + j].to_f64_times(ln_pre + ln_c - 0.5 * u * u), 0.0));
                }
            }
            Side::Psi => {
                // d^j/du^j hhat_n(u) = sqrt(2^j n!/(n-j)!) hhat_{n-j}(u)
                for j in 0..=order {
                    if j > n {
                        outer.push(C64::new(0.0, 0.0));
                        continue;
                    }
                    let ln_c = 0.5 * (j as f64 * 2f64.ln() + ln_factorial(n) - ln_factorial(n - j));
                    outer.push(C64::new(e[n - j].to_f64_times(ln_pre + ln_c + 0.5 * u * u), 0.0));
                }
            }
            Side::Oscillator => {
                // e_n(x) = hhat_n(x) e^{-x^2/2}: product of the polynomial and Gaussian jets
                let mut poly = Vec::with_capacity(order + 1);
                for j in 0..=order {
                    if j > n {
                        poly.push(0.0);
                        continue;
                    }
                    let ln_c = 0.5 * (j as f64 * 2f64.ln() + ln_factorial(n) - ln_factorial(n - j));
                    // hhat_{n-j}(u) e^{-u^2/2} = e_{n-j}(u)
                    poly.push(e[n - j].to_f64_times(ln_pre + ln_c));
                }
                // jet of exp(-x^2/2) divided by its value
                let mut q = vec![0.0; order + 1];
                if order >= 1 {
                    q[1] = -x;
                }
                if order >= 2 {
                    q[2] = -1.0;
                }
                let gauss_rel = Jet::compose(&vec![C64::new(1.0, 0.0); order + 1], &Jet::from_real(&q));
                let out = Jet::from_real(&poly).mul(&gauss_rel);
                return check_jet(out, x);
            }
        }
        let composed = Jet::compose(&outer, &u_jet);
        let out = match inv_alpha {
            Some(w) if self.side() == Side::Psi => composed.mul(&w),
            _ => composed,
        };
        check_jet(out, x)
    }
}

fn check_jet(j: Jet, x: f64) -> Result<Jet, EvalError> {
    for v in j.derivs() {
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(EvalError::NonFinite { x, value: v.re });
        }
    }
    Ok(j)
}

impl Function1d for FamilyMember {
    fn value(&self, x: f64) -> Result<C64, EvalError> {
        Ok(C64::new(self.eval(x)?, 0.0))
    }

    fn jet(&self, x: f64, order: usize) -> Result<Jet, EvalError> {
        self.jet_real(x, order)
    }

    fn decay_window(&self) -> Option<(f64, f64)> {
        match (self.side(), &self.profile) {
            (Side::Phi, Some(p)) => p.gaussian_window().ok(),
            (Side::Oscillator, _) => {
                let edge = (2.0 * self.hermite_index as f64 + 1.0).sqrt() + 38.0;
                Some((-edge, edge))
            }
            _ => None,
        }
    }

    fn as_member(&self) -> Option<&FamilyMember> {
        Some(self)
    }

    fn label(&self) -> String {
        format!("{self:?}")
    }
}

/// Values of `phi_0 ..= phi_{n_max}` (or the psi side) at `x`.
pub fn family_values(profile: &PbProfile, side: Side, n_max: usize, x: f64) -> Result<Vec<f64>, EvalError> {
    let k = profile.k();
    let u = profile.beta_a(x)? / (2.0 * k).sqrt();
    let e = hermite_functions_scaled(n_max, u);
    let base = 0.25 * PI.ln();
    let ln_k = k.ln();
    let out: Vec<f64> = match side {
        Side::Phi => {
            let b = base + profile.n_phi().ln() - 0.5 * u * u;
            e.iter().enumerate().map(|(n, s)| s.to_f64_times(b - 0.5 * n as f64 * ln_k)).collect()
        }
        Side::Psi => {
            let w = profile.inv_alpha(x)?;
            let b = base + profile.n_psi().ln() + 0.5 * u * u;
            e.iter().enumerate().map(|(n, s)| s.to_f64_times(b + 0.5 * n as f64 * ln_k) * w).collect()
        }
        Side::Oscillator => e.iter().map(|s| s.to_f64()).collect(),
    };
    Ok(out)
}

/// Which transform to the oscillator variable `u`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransformKind {
    /// `h_+(u) = h(x(u)) alpha(x(u)) exp(-u^2/2)`, so `<h, phi_n> ~ <h_+, e_n>`.
    Plus,
    /// `h_-(u) = h(x(u)) exp(u^2/2)`, so `<psi_n, h> ~ <e_n, h_->`.
    Minus,
}

/// `h_+` or `h_-` for a profile, with `x(u) = beta_a^{-1}(sqrt(2k) u)`.
pub struct Transformed {
    profile: Arc<PbProfile>,
    h: Arc<dyn Function1d>,
    kind: TransformKind,
    support: Option<(f64, f64)>,
}

impl Transformed {
    pub fn new(profile: &Arc<PbProfile>, h: Arc<dyn Function1d>, kind: TransformKind) -> Result<Transformed, ProfileError> {
        let s = (2.0 * profile.k()).sqrt();
        let support = match h.support() {
            Some((a, b)) => Some((profile.beta_a(a)? / s, profile.beta_a(b)? / s)),
            None => None,
        };
        Ok(Transformed { profile: Arc::clone(profile), h, kind, support })
    }
}

impl Function1d for Transformed {
    fn value(&self, u: f64) -> Result<C64, EvalError> {
        if let Some((a, b)) = self.support {
            if u <= a || u >= b {
                return Ok(C64::new(0.0, 0.0));
            }
        }
        let s = (2.0 * self.profile.k()).sqrt();
        let x = self
            .profile
            .beta_a_inverse(s * u)
            .map_err(|e| EvalError::Other(e.to_string()))?;
        let hv = self.h.value(x)?;
        if hv == C64::new(0.0, 0.0) {
            return Ok(hv);
        }
        let v = match self.kind {
            TransformKind::Plus => hv * self.profile.alpha(x)? * (-0.5 * u * u).exp(),
            TransformKind::Minus => hv * (0.5 * u * u).exp(),
        };
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite { x: u, value: v.norm() })
        }
    }

    fn support(&self) -> Option<(f64, f64)> {
        self.support
    }

    fn label(&self) -> String {
        let tag = match self.kind {
            TransformKind::Plus => "plus",
            TransformKind::Minus => "minus",
        };
        format!("{}_{tag}", self.h.label())
    }
}

pub fn h_plus(profile: &Arc<PbProfile>, h: Arc<dyn Function1d>) -> Result<Transformed, ProfileError> {
    Transformed::new(profile, h, TransformKind::Plus)
}

pub fn h_minus(profile: &Arc<PbProfile>, h: Arc<dyn Function1d>) -> Result<Transformed, ProfileError> {
    Transformed::new(profile, h, TransformKind::Minus)
}

/// Outcome of the truncated-norm membership test.
#[derive(Debug, Clone, PartialEq)]
pub struct Membership {
    /// `||h_-||` (or `||h_+||`) estimated on the final window.
    pub norm: f64,
    /// Half-width in `u` where the estimate stabilized.
    pub window: f64,
    /// Whether successive window doublings agreed to `1e-10`.
    pub converged: bool,
}

/// Estimates `||h_t||` for the chosen transform by growing the window until
/// the squared norm stabilizes.
pub fn transformed_norm(profile: &Arc<PbProfile>, h: Arc<dyn Function1d>, kind: TransformKind) -> Result<Membership, crate::Error> {
    let t = Transformed::new(profile, h, kind)?;
    let tol = Tolerance { abs: 1e-15, rel: 1e-12 };
    let sq = |a: f64, b: f64| -> Result<f64, crate::Error> {
        let (v, _) = integrate_real(|u| t.value(u).map(|v| v.norm_sqr()), a, b, tol)
            .map_err(crate::pairing::PairingError::from)?;
        Ok(v)
    };
    if let Some((a, b)) = t.support() {
        let v = sq(a, b)?;
        return Ok(Membership { norm: v.sqrt(), window: a.abs().max(b.abs()), converged: true });
    }
    let mut l = 8.0;
    let mut total = sq(-l, l)?;
    for _ in 0..8 {
        let tail = sq(-2.0 * l, -l)? + sq(l, 2.0 * l)?;
        total += tail;
        l *= 2.0;
        if tail <= 1e-10 * total.max(1e-300) {
            return Ok(Membership { norm: total.sqrt(), window: l, converged: true });
        }
    }
    Ok(Membership { norm: total.sqrt(), window: l, converged: false })
}

/// Membership of `h` in the common domain: `h_-` has a finite norm.
pub fn membership(profile: &Arc<PbProfile>, h: Arc<dyn Function1d>) -> Result<Membership, crate::Error> {
    transformed_norm(profile, h, TransformKind::Minus)
}
