//! Deformation profiles `alpha(x) > 0` with the derived antiderivative
//! `beta_a' = 1/alpha`, the scale `k > 0` and the vacuum normalizations.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::expr::{EvalError, Expr, Primitive};
use crate::families::FamilyMember;
use crate::jet::Jet;
use crate::quadrature::{integrate_real, Tolerance};

/// Highest derivative of `1/alpha` kept in closed form.
pub const MAX_INV_ALPHA_ORDER: usize = 6;

/// Number of Chebyshev nodes tabulating the antiderivative of a custom profile.
pub const CUSTOM_TABLE_NODES: usize = 4097;

/// Default half-width of the tabulation window for custom profiles.
pub const CUSTOM_WINDOW: f64 = 8.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProfileError {
    #[error("parameter out of admissible range: {0}")]
    ParameterOutOfRange(String),
    #[error("alpha is not positive at x = {x} (value {value})")]
    NonPositiveAlpha { x: f64, value: f64 },
    #[error("normalizations violate N_phi * N_psi = 1/sqrt(2 pi k): product {product}, expected {expected}")]
    Normalization { product: f64, expected: f64 },
    #[error("inverse of beta_a did not converge for y = {0}")]
    InverseNotConverged(f64),
    #[error("tabulating beta_a failed: {0}")]
    Tabulation(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// The three closed-form profiles plus user-supplied ones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProfileKind {
    /// `alpha(x) = alpha`.
    Constant { alpha: f64 },
    /// `alpha(x) = 1/(1 + gamma x^4)`.
    Quartic { gamma: f64 },
    /// `alpha(x) = 1/(1 + gamma cos x)`.
    Cosine { gamma: f64 },
    Custom,
}

impl ProfileKind {
    pub fn name(&self) -> &'static str {
        match self {
            ProfileKind::Constant { .. } => "constant",
            ProfileKind::Quartic { .. } => "quartic",
            ProfileKind::Cosine { .. } => "cosine",
            ProfileKind::Custom => "custom",
        }
    }
}

/// Tabulated antiderivative of `1/alpha` with `beta(0) = 0`.
struct BetaTable {
    nodes: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
    inv_alpha: Expr,
}

impl BetaTable {
    fn build(inv_alpha: &Expr, half_width: f64) -> Result<BetaTable, ProfileError> {
        let m = CUSTOM_TABLE_NODES;
        let centre = m / 2;
        let mut nodes: Vec<f64> = (0..m)
            .map(|i| -half_width * (PI * i as f64 / (m - 1) as f64).cos())
            .collect();
        nodes[centre] = 0.0;
        for i in 0..centre {
            nodes[m - 1 - i] = -nodes[i];
        }
        let mut slopes = Vec::with_capacity(m);
        for &x in &nodes {
            let s = inv_alpha.eval(x)?;
            if s <= 0.0 {
                return Err(ProfileError::NonPositiveAlpha { x, value: 1.0 / s });
            }
            slopes.push(s);
        }
        let tol = Tolerance { abs: 1e-16, rel: 1e-15 };
        let panel = |a: f64, b: f64| -> Result<f64, ProfileError> {
            integrate_real(|x| inv_alpha.eval(x), a, b, tol)
                .map(|(v, _)| v)
                .map_err(|e| ProfileError::Tabulation(e.to_string()))
        };
        let mut values = vec![0.0; m];
        // Neumaier-compensated running sums outward from the centre
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        for i in centre + 1..m {
            let v = panel(nodes[i - 1], nodes[i])?;
            let t = sum + v;
            comp += if sum.abs() >= v.abs() { (sum - t) + v } else { (v - t) + sum };
            sum = t;
            values[i] = sum + comp;
        }
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        for i in (0..centre).rev() {
            let v = -panel(nodes[i], nodes[i + 1])?;
            let t = sum + v;
            comp += if sum.abs() >= v.abs() { (sum - t) + v } else { (v - t) + sum };
            sum = t;
            values[i] = sum + comp;
        }
        Ok(BetaTable { nodes, values, slopes, inv_alpha: inv_alpha.clone() })
    }

    fn eval(&self, x: f64) -> Result<f64, EvalError> {
        let n = self.nodes.len();
        let (lo, hi) = (self.nodes[0], self.nodes[n - 1]);
        if x < lo || x > hi {
            let edge = if x > hi { n - 1 } else { 0 };
            let tol = Tolerance { abs: 1e-16, rel: 1e-15 };
            let (v, _) = integrate_real(|t| self.inv_alpha.eval(t), self.nodes[edge], x, tol)
                .map_err(|e| EvalError::Other(e.to_string()))?;
            return Ok(self.values[edge] + v);
        }
        let i = match self.nodes.partition_point(|&t| t <= x) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        };
        let (x0, x1) = (self.nodes[i], self.nodes[i + 1]);
        let h = x1 - x0;
        let t = (x - x0) / h;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (mut m0, mut m1) = (self.slopes[i], self.slopes[i + 1]);
        // Fritsch–Carlson guard keeps the interpolant monotone
        let delta = (y1 - y0) / h;
        let (a, b) = (m0 / delta, m1 / delta);
        let r = a * a + b * b;
        if r > 9.0 {
            let tau = 3.0 / r.sqrt();
            m0 = tau * a * delta;
            m1 = tau * b * delta;
        }
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        Ok(h00 * y0 + h10 * h * m0 + h01 * y1 + h11 * h * m1)
    }
}

/// A deformation profile with everything the operators need.
#[derive(Clone)]
pub struct PbProfile {
    kind: ProfileKind,
    k: f64,
    alpha: Expr,
    alpha_derivs: [Expr; 3],
    inv_alpha_derivs: Vec<Expr>,
    beta_a: Expr,
    n_phi: f64,
    n_psi: f64,
    source: Option<String>,
    window: f64,
}

impl std::fmt::Debug for PbProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PbProfile")
            .field("kind", &self.kind)
            .field("k", &self.k)
            .field("alpha", &self.alpha)
            .field("n_phi", &self.n_phi)
            .field("n_psi", &self.n_psi)
            .finish()
    }
}

fn check_k(k: f64) -> Result<(), ProfileError> {
    if k > 0.0 && k.is_finite() {
        Ok(())
    } else {
        Err(ProfileError::ParameterOutOfRange(format!("k must be positive and finite, got {k}")))
    }
}

fn default_normalization(k: f64) -> f64 {
    (2.0 * PI * k).powf(-0.25)
}

impl PbProfile {
    /// Closed-form profile. `Quartic` accepts `gamma = 0`, the undeformed limit.
    pub fn builtin(kind: ProfileKind, k: f64) -> Result<PbProfile, ProfileError> {
        check_k(k)?;
        let x = Expr::x();
        let (alpha, inv_alpha, beta_a) = match kind {
            ProfileKind::Constant { alpha } => {
                if !(alpha > 0.0 && alpha.is_finite()) {
                    return Err(ProfileError::ParameterOutOfRange(format!(
                        "constant alpha must be positive, got {alpha}"
                    )));
                }
                (Expr::constant(alpha), Expr::constant(1.0 / alpha), &x / alpha)
            }
            ProfileKind::Quartic { gamma } => {
                if !(gamma >= 0.0 && gamma.is_finite()) {
                    return Err(ProfileError::ParameterOutOfRange(format!(
                        "quartic gamma must be non-negative, got {gamma}"
                    )));
                }
                let inv = 1.0 + gamma * x.pow(4);
                (1.0 / &inv, inv, &x + (gamma / 5.0) * x.pow(5))
            }
            ProfileKind::Cosine { gamma } => {
                if !(gamma.abs() < 1.0) {
                    return Err(ProfileError::ParameterOutOfRange(format!(
                        "cosine gamma must satisfy |gamma| < 1, got {gamma}"
                    )));
                }
                let inv = 1.0 + gamma * x.cos();
                (1.0 / &inv, inv, &x + gamma * x.sin())
            }
            ProfileKind::Custom => {
                return Err(ProfileError::ParameterOutOfRange(
                    "custom profiles are built with PbProfile::custom".into(),
                ))
            }
        };
        Ok(PbProfile::assemble(kind, k, alpha, inv_alpha, beta_a, None, CUSTOM_WINDOW))
    }

    /// Profile from a user expression for `alpha`.
    ///
    /// `alpha` is sampled on the tabulation grid and must be positive there.
    /// `beta_a` is tabulated on `|x| <= half_width` and extended by quadrature
    /// beyond it.
    pub fn custom(alpha: Expr, k: f64, half_width: f64) -> Result<PbProfile, ProfileError> {
        check_k(k)?;
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(ProfileError::ParameterOutOfRange(format!(
                "tabulation window must be positive, got {half_width}"
            )));
        }
        let inv_alpha = Expr::div(&Expr::one(), &alpha);
        let table = Arc::new(BetaTable::build(&inv_alpha, half_width)?);
        let t = Arc::clone(&table);
        let beta_a = Expr::primitive(Primitive::new("beta_a", move |x| t.eval(x), inv_alpha.clone()));
        let source = alpha.to_string();
        Ok(PbProfile::assemble(ProfileKind::Custom, k, alpha, inv_alpha, beta_a, Some(source), half_width))
    }

    /// Parses `alpha` and builds a custom profile on the default window.
    pub fn parse_custom(alpha: &str, k: f64) -> Result<PbProfile, crate::Error> {
        let e = crate::expr::parse(alpha)?;
        Ok(PbProfile::custom(e, k, CUSTOM_WINDOW)?)
    }

    fn assemble(
        kind: ProfileKind,
        k: f64,
        alpha: Expr,
        inv_alpha: Expr,
        beta_a: Expr,
        source: Option<String>,
        window: f64,
    ) -> PbProfile {
        let a1 = alpha.derivative();
        let a2 = a1.derivative();
        let n = default_normalization(k);
        PbProfile {
            kind,
            k,
            alpha_derivs: [alpha.clone(), a1, a2],
            alpha,
            inv_alpha_derivs: inv_alpha.derivatives(MAX_INV_ALPHA_ORDER),
            beta_a,
            n_phi: n,
            n_psi: n,
            source,
            window,
        }
    }

    /// Overrides the vacuum normalizations.
    ///
    /// With one value given the other is derived from
    /// `N_phi N_psi = 1/sqrt(2 pi k)`; with both given their product is checked.
    pub fn with_normalization(
        mut self,
        n_phi: Option<f64>,
        n_psi: Option<f64>,
    ) -> Result<PbProfile, ProfileError> {
        let target = 1.0 / (2.0 * PI * self.k).sqrt();
        let positive = |v: f64, name: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(ProfileError::ParameterOutOfRange(format!("{name} must be positive, got {v}")))
            }
        };
        match (n_phi, n_psi) {
            (None, None) => {}
            (Some(p), None) => {
                self.n_phi = positive(p, "N_phi")?;
                self.n_psi = target / self.n_phi;
            }
            (None, Some(q)) => {
                self.n_psi = positive(q, "N_psi")?;
                self.n_phi = target / self.n_psi;
            }
            (Some(p), Some(q)) => {
                let (p, q) = (positive(p, "N_phi")?, positive(q, "N_psi")?);
                if ((p * q - target) / target).abs() > 1e-12 {
                    return Err(ProfileError::Normalization { product: p * q, expected: target });
                }
                self.n_phi = p;
                self.n_psi = q;
            }
        }
        Ok(self)
    }

    /// Same `alpha` with a different `k`; normalizations reset to the default.
    pub fn with_k(&self, k: f64) -> Result<PbProfile, ProfileError> {
        check_k(k)?;
        let mut p = self.clone();
        p.k = k;
        p.n_phi = default_normalization(k);
        p.n_psi = p.n_phi;
        Ok(p)
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn n_phi(&self) -> f64 {
        self.n_phi
    }

    pub fn n_psi(&self) -> f64 {
        self.n_psi
    }

    /// Source text of a custom `alpha`.
    pub fn source(&self) -> Option<&str> {
        self.source.as_deref()
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    /// Short description with parameters, e.g. `quartic(gamma=0.5, k=0.5)`.
    pub fn describe(&self) -> String {
        match self.kind {
            ProfileKind::Constant { alpha } => format!("constant(alpha={alpha}, k={})", self.k),
            ProfileKind::Quartic { gamma } => format!("quartic(gamma={gamma}, k={})", self.k),
            ProfileKind::Cosine { gamma } => format!("cosine(gamma={gamma}, k={})", self.k),
            ProfileKind::Custom => {
                format!("custom(alpha={}, k={})", self.source.as_deref().unwrap_or("?"), self.k)
            }
        }
    }

    pub fn alpha_expr(&self) -> &Expr {
        &self.alpha
    }

    /// `alpha`, `alpha'` or `alpha''` for `order` 0, 1, 2.
    pub fn alpha_derivative_expr(&self, order: usize) -> &Expr {
        &self.alpha_derivs[order]
    }

    pub fn inv_alpha_expr(&self) -> &Expr {
        &self.inv_alpha_derivs[0]
    }

    pub fn beta_a_expr(&self) -> &Expr {
        &self.beta_a
    }

    pub fn alpha(&self, x: f64) -> Result<f64, EvalError> {
        self.alpha.eval(x)
    }

    pub fn alpha_prime(&self, x: f64) -> Result<f64, EvalError> {
        self.alpha_derivs[1].eval(x)
    }

    pub fn inv_alpha(&self, x: f64) -> Result<f64, EvalError> {
        self.inv_alpha_derivs[0].eval(x)
    }

    pub fn beta_a(&self, x: f64) -> Result<f64, EvalError> {
        self.beta_a.eval(x)
    }

    /// `beta_b = alpha'`.
    pub fn beta_b(&self, x: f64) -> Result<f64, EvalError> {
        self.alpha_prime(x)
    }

    /// Jet of `beta_a` at `x` up to `order <= MAX_INV_ALPHA_ORDER + 1`.
    pub fn beta_jet(&self, x: f64, order: usize) -> Result<Jet, EvalError> {
        assert!(order <= MAX_INV_ALPHA_ORDER + 1, "beta jet order too high");
        let mut d = Vec::with_capacity(order + 1);
        d.push(self.beta_a(x)?);
        for j in 0..order {
            d.push(self.inv_alpha_derivs[j].eval(x)?);
        }
        Ok(Jet::from_real(&d))
    }

    /// Jet of `1/alpha` at `x` up to `order <= MAX_INV_ALPHA_ORDER`.
    pub fn inv_alpha_jet(&self, x: f64, order: usize) -> Result<Jet, EvalError> {
        assert!(order <= MAX_INV_ALPHA_ORDER, "1/alpha jet order too high");
        let d: Result<Vec<f64>, _> = self.inv_alpha_derivs[..=order].iter().map(|e| e.eval(x)).collect();
        Ok(Jet::from_real(&d?))
    }

    /// Solves `beta_a(x) = y` to `|beta_a(x) - y| <= 1e-12 (1 + |y|)`.
    pub fn beta_a_inverse(&self, y: f64) -> Result<f64, ProfileError> {
        let tol = 1e-12 * (1.0 + y.abs());
        let f = |x: f64| self.beta_a(x).map(|b| b - y);
        // bracket by doubling outward from 0
        let (mut lo, mut hi) = (0.0f64, 0.0f64);
        let f0 = f(0.0)?;
        if f0.abs() <= tol {
            return Ok(0.0);
        }
        let mut step = 1.0;
        if f0 < 0.0 {
            loop {
                hi = lo + step;
                if f(hi)? >= 0.0 {
                    break;
                }
                lo = hi;
                step *= 2.0;
                if step > 1e12 {
                    return Err(ProfileError::InverseNotConverged(y));
                }
            }
        } else {
            loop {
                lo = hi - step;
                if f(lo)? <= 0.0 {
                    break;
                }
                hi = lo;
                step *= 2.0;
                if step > 1e12 {
                    return Err(ProfileError::InverseNotConverged(y));
                }
            }
        }
        // safeguarded Newton on [lo, hi]
        let mut x = 0.5 * (lo + hi);
        // one extra Newton step once inside tolerance removes the alpha-scaled x error
        let polish = |x: f64, fx: f64| -> Result<f64, ProfileError> {
            let next = x - fx / self.inv_alpha(x)?;
            Ok(if f(next)?.abs() <= fx.abs() { next } else { x })
        };
        for _ in 0..200 {
            let fx = f(x)?;
            if fx.abs() <= tol {
                return polish(x, fx);
            }
            if fx < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let slope = self.inv_alpha(x)?;
            let newton = x - fx / slope;
            x = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            if hi - lo <= 4.0 * f64::EPSILON * x.abs().max(1e-300) {
                let fx = f(x)?;
                if fx.abs() <= tol {
                    return Ok(x);
                }
                break;
            }
        }
        Err(ProfileError::InverseNotConverged(y))
    }

    /// `x` range outside which `exp(-beta_a^2/(2k))` is below `1e-300`.
    pub fn gaussian_window(&self) -> Result<(f64, f64), ProfileError> {
        let b = (2.0 * self.k * 690.8).sqrt();
        Ok((self.beta_a_inverse(-b)?, self.beta_a_inverse(b)?))
    }

    /// Half-width of the tabulation window of a custom profile.
    pub fn window(&self) -> f64 {
        self.window
    }

    /// Checks `alpha > 0` on a uniform grid of `|x| <= half_width`.
    pub fn check_positive(&self, half_width: f64, points: usize) -> Result<(), ProfileError> {
        for i in 0..points {
            let x = -half_width + 2.0 * half_width * i as f64 / (points - 1) as f64;
            let a = self.alpha(x)?;
            if a <= 0.0 {
                return Err(ProfileError::NonPositiveAlpha { x, value: a });
            }
        }
        Ok(())
    }
}

/// The two vacua `(phi_0, psi_0)` of a profile.
pub fn vacua(profile: &Arc<PbProfile>) -> (FamilyMember, FamilyMember) {
    (FamilyMember::phi(profile, 0), FamilyMember::psi(profile, 0))
}
