//! Python module `pblab`: profiles, family evaluation, pairings, relation
//! residuals, the verification catalog, figure data and squeezed states.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use pblab_core::operators::{ladder_residual as core_ladder_residual, Strategy};
use pblab_core::pairing::{biorthonormality_matrix, quasi_basis_partial_sums};
use pblab_core::squeeze::{coefficient_cancellation, functional_kappa, functional_tau, standard_bump, Truncation};
use pblab_core::verify::SERIES_TAIL;
use pblab_core::{
    inner_product, plot_data as core_plot_data, run_catalog, Bump, FamilyMember, FigureId, Function1d, Method, PbProfile,
    ProfileKind, Side, SqueezeParams, TowerIndex, VerifyOptions,
};

fn value_error<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_side(side: &str) -> PyResult<Side> {
    match side {
        "phi" => Ok(Side::Phi),
        "psi" => Ok(Side::Psi),
        _ => Err(PyValueError::new_err(format!("side must be 'phi' or 'psi', got {side:?}"))),
    }
}

fn parse_method(method: &str) -> PyResult<Method> {
    match method {
        "gauss-hermite" => Ok(Method::TransformedGaussHermite),
        "adaptive" => Ok(Method::AdaptiveX),
        _ => Err(PyValueError::new_err(format!("method must be 'gauss-hermite' or 'adaptive', got {method:?}"))),
    }
}

/// A deformation profile `alpha(x)` with scale `k` and normalizations.
#[pyclass(name = "Profile", frozen)]
struct PyProfile {
    inner: Arc<PbProfile>,
}

#[pymethods]
impl PyProfile {
    /// `alpha(x) = alpha`.
    #[staticmethod]
    #[pyo3(signature = (alpha, k))]
    fn constant(alpha: f64, k: f64) -> PyResult<Self> {
        Self::builtin(ProfileKind::Constant { alpha }, k)
    }

    /// `alpha(x) = 1/(1 + gamma x^4)`.
    #[staticmethod]
    fn quartic(gamma: f64, k: f64) -> PyResult<Self> {
        Self::builtin(ProfileKind::Quartic { gamma }, k)
    }

    /// `alpha(x) = 1/(1 + gamma cos x)` with `|gamma| < 1`.
    #[staticmethod]
    fn cosine(gamma: f64, k: f64) -> PyResult<Self> {
        Self::builtin(ProfileKind::Cosine { gamma }, k)
    }

    /// `alpha(x)` given as an expression in `x`.
    #[staticmethod]
    fn custom(alpha: &str, k: f64) -> PyResult<Self> {
        Ok(PyProfile { inner: Arc::new(PbProfile::parse_custom(alpha, k).map_err(value_error)?) })
    }

    /// The profile of a figure panel with its caption parameters.
    #[staticmethod]
    fn figure(id: &str) -> PyResult<Self> {
        let id = FigureId::from_name(id).ok_or_else(|| PyValueError::new_err(format!("unknown figure id {id:?}")))?;
        Ok(PyProfile { inner: Arc::new(id.profile().map_err(value_error)?) })
    }

    /// A copy with overridden normalizations; `n_phi * n_psi` must equal `1/sqrt(2 pi k)`.
    #[pyo3(signature = (n_phi=None, n_psi=None))]
    fn with_normalization(&self, n_phi: Option<f64>, n_psi: Option<f64>) -> PyResult<Self> {
        let p = (*self.inner).clone().with_normalization(n_phi, n_psi).map_err(value_error)?;
        Ok(PyProfile { inner: Arc::new(p) })
    }

    #[getter]
    fn k(&self) -> f64 {
        self.inner.k()
    }

    #[getter]
    fn n_phi(&self) -> f64 {
        self.inner.n_phi()
    }

    #[getter]
    fn n_psi(&self) -> f64 {
        self.inner.n_psi()
    }

    fn alpha(&self, x: f64) -> PyResult<f64> {
        self.inner.alpha(x).map_err(value_error)
    }

    fn beta_a(&self, x: f64) -> PyResult<f64> {
        self.inner.beta_a(x).map_err(value_error)
    }

    /// `phi_n(x)`.
    fn phi(&self, n: usize, x: f64) -> PyResult<f64> {
        FamilyMember::phi(&self.inner, n).eval(x).map_err(value_error)
    }

    /// `psi_n(x)`.
    fn psi(&self, n: usize, x: f64) -> PyResult<f64> {
        FamilyMember::psi(&self.inner, n).eval(x).map_err(value_error)
    }

    /// Even (`odd=False`) or odd tower member `m` on side `'phi'` or `'psi'`.
    #[pyo3(signature = (side, m, x, odd=false))]
    fn tower(&self, side: &str, m: usize, x: f64, odd: bool) -> PyResult<f64> {
        let index = if odd { TowerIndex::odd(m) } else { TowerIndex::even(m) };
        FamilyMember::tower(&self.inner, parse_side(side)?, index).eval(x).map_err(value_error)
    }

    /// `<psi_n, phi_m>` by the given quadrature route.
    #[pyo3(signature = (n, m, method="gauss-hermite"))]
    fn pairing(&self, n: usize, m: usize, method: &str) -> PyResult<C64> {
        let psi = FamilyMember::psi(&self.inner, n);
        let phi = FamilyMember::phi(&self.inner, m);
        Ok(inner_product(&psi, &phi, parse_method(method)?).map_err(value_error)?.value)
    }

    fn __repr__(&self) -> String {
        format!("Profile({})", self.inner.describe())
    }
}

impl PyProfile {
    fn builtin(kind: ProfileKind, k: f64) -> PyResult<Self> {
        Ok(PyProfile { inner: Arc::new(PbProfile::builtin(kind, k).map_err(value_error)?) })
    }
}

/// `max |G - I|` for `G[n][m] = <psi_n, phi_m>`, `n, m < size`.
#[pyfunction]
#[pyo3(signature = (profile, size, method="gauss-hermite"))]
fn biorthonormality(profile: &PyProfile, size: usize, method: &str) -> PyResult<f64> {
    Ok(biorthonormality_matrix(&profile.inner, size, parse_method(method)?).map_err(value_error)?.max_deviation)
}

/// Worst relative residual of a catalog relation over `m = 0 ..= m_max`.
#[pyfunction]
#[pyo3(signature = (profile, relation, m_max=5, strategy="symbolic"))]
fn ladder_residual(profile: &PyProfile, relation: &str, m_max: usize, strategy: &str) -> PyResult<f64> {
    let s = Strategy::from_name(strategy).ok_or_else(|| PyValueError::new_err(format!("unknown strategy {strategy:?}")))?;
    Ok(core_ladder_residual(&profile.inner, relation, m_max, s).map_err(value_error)?.max())
}

/// The full relation catalog as a JSON string.
#[pyfunction]
#[pyo3(signature = (profile, tolerance=None, fd_tolerance=None))]
fn verify(py: Python<'_>, profile: &PyProfile, tolerance: Option<f64>, fd_tolerance: Option<f64>) -> PyResult<String> {
    let p = Arc::clone(&profile.inner);
    let report = py.detach(move || run_catalog(&p, &VerifyOptions { tolerance, fd_tolerance }));
    serde_json::to_string(&report).map_err(value_error)
}

/// Relative errors `|S_N - <f,g>|/|<f,g>|` for `N = 0 ..= terms` with bumps
/// centered at `f_center`, `g_center` of half-widths `f_width`, `g_width`.
#[pyfunction]
#[pyo3(signature = (profile, f_center, f_width, g_center, g_width, terms=30))]
fn quasi_basis_errors(
    profile: &PyProfile,
    f_center: f64,
    f_width: f64,
    g_center: f64,
    g_width: f64,
    terms: usize,
) -> PyResult<Vec<f64>> {
    let f: Arc<dyn Function1d> = Arc::new(Bump::unit(f_center, f_width));
    let g: Arc<dyn Function1d> = Arc::new(Bump::unit(g_center, g_width));
    Ok(quasi_basis_partial_sums(&profile.inner, f, g, terms).map_err(value_error)?.relative_errors())
}

/// Columns `x, phi, psi, product` of a figure panel.
#[pyfunction]
#[pyo3(signature = (figure, xmin=None, xmax=None, points=1001))]
fn plot_data(
    figure: &str,
    xmin: Option<f64>,
    xmax: Option<f64>,
    points: usize,
) -> PyResult<(Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>)> {
    let id = FigureId::from_name(figure).ok_or_else(|| PyValueError::new_err(format!("unknown figure id {figure:?}")))?;
    let (lo, hi) = id.range();
    let d = core_plot_data(id, xmin.unwrap_or(lo), xmax.unwrap_or(hi), points).map_err(value_error)?;
    Ok((d.x, d.phi, d.psi, d.product))
}

/// Worst relative `alpha_tau(2n+2) + beta_tau(2n)` for `n <= n_max`.
#[pyfunction]
#[pyo3(signature = (r, theta, n_max=20))]
fn squeeze_cancellation(r: f64, theta: f64, n_max: usize) -> PyResult<f64> {
    let z = SqueezeParams::new(r, theta).map_err(value_error)?;
    Ok(coefficient_cancellation(&z, n_max).map_err(value_error)?.max_relative)
}

/// `(F_tau[z](g), F_kappa[z](g))` for the standard bump `g`; needs `k = 1`.
#[pyfunction]
fn squeeze_functionals(profile: &PyProfile, r: f64, theta: f64) -> PyResult<(C64, C64)> {
    let z = SqueezeParams::new(r, theta).map_err(value_error)?;
    let g: Arc<dyn Function1d> = Arc::new(standard_bump());
    let t = Truncation::Auto { tol: SERIES_TAIL };
    let tau = functional_tau(&profile.inner, &z, Arc::clone(&g), t).map_err(value_error)?;
    let kappa = functional_kappa(&profile.inner, &z, g, t).map_err(value_error)?;
    Ok((tau.value, kappa.value))
}

#[pymodule]
fn pblab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyProfile>()?;
    m.add_function(wrap_pyfunction!(biorthonormality, m)?)?;
    m.add_function(wrap_pyfunction!(ladder_residual, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(quasi_basis_errors, m)?)?;
    m.add_function(wrap_pyfunction!(plot_data, m)?)?;
    m.add_function(wrap_pyfunction!(squeeze_cancellation, m)?)?;
    m.add_function(wrap_pyfunction!(squeeze_functionals, m)?)?;
    Ok(())
}
