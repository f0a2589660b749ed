//! Python bindings: forms, the `Φ` field, metrics and the classification tools.
//!
//! Structured reports are returned as plain dicts and lists.

use csc_forge::metric_field::{
    admissible_grid, negation_invariance_check as negation_check, ConformalDensity, Curvature, GridSpec,
    MetricField,
};
use csc_forge::oneform::{FormSpec, MeromorphicOneForm, Pole};
use csc_forge::phi_solver::{integrate_phi_along_path, PhiField, DEFAULT_PHI0};
use csc_forge::rational_algebra::{divisor_of_form, exact_from_complex64, ComplexPolynomial, Polynomial, Scalar};
use csc_forge::singularity_analysis::{all_cone_angles, default_radii, gauss_bonnet_check, predicted_divisor};
use csc_forge::sphere_classification::{
    classify_field, football_metric, normalize_form as normalize, reduce_to_football as reduce, standard_form,
    wronskian_identity_check as wronskian, FootballVariant, StandardFormCase,
};
use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

fn err(e: csc_forge::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Converts any serializable report to Python objects through JSON.
fn to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

#[pyclass(name = "OneForm", module = "csc_forge_py", frozen, from_py_object)]
#[derive(Clone)]
struct PyOneForm {
    inner: MeromorphicOneForm,
}

#[pymethods]
impl PyOneForm {
    /// `OneForm([(a, λ), ...], exact_part=[h0, h1, ...])`
    #[new]
    #[pyo3(signature = (poles, exact_part = Vec::new()))]
    fn new(poles: Vec<(Complex64, Complex64)>, exact_part: Vec<Complex64>) -> PyResult<Self> {
        let poles = poles.into_iter().map(|(a, r)| Pole::new(a, r)).collect();
        let inner = MeromorphicOneForm::build_third_kind(poles, ComplexPolynomial::new(exact_part)).map_err(err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = FormSpec::from_json(text).and_then(|s| s.build()).map_err(err)?;
        Ok(Self { inner })
    }

    /// Standard form `kind` in {"simple", "unit", "plus-minus"} in the coordinate `z = scale·w`.
    #[staticmethod]
    #[pyo3(signature = (kind, alpha = None, residue = None, a = None, scale = Complex64::new(1.0, 0.0)))]
    fn standard(
        kind: &str,
        alpha: Option<u32>,
        residue: Option<f64>,
        a: Option<Complex64>,
        scale: Complex64,
    ) -> PyResult<Self> {
        let inner = standard_form(&standard_case(kind, alpha, residue, a)?.with_scale(scale)).map_err(err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn poles(&self) -> Vec<(Complex64, Complex64)> {
        self.inner.poles().iter().map(|p| (p.location, p.residue)).collect()
    }

    fn eta(&self, z: Complex64) -> PyResult<Complex64> {
        self.inner.eta_at(z).ok_or_else(|| err(csc_forge::Error::EvalAtPole(z)))
    }

    fn potential(&self, z: Complex64) -> PyResult<f64> {
        self.inner.potential_f(z).map_err(err)
    }

    fn residue_at_infinity(&self) -> Complex64 {
        self.inner.residue_at_infinity()
    }

    /// `[(point, weight), ...]` with `point = None` for infinity.
    fn divisor(&self) -> Vec<(Option<Complex64>, f64)> {
        divisor_of_form(&self.inner)
            .entries()
            .iter()
            .map(|e| (e.point.as_finite(), e.weight))
            .collect()
    }

    fn hypotheses(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, self.inner.check_hypotheses())
    }

    fn negated(&self) -> Self {
        Self {
            inner: self.inner.negated(),
        }
    }

    fn to_json(&self) -> String {
        self.inner.to_spec().to_json()
    }

    fn __repr__(&self) -> String {
        format!("OneForm({})", self.to_json())
    }
}

fn standard_case(kind: &str, alpha: Option<u32>, residue: Option<f64>, a: Option<Complex64>) -> PyResult<StandardFormCase> {
    let missing = |what: &str| PyValueError::new_err(format!("{kind} needs {what}"));
    match kind {
        "simple" => Ok(StandardFormCase::simple(residue.ok_or_else(|| missing("residue"))?)),
        "unit" => Ok(StandardFormCase::unit_residues(alpha.ok_or_else(|| missing("alpha"))?)),
        "plus-minus" => Ok(StandardFormCase::plus_minus(
            alpha.ok_or_else(|| missing("alpha"))?,
            a.ok_or_else(|| missing("a"))?,
        )),
        other => Err(PyValueError::new_err(format!("unknown standard form {other:?}"))),
    }
}

#[pyclass(name = "PhiField", module = "csc_forge_py", frozen, from_py_object)]
#[derive(Clone)]
struct PyPhiField {
    inner: PhiField,
}

#[pymethods]
impl PyPhiField {
    /// Solves `Φ(p0) = phi0`; `p0` defaults to the first of 1, 2, 1+i that is not a pole.
    #[new]
    #[pyo3(signature = (form, p0 = None, phi0 = DEFAULT_PHI0))]
    fn new(form: PyRef<'_, PyOneForm>, p0: Option<Complex64>, phi0: f64) -> PyResult<Self> {
        let p0 = p0.unwrap_or_else(|| PhiField::default_base_point(&form.inner));
        let inner = PhiField::solve(&form.inner, p0, phi0).map_err(err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn with_a0(form: PyRef<'_, PyOneForm>, a0: f64) -> PyResult<Self> {
        Ok(Self {
            inner: PhiField::with_a0(&form.inner, a0).map_err(err)?,
        })
    }

    fn phi(&self, z: Complex64) -> PyResult<f64> {
        self.inner.phi(z).map_err(err)
    }

    fn exponent(&self, z: Complex64) -> PyResult<f64> {
        self.inner.exponent(z).map_err(err)
    }

    #[getter]
    fn a0(&self) -> f64 {
        self.inner.a0()
    }

    #[getter]
    fn p0(&self) -> Complex64 {
        self.inner.p0()
    }

    #[getter]
    fn phi0(&self) -> f64 {
        self.inner.phi0()
    }

    #[getter]
    fn form(&self) -> PyOneForm {
        PyOneForm {
            inner: self.inner.form().clone(),
        }
    }
}

#[pyclass(name = "Metric", module = "csc_forge_py", frozen)]
struct PyMetric {
    inner: MetricField,
}

#[pymethods]
impl PyMetric {
    #[new]
    #[pyo3(signature = (phi, curvature))]
    fn new(phi: PyRef<'_, PyPhiField>, curvature: i32) -> PyResult<Self> {
        let k = Curvature::from_i32(curvature).map_err(err)?;
        Ok(Self {
            inner: MetricField::new(phi.inner.clone(), k),
        })
    }

    fn density(&self, z: Complex64) -> PyResult<f64> {
        self.inner.metric_density(z).map_err(err)
    }

    fn log_density(&self, z: Complex64) -> PyResult<f64> {
        self.inner.log_metric_density(z).map_err(err)
    }

    /// `(center, half_width, n)` of the first admissible grid, or `None`.
    #[pyo3(signature = (h = 1e-3))]
    fn admissible_grid(&self, h: f64) -> Option<(Complex64, f64, usize)> {
        admissible_grid(&self.inner, h).map(|g| (Complex64::new(g.center[0], g.center[1]), g.half_width, g.n))
    }

    #[pyo3(signature = (center, half_width, n, h = 1e-3))]
    fn curvature_report(
        &self,
        py: Python<'_>,
        center: Complex64,
        half_width: f64,
        n: usize,
        h: f64,
    ) -> PyResult<Py<PyAny>> {
        let report = self
            .inner
            .curvature_report(&GridSpec::new(center, half_width, n), h)
            .map_err(err)?;
        to_py(py, &report)
    }

    fn predicted_divisor(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        let predicted = predicted_divisor(self.inner.form(), self.inner.curvature()).map_err(err)?;
        to_py(py, &predicted)
    }

    #[pyo3(signature = (radii = None))]
    fn cone_angles(&self, py: Python<'_>, radii: Option<Vec<f64>>) -> PyResult<Py<PyAny>> {
        let reports = all_cone_angles(&self.inner, &radii.unwrap_or_else(default_radii)).map_err(err)?;
        to_py(py, &reports)
    }

    fn gauss_bonnet(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &gauss_bonnet_check(&self.inner).map_err(err)?)
    }
}

/// RK4 value of `Φ` at the end of a polyline starting from `phi_start`.
#[pyfunction]
fn integrate_path(form: PyRef<'_, PyOneForm>, path: Vec<Complex64>, phi_start: f64) -> PyResult<f64> {
    integrate_phi_along_path(&form.inner, &path, phi_start).map_err(err)
}

#[pyfunction]
fn negation_invariance_check(form: PyRef<'_, PyOneForm>, p0: Complex64, phi0: f64) -> PyResult<f64> {
    negation_check(&form.inner, p0, phi0).map_err(err)
}

/// Exact check of `t's - ts' = αμ z^{α-1}`. Coefficients are ascending and
/// converted exactly from their binary floating-point values.
#[pyfunction]
fn wronskian_identity_check(
    py: Python<'_>,
    t: Vec<Complex64>,
    s: Vec<Complex64>,
) -> PyResult<Py<PyAny>> {
    let exact = |coeffs: Vec<Complex64>| {
        coeffs
            .into_iter()
            .map(|c| exact_from_complex64(c).ok_or_else(|| PyValueError::new_err("non-finite coefficient")))
            .collect::<PyResult<Vec<_>>>()
            .map(Polynomial::new)
    };
    let id = wronskian(&exact(t)?, &exact(s)?).map_err(err)?;
    #[derive(Serialize)]
    struct Identity {
        alpha: usize,
        mu: Complex64,
        omega0: Complex64,
        sigma0: Complex64,
    }
    to_py(
        py,
        &Identity {
            alpha: id.alpha,
            mu: id.mu.to_complex64(),
            omega0: id.omega0.to_complex64(),
            sigma0: id.sigma0.to_complex64(),
        },
    )
}

#[pyfunction]
fn normalize_form(py: Python<'_>, form: PyRef<'_, PyOneForm>) -> PyResult<Py<PyAny>> {
    to_py(py, &normalize(&form.inner).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (kind, a0, alpha = None, residue = None, a = None))]
fn reduce_to_football(
    py: Python<'_>,
    kind: &str,
    a0: f64,
    alpha: Option<u32>,
    residue: Option<f64>,
    a: Option<Complex64>,
) -> PyResult<Py<PyAny>> {
    to_py(py, &reduce(&standard_case(kind, alpha, residue, a)?, a0).map_err(err)?)
}

/// Football density at `w`: generic when `b` is None, integer variant otherwise.
#[pyfunction]
#[pyo3(signature = (alpha, w, b = None))]
fn football_density(alpha: f64, w: Complex64, b: Option<f64>) -> PyResult<f64> {
    let variant = match b {
        Some(b) => FootballVariant::Integer { b },
        None => FootballVariant::Generic,
    };
    football_metric(alpha, variant).and_then(|f| f.density(w)).map_err(err)
}

#[pyfunction]
fn classify(py: Python<'_>, phi: PyRef<'_, PyPhiField>) -> PyResult<Py<PyAny>> {
    to_py(py, &classify_field(&phi.inner).map_err(err)?)
}

#[pymodule]
fn csc_forge_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyOneForm>()?;
    m.add_class::<PyPhiField>()?;
    m.add_class::<PyMetric>()?;
    m.add_function(wrap_pyfunction!(integrate_path, m)?)?;
    m.add_function(wrap_pyfunction!(negation_invariance_check, m)?)?;
    m.add_function(wrap_pyfunction!(wronskian_identity_check, m)?)?;
    m.add_function(wrap_pyfunction!(normalize_form, m)?)?;
    m.add_function(wrap_pyfunction!(reduce_to_football, m)?)?;
    m.add_function(wrap_pyfunction!(football_density, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    Ok(())
}
