//! Python bindings for the two-photon decay engine.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use twogamma::multipole::Gauge;
use twogamma::spectrum::{build_spectrum, spectrum_report, BasisParams};
use twogamma::twophoton::TwoPhotonError;
use twogamma::{Engine as CoreEngine, TransitionSpec, Truncation};

fn map_err(e: TwoPhotonError) -> PyErr {
    match e {
        TwoPhotonError::BadConfig(_) => PyValueError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn parse_gauge(s: &str) -> PyResult<Gauge> {
    match s {
        "velocity" => Ok(Gauge::Velocity),
        "length" => Ok(Gauge::Length),
        other => Err(PyValueError::new_err(format!(
            "unknown gauge '{other}', expected 'velocity' or 'length'"
        ))),
    }
}

/// Two-photon decay engine for a single transition of a hydrogen- or
/// helium-like ion.
#[pyclass]
struct Engine {
    inner: CoreEngine,
}

#[pymethods]
impl Engine {
    /// Engine(z, transition, l_max=5, dipole_only=False, gauge="velocity",
    ///        n_splines=None, r_max=None)
    #[new]
    #[pyo3(signature = (z, transition, l_max=5, dipole_only=false, gauge="velocity", n_splines=None, r_max=None))]
    fn new(
        z: f64,
        transition: &str,
        l_max: u32,
        dipole_only: bool,
        gauge: &str,
        n_splines: Option<usize>,
        r_max: Option<f64>,
    ) -> PyResult<Self> {
        let kind = transition
            .parse::<twogamma::TransitionKind>()
            .map_err(map_err)?;
        let spec = TransitionSpec::new(z, kind).map_err(map_err)?;
        let trunc = Truncation {
            l_max,
            dipole_only,
            gauge: parse_gauge(gauge)?,
            ..Truncation::default()
        };
        let mut params = BasisParams::defaults_for(z);
        if let Some(n) = n_splines {
            params.n_splines = n;
        }
        if let Some(r) = r_max {
            params.r_max = r;
        }
        let inner = CoreEngine::new(spec, trunc, Some(params)).map_err(map_err)?;
        Ok(Self { inner })
    }

    /// Transition energy in units of mc^2.
    #[getter]
    fn transition_energy(&self) -> f64 {
        self.inner.delta_e
    }

    #[getter]
    fn basis_fingerprint(&self) -> String {
        self.inner.params.fingerprint()
    }

    /// Photon-photon angular correlation W(theta, y) in 1/s per (sr^2 * y),
    /// theta in radians, energy sharing y in (0, 1).
    fn w(&self, theta: f64, y: f64) -> PyResult<f64> {
        self.inner.w(theta, y).map_err(map_err)
    }

    /// W on a grid of opening angles (radians) at fixed energy sharing y.
    fn correlation_function<'py>(
        &self,
        py: Python<'py>,
        y: f64,
        thetas: Vec<f64>,
    ) -> PyResult<Bound<'py, PyDict>> {
        let res = self.inner.correlation_function(y, &thetas).map_err(map_err)?;
        let d = PyDict::new(py);
        d.set_item("z", res.z)?;
        d.set_item("transition", res.transition)?;
        d.set_item("y", res.y)?;
        d.set_item("theta", res.theta)?;
        d.set_item("w", res.w)?;
        d.set_item("l_max", res.l_max)?;
        d.set_item("dipole_only", res.dipole_only)?;
        d.set_item("gauge", res.gauge)?;
        d.set_item("transition_energy", res.transition_energy)?;
        d.set_item("basis_fingerprint", res.basis_fingerprint)?;
        Ok(d)
    }

    /// Total two-photon rate in 1/s; n_y and n_theta set the quadrature
    /// orders in energy sharing and opening angle.
    #[pyo3(signature = (n_y=32, n_theta=12))]
    fn total_rate<'py>(
        &self,
        py: Python<'py>,
        n_y: usize,
        n_theta: usize,
    ) -> PyResult<Bound<'py, PyDict>> {
        let res = self.inner.total_rate(n_y, n_theta).map_err(map_err)?;
        let d = PyDict::new(py);
        d.set_item("z", res.z)?;
        d.set_item("transition", res.transition)?;
        d.set_item("total", res.total)?;
        d.set_item("spectrum", res.spectrum)?;
        d.set_item("l_max", res.l_max)?;
        d.set_item("dipole_only", res.dipole_only)?;
        d.set_item("gauge", res.gauge)?;
        d.set_item("transition_energy", res.transition_energy)?;
        d.set_item("basis_fingerprint", res.basis_fingerprint)?;
        Ok(d)
    }

    /// Full second-order helicity amplitude as a complex number; angular
    /// momentum projections are passed doubled (2*m).
    fn amplitude(
        &self,
        tmf: i32,
        tmi: i32,
        lam1: i32,
        lam2: i32,
        theta: f64,
        y: f64,
    ) -> PyResult<(f64, f64)> {
        let m = self
            .inner
            .amplitude(tmf, tmi, lam1, lam2, theta, y)
            .map_err(map_err)?;
        Ok((m.re, m.im))
    }
}

/// Basis diagnostics for one Dirac angular symmetry kappa:
/// orthonormality residual, lowest bound-energy errors and completeness
/// defects against the analytic point-nucleus solutions.
#[pyfunction]
#[pyo3(signature = (z, kappa, n_splines=None, r_max=None, n_bound_checked=2))]
fn spectrum_check<'py>(
    py: Python<'py>,
    z: f64,
    kappa: i32,
    n_splines: Option<usize>,
    r_max: Option<f64>,
    n_bound_checked: u32,
) -> PyResult<Bound<'py, PyDict>> {
    if kappa == 0 {
        return Err(PyValueError::new_err("kappa must be nonzero"));
    }
    let mut params = BasisParams::defaults_for(z);
    if let Some(n) = n_splines {
        params.n_splines = n;
    }
    if let Some(r) = r_max {
        params.r_max = r;
    }
    let spec = build_spectrum(z, kappa, &params)
        .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    let report = spectrum_report(z, &spec, &params, n_bound_checked);
    let d = PyDict::new(py);
    d.set_item("kappa", kappa)?;
    d.set_item("n_states", spec.orbitals.len())?;
    d.set_item("orthonormality_residual", report.orthonormality_residual)?;
    d.set_item("bound_energy_errors", report.bound_energy_errors.clone())?;
    d.set_item("completeness_defects", report.completeness_defects.clone())?;
    d.set_item("passes", report.passes())?;
    Ok(d)
}

#[pymodule]
fn twogamma_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Engine>()?;
    m.add_function(wrap_pyfunction!(spectrum_check, m)?)?;
    m.add("EPSILON_POLE", twogamma::twophoton::EPSILON_POLE)?;
    Ok(())
}
