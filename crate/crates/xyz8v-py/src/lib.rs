//! Python bindings: the `xyz8v` extension module.
//!
//! Matrices cross the boundary as lists of rows of Python complex numbers and
//! reports as JSON strings.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use xyz8v::lattice::{log_derivative_at_zero, transfer_8v, verify_transfer_identities, xyz_hamiltonian};
use xyz8v::local::ybe_residual;
use xyz8v::oracle::dense_spectrum;
use xyz8v::report::{run as run_command, Command, RunConfig};
use xyz8v::{c, CMat, ModelParams, Twist, C64};

pub fn parse_command(name: &str) -> xyz8v::Result<Command> {
    match name {
        "verify" => Ok(Command::Verify),
        "spectrum" => Ok(Command::Spectrum),
        "bethe" => Ok(Command::Bethe),
        "all" => Ok(Command::All),
        other => Err(xyz8v::Error::Config(format!("unknown command {other:?}; expected verify, spectrum, bethe or all"))),
    }
}

pub fn matrix_rows(m: &CMat) -> Vec<Vec<C64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

/// Runs a subcommand on a JSON config; returns the report JSON and the CSV tables.
pub fn run_json(command: &str, config_json: &str) -> xyz8v::Result<(String, Option<String>, Option<String>)> {
    let cmd = parse_command(command)?;
    let cfg = RunConfig::from_json(config_json)?;
    let out = run_command(cmd, &cfg)?;
    let text = |b: Vec<u8>| String::from_utf8(b).expect("reports are UTF-8");
    Ok((text(out.report.to_json()?), out.spectrum_csv.map(text), out.bethe_csv.map(text)))
}

fn py_err(e: xyz8v::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Quasi-periodic inhomogeneous 8-vertex chain.
#[pyclass(name = "Model", module = "xyz8v", frozen)]
pub struct PyModel {
    inner: ModelParams,
}

#[pymethods]
impl PyModel {
    /// Inhomogeneities are drawn from `seed` when `xi` is omitted.
    #[new]
    #[pyo3(signature = (n, twist = (0, 0), omega = c(0.0, 1.0), eta = c(0.4377, 0.1155), xi = None, seed = 1))]
    fn new(n: usize, twist: (u8, u8), omega: C64, eta: C64, xi: Option<Vec<C64>>, seed: u64) -> PyResult<Self> {
        let tw = Twist::new(twist.0, twist.1).map_err(py_err)?;
        let inner = match xi {
            Some(xi) => {
                if xi.len() != n {
                    return Err(PyValueError::new_err(format!("xi has {} entries, expected {n}", xi.len())));
                }
                ModelParams::new(omega, eta, xi, tw)
            }
            None => ModelParams::generic_draw(omega, eta, n, tw, seed),
        }
        .map_err(py_err)?;
        Ok(PyModel { inner })
    }

    /// Homogeneous point ξ_n = 0.
    #[staticmethod]
    #[pyo3(signature = (n, twist = (0, 0), omega = c(0.0, 1.0), eta = c(0.4377, 0.1155)))]
    fn homogeneous(n: usize, twist: (u8, u8), omega: C64, eta: C64) -> PyResult<Self> {
        let tw = Twist::new(twist.0, twist.1).map_err(py_err)?;
        Ok(PyModel { inner: ModelParams::homogeneous(omega, eta, n, tw).map_err(py_err)? })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn twist(&self) -> (u8, u8) {
        (self.inner.twist.x, self.inner.twist.y)
    }

    #[getter]
    fn omega(&self) -> C64 {
        self.inner.omega()
    }

    #[getter]
    fn eta(&self) -> C64 {
        self.inner.eta
    }

    #[getter]
    fn xi(&self) -> Vec<C64> {
        self.inner.xi.clone()
    }

    /// Twisted transfer matrix T(λ).
    fn transfer(&self, lam: C64) -> Vec<Vec<C64>> {
        matrix_rows(&transfer_8v(&self.inner, lam))
    }

    fn quantum_det(&self, lam: C64) -> C64 {
        self.inner.quantum_det(lam)
    }

    /// Node values t(ξ_a) and multiplicity of every eigenvalue function.
    #[pyo3(signature = (seed = 1))]
    fn spectrum(&self, seed: u64) -> PyResult<Vec<(Vec<C64>, usize)>> {
        let o = dense_spectrum(&self.inner, seed).map_err(py_err)?;
        Ok(o.clusters.iter().map(|e| (e.nodes.clone(), e.mult)).collect())
    }

    /// XYZ Hamiltonian with the quasi-periodic boundary twist.
    fn hamiltonian(&self) -> Vec<Vec<C64>> {
        matrix_rows(&xyz_hamiltonian(&self.inner).0)
    }

    /// T'(0)T(0)^{-1} by central differences.
    #[pyo3(signature = (h = 1e-5))]
    fn log_derivative_at_zero(&self, h: f64) -> PyResult<Vec<Vec<C64>>> {
        Ok(matrix_rows(&log_derivative_at_zero(&self.inner, h).map_err(py_err)?))
    }

    fn ybe_residual(&self, l1: C64, l2: C64, l3: C64) -> f64 {
        ybe_residual(&self.inner, l1, l2, l3)
    }

    /// Transfer-matrix identities at the given points as (label, residual, tolerance, passed).
    #[pyo3(signature = (lambdas, tol = 1e-9))]
    fn verify_transfer(&self, lambdas: Vec<C64>, tol: f64) -> Vec<(String, f64, f64, bool)> {
        verify_transfer_identities(&self.inner, &lambdas, tol)
            .into_iter()
            .map(|cl| (cl.label, cl.residual, cl.tolerance, cl.passed))
            .collect()
    }

    fn __repr__(&self) -> String {
        format!("Model(n={}, twist={}, omega={}, eta={})", self.inner.n(), self.inner.twist, self.inner.omega(), self.inner.eta)
    }
}

/// Runs verify | spectrum | bethe | all on a JSON config; returns (report_json, spectrum_csv, bethe_csv).
#[pyfunction]
fn run(py: Python<'_>, command: &str, config_json: &str) -> PyResult<(String, Option<String>, Option<String>)> {
    let (command, config_json) = (command.to_string(), config_json.to_string());
    py.detach(move || run_json(&command, &config_json)).map_err(py_err)
}

#[pymodule]
#[pyo3(name = "xyz8v")]
fn xyz8v_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
