use std::path::PathBuf;

use pyo3::exceptions::{PyArithmeticError, PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use gumbel_core::asymptotics;
use gumbel_core::bell;
use gumbel_core::cli::check_battery;
use gumbel_core::jacobian::{self, CertStatus, CertifyOptions, ColumnConvention, ThetaChoice};
use gumbel_core::poly::{Poly, VarId};
use gumbel_core::sequences;
use gumbel_core::tables::{emit_tables, DigitMode};
use gumbel_core::{Error, Integer, PrecisionConfig, Rational};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidArgument(m) => PyValueError::new_err(m),
        Error::Parse(m) => PyValueError::new_err(m),
        Error::Consistency(m) => PyArithmeticError::new_err(m),
        Error::Io(e) => PyIOError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn precision(bits: u32) -> PyResult<PrecisionConfig> {
    PrecisionConfig::new(bits).map_err(to_py)
}

/// Closed real interval with outward-rounded endpoints.
#[pyclass(name = "Interval", frozen)]
#[derive(Clone)]
struct PyInterval(gumbel_core::Interval);

#[pymethods]
impl PyInterval {
    /// Lower endpoint as a decimal string.
    #[pyo3(signature = (digits = None))]
    fn lo(&self, digits: Option<usize>) -> String {
        self.0.lo_decimal(digits.unwrap_or(30))
    }

    #[pyo3(signature = (digits = None))]
    fn hi(&self, digits: Option<usize>) -> String {
        self.0.hi_decimal(digits.unwrap_or(30))
    }

    fn mid(&self) -> f64 {
        self.0.to_f64()
    }

    fn width(&self) -> f64 {
        self.0.width().to_f64()
    }

    fn contains_zero(&self) -> bool {
        self.0.contains_zero()
    }

    /// Exact membership test for a rational given as "p/q" or a decimal string.
    fn contains(&self, value: &str) -> PyResult<bool> {
        let r = parse_rational(value)?;
        Ok(self.0.contains_rational(&r))
    }

    fn __repr__(&self) -> String {
        format!("Interval([{}, {}])", self.0.lo_decimal(20), self.0.hi_decimal(20))
    }
}

fn parse_rational(s: &str) -> PyResult<Rational> {
    let s = s.trim();
    if let Some((int, frac)) = s.split_once('.') {
        let digits = format!("{int}{frac}");
        let num = Rational::from_str_radix(&digits, 10).map_err(|e| PyValueError::new_err(e.to_string()))?;
        let den = Rational::from(Integer::from(Integer::u_pow_u(10, frac.len() as u32)));
        return Ok(num / den);
    }
    Rational::from_str_radix(s, 10).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Sparse polynomial with rational coefficients in g1, g2, ... (and k*, z*).
#[pyclass(name = "Poly", frozen)]
#[derive(Clone)]
struct PyPoly(Poly);

#[pymethods]
impl PyPoly {
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Poly::parse_canonical(text).map(PyPoly).map_err(to_py)
    }

    fn canonical(&self) -> String {
        self.0.to_canonical()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn total_degree(&self) -> u32 {
        self.0.total_degree()
    }

    fn derivative(&self, var: &str) -> PyResult<Self> {
        let v: VarId = var.parse().map_err(to_py)?;
        Ok(PyPoly(self.0.partial_derivative(v)))
    }

    fn __add__(&self, other: &Self) -> Self {
        PyPoly(self.0.add(&other.0))
    }

    fn __sub__(&self, other: &Self) -> Self {
        PyPoly(self.0.sub(&other.0))
    }

    fn __mul__(&self, other: &Self) -> Self {
        PyPoly(self.0.mul(&other.0))
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.0 == other.0
    }

    /// Interval value with every g_k replaced by an enclosure of gamma^(k).
    #[pyo3(signature = (bits = None))]
    fn eval_at_constants(&self, bits: Option<u32>) -> PyResult<PyInterval> {
        let cfg = precision(bits.unwrap_or(128))?;
        let top = self.0.vars().iter().map(|v| v.index).max().unwrap_or(1);
        let g = sequences::gamma_all(top, &cfg).map_err(to_py)?;
        let v = self.0.eval_interval(&bell::gamma_assignment(&g), cfg.bits).map_err(to_py)?;
        Ok(PyInterval(v))
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Poly({} terms)", self.0.len())
    }
}

macro_rules! sequence_fn {
    ($name:ident, $path:path) => {
        #[pyfunction]
        #[pyo3(signature = (n, bits = 128))]
        fn $name(n: u32, bits: u32) -> PyResult<PyInterval> {
            $path(n, &precision(bits)?).map(PyInterval).map_err(to_py)
        }
    };
}

sequence_fn!(gamma_n, sequences::gamma_n);
sequence_fn!(eta_n, sequences::eta_n);
sequence_fn!(eta_tilde_n, sequences::eta_tilde_n);
sequence_fn!(delta_n, sequences::delta_n);
sequence_fn!(delta_tilde_n, sequences::delta_tilde_n);
sequence_fn!(delta_n_quadrature, sequences::delta_n_quadrature);
sequence_fn!(delta_asym, asymptotics::delta_asym);

#[pyfunction]
#[pyo3(signature = (x, bits = 128))]
fn lambert_w(x: &str, bits: u32) -> PyResult<PyInterval> {
    let r = parse_rational(x)?;
    let iv = gumbel_core::Interval::from_rational(&r, bits);
    asymptotics::lambert_w(&iv, &precision(bits)?).map(PyInterval).map_err(to_py)
}

/// The integer relation P_n among g1..g{2n}.
#[pyfunction]
fn build_p(n: u32) -> PyResult<PyPoly> {
    bell::build_p(n).map(PyPoly).map_err(to_py)
}

/// Certified table as CSV (or JSON with `json=True`).
#[pyfunction]
#[pyo3(signature = (n_max, digits = 10, bits = 128, mode = "auto", json = false))]
fn tables(n_max: u32, digits: u32, bits: u32, mode: &str, json: bool) -> PyResult<String> {
    let mode: DigitMode = mode.parse().map_err(to_py)?;
    let t = emit_tables(n_max, digits, &precision(bits)?, mode).map_err(to_py)?;
    if json {
        t.to_json().map_err(to_py)
    } else {
        Ok(t.to_csv())
    }
}

/// Certification records for context n as `(m, theta, certified, det_lo, det_hi)`.
#[pyfunction]
#[pyo3(signature = (n, bits = 128, convention = "literal", ledger = None, jobs = 1))]
fn certify(
    py: Python<'_>,
    n: u32,
    bits: u32,
    convention: &str,
    ledger: Option<PathBuf>,
    jobs: usize,
) -> PyResult<Vec<(u32, String, bool, String, String)>> {
    let convention = match convention {
        "literal" => ColumnConvention::Literal,
        "shifted" => ColumnConvention::Shifted,
        other => return Err(PyValueError::new_err(format!("unknown convention {other:?}"))),
    };
    let opts =
        CertifyOptions { precision: precision(bits)?, convention, ledger, jobs: jobs.max(1), ..Default::default() };
    let report = py.allow_threads(|| jacobian::certify_with(n, &opts)).map_err(to_py)?;
    Ok(report
        .records
        .into_iter()
        .map(|r| (r.m, r.theta.to_string(), r.status == CertStatus::CertifiedNonzero, r.det_lo, r.det_hi))
        .collect())
}

#[pyfunction]
fn pascal_submatrix_det(n: u32, theta: &str) -> PyResult<String> {
    let theta: ThetaChoice = theta.parse().map_err(to_py)?;
    jacobian::pascal_submatrix_det(n, theta).map(|d| d.to_string()).map_err(to_py)
}

/// Runs the consistency battery; returns `(name, passed, message)` triples.
#[pyfunction]
#[pyo3(signature = (bits = 128))]
fn check(bits: u32) -> PyResult<Vec<(String, bool, String)>> {
    let cfg = precision(bits)?;
    Ok(check_battery(&cfg)
        .into_iter()
        .map(|r| match r.outcome {
            Ok(()) => (r.name.to_string(), true, String::new()),
            Err(m) => (r.name.to_string(), false, m),
        })
        .collect())
}

#[pymodule]
fn gumbel_moments(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyInterval>()?;
    m.add_class::<PyPoly>()?;
    m.add_function(wrap_pyfunction!(gamma_n, m)?)?;
    m.add_function(wrap_pyfunction!(eta_n, m)?)?;
    m.add_function(wrap_pyfunction!(eta_tilde_n, m)?)?;
    m.add_function(wrap_pyfunction!(delta_n, m)?)?;
    m.add_function(wrap_pyfunction!(delta_tilde_n, m)?)?;
    m.add_function(wrap_pyfunction!(delta_n_quadrature, m)?)?;
    m.add_function(wrap_pyfunction!(delta_asym, m)?)?;
    m.add_function(wrap_pyfunction!(lambert_w, m)?)?;
    m.add_function(wrap_pyfunction!(build_p, m)?)?;
    m.add_function(wrap_pyfunction!(tables, m)?)?;
    m.add_function(wrap_pyfunction!(certify, m)?)?;
    m.add_function(wrap_pyfunction!(pascal_submatrix_det, m)?)?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    Ok(())
}
