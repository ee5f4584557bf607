//! Python bindings: states, unitaries, seeded sampling, estimators, oracle
//! formulas and the three estimation protocols.

use dseu_core::estimators::{self, EstimateReport};
use dseu_core::oracle;
use dseu_core::protocols::{self, Device, DeviceLabel, Protocol};
use dseu_core::{qcore, symmetric, unitary_io};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn py_err(e: dseu_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Deterministic random stream: a root seed plus a derivation path.
#[pyclass(name = "SeedStream", module = "dseu", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
struct PySeedStream(dseu_core::SeedStream);

#[pymethods]
impl PySeedStream {
    #[new]
    #[pyo3(signature = (root, path = Vec::new()))]
    fn new(root: u64, path: Vec<u64>) -> Self {
        Self(dseu_core::SeedStream::new(root).derive(&path))
    }

    #[getter]
    fn root(&self) -> u64 {
        self.0.root()
    }

    #[getter]
    fn path(&self) -> Vec<u64> {
        self.0.path().to_vec()
    }

    fn child(&self, tag: u64) -> Self {
        Self(self.0.child(tag))
    }

    fn __repr__(&self) -> String {
        format!("SeedStream(root={}, path={:?})", self.0.root(), self.0.path())
    }
}

#[pyclass(name = "PureState", module = "dseu", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyPureState(dseu_core::PureState);

#[pymethods]
impl PyPureState {
    /// Builds a state from amplitudes; with `normalize`, rescales to unit norm.
    #[new]
    #[pyo3(signature = (amplitudes, normalize = false))]
    fn new(amplitudes: Vec<Complex64>, normalize: bool) -> PyResult<Self> {
        let v = DVector::from_vec(amplitudes);
        let state = if normalize {
            dseu_core::PureState::normalized(v)
        } else {
            dseu_core::PureState::new(v)
        };
        state.map(Self).map_err(py_err)
    }

    #[staticmethod]
    fn basis(dim: usize, index: usize) -> PyResult<Self> {
        dseu_core::PureState::basis(dim, index).map(Self).map_err(py_err)
    }

    /// Haar-random state drawn from `seed`.
    #[staticmethod]
    fn haar(dim: usize, seed: &PySeedStream) -> PyResult<Self> {
        qcore::haar_state(dim, &mut seed.0.rng()).map(Self).map_err(py_err)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn amplitudes(&self) -> Vec<Complex64> {
        self.0.amplitudes().iter().copied().collect()
    }

    /// `<self|other>`.
    fn inner(&self, other: &PyPureState) -> PyResult<Complex64> {
        self.0.inner(&other.0).map_err(py_err)
    }

    fn overlap_sq(&self, other: &PyPureState) -> PyResult<f64> {
        self.0.overlap_sq(&other.0).map_err(py_err)
    }

    fn __len__(&self) -> usize {
        self.0.dim()
    }

    fn __repr__(&self) -> String {
        format!("PureState(dim={})", self.0.dim())
    }
}

#[pyclass(name = "UnitaryMatrix", module = "dseu", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyUnitary(dseu_core::UnitaryMatrix);

fn rows_to_matrix(rows: Vec<Vec<Complex64>>) -> PyResult<DMatrix<Complex64>> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("matrix must be square"));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

#[pymethods]
impl PyUnitary {
    /// Builds a unitary from a row-major square list; rejects non-unitary input.
    #[new]
    #[pyo3(signature = (rows, tolerance = 1e-10))]
    fn new(rows: Vec<Vec<Complex64>>, tolerance: f64) -> PyResult<Self> {
        dseu_core::UnitaryMatrix::with_tolerance(rows_to_matrix(rows)?, tolerance)
            .map(Self)
            .map_err(py_err)
    }

    #[staticmethod]
    fn identity(dim: usize) -> PyResult<Self> {
        dseu_core::UnitaryMatrix::identity(dim).map(Self).map_err(py_err)
    }

    /// Haar-random unitary drawn from `seed`.
    #[staticmethod]
    fn haar(dim: usize, seed: &PySeedStream) -> PyResult<Self> {
        qcore::haar_unitary(dim, &mut seed.0.rng()).map(Self).map_err(py_err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        unitary_io::from_json(text).map(Self).map_err(py_err)
    }

    fn to_json(&self) -> String {
        unitary_io::to_json(&self.0)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    /// Row-major entries.
    fn rows(&self) -> Vec<Vec<Complex64>> {
        let m = self.0.matrix();
        (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
    }

    fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    /// `self * other`.
    fn compose(&self, other: &PyUnitary) -> PyResult<Self> {
        self.0.compose(&other.0).map(Self).map_err(py_err)
    }

    fn apply(&self, state: &PyPureState) -> PyResult<PyPureState> {
        self.0.apply(&state.0).map(PyPureState).map_err(py_err)
    }

    /// `tr[self^dagger other]`.
    fn trace_inner(&self, other: &PyUnitary) -> PyResult<Complex64> {
        self.0.trace_inner(&other.0).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!("UnitaryMatrix(dim={})", self.0.dim())
    }
}

#[pyclass(name = "EstimateReport", module = "dseu", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
struct PyEstimateReport {
    protocol: String,
    mean: f64,
    std_error: f64,
    per_round_variance: f64,
    rounds: u64,
    queries_per_device: u64,
    seed: u64,
    clipped_mean: f64,
}

impl From<EstimateReport> for PyEstimateReport {
    fn from(r: EstimateReport) -> Self {
        Self {
            protocol: r.protocol.to_string(),
            mean: r.mean,
            std_error: r.std_error,
            per_round_variance: r.per_round_variance,
            rounds: r.rounds,
            queries_per_device: r.queries_per_device,
            seed: r.seed,
            clipped_mean: r.clipped_mean(),
        }
    }
}

#[pymethods]
impl PyEstimateReport {
    fn __repr__(&self) -> String {
        format!(
            "EstimateReport(protocol={}, mean={}, std_error={}, rounds={})",
            self.protocol, self.mean, self.std_error, self.rounds
        )
    }
}

fn protocol(name: &str, shots_or_copies: usize) -> PyResult<Protocol> {
    let p = match name {
        "incoherent" => Protocol::Incoherent { shots: shots_or_copies },
        "coherent" => Protocol::Coherent { copies: shots_or_copies },
        "shadow" => Protocol::Shadow { copies: shots_or_copies },
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown protocol '{other}' (expected incoherent, coherent or shadow)"
            )))
        }
    };
    p.validate().map_err(py_err)?;
    Ok(p)
}

/// Runs `rounds` rounds of a protocol with devices holding `u` and `v`.
#[pyfunction]
#[pyo3(signature = (u, v, protocol_name, rounds, shots_or_copies, seed))]
fn estimate(
    py: Python<'_>,
    u: &PyUnitary,
    v: &PyUnitary,
    protocol_name: &str,
    rounds: u64,
    shots_or_copies: usize,
    seed: &PySeedStream,
) -> PyResult<PyEstimateReport> {
    let p = protocol(protocol_name, shots_or_copies)?;
    let a = Device::new(DeviceLabel::A, u.0.clone());
    let b = Device::new(DeviceLabel::B, v.0.clone());
    let root = seed.0.clone();
    py.detach(|| protocols::estimate(&a, &b, p, rounds, &root))
        .map(Into::into)
        .map_err(py_err)
}

/// Runs distinguishing trials; returns `(same, declared_same, estimate)` per trial.
#[pyfunction]
#[pyo3(signature = (dim, protocol_name, shots_or_copies, rounds, threshold, trials, seed))]
#[allow(clippy::too_many_arguments)]
fn distinguishing_trials(
    py: Python<'_>,
    dim: usize,
    protocol_name: &str,
    shots_or_copies: usize,
    rounds: u64,
    threshold: f64,
    trials: u64,
    seed: &PySeedStream,
) -> PyResult<Vec<(bool, bool, f64)>> {
    let p = protocol(protocol_name, shots_or_copies)?;
    let root = seed.0.clone();
    let outcomes = py
        .detach(|| protocols::run_distinguishing_trials(dim, p, rounds, threshold, trials, &root))
        .map_err(py_err)?;
    Ok(outcomes.iter().map(|o| (o.same, o.declared_same, o.estimate)).collect())
}

/// Measures `state^{(x) copies}` with the symmetric collective POVM; returns
/// the outcome state and its squared overlap with `state`.
#[pyfunction]
fn sample_symmetric_povm(
    state: &PyPureState,
    copies: usize,
    seed: &PySeedStream,
) -> PyResult<(PyPureState, f64)> {
    let out = symmetric::sample_symmetric_povm(&state.0, copies, &mut seed.0.rng()).map_err(py_err)?;
    Ok((PyPureState(out.phi), out.overlap_sq))
}

/// Born-rule outcomes of measuring `basis * state` in the computational basis.
#[pyfunction]
fn born_sample(
    state: &PyPureState,
    basis: &PyUnitary,
    shots: usize,
    seed: &PySeedStream,
) -> PyResult<Vec<usize>> {
    qcore::born_sample(&state.0, &basis.0, shots, &mut seed.0.rng()).map_err(py_err)
}

#[pyfunction]
fn exact_similarity(u: &PyUnitary, v: &PyUnitary) -> PyResult<f64> {
    oracle::exact_similarity(&u.0, &v.0).map_err(py_err)
}

#[pyfunction]
fn expected_g(u: &PyUnitary, v: &PyUnitary) -> PyResult<f64> {
    oracle::expected_g(&u.0, &v.0).map_err(py_err)
}

#[pyfunction]
fn expected_f_coherent(u: &PyUnitary, v: &PyUnitary, copies: usize) -> PyResult<f64> {
    oracle::expected_f_coherent(&u.0, &v.0, copies).map_err(py_err)
}

#[pyfunction]
fn expected_gamma(u: &PyUnitary, v: &PyUnitary) -> PyResult<f64> {
    oracle::expected_gamma(&u.0, &v.0).map_err(py_err)
}

#[pyfunction]
fn collision_overlap(a: Vec<usize>, b: Vec<usize>) -> PyResult<f64> {
    estimators::collision_overlap(&a, &b).map_err(py_err)
}

#[pyfunction]
fn omega(g: f64, dim: usize) -> PyResult<f64> {
    estimators::omega(g, dim).map_err(py_err)
}

#[pyfunction]
fn chi(f: f64, copies: usize, dim: usize) -> PyResult<f64> {
    estimators::chi(f, copies, dim).map_err(py_err)
}

#[pyfunction]
fn kappa(dim: usize, copies: usize) -> PyResult<u64> {
    symmetric::kappa(dim, copies).map_err(py_err)
}

#[pymodule]
fn dseu(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySeedStream>()?;
    m.add_class::<PyPureState>()?;
    m.add_class::<PyUnitary>()?;
    m.add_class::<PyEstimateReport>()?;
    m.add_function(wrap_pyfunction!(estimate, m)?)?;
    m.add_function(wrap_pyfunction!(distinguishing_trials, m)?)?;
    m.add_function(wrap_pyfunction!(sample_symmetric_povm, m)?)?;
    m.add_function(wrap_pyfunction!(born_sample, m)?)?;
    m.add_function(wrap_pyfunction!(exact_similarity, m)?)?;
    m.add_function(wrap_pyfunction!(expected_g, m)?)?;
    m.add_function(wrap_pyfunction!(expected_f_coherent, m)?)?;
    m.add_function(wrap_pyfunction!(expected_gamma, m)?)?;
    m.add_function(wrap_pyfunction!(collision_overlap, m)?)?;
    m.add_function(wrap_pyfunction!(omega, m)?)?;
    m.add_function(wrap_pyfunction!(chi, m)?)?;
    m.add_function(wrap_pyfunction!(kappa, m)?)?;
    Ok(())
}
