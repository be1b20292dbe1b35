//! Python bindings: density matrices, the one-step purification run,
//! recurrence baselines, sampling and scenario execution.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use depp_core as core;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A validated density matrix (Hermitian, unit trace, positive
/// semidefinite within tolerance).
#[pyclass(name = "DensityMatrix", skip_from_py_object)]
#[derive(Clone)]
struct PyDensityMatrix {
    inner: core::DensityMatrix,
}

#[pymethods]
impl PyDensityMatrix {
    /// Builds from a square nested list of complex entries.
    #[new]
    fn new(entries: Vec<Vec<Complex64>>) -> PyResult<Self> {
        let dim = entries.len();
        let mut flat = Vec::with_capacity(dim * dim);
        for row in &entries {
            if row.len() != dim {
                return Err(err(format!("expected a {dim}x{dim} matrix")));
            }
            flat.extend_from_slice(row);
        }
        Ok(Self { inner: core::DensityMatrix::from_entries(dim, flat).map_err(err)? })
    }

    #[staticmethod]
    fn bell_diagonal(f: f64, f1: f64, f2: f64, f3: f64) -> PyResult<Self> {
        let params = core::BellDiagonalParams::new(f, f1, f2, f3).map_err(err)?;
        Ok(Self { inner: core::make_bell_diagonal(&params) })
    }

    #[staticmethod]
    fn maximally_mixed(dim: usize) -> Self {
        Self { inner: core::DensityMatrix::maximally_mixed(dim) }
    }

    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn trace(&self) -> Complex64 {
        self.inner.trace()
    }

    fn entries(&self) -> Vec<Vec<Complex64>> {
        let d = self.inner.dim();
        (0..d)
            .map(|i| (0..d).map(|j| self.inner.entry(i, j)).collect())
            .collect()
    }

    /// Fidelity with one of the Bell states "phi+", "phi-", "psi+", "psi-".
    fn bell_fidelity(&self, kind: &str) -> PyResult<f64> {
        core::fidelity_pure(&self.inner, &core::bell_state(parse_bell(kind)?)).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("DensityMatrix(dim={})", self.inner.dim())
    }
}

fn parse_bell(kind: &str) -> PyResult<core::BellKind> {
    match kind {
        "phi+" => Ok(core::BellKind::PhiPlus),
        "phi-" => Ok(core::BellKind::PhiMinus),
        "psi+" => Ok(core::BellKind::PsiPlus),
        "psi-" => Ok(core::BellKind::PsiMinus),
        other => Err(err(format!("unknown Bell state `{other}`"))),
    }
}

/// Density matrix of a Bell state: "phi+", "phi-", "psi+" or "psi-".
#[pyfunction]
fn bell_state(kind: &str) -> PyResult<PyDensityMatrix> {
    Ok(PyDensityMatrix { inner: core::bell_state(parse_bell(kind)?).to_density() })
}

/// Spatial two-photon state of the source with amplitude ratio r and
/// relative phase theta.
#[pyfunction]
#[pyo3(signature = (r=1.0, theta=0.0))]
fn spatial_state(r: f64, theta: f64) -> PyResult<PyDensityMatrix> {
    let source = core::SourceConfig::new(r, theta).map_err(err)?;
    Ok(PyDensityMatrix { inner: core::make_spatial_state(&source).to_density() })
}

/// One pattern of a purification run as a plain dict-friendly record.
#[pyclass(name = "PatternRecord", skip_from_py_object)]
#[derive(Clone)]
struct PyPatternRecord {
    #[pyo3(get)]
    pattern: String,
    #[pyo3(get)]
    detectors: (String, String),
    #[pyo3(get)]
    probability: f64,
    #[pyo3(get)]
    corrected_fidelity: Option<f64>,
}

#[pymethods]
impl PyPatternRecord {
    fn __repr__(&self) -> String {
        format!(
            "PatternRecord(pattern={:?}, probability={}, corrected_fidelity={:?})",
            self.pattern, self.probability, self.corrected_fidelity
        )
    }
}

#[pyclass(name = "RunResult")]
struct PyRunResult {
    #[pyo3(get)]
    acceptance_probability: f64,
    #[pyo3(get)]
    mean_corrected_fidelity: f64,
    #[pyo3(get)]
    patterns: Vec<PyPatternRecord>,
}

fn wrap_run(run: &core::RunResult) -> PyRunResult {
    PyRunResult {
        acceptance_probability: run.acceptance_probability,
        mean_corrected_fidelity: run.mean_corrected_fidelity,
        patterns: run
            .patterns
            .iter()
            .map(|rec| PyPatternRecord {
                pattern: rec.pattern.label().to_string(),
                detectors: (rec.detector_pair.0.to_string(), rec.detector_pair.1.to_string()),
                probability: rec.probability,
                corrected_fidelity: rec.corrected_fidelity,
            })
            .collect(),
    }
}

/// Runs the one-step purification protocol on a 4-dim polarization
/// state and a 4-dim spatial state.
#[pyfunction]
fn one_step_depp(rho_p: &PyDensityMatrix, spatial: &PyDensityMatrix) -> PyResult<PyRunResult> {
    Ok(wrap_run(&core::one_step_depp(&rho_p.inner, &spatial.inner).map_err(err)?))
}

/// One application of the Bennett fidelity recurrence.
#[pyfunction]
fn bennett_recurrence(f: f64) -> f64 {
    core::bennett_recurrence(f)
}

/// Success probability of one Bennett round at input fidelity f.
#[pyfunction]
fn bennett_success_probability(f: f64) -> f64 {
    core::bennett_success_probability(f)
}

/// Iterated recurrence: (fidelities, success_probabilities, expected
/// pairs consumed per output pair).
#[pyfunction]
fn bennett_iterate(f0: f64, rounds: u32) -> (Vec<f64>, Vec<f64>, f64) {
    let trace = core::bennett_iterate(f0, rounds);
    (trace.fidelities, trace.success_probs, trace.expected_pairs_consumed)
}

/// Simon-Pan spatial-to-polarization transfer model: returns the output
/// weights (F, F1, F2, F3) and the efficiency.
#[pyfunction]
fn simon_pan_model(f: f64, f1: f64, f2: f64, f3: f64) -> PyResult<((f64, f64, f64, f64), f64)> {
    let params = core::BellDiagonalParams::new(f, f1, f2, f3).map_err(err)?;
    let (out, eff) = core::simon_pan_model(&params);
    Ok(((out.f, out.f1, out.f2, out.f3), eff))
}

/// Draws coincidence outcomes from a run's analytic pattern
/// distribution: counts in the order cd, cf, ed, ef.
#[pyfunction]
fn sample_run(
    rho_p: &PyDensityMatrix,
    spatial: &PyDensityMatrix,
    shots: u64,
    seed: u64,
) -> PyResult<[u64; 4]> {
    let run = core::one_step_depp(&rho_p.inner, &spatial.inner).map_err(err)?;
    Ok(core::sample_patterns(&run, shots, seed).map_err(err)?.counts)
}

/// Parses and executes a scenario text, returning the canonical JSON
/// results document.
#[pyfunction]
fn run_scenario(text: &str) -> PyResult<String> {
    let cfg = core::parse_scenario(text).map_err(err)?;
    let out = core::run_scenario(&cfg, None).map_err(err)?;
    Ok(core::serialize_result(&cfg, &out))
}

/// Runs the built-in invariant suite: list of (name, passed, detail).
#[pyfunction]
fn validate() -> Vec<(String, bool, String)> {
    core::run_invariant_suite(&core::OpticalNetwork::fig1())
        .into_iter()
        .map(|r| (r.name.to_string(), r.passed, r.detail))
        .collect()
}

#[pymodule]
fn depp_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDensityMatrix>()?;
    m.add_class::<PyPatternRecord>()?;
    m.add_class::<PyRunResult>()?;
    m.add_function(wrap_pyfunction!(bell_state, m)?)?;
    m.add_function(wrap_pyfunction!(spatial_state, m)?)?;
    m.add_function(wrap_pyfunction!(one_step_depp, m)?)?;
    m.add_function(wrap_pyfunction!(bennett_recurrence, m)?)?;
    m.add_function(wrap_pyfunction!(bennett_success_probability, m)?)?;
    m.add_function(wrap_pyfunction!(bennett_iterate, m)?)?;
    m.add_function(wrap_pyfunction!(simon_pan_model, m)?)?;
    m.add_function(wrap_pyfunction!(sample_run, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    Ok(())
}
