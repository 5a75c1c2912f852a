//! Python bindings: reduced systems, evolution, sweeps and the classical and
//! centrality baselines.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use treesearch_core as ts;
use ts::analytic::{self, CriticalForm};
use ts::search::{FitWindow, GammaPolicy, LevelPolicy, ScalingOptions, SweepPolicy};

fn err(e: ts::Error) -> PyErr {
    match e {
        ts::Error::InvalidParameter(_)
        | ts::Error::WrongConstructor(_)
        | ts::Error::IndexOutOfRange { .. }
        | ts::Error::EmptyGrid => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn params(n: u32, l: u32, gamma: Option<f64>) -> PyResult<ts::TreeParams> {
    let gamma = gamma.unwrap_or_else(|| ts::search::gamma_star_rule(l, n));
    ts::TreeParams::new(n, l, gamma).map_err(err)
}

fn policy(threshold: f64) -> ts::PeakPolicy {
    ts::PeakPolicy::default().with_threshold(threshold)
}

/// First qualifying success-probability peak.
#[pyclass(frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
struct Peak {
    time: f64,
    probability: f64,
}

#[pymethods]
impl Peak {
    /// `time / probability`
    #[getter]
    fn efficiency(&self) -> f64 {
        self.time / self.probability
    }

    fn __repr__(&self) -> String {
        format!("Peak(time={}, probability={})", self.time, self.probability)
    }
}

impl From<ts::Peak> for Peak {
    fn from(p: ts::Peak) -> Self {
        Peak { time: p.time, probability: p.probability }
    }
}

/// Exact reduction of the search Hamiltonian for a site marked on level `l`.
///
///     sys = ReducedSystem(24, 12)          # gamma defaults to the rule of thumb
///     sys.first_peak().efficiency
#[pyclass(frozen)]
struct ReducedSystem {
    inner: ts::ReducedSystem,
}

#[pymethods]
impl ReducedSystem {
    #[new]
    #[pyo3(signature = (n, l=1, gamma=None))]
    fn new(n: u32, l: u32, gamma: Option<f64>) -> PyResult<Self> {
        Ok(ReducedSystem { inner: ts::reduce_comb(params(n, l, gamma)?).map_err(err)? })
    }

    #[getter]
    fn n(&self) -> u32 {
        self.inner.params.n
    }

    #[getter]
    fn l(&self) -> u32 {
        self.inner.params.l
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.inner.params.gamma
    }

    #[getter]
    fn size(&self) -> usize {
        self.inner.size()
    }

    #[getter]
    fn marked_index(&self) -> usize {
        self.inner.marked_index
    }

    #[getter]
    fn multiplicities(&self) -> Vec<u64> {
        self.inner.multiplicities()
    }

    #[getter]
    fn initial_state(&self) -> Vec<f64> {
        self.inner.initial_state.clone()
    }

    /// Dense reduced Hamiltonian as a list of rows.
    fn hamiltonian(&self) -> Vec<Vec<f64>> {
        let h = self.inner.hamiltonian();
        h.row_iter().map(|r| r.iter().copied().collect()).collect()
    }

    fn to_json(&self) -> PyResult<String> {
        let mut buf = Vec::new();
        self.inner.to_json().write(&mut buf).map_err(err)?;
        Ok(String::from_utf8(buf).expect("utf-8 json"))
    }

    /// Eigenvalues and marked-site weights `c_k` with `amp(t) = sum c_k exp(-i lambda_k t)`.
    fn spectrum(&self) -> PyResult<(Vec<f64>, Vec<f64>)> {
        let s = ts::MarkedSpectrum::of(&self.inner).map_err(err)?;
        Ok((s.eigenvalues, s.weights))
    }

    /// Marked-site amplitude at each time.
    fn amplitude(&self, times: Vec<f64>) -> PyResult<Vec<Complex64>> {
        Ok(ts::evolve_amplitude(&self.inner, &times).map_err(err)?.amplitudes)
    }

    /// None when the evolution never produces a qualifying peak.
    #[pyo3(signature = (threshold=64.0))]
    fn first_peak(&self, threshold: f64) -> PyResult<Option<Peak>> {
        match ts::first_peak(&self.inner, &policy(threshold)) {
            Ok(p) => Ok(Some(p.into())),
            Err(ts::Error::NoPeak { .. }) => Ok(None),
            Err(e) => Err(err(e)),
        }
    }

    /// Checks the reduction against the full Hamiltonian (n <= 12) and
    /// returns the deviations.
    #[pyo3(signature = (krylov_depth=8))]
    fn verify<'py>(&self, py: Python<'py>, krylov_depth: usize) -> PyResult<Bound<'py, PyDict>> {
        let p = self.inner.params;
        if p.n > 12 {
            return Err(PyValueError::new_err("verification requires n <= 12"));
        }
        let full = ts::build_full_hamiltonian(p, p.marked_site()).map_err(err)?;
        let map = self.inner.reduction_map().map_err(err)?;
        let r = ts::verify_reduction(&full, &map, &self.inner, krylov_depth).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("orthonormal", r.orthonormal_dev)?;
        d.set_item("hamiltonian", r.hamiltonian_dev)?;
        d.set_item("krylov", r.krylov_dev)?;
        d.set_item("spectrum", r.spectrum_dev)?;
        d.set_item("passed", r.passed())?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        let p = self.inner.params;
        format!("ReducedSystem(n={}, l={}, gamma={}, size={})", p.n, p.l, p.gamma, self.inner.size())
    }
}

/// Marked-site amplitude of the reduced system on a time grid.
#[pyfunction]
#[pyo3(signature = (n, l, gamma, times))]
fn evolve(n: u32, l: u32, gamma: f64, times: Vec<f64>) -> PyResult<Vec<Complex64>> {
    ReducedSystem::new(n, l, Some(gamma))?.amplitude(times)
}

#[pyfunction]
fn comb_size(n: u32, l: u32) -> PyResult<usize> {
    params(n, l, Some(1.0))?;
    Ok(ts::reduction::comb_size(n, l))
}

#[pyfunction]
fn beta_prediction(l: u32, n: u32) -> f64 {
    ts::search::beta_prediction(l, n)
}

#[pyfunction]
fn gamma_star_rule(l: u32, n: u32) -> f64 {
    ts::search::gamma_star_rule(l, n)
}

/// Gamma sweep; points are `(gamma, max_prob, peak or None)`.
#[pyfunction]
#[pyo3(signature = (n, l, gamma_max=3.0, coarse_step=0.05, fine_step=0.005, threshold=64.0))]
fn sweep<'py>(
    py: Python<'py>,
    n: u32,
    l: u32,
    gamma_max: f64,
    coarse_step: f64,
    fine_step: f64,
    threshold: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let pol = SweepPolicy { gamma_max, coarse_step, fine_step, peak: policy(threshold), ..SweepPolicy::default() };
    let sw = py.detach(|| ts::sweep_gamma(n, l, &pol)).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("gamma_prime_star", sw.gamma_prime_star)?;
    d.set_item("p_max", sw.p_max)?;
    d.set_item("gamma_star", sw.gamma_star)?;
    let points: Vec<(f64, f64, Option<Peak>)> =
        sw.points.iter().map(|p| (p.gamma, p.max_prob, p.peak.map(Peak::from))).collect();
    d.set_item("points", points)?;
    Ok(d)
}

/// Scaling exponent of `t0 / p0`. Give either a fixed level `l` or
/// `l_ratio`; gamma defaults to the rule of thumb.
#[pyfunction]
#[pyo3(signature = (sizes, l=None, l_ratio=None, gamma=None, window="upper", threshold=64.0))]
fn scaling<'py>(
    py: Python<'py>,
    sizes: Vec<u32>,
    l: Option<u32>,
    l_ratio: Option<f64>,
    gamma: Option<f64>,
    window: &str,
    threshold: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let level = match (l, l_ratio) {
        (Some(l), None) => LevelPolicy::Fixed(l),
        (None, Some(r)) => LevelPolicy::Proportional(r),
        (None, None) => LevelPolicy::Proportional(0.5),
        _ => return Err(PyValueError::new_err("give l or l_ratio, not both")),
    };
    let gp = gamma.map_or(GammaPolicy::Rule, GammaPolicy::Fixed);
    let window = match window {
        "all" => FitWindow::All,
        "upper" => FitWindow::UpperHalf,
        w => FitWindow::From(
            w.strip_prefix("from:")
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| PyValueError::new_err("window is all, upper or from:N"))?,
        ),
    };
    let opts = ScalingOptions { peak: policy(threshold), window };
    let fit = py.detach(|| ts::scaling_experiment(level, &sizes, gp, &opts)).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("beta", fit.beta)?;
    d.set_item("beta_stderr", fit.beta_stderr)?;
    d.set_item("beta_prediction", fit.beta_prediction)?;
    d.set_item("excluded", fit.excluded.clone())?;
    let rows: Vec<(u32, u32, f64, Option<Peak>)> =
        fit.sizes.iter().map(|s| (s.n, s.l, s.gamma, s.peak.map(Peak::from))).collect();
    d.set_item("sizes", rows)?;
    Ok(d)
}

/// Expected classical steps from each level to the root.
#[pyfunction]
fn hitting_times(n: u32) -> PyResult<Vec<f64>> {
    Ok(ts::classical::hitting_times(n).map_err(err)?.per_level)
}

/// Exact hitting times as Python integers (n <= 30).
#[pyfunction]
fn hitting_times_exact(n: u32) -> PyResult<Vec<num_bigint::BigInt>> {
    let h = ts::classical::hitting_times(n).map_err(err)?;
    let exact = h.exact.ok_or_else(|| PyValueError::new_err("exact solve is limited to n <= 30"))?;
    exact
        .per_level
        .iter()
        .map(|t| ts::classical::exact_integer(t).ok_or_else(|| PyRuntimeError::new_err("non-integer hitting time")))
        .collect()
}

/// `(mean, std_err)` of simulated walks from `level` to the root.
#[pyfunction]
#[pyo3(signature = (n, level, walks, batches=64, seed=0))]
fn monte_carlo(py: Python<'_>, n: u32, level: u32, walks: u64, batches: u64, seed: u64) -> PyResult<(f64, f64)> {
    let e = py.detach(|| ts::classical::monte_carlo_hitting_time(n, level, walks, batches, seed)).map_err(err)?;
    Ok((e.mean, e.std_err))
}

/// Normalized closeness of a site on level `l`.
#[pyfunction]
fn closeness(n: u32, l: u32) -> PyResult<Option<f64>> {
    Ok(ts::centrality::closeness(n, l).map_err(err)?.normalized)
}

/// `(ordered pairs through the site, normalized betweenness)`.
#[pyfunction]
fn betweenness(n: u32, l: u32) -> PyResult<(u128, Option<f64>)> {
    let b = ts::centrality::betweenness(n, l).map_err(err)?;
    Ok((b.raw, b.normalized))
}

/// Rows `(l, beta_pred, closeness_norm, kappa_hat, betweenness_norm)`.
#[pyfunction]
fn centrality_table(n: u32) -> PyResult<Vec<(u32, f64, f64, f64, f64)>> {
    Ok(ts::centrality::centrality_table(n)
        .map_err(err)?
        .iter()
        .map(|r| (r.l, r.beta_pred, r.closeness_norm, r.kappa.extrapolated, r.betweenness_norm))
        .collect())
}

#[pyfunction]
fn laplace_psi1(s: Complex64, n: u32, gamma: f64) -> PyResult<Complex64> {
    analytic::laplace_psi1(s, n, gamma).map_err(err)
}

#[pyfunction]
fn approx_small_gamma(t: f64, gamma: f64, n: u32) -> PyResult<Complex64> {
    analytic::approx_small_gamma(t, gamma, ts::tree::num_sites(n) as f64).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (t, n, form="sine"))]
fn approx_critical(t: f64, n: u32, form: &str) -> PyResult<Complex64> {
    let form = match form {
        "sine" => CriticalForm::Sine,
        "pair" => CriticalForm::Pair,
        _ => return Err(PyValueError::new_err("form is 'sine' or 'pair'")),
    };
    analytic::approx_critical(t, n, form).map_err(err)
}

/// `[(position, residue), ...]` for the two poles nearest the origin.
#[pyfunction]
fn critical_poles(n: u32) -> PyResult<Vec<(Complex64, Complex64)>> {
    Ok(analytic::critical_poles(n).map_err(err)?.iter().map(|p| (p.position, p.residue)).collect())
}

#[pyfunction]
fn asymptotic_runtime(n: u32) -> PyResult<f64> {
    analytic::asymptotic_runtime(n).map_err(err)
}

#[pyfunction]
fn small_gamma_efficiency(gamma: f64, num_sites: f64) -> PyResult<f64> {
    analytic::small_gamma_efficiency(gamma, num_sites).map_err(err)
}

#[pymodule]
fn treesearch(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<ReducedSystem>()?;
    m.add_class::<Peak>()?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    m.add_function(wrap_pyfunction!(comb_size, m)?)?;
    m.add_function(wrap_pyfunction!(beta_prediction, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_star_rule, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(scaling, m)?)?;
    m.add_function(wrap_pyfunction!(hitting_times, m)?)?;
    m.add_function(wrap_pyfunction!(hitting_times_exact, m)?)?;
    m.add_function(wrap_pyfunction!(monte_carlo, m)?)?;
    m.add_function(wrap_pyfunction!(closeness, m)?)?;
    m.add_function(wrap_pyfunction!(betweenness, m)?)?;
    m.add_function(wrap_pyfunction!(centrality_table, m)?)?;
    m.add_function(wrap_pyfunction!(laplace_psi1, m)?)?;
    m.add_function(wrap_pyfunction!(approx_small_gamma, m)?)?;
    m.add_function(wrap_pyfunction!(approx_critical, m)?)?;
    m.add_function(wrap_pyfunction!(critical_poles, m)?)?;
    m.add_function(wrap_pyfunction!(asymptotic_runtime, m)?)?;
    m.add_function(wrap_pyfunction!(small_gamma_efficiency, m)?)?;
    Ok(())
}
