//! Python bindings: formulas, QUBO models, annealing, distances, search
//! plans and the small-n simulators.
//!
//! Plans and pipeline records cross the boundary as JSON strings so Python
//! sees the same documents the CLI writes.

use num_traits::ToPrimitive;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use hysat::analytic;
use hysat::anneal::{self, AnnealConfig, SimulatedAnnealer};
use hysat::bench::{self, TestCase};
use hysat::formula::{self, Assignment, CnfFormula};
use hysat::metrics;
use hysat::qsim::{self, Oracle, StateVector};
use hysat::qubo::{self, Coeff, QuboModel};

fn value_error<E: std::fmt::Display>(err: E) -> PyErr {
    PyValueError::new_err(err.to_string())
}

/// A 3-SAT instance.
#[pyclass(name = "Formula")]
struct PyFormula {
    inner: CnfFormula,
}

#[pymethods]
impl PyFormula {
    /// Parse DIMACS CNF text.
    #[staticmethod]
    fn parse_dimacs(text: &str) -> PyResult<Self> {
        Ok(PyFormula { inner: formula::parse_dimacs(text).map_err(value_error)? })
    }

    /// Random instance with round(density * n) clauses.
    #[staticmethod]
    #[pyo3(signature = (num_vars, density, unique_solution = true, seed = 0))]
    fn generate(num_vars: usize, density: f64, unique_solution: bool, seed: u64) -> PyResult<Self> {
        Ok(PyFormula {
            inner: formula::generate_random(num_vars, density, unique_solution, seed)
                .map_err(value_error)?,
        })
    }

    #[getter]
    fn num_vars(&self) -> usize {
        self.inner.num_vars()
    }

    #[getter]
    fn num_clauses(&self) -> usize {
        self.inner.num_clauses()
    }

    fn density(&self) -> f64 {
        self.inner.density()
    }

    /// Clauses as lists of signed 1-based literals (DIMACS convention).
    fn clauses(&self) -> Vec<Vec<i64>> {
        self.inner
            .clauses()
            .iter()
            .map(|c| {
                c.literals()
                    .iter()
                    .map(|l| (l.var as i64 + 1) * if l.negated { -1 } else { 1 })
                    .collect()
            })
            .collect()
    }

    /// True iff the assignment with this basis index satisfies the formula.
    fn eval_bool(&self, index: u64) -> PyResult<bool> {
        let a = Assignment::from_index(self.inner.num_vars(), index).map_err(value_error)?;
        self.inner.eval_bool(&a).map_err(value_error)
    }

    /// Number of satisfied clauses at this basis index.
    fn eval_count(&self, index: u64) -> PyResult<usize> {
        let a = Assignment::from_index(self.inner.num_vars(), index).map_err(value_error)?;
        self.inner.eval_count(&a).map_err(value_error)
    }

    /// Basis indices of all satisfying assignments, ascending.
    fn solutions(&self) -> PyResult<Vec<u64>> {
        Ok(self
            .inner
            .brute_force_solutions()
            .map_err(value_error)?
            .iter()
            .map(Assignment::index)
            .collect())
    }

    #[pyo3(signature = (seed = None))]
    fn to_dimacs(&self, seed: Option<u64>) -> String {
        formula::emit_dimacs(&self.inner, seed)
    }

    /// Compile into a QUBO model (maximize sense).
    #[pyo3(signature = (penalty = 1))]
    fn compile(&self, penalty: i64) -> PyResult<PyQubo> {
        let model = qubo::compile_with_penalty(&self.inner, Coeff::from_integer(penalty))
            .map_err(value_error)?;
        Ok(PyQubo { inner: model })
    }

    fn __repr__(&self) -> String {
        format!(
            "Formula(num_vars={}, num_clauses={})",
            self.inner.num_vars(),
            self.inner.num_clauses()
        )
    }
}

/// Upper-triangular quadratic model over original + auxiliary booleans.
#[pyclass(name = "Qubo")]
struct PyQubo {
    inner: QuboModel,
}

#[pymethods]
impl PyQubo {
    #[getter]
    fn num_original(&self) -> usize {
        self.inner.num_original()
    }

    #[getter]
    fn num_aux(&self) -> usize {
        self.inner.num_aux()
    }

    #[getter]
    fn num_vars(&self) -> usize {
        self.inner.num_vars()
    }

    fn offset(&self) -> f64 {
        self.inner.offset().to_f64().unwrap_or(f64::NAN)
    }

    /// Nonzero coefficients as (i, j, value) with i <= j.
    fn coefficients(&self) -> Vec<(usize, usize, f64)> {
        self.inner
            .coefficients()
            .map(|((i, j), c)| (i, j, c.to_f64().unwrap_or(f64::NAN)))
            .collect()
    }

    /// Auxiliary variables as (column, i, j) meaning column = x_i * x_j.
    fn aux_pairs(&self) -> Vec<(usize, usize, usize)> {
        self.inner
            .aux_map()
            .iter()
            .map(|a| (a.index, a.pair.0, a.pair.1))
            .collect()
    }

    fn eval(&self, bits: Vec<bool>) -> PyResult<f64> {
        Ok(self
            .inner
            .eval(&bits)
            .map_err(value_error)?
            .to_f64()
            .unwrap_or(f64::NAN))
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    /// Sample with simulated annealing; returns a SampleSet.
    #[pyo3(signature = (sweeps = 1000, reads = None, sweeps_per_beta = 1, seed = 0))]
    fn anneal(
        &self,
        sweeps: usize,
        reads: Option<usize>,
        sweeps_per_beta: usize,
        seed: u64,
    ) -> PyResult<PySampleSet> {
        let cfg = AnnealConfig {
            num_reads: reads,
            num_sweeps: sweeps,
            num_sweeps_per_beta: sweeps_per_beta,
            beta_range: None,
            seed,
        };
        let out = anneal::sample(&self.inner, &cfg).map_err(value_error)?;
        Ok(PySampleSet {
            best_index: out.best().index(),
            best_bits: out.best().bits().to_vec(),
            best_value: out.best_value().to_f64().unwrap_or(f64::NAN),
            csv: out.to_csv(),
            samples: out
                .samples()
                .iter()
                .map(|s| (s.bits.clone(), s.value.to_f64().unwrap_or(f64::NAN)))
                .collect(),
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "Qubo(num_original={}, num_aux={})",
            self.inner.num_original(),
            self.inner.num_aux()
        )
    }
}

/// Annealing output, best-first.
#[pyclass(name = "SampleSet")]
struct PySampleSet {
    #[pyo3(get)]
    best_index: u64,
    #[pyo3(get)]
    best_bits: Vec<bool>,
    #[pyo3(get)]
    best_value: f64,
    samples: Vec<(Vec<bool>, f64)>,
    csv: String,
}

#[pymethods]
impl PySampleSet {
    fn samples(&self) -> Vec<(Vec<bool>, f64)> {
        self.samples.clone()
    }

    fn to_csv(&self) -> String {
        self.csv.clone()
    }

    fn __len__(&self) -> usize {
        self.samples.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "SampleSet(len={}, best_index={}, best_value={})",
            self.samples.len(),
            self.best_index,
            self.best_value
        )
    }
}

/// Iterations of the full-domain search over 2^n states with one solution.
#[pyfunction]
fn grover_iterations(n: u32) -> u64 {
    analytic::grover_iterations(n)
}

/// Bitwise distance between two basis states on n qubits.
#[pyfunction]
fn hamming_distance(a: u64, b: u64, n: usize) -> PyResult<u32> {
    let x = Assignment::from_index(n, a).map_err(value_error)?;
    let y = Assignment::from_index(n, b).map_err(value_error)?;
    metrics::hamming(&x, &y).map_err(value_error)
}

/// Ring distance min(|a - b|, 2^n - |a - b|).
#[pyfunction]
fn cyclical_distance(a: u64, b: u64, n: u32) -> PyResult<u64> {
    metrics::cyclical_index(a, b, n).map_err(value_error)
}

/// Biased-superposition amplitude at a state `distance` flips away when the
/// gate is tuned for distance `k`.
#[pyfunction]
fn hamming_amplitude(n: u32, k: u32, distance: u32) -> f64 {
    analytic::hamming_amplitude(n, k, distance)
}

/// Hamming-search plan as a JSON document.
#[pyfunction]
fn plan_hamming(n: u32, distance: u32) -> PyResult<String> {
    let plan = analytic::plan_hamming(n, distance).map_err(value_error)?;
    serde_json::to_string(&plan).map_err(value_error)
}

/// Cyclical-search plan as a JSON document; r defaults to n - 1.
#[pyfunction]
#[pyo3(signature = (n, start, target, r = None))]
fn plan_cyclical(n: u32, start: u64, target: u64, r: Option<u32>) -> PyResult<String> {
    let plan = analytic::plan_cyclical(n, start, target, r).map_err(value_error)?;
    serde_json::to_string(&plan).map_err(value_error)
}

/// Exact solution probability of the Hamming search after `rounds`
/// iterations from `start` toward `target`.
#[pyfunction]
fn simulate_hamming(start: u64, target: u64, n: usize, k: u32, rounds: u64) -> PyResult<f64> {
    let origin = Assignment::from_index(n, start).map_err(value_error)?;
    qsim::grover_hamming(&origin, &Oracle::single(target), k, rounds).map_err(value_error)
}

/// Exact solution probability of the cyclical search on one ring segment.
#[pyfunction]
fn simulate_cyclical(
    center: u64,
    target: u64,
    n: usize,
    r: usize,
    segment: u64,
    rounds: u64,
) -> PyResult<f64> {
    qsim::grover_cyclical(center, &Oracle::single(target), n, r, segment, rounds)
        .map_err(value_error)
}

/// Runs the incrementer cascade on a basis state, returning the landing
/// basis index.
#[pyfunction]
fn displacement_map(n: usize, start: u64, amount: u64) -> PyResult<u64> {
    let mut state = StateVector::basis(n, start).map_err(value_error)?;
    state.displace(amount);
    let landed = state
        .amplitudes()
        .iter()
        .position(|a| a.norm_sqr() > 0.5)
        .expect("displacement permutes basis states");
    Ok(landed as u64)
}

/// Full pipeline for one grid cell; returns the run record as JSON.
#[pyfunction]
#[pyo3(signature = (num_vars, density, instance, seed, sweeps = 1000))]
fn run_case(num_vars: u32, density: f64, instance: u32, seed: u32, sweeps: usize) -> PyResult<String> {
    let sampler = SimulatedAnnealer::new(AnnealConfig {
        num_sweeps: sweeps,
        ..AnnealConfig::default()
    });
    let tc = TestCase { num_vars, density, instance, seed };
    let record = bench::run_pipeline(&tc, &sampler).map_err(value_error)?;
    Ok(serde_json::json!({
        "n": record.num_vars,
        "density": record.density,
        "instance": record.instance,
        "seed": record.seed,
        "k_f": record.hamming_distance,
        "d_f": record.cyclical_distance,
        "grover": record.grover_total,
        "ham_unk": record.hamming_unknown,
        "ham_known": record.hamming_known,
        "cyc_unk": record.cyclical_unknown,
        "cyc_known": record.cyclical_known,
        "anneal_value": record.anneal_value.to_f64(),
        "solved": record.solved_by_anneal,
    })
    .to_string())
}

#[pymodule]
fn hysat_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyFormula>()?;
    m.add_class::<PyQubo>()?;
    m.add_class::<PySampleSet>()?;
    m.add_function(wrap_pyfunction!(grover_iterations, m)?)?;
    m.add_function(wrap_pyfunction!(hamming_distance, m)?)?;
    m.add_function(wrap_pyfunction!(cyclical_distance, m)?)?;
    m.add_function(wrap_pyfunction!(hamming_amplitude, m)?)?;
    m.add_function(wrap_pyfunction!(plan_hamming, m)?)?;
    m.add_function(wrap_pyfunction!(plan_cyclical, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_hamming, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_cyclical, m)?)?;
    m.add_function(wrap_pyfunction!(displacement_map, m)?)?;
    m.add_function(wrap_pyfunction!(run_case, m)?)?;
    Ok(())
}
