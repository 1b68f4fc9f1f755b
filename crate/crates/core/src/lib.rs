//! Hybrid 3-SAT toolkit.
//!
//! The pipeline: a 3-SAT instance is recast as Max-3SAT, compiled into an
//! upper-triangular QUBO model through clause polynomials and cubic-term
//! reduction, and sampled with simulated annealing. The annealing output
//! seeds two amplitude-amplification searches for the true solution, one
//! over the Hamming neighbourhood and one over cyclical-range segments.
//! Closed-form iteration counts for both (plus the plain full-domain search)
//! are compared by a benchmark harness, and an exact statevector simulator
//! validates the operator constructions at small qubit counts.

pub mod analytic;
pub mod anneal;
pub mod bench;
pub mod cli;
pub mod formula;
pub mod metrics;
pub mod qsim;
pub mod qubo;

pub use analytic::{
    grover_iterations, hamming_amplitude, hamming_iterations, plan_cyclical, plan_hamming,
    success_probability, CyclicalPlan, HammingPlan,
};
pub use anneal::{default_beta_range, sample, AnnealConfig, SampleSet, Sampler, SimulatedAnnealer};
pub use bench::{aggregate, run_grid, run_pipeline, RunRecord, TestCase};
pub use formula::{
    emit_dimacs, generate_random, parse_dimacs, Assignment, Clause, CnfFormula, Literal,
};
pub use metrics::{cyclical, cyclical_index, hamming, DistanceReport};
pub use qsim::{grover_cyclical, grover_hamming, range_splitter, Oracle, StateVector};
pub use qubo::{clause_polynomial, compile, reduce_cubics, to_max3sat_poly, Polynomial, QuboModel};
