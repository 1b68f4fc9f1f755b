//! Simulated-annealing sampler for QUBO models: independent restarts over a
//! geometric inverse-temperature schedule with single-bit-flip Metropolis
//! sweeps. Runs behind the [`Sampler`] trait so a remote annealer client can
//! slot into the same pipeline.

use std::fmt::Write as _;

use num_rational::Rational64;
use num_traits::{Signed, ToPrimitive};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::Assignment;
use crate::qubo::{QuboError, QuboModel};

pub const DEFAULT_NUM_SWEEPS: usize = 1000;
pub const DEFAULT_SWEEPS_PER_BETA: usize = 1;

#[derive(Debug, Error, PartialEq)]
pub enum AnnealError {
    #[error("model has no variables")]
    EmptyModel,
    #[error("model has no nonzero coefficients; supply an explicit beta range")]
    ZeroCoefficients,
    #[error("invalid annealing configuration: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Qubo(#[from] QuboError),
}

/// Sampler budget. `num_reads` defaults to the number of model variables;
/// `beta_range` defaults to a bound derived from coefficient magnitudes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnealConfig {
    #[serde(default)]
    pub num_reads: Option<usize>,
    pub num_sweeps: usize,
    pub num_sweeps_per_beta: usize,
    #[serde(default)]
    pub beta_range: Option<(f64, f64)>,
    pub seed: u64,
}

impl Default for AnnealConfig {
    fn default() -> Self {
        AnnealConfig {
            num_reads: None,
            num_sweeps: DEFAULT_NUM_SWEEPS,
            num_sweeps_per_beta: DEFAULT_SWEEPS_PER_BETA,
            beta_range: None,
            seed: 0,
        }
    }
}

impl AnnealConfig {
    fn validate(&self) -> Result<(), AnnealError> {
        if self.num_reads == Some(0) {
            return Err(AnnealError::BadConfig("num_reads must be at least 1".into()));
        }
        if self.num_sweeps == 0 {
            return Err(AnnealError::BadConfig("num_sweeps must be at least 1".into()));
        }
        if self.num_sweeps_per_beta == 0 {
            return Err(AnnealError::BadConfig(
                "num_sweeps_per_beta must be at least 1".into(),
            ));
        }
        if let Some((lo, hi)) = self.beta_range {
            if !(lo > 0.0 && hi > lo) {
                return Err(AnnealError::BadConfig(format!(
                    "beta range ({lo}, {hi}) must satisfy 0 < beta_min < beta_max"
                )));
            }
        }
        Ok(())
    }
}

/// One restart outcome: full bit vector and its exact objective value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sample {
    pub bits: Vec<bool>,
    pub value: Rational64,
}

/// Restart outcomes sorted best-first (maximize sense), ties in restart
/// order; `best` is the original-variable part of the top sample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleSet {
    samples: Vec<Sample>,
    best: Assignment,
}

impl SampleSet {
    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn best(&self) -> &Assignment {
        &self.best
    }

    pub fn best_value(&self) -> Rational64 {
        self.samples[0].value
    }

    /// One `bits,value` row per sample; bits are listed in variable order
    /// (originals then auxiliaries).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bits,value\n");
        for sample in &self.samples {
            for &b in &sample.bits {
                out.push(if b { '1' } else { '0' });
            }
            let _ = writeln!(out, ",{}", sample.value);
        }
        out
    }
}

/// Anything that turns a QUBO model into samples; the benchmark harness is
/// written against this so hardware-backed clients can be dropped in.
pub trait Sampler {
    fn sample(&self, model: &QuboModel, seed: u64) -> Result<SampleSet, AnnealError>;
}

/// The in-process simulated annealer.
#[derive(Debug, Clone, Default)]
pub struct SimulatedAnnealer {
    pub config: AnnealConfig,
}

impl SimulatedAnnealer {
    pub fn new(config: AnnealConfig) -> Self {
        SimulatedAnnealer { config }
    }
}

impl Sampler for SimulatedAnnealer {
    fn sample(&self, model: &QuboModel, seed: u64) -> Result<SampleSet, AnnealError> {
        let mut config = self.config.clone();
        config.seed = seed;
        sample(model, &config)
    }
}

/// Inverse-temperature bounds from coefficient magnitudes: beta_min melts
/// the largest single-flip change (`ln 2 / max_i sum_j |q_ij|`), beta_max
/// freezes the smallest (`ln 100 / min nonzero |q_ij|`).
pub fn default_beta_range(model: &QuboModel) -> Result<(f64, f64), AnnealError> {
    let n = model.num_vars();
    if n == 0 {
        return Err(AnnealError::EmptyModel);
    }
    let mut row_sums = vec![0f64; n];
    let mut min_abs = f64::INFINITY;
    for ((i, j), coeff) in model.coefficients() {
        let magnitude = coeff.abs().to_f64().unwrap_or(f64::INFINITY);
        if magnitude > 0.0 {
            min_abs = min_abs.min(magnitude);
            row_sums[i] += magnitude;
            if i != j {
                row_sums[j] += magnitude;
            }
        }
    }
    let max_change = row_sums.iter().cloned().fold(0f64, f64::max);
    if max_change <= 0.0 || !min_abs.is_finite() {
        return Err(AnnealError::ZeroCoefficients);
    }
    Ok((2f64.ln() / max_change, 100f64.ln() / min_abs))
}

fn geometric_schedule(beta_min: f64, beta_max: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![beta_max];
    }
    let ratio = (beta_max / beta_min).powf(1.0 / (steps - 1) as f64);
    let mut schedule = Vec::with_capacity(steps);
    let mut beta = beta_min;
    for _ in 0..steps {
        schedule.push(beta);
        beta *= ratio;
    }
    schedule
}

fn read_seed(base: u64, read: usize) -> u64 {
    let mut z = base ^ (read as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Samples `model` with independent Metropolis restarts. Deterministic for a
/// fixed configuration; restarts are merged in restart order.
pub fn sample(model: &QuboModel, config: &AnnealConfig) -> Result<SampleSet, AnnealError> {
    config.validate()?;
    let n = model.num_vars();
    if n == 0 {
        return Err(AnnealError::EmptyModel);
    }
    let reads = config.num_reads.unwrap_or(n);
    let (beta_min, beta_max) = match config.beta_range {
        Some(range) => range,
        None => default_beta_range(model)?,
    };
    let schedule = geometric_schedule(beta_min, beta_max, config.num_sweeps);

    // Dense linear fields plus a neighbour list; floating point only from
    // here down, exact re-evaluation happens per final sample.
    let mut linear = vec![0f64; n];
    let mut neighbors: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
    for ((i, j), coeff) in model.coefficients() {
        let w = coeff.to_f64().unwrap_or(0.0);
        if i == j {
            linear[i] += w;
        } else {
            neighbors[i].push((j as u32, w));
            neighbors[j].push((i as u32, w));
        }
    }

    let mut samples = Vec::with_capacity(reads);
    for read in 0..reads {
        let mut rng = ChaCha8Rng::seed_from_u64(read_seed(config.seed, read));
        let mut bits: Vec<bool> = (0..n).map(|_| rng.random::<bool>()).collect();
        let mut field: Vec<f64> = (0..n)
            .map(|i| {
                linear[i]
                    + neighbors[i]
                        .iter()
                        .filter(|(j, _)| bits[*j as usize])
                        .map(|(_, w)| w)
                        .sum::<f64>()
            })
            .collect();
        for &beta in &schedule {
            for _ in 0..config.num_sweeps_per_beta {
                for i in 0..n {
                    let gain = if bits[i] { -field[i] } else { field[i] };
                    let accept = gain >= 0.0 || rng.random::<f64>() < (beta * gain).exp();
                    if accept {
                        let delta = if bits[i] { -1.0 } else { 1.0 };
                        bits[i] = !bits[i];
                        for &(j, w) in &neighbors[i] {
                            field[j as usize] += delta * w;
                        }
                    }
                }
            }
        }
        let value = model.eval(&bits)?;
        samples.push(Sample { bits, value });
    }

    samples.sort_by_key(|s| std::cmp::Reverse(s.value));
    let best = Assignment::from_bits(samples[0].bits[..model.num_original()].to_vec());
    Ok(SampleSet { samples, best })
}
