//! Experiment harness: generate unique-solution instances over a grid of
//! (variable count, density), anneal each instance under several seeds, and
//! aggregate distances and iteration totals per strategy.
//!
//! Every run is keyed by (n, density, instance, seed); the generator seed
//! depends only on (n, density, instance), so different annealing seeds hit
//! the same instance.

use std::fmt::Write as _;

use num_rational::Rational64;
use num_traits::ToPrimitive;
use thiserror::Error;

use crate::analytic::{grover_iterations, plan_cyclical, plan_hamming, PlanError};
use crate::anneal::{AnnealError, Sampler};
use crate::formula::{generate_random, FormulaError};
use crate::metrics::{cyclical, hamming, MetricError};
use crate::qubo::{compile, QuboError};

#[derive(Debug, Error, PartialEq)]
pub enum BenchError {
    #[error("no records to aggregate")]
    NoRecords,
    #[error("generated instance lost its unique solution")]
    LostSolution,
    #[error("records CSV is malformed: {0}")]
    ParseError(String),
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error(transparent)]
    Qubo(#[from] QuboError),
    #[error(transparent)]
    Anneal(#[from] AnnealError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Plan(#[from] PlanError),
}

/// One cell of the experiment grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestCase {
    pub num_vars: u32,
    pub density: f64,
    pub instance: u32,
    pub seed: u32,
}

/// Everything measured for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub num_vars: u32,
    pub density: f64,
    pub instance: u32,
    pub seed: u32,
    pub hamming_distance: u32,
    pub cyclical_distance: u64,
    pub grover_total: u64,
    pub hamming_unknown: u64,
    pub hamming_known: u64,
    pub cyclical_unknown: u64,
    pub cyclical_known: u64,
    pub anneal_value: Rational64,
    pub solved_by_anneal: bool,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn density_key(density: f64) -> u64 {
    (density * 1000.0).round() as u64
}

/// Generator seed for an instance; independent of the annealing seed.
pub fn instance_seed(num_vars: u32, density: f64, instance: u32) -> u64 {
    splitmix64(((num_vars as u64) << 40) ^ (density_key(density) << 16) ^ instance as u64)
}

/// Annealing seed for a (instance, seed id) pair.
pub fn anneal_seed(num_vars: u32, density: f64, instance: u32, seed: u32) -> u64 {
    splitmix64(instance_seed(num_vars, density, instance) ^ ((seed as u64 + 1) << 48))
}

/// Generate, compile, anneal, measure distances and plan both searches.
pub fn run_pipeline(tc: &TestCase, sampler: &dyn Sampler) -> Result<RunRecord, BenchError> {
    let formula = generate_random(
        tc.num_vars as usize,
        tc.density,
        true,
        instance_seed(tc.num_vars, tc.density, tc.instance),
    )?;
    let model = compile(&formula)?;
    let samples = sampler.sample(
        &model,
        anneal_seed(tc.num_vars, tc.density, tc.instance, tc.seed),
    )?;
    let found = samples.best();
    let solutions = formula.brute_force_solutions()?;
    let [solution] = solutions.as_slice() else {
        return Err(BenchError::LostSolution);
    };

    let hamming_distance = hamming(found, solution)?;
    let cyclical_distance = cyclical(found, solution)?;
    let grover_total = grover_iterations(tc.num_vars);
    let solved_by_anneal = hamming_distance == 0;

    let (hamming_unknown, hamming_known, cyclical_unknown, cyclical_known) = if solved_by_anneal {
        (0, 0, 0, 0)
    } else {
        let h = plan_hamming(tc.num_vars, hamming_distance)?;
        let c = plan_cyclical(tc.num_vars, found.index(), solution.index(), None)?;
        (h.total_unknown, h.total_known, c.total_unknown, c.total_known)
    };

    Ok(RunRecord {
        num_vars: tc.num_vars,
        density: tc.density,
        instance: tc.instance,
        seed: tc.seed,
        hamming_distance,
        cyclical_distance,
        grover_total,
        hamming_unknown,
        hamming_known,
        cyclical_unknown,
        cyclical_known,
        anneal_value: samples.best_value(),
        solved_by_anneal,
    })
}

/// Runs the full grid in (n, density, instance, seed) order.
pub fn run_grid(
    ns: &[u32],
    densities: &[f64],
    instances: u32,
    seeds: u32,
    sampler: &dyn Sampler,
) -> Result<Vec<RunRecord>, BenchError> {
    let mut records = Vec::new();
    for &num_vars in ns {
        for &density in densities {
            for instance in 0..instances {
                for seed in 0..seeds {
                    let tc = TestCase { num_vars, density, instance, seed };
                    records.push(run_pipeline(&tc, sampler)?);
                }
            }
        }
    }
    Ok(records)
}

pub const RECORDS_CSV_HEADER: &str =
    "n,density,instance,seed,k_f,d_f,grover,ham_unk,ham_known,cyc_unk,cyc_known,anneal_value,solved";

pub fn records_to_csv(records: &[RunRecord]) -> String {
    let mut out = String::from(RECORDS_CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.num_vars,
            r.density,
            r.instance,
            r.seed,
            r.hamming_distance,
            r.cyclical_distance,
            r.grover_total,
            r.hamming_unknown,
            r.hamming_known,
            r.cyclical_unknown,
            r.cyclical_known,
            r.anneal_value,
            r.solved_by_anneal,
        );
    }
    out
}

pub fn records_from_csv(text: &str) -> Result<Vec<RunRecord>, BenchError> {
    let mut lines = text.lines();
    match lines.next() {
        Some(header) if header.trim() == RECORDS_CSV_HEADER => {}
        other => {
            return Err(BenchError::ParseError(format!(
                "unexpected header {other:?}"
            )))
        }
    }
    let mut records = Vec::new();
    for line in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 13 {
            return Err(BenchError::ParseError(format!(
                "expected 13 fields, got {}",
                fields.len()
            )));
        }
        let bad = |field: &str| BenchError::ParseError(format!("bad field {field}"));
        records.push(RunRecord {
            num_vars: fields[0].parse().map_err(|_| bad(fields[0]))?,
            density: fields[1].parse().map_err(|_| bad(fields[1]))?,
            instance: fields[2].parse().map_err(|_| bad(fields[2]))?,
            seed: fields[3].parse().map_err(|_| bad(fields[3]))?,
            hamming_distance: fields[4].parse().map_err(|_| bad(fields[4]))?,
            cyclical_distance: fields[5].parse().map_err(|_| bad(fields[5]))?,
            grover_total: fields[6].parse().map_err(|_| bad(fields[6]))?,
            hamming_unknown: fields[7].parse().map_err(|_| bad(fields[7]))?,
            hamming_known: fields[8].parse().map_err(|_| bad(fields[8]))?,
            cyclical_unknown: fields[9].parse().map_err(|_| bad(fields[9]))?,
            cyclical_known: fields[10].parse().map_err(|_| bad(fields[10]))?,
            anneal_value: fields[11].parse().map_err(|_| bad(fields[11]))?,
            solved_by_anneal: fields[12].parse().map_err(|_| bad(fields[12]))?,
        });
    }
    Ok(records)
}

/// Mean distances per variable count.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceRow {
    pub num_vars: u32,
    pub runs: usize,
    pub mean_hamming: f64,
    pub mean_cyclical: f64,
}

/// Mean iteration totals per (variable count, density) cell, with signed
/// percentage deltas against the plain Grover column.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRow {
    pub num_vars: u32,
    pub density: f64,
    pub runs: usize,
    pub grover: f64,
    pub hamming_unknown: f64,
    pub hamming_known: f64,
    pub cyclical_unknown: f64,
    pub cyclical_known: f64,
}

impl IterationRow {
    /// `100 * (x - grover) / grover`; negative values are savings.
    pub fn pct_vs_grover(&self, x: f64) -> f64 {
        100.0 * (x - self.grover) / self.grover
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub distances: Vec<DistanceRow>,
    pub iterations: Vec<IterationRow>,
}

pub fn aggregate(records: &[RunRecord]) -> Result<Aggregate, BenchError> {
    if records.is_empty() {
        return Err(BenchError::NoRecords);
    }
    let mut ns: Vec<u32> = records.iter().map(|r| r.num_vars).collect();
    ns.sort_unstable();
    ns.dedup();

    let mut distances = Vec::new();
    for &n in &ns {
        let rows: Vec<&RunRecord> = records.iter().filter(|r| r.num_vars == n).collect();
        let runs = rows.len();
        distances.push(DistanceRow {
            num_vars: n,
            runs,
            mean_hamming: rows.iter().map(|r| r.hamming_distance as f64).sum::<f64>()
                / runs as f64,
            mean_cyclical: rows.iter().map(|r| r.cyclical_distance as f64).sum::<f64>()
                / runs as f64,
        });
    }

    let mut cells: Vec<(u32, u64)> = records
        .iter()
        .map(|r| (r.num_vars, density_key(r.density)))
        .collect();
    cells.sort_unstable();
    cells.dedup();

    let mut iterations = Vec::new();
    for (n, dkey) in cells {
        let rows: Vec<&RunRecord> = records
            .iter()
            .filter(|r| r.num_vars == n && density_key(r.density) == dkey)
            .collect();
        let runs = rows.len();
        let mean = |f: &dyn Fn(&RunRecord) -> u64| {
            rows.iter().map(|r| f(r) as f64).sum::<f64>() / runs as f64
        };
        iterations.push(IterationRow {
            num_vars: n,
            density: rows[0].density,
            runs,
            grover: mean(&|r| r.grover_total),
            hamming_unknown: mean(&|r| r.hamming_unknown),
            hamming_known: mean(&|r| r.hamming_known),
            cyclical_unknown: mean(&|r| r.cyclical_unknown),
            cyclical_known: mean(&|r| r.cyclical_known),
        });
    }

    Ok(Aggregate { distances, iterations })
}

/// Two Markdown tables: mean distances per n, and mean iteration totals per
/// (n, density) with percentage deltas against Grover.
pub fn aggregate_markdown(agg: &Aggregate) -> String {
    let mut out = String::new();
    out.push_str("## Mean distances to the true solution\n\n");
    out.push_str("| n | runs | mean Hamming | mean cyclical |\n");
    out.push_str("|---:|---:|---:|---:|\n");
    for row in &agg.distances {
        let _ = writeln!(
            out,
            "| {} | {} | {:.2} | {:.2} |",
            row.num_vars, row.runs, row.mean_hamming, row.mean_cyclical
        );
    }
    out.push_str("\n## Mean iteration totals\n\n");
    out.push_str(
        "| n | density | runs | Grover | Hamming unknown | Hamming known | Cyclical unknown | Cyclical known |\n",
    );
    out.push_str("|---:|---:|---:|---:|---:|---:|---:|---:|\n");
    for row in &agg.iterations {
        let cell = |x: f64| format!("{:.2} ({:+.2}%)", x, row.pct_vs_grover(x));
        let _ = writeln!(
            out,
            "| {} | {} | {} | {:.1} | {} | {} | {} | {} |",
            row.num_vars,
            row.density,
            row.runs,
            row.grover,
            cell(row.hamming_unknown),
            cell(row.hamming_known),
            cell(row.cyclical_unknown),
            cell(row.cyclical_known),
        );
    }
    out
}

/// Mean anneal value as f64, mostly for reporting.
pub fn mean_anneal_value(records: &[RunRecord]) -> f64 {
    records
        .iter()
        .map(|r| r.anneal_value.to_f64().unwrap_or(f64::NAN))
        .sum::<f64>()
        / records.len() as f64
}
