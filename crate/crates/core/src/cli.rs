//! Command-line front end: instance generation, QUBO reduction, annealing,
//! search planning, small-n circuit simulation and the benchmark grid.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::analytic::{
    cyclical_iterations, grover_iterations, hamming_iterations, plan_cyclical, plan_hamming,
};
use crate::anneal::{sample, AnnealConfig, SimulatedAnnealer};
use crate::bench::{aggregate, aggregate_markdown, records_to_csv, run_grid};
use crate::formula::{emit_dimacs, generate_random, parse_dimacs, Assignment};
use crate::metrics::hamming;
use crate::qsim::{grover_cyclical, grover_hamming, range_splitter, Oracle, StateVector};
use crate::qubo::{compile_with_penalty, Coeff, QuboModel};

const AFTER_HELP: &str = "Annealing scenarios:\n  \
    1 grover    plain search over the full domain (no annealing stage)\n  \
    2-3         quantum annealing front ends: require an external sampler plugin; not implemented\n  \
    4 hamming   simulated annealing + Hamming-neighbourhood search\n  \
    5 cyclical  simulated annealing + cyclical-range search";

#[derive(Parser)]
#[command(
    name = "hysat",
    about = "Hybrid 3-SAT toolkit: QUBO compilation, simulated annealing and distance-seeded quantum search planning",
    after_help = AFTER_HELP,
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Scenario {
    Grover,
    Hamming,
    Cyclical,
}

/// One or more variable counts, written as `7` or an inclusive `7..14`.
#[derive(Debug, Clone)]
struct VarCounts(Vec<u32>);

/// Comma-separated density list.
#[derive(Debug, Clone)]
struct Densities(Vec<f64>);

fn parse_n_range(text: &str) -> Result<VarCounts, String> {
    let parse_one = |s: &str| {
        s.trim()
            .parse::<u32>()
            .map_err(|_| format!("bad variable count {s}"))
    };
    if let Some((lo, hi)) = text.split_once("..") {
        let hi = hi.strip_prefix('=').unwrap_or(hi);
        let (lo, hi) = (parse_one(lo)?, parse_one(hi)?);
        if lo > hi {
            return Err(format!("empty range {text}"));
        }
        Ok(VarCounts((lo..=hi).collect()))
    } else {
        Ok(VarCounts(vec![parse_one(text)?]))
    }
}

fn parse_densities(text: &str) -> Result<Densities, String> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| format!("bad density {s}"))
        })
        .collect::<Result<Vec<f64>, String>>()
        .map(Densities)
}

fn parse_penalty(text: &str) -> Result<Coeff, String> {
    text.parse::<Coeff>()
        .map_err(|_| format!("bad penalty {text}; use an integer or p/q"))
}

#[derive(Args)]
struct AnnealFlags {
    /// Metropolis sweeps per restart
    #[arg(long, default_value_t = crate::anneal::DEFAULT_NUM_SWEEPS)]
    sweeps: usize,
    /// Restarts; defaults to the number of model variables
    #[arg(long)]
    reads: Option<usize>,
    /// Full sweeps per schedule step
    #[arg(long, default_value_t = 1)]
    sweeps_per_beta: usize,
    /// JSON file with an annealing configuration; flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
}

impl AnnealFlags {
    fn build(&self, seed: u64) -> Result<AnnealConfig, String> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
                serde_json::from_str(&text).map_err(|e| format!("bad config: {e}"))?
            }
            None => AnnealConfig::default(),
        };
        cfg.num_sweeps = self.sweeps;
        cfg.num_sweeps_per_beta = self.sweeps_per_beta;
        if self.reads.is_some() {
            cfg.num_reads = self.reads;
        }
        cfg.seed = seed;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Emit random unique-solution DIMACS instances over a grid
    Generate {
        /// Variable counts, e.g. 7 or 7..10 (inclusive)
        #[arg(long, value_parser = parse_n_range)]
        n: VarCounts,
        /// Comma-separated densities
        #[arg(long, value_parser = parse_densities, default_value = "4.0,4.3,4.55")]
        density: Densities,
        #[arg(long, default_value_t = 10)]
        instances: u32,
        /// Base seed folded into every instance seed
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Keep only instances with exactly one solution
        #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
        unique: bool,
        /// Output directory
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Compile a DIMACS CNF file into a QUBO model
    Reduce {
        #[arg(long)]
        input: PathBuf,
        /// Penalty weight for auxiliary-product blocks
        #[arg(long, value_parser = parse_penalty, default_value = "1")]
        penalty: Coeff,
        /// QUBO text output path (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the JSON form here
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Sample a QUBO text file with simulated annealing
    Anneal {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        flags: AnnealFlags,
        /// Samples CSV output path
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Plan both searches between two basis states
    Plan {
        #[arg(long)]
        n: u32,
        /// Start basis state (annealing output)
        #[arg(long)]
        gamma: u64,
        /// Target basis state (true solution)
        #[arg(long)]
        tau: u64,
        /// Superposed qubits per cyclical execution (default n - 1)
        #[arg(long)]
        r: Option<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact small-n simulation of the search operators
    Simulate {
        /// Run the incrementer cascade on a basis state and print the result
        #[arg(long, default_value_t = false)]
        check_displacement: bool,
        #[arg(long)]
        n: usize,
        /// Start basis state for --check-displacement
        #[arg(long)]
        start: Option<u64>,
        /// Displacement amount for --check-displacement
        #[arg(long)]
        disp: Option<u64>,
        /// Which search to simulate
        #[arg(long, value_enum)]
        scenario: Option<Scenario>,
        #[arg(long)]
        gamma: Option<u64>,
        #[arg(long)]
        tau: Option<u64>,
        /// Hamming tuning parameter (defaults to the true distance)
        #[arg(long)]
        k: Option<u32>,
        /// Superposed qubits per cyclical execution (default n - 1)
        #[arg(long)]
        r: Option<usize>,
        /// Cyclical segment number (defaults to the one holding tau)
        #[arg(long)]
        segment: Option<u64>,
        /// Search iterations (defaults to the planned count)
        #[arg(long)]
        iters: Option<u64>,
        /// Probability CSV output path
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the full pipeline grid and aggregate the results
    Bench {
        /// Variable counts, e.g. 7 or 7..14 (inclusive)
        #[arg(long, value_parser = parse_n_range)]
        n: VarCounts,
        #[arg(long, value_parser = parse_densities, default_value = "4.0,4.3,4.55")]
        density: Densities,
        #[arg(long, default_value_t = 10)]
        instances: u32,
        /// Annealing seeds per instance
        #[arg(long, default_value_t = 5)]
        seeds: u32,
        #[command(flatten)]
        flags: AnnealFlags,
        /// Output directory for records.csv and tables.md
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

/// Parses and runs `argv`, returning the process exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 2 } else { 0 };
            let _ = err.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(message) => {
            eprintln!("error: {message}");
            1
        }
    }
}

fn write_or_print(path: &Option<PathBuf>, contents: &str) -> Result<(), String> {
    match path {
        Some(path) => fs::write(path, contents)
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn density_tag(density: f64) -> String {
    format!("{density}").replace('.', "p")
}

fn dispatch(command: Command) -> Result<(), String> {
    match command {
        Command::Generate { n, density, instances, seed, unique, out } => {
            fs::create_dir_all(&out).map_err(|e| format!("cannot create out dir: {e}"))?;
            let mut written = 0;
            for &num_vars in &n.0 {
                for &d in &density.0 {
                    for instance in 0..instances {
                        let instance_seed = crate::bench::instance_seed(num_vars, d, instance)
                            ^ seed.wrapping_mul(0x9E37_79B9_7F4A_7C15);
                        let formula =
                            generate_random(num_vars as usize, d, unique, instance_seed)
                                .map_err(|e| e.to_string())?;
                        let name = format!(
                            "n{num_vars}_d{}_i{instance}.cnf",
                            density_tag(d)
                        );
                        fs::write(out.join(&name), emit_dimacs(&formula, Some(instance_seed)))
                            .map_err(|e| format!("cannot write {name}: {e}"))?;
                        written += 1;
                    }
                }
            }
            println!("wrote {written} instances to {}", out.display());
            Ok(())
        }
        Command::Reduce { input, penalty, out, json } => {
            let formula = parse_dimacs(&read_file(&input)?).map_err(|e| e.to_string())?;
            let model = compile_with_penalty(&formula, penalty).map_err(|e| e.to_string())?;
            eprintln!(
                "{} variables ({} original + {} auxiliary), offset {}",
                model.num_vars(),
                model.num_original(),
                model.num_aux(),
                model.offset()
            );
            if let Some(path) = &json {
                fs::write(path, model.to_json())
                    .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
            }
            write_or_print(&out, &model.to_text())
        }
        Command::Anneal { input, seed, flags, out } => {
            let model = QuboModel::from_text(&read_file(&input)?).map_err(|e| e.to_string())?;
            let cfg = flags.build(seed)?;
            let result = sample(&model, &cfg).map_err(|e| e.to_string())?;
            eprintln!(
                "best value {} at original-variable state {}",
                result.best_value(),
                result.best().index()
            );
            write_or_print(&out, &result.to_csv())
        }
        Command::Plan { n, gamma, tau, r, out } => {
            let start = Assignment::from_index(n as usize, gamma).map_err(|e| e.to_string())?;
            let target = Assignment::from_index(n as usize, tau).map_err(|e| e.to_string())?;
            let hamming_distance = hamming(&start, &target).map_err(|e| e.to_string())?;
            let hamming_plan = plan_hamming(n, hamming_distance).map_err(|e| e.to_string())?;
            let cyclical_plan = plan_cyclical(n, gamma, tau, r).map_err(|e| e.to_string())?;
            let doc = json!({
                "n": n,
                "gamma": gamma,
                "tau": tau,
                "grover_total": grover_iterations(n),
                "hamming": hamming_plan,
                "cyclical": cyclical_plan,
            });
            let text = serde_json::to_string_pretty(&doc).map_err(|e| e.to_string())?;
            write_or_print(&out, &format!("{text}\n"))
        }
        Command::Simulate {
            check_displacement,
            n,
            start,
            disp,
            scenario,
            gamma,
            tau,
            k,
            r,
            segment,
            iters,
            out,
        } => {
            if check_displacement {
                let start = start.ok_or("--check-displacement needs --start")?;
                let disp = disp.ok_or("--check-displacement needs --disp")?;
                let mut state =
                    StateVector::basis(n, start).map_err(|e| e.to_string())?;
                state.displace(disp);
                let landed = state
                    .amplitudes()
                    .iter()
                    .position(|a| a.norm_sqr() > 0.5)
                    .expect("displacement permutes basis states");
                println!("start {start} + {disp} -> {landed}");
                if let Some(path) = &out {
                    fs::write(path, state.probabilities_csv())
                        .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
                }
                return Ok(());
            }
            let scenario = scenario.ok_or("pick --scenario or --check-displacement")?;
            let tau = tau.ok_or("simulation needs --tau")?;
            let oracle = Oracle::single(tau);
            match scenario {
                Scenario::Grover => {
                    let rounds = iters.unwrap_or_else(|| grover_iterations(n as u32));
                    let p = grover_cyclical(0, &oracle, n, n, 0, rounds)
                        .map_err(|e| e.to_string())?;
                    println!("solution probability {p:.6} after {rounds} iterations");
                }
                Scenario::Hamming => {
                    let gamma = gamma.ok_or("hamming simulation needs --gamma")?;
                    let start =
                        Assignment::from_index(n, gamma).map_err(|e| e.to_string())?;
                    let target =
                        Assignment::from_index(n, tau).map_err(|e| e.to_string())?;
                    let distance = hamming(&start, &target).map_err(|e| e.to_string())?;
                    let k = k.unwrap_or(distance.max(1));
                    let rounds = match iters {
                        Some(t) => t,
                        None => hamming_iterations(n as u32, k, distance)
                            .map_err(|e| e.to_string())?
                            .1,
                    };
                    let p = grover_hamming(&start, &oracle, k, rounds)
                        .map_err(|e| e.to_string())?;
                    println!(
                        "solution probability {p:.6} after {rounds} iterations (k = {k}, distance = {distance})"
                    );
                }
                Scenario::Cyclical => {
                    let gamma = gamma.ok_or("cyclical simulation needs --gamma")?;
                    let r = r.unwrap_or(n.saturating_sub(1).max(1));
                    let segment = match segment {
                        Some(s) => s,
                        None => segment_holding(n, r, gamma, tau)
                            .ok_or("tau is unreachable for these parameters")?,
                    };
                    let rounds = iters.unwrap_or_else(|| cyclical_iterations(r as u32));
                    let p = grover_cyclical(gamma, &oracle, n, r, segment, rounds)
                        .map_err(|e| e.to_string())?;
                    println!(
                        "solution probability {p:.6} after {rounds} iterations (r = {r}, segment = {segment})"
                    );
                }
            }
            if let Some(path) = &out {
                let state = match scenario {
                    Scenario::Grover => simulate_state_grover(n, &oracle, iters)?,
                    Scenario::Hamming => {
                        let gamma = gamma.expect("checked above");
                        simulate_state_hamming(n, gamma, tau, k, iters)?
                    }
                    Scenario::Cyclical => {
                        let gamma = gamma.expect("checked above");
                        let r = r.unwrap_or(n.saturating_sub(1).max(1));
                        let segment = segment
                            .or_else(|| segment_holding(n, r, gamma, tau))
                            .expect("checked above");
                        simulate_state_cyclical(n, gamma, tau, r, segment, iters)?
                    }
                };
                fs::write(path, state.probabilities_csv())
                    .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
            }
            Ok(())
        }
        Command::Bench { n, density, instances, seeds, flags, out } => {
            let cfg = flags.build(0)?;
            let sampler = SimulatedAnnealer::new(cfg);
            let records = run_grid(&n.0, &density.0, instances, seeds, &sampler)
                .map_err(|e| e.to_string())?;
            fs::create_dir_all(&out).map_err(|e| format!("cannot create out dir: {e}"))?;
            let csv_path = out.join("records.csv");
            fs::write(&csv_path, records_to_csv(&records))
                .map_err(|e| format!("cannot write {}: {e}", csv_path.display()))?;
            let tables = aggregate_markdown(&aggregate(&records).map_err(|e| e.to_string())?);
            let md_path = out.join("tables.md");
            fs::write(&md_path, &tables)
                .map_err(|e| format!("cannot write {}: {e}", md_path.display()))?;
            println!("{tables}");
            println!(
                "{} records -> {} and {}",
                records.len(),
                csv_path.display(),
                md_path.display()
            );
            Ok(())
        }
    }
}

fn read_file(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

/// Segment number whose ring window around `gamma` contains `tau`, if any.
fn segment_holding(n: usize, r: usize, gamma: u64, tau: u64) -> Option<u64> {
    for segment in 0..1u64 << (n - r) {
        if let Ok(state) = range_splitter(n, r, segment, gamma) {
            if state.probability(tau) > 1e-9 {
                return Some(segment);
            }
        }
    }
    None
}

fn simulate_state_grover(
    n: usize,
    oracle: &Oracle,
    iters: Option<u64>,
) -> Result<StateVector, String> {
    let rounds = iters.unwrap_or_else(|| grover_iterations(n as u32));
    let prepared = range_splitter(n, n, 0, 0).map_err(|e| e.to_string())?;
    let mut state = prepared.clone();
    for _ in 0..rounds {
        state.apply_oracle(oracle);
        state.reflect_about(&prepared);
    }
    Ok(state)
}

fn simulate_state_hamming(
    n: usize,
    gamma: u64,
    tau: u64,
    k: Option<u32>,
    iters: Option<u64>,
) -> Result<StateVector, String> {
    let start = Assignment::from_index(n, gamma).map_err(|e| e.to_string())?;
    let target = Assignment::from_index(n, tau).map_err(|e| e.to_string())?;
    let distance = hamming(&start, &target).map_err(|e| e.to_string())?;
    let k = k.unwrap_or(distance.max(1));
    let rounds = match iters {
        Some(t) => t,
        None => hamming_iterations(n as u32, k, distance)
            .map_err(|e| e.to_string())?
            .1,
    };
    let mut prepared = StateVector::basis(n, gamma).map_err(|e| e.to_string())?;
    prepared
        .apply_biased_hadamard(n as f64 / k as f64)
        .map_err(|e| e.to_string())?;
    let oracle = Oracle::single(tau);
    let mut state = prepared.clone();
    for _ in 0..rounds {
        state.apply_oracle(&oracle);
        state.reflect_about(&prepared);
    }
    Ok(state)
}

fn simulate_state_cyclical(
    n: usize,
    gamma: u64,
    tau: u64,
    r: usize,
    segment: u64,
    iters: Option<u64>,
) -> Result<StateVector, String> {
    let rounds = iters.unwrap_or_else(|| cyclical_iterations(r as u32));
    let prepared = range_splitter(n, r, segment, gamma).map_err(|e| e.to_string())?;
    let oracle = Oracle::single(tau);
    let mut state = prepared.clone();
    for _ in 0..rounds {
        state.apply_oracle(&oracle);
        state.reflect_about(&prepared);
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n_range_parser_accepts_single_and_ranges() {
        assert_eq!(parse_n_range("7").unwrap().0, vec![7]);
        assert_eq!(parse_n_range("7..10").unwrap().0, vec![7, 8, 9, 10]);
        assert_eq!(parse_n_range("7..=9").unwrap().0, vec![7, 8, 9]);
        assert!(parse_n_range("10..7").is_err());
        assert!(parse_n_range("x").is_err());
    }

    #[test]
    fn density_parser_accepts_lists() {
        assert_eq!(parse_densities("4.0,4.3").unwrap().0, vec![4.0, 4.3]);
        assert!(parse_densities("4.0,oops").is_err());
    }

    #[test]
    fn segment_lookup_finds_covering_window() {
        assert_eq!(segment_holding(5, 3, 10, 12), Some(0));
        assert_eq!(segment_holding(5, 3, 10, 20), Some(2));
        assert_eq!(segment_holding(5, 3, 10, 27), Some(3));
    }
}
