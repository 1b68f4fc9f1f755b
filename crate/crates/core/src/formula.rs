//! 3-SAT instances: literals, clauses, assignments, DIMACS I/O, random
//! generation and brute-force solving.
//!
//! Variables are 0-based. An [`Assignment`] is little-endian: bit `i` holds
//! the value of variable `i`, so the basis-state index of an assignment is
//! `sum bits[i] * 2^i`.

use std::collections::HashSet;
use std::fmt::Write as _;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Largest variable count accepted by brute-force enumeration.
pub const BRUTE_FORCE_VAR_CAP: usize = 24;

/// Instance draws allowed while searching for a unique-solution formula.
pub const UNIQUE_RETRY_BUDGET: usize = 10_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormulaError {
    #[error("malformed DIMACS header: {0}")]
    MalformedHeader(String),
    #[error("clause must have exactly 3 literals, got {0}")]
    ClauseLength(usize),
    #[error("repeated variable {0} in clause")]
    RepeatedVariable(usize),
    #[error("variable {var} out of range for {num_vars} variables")]
    VariableOutOfRange { var: usize, num_vars: usize },
    #[error("expected {expected} clauses, found {found}")]
    ClauseCountMismatch { expected: usize, found: usize },
    #[error("assignment has {got} bits, formula has {expected} variables")]
    AssignmentLength { expected: usize, got: usize },
    #[error("{num_vars} variables exceeds brute-force cap of {cap}")]
    TooManyVariables { num_vars: usize, cap: usize },
    #[error("no unique-solution instance found in {0} draws")]
    UniquenessBudgetExhausted(usize),
    #[error("invalid generator parameters: {0}")]
    BadGeneratorParams(String),
    #[error("basis index {index} out of range for {num_vars} variables")]
    IndexOutOfRange { index: u64, num_vars: usize },
}

/// A possibly negated variable occurrence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub var: usize,
    pub negated: bool,
}

impl Literal {
    pub fn positive(var: usize) -> Self {
        Literal { var, negated: false }
    }

    pub fn negative(var: usize) -> Self {
        Literal { var, negated: true }
    }

    /// Truth value under `bits`.
    pub fn evaluate(&self, bits: &[bool]) -> bool {
        bits[self.var] ^ self.negated
    }

    fn evaluate_index(&self, index: u64) -> bool {
        ((index >> self.var) & 1 == 1) ^ self.negated
    }
}

/// Disjunction of exactly three literals over pairwise distinct variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Clause {
    literals: [Literal; 3],
}

impl Clause {
    pub fn new(a: Literal, b: Literal, c: Literal) -> Result<Self, FormulaError> {
        if a.var == b.var || a.var == c.var {
            return Err(FormulaError::RepeatedVariable(a.var));
        }
        if b.var == c.var {
            return Err(FormulaError::RepeatedVariable(b.var));
        }
        Ok(Clause { literals: [a, b, c] })
    }

    pub fn literals(&self) -> &[Literal; 3] {
        &self.literals
    }

    pub fn is_satisfied(&self, bits: &[bool]) -> bool {
        self.literals.iter().any(|l| l.evaluate(bits))
    }

    fn is_satisfied_index(&self, index: u64) -> bool {
        self.literals.iter().any(|l| l.evaluate_index(index))
    }

    /// Literals sorted by variable; used for duplicate detection.
    fn canonical(&self) -> [Literal; 3] {
        let mut lits = self.literals;
        lits.sort();
        lits
    }
}

/// Boolean vector of length `n` together with its basis-state index.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment {
    bits: Vec<bool>,
}

impl Assignment {
    pub fn from_bits(bits: Vec<bool>) -> Self {
        Assignment { bits }
    }

    /// Builds the assignment whose index is `index` (bit `i` of the index is
    /// variable `i`).
    pub fn from_index(num_vars: usize, index: u64) -> Result<Self, FormulaError> {
        if num_vars < 64 && index >> num_vars != 0 {
            return Err(FormulaError::IndexOutOfRange { index, num_vars });
        }
        let bits = (0..num_vars).map(|i| (index >> i) & 1 == 1).collect();
        Ok(Assignment { bits })
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn index(&self) -> u64 {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .fold(0u64, |acc, (i, _)| acc | 1 << i)
    }
}

/// A 3-CNF formula over `num_vars` variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfFormula {
    num_vars: usize,
    clauses: Vec<Clause>,
}

impl CnfFormula {
    pub fn new(num_vars: usize, clauses: Vec<Clause>) -> Result<Self, FormulaError> {
        if num_vars == 0 {
            return Err(FormulaError::BadGeneratorParams(
                "formula needs at least one variable".into(),
            ));
        }
        for clause in &clauses {
            for lit in clause.literals() {
                if lit.var >= num_vars {
                    return Err(FormulaError::VariableOutOfRange { var: lit.var, num_vars });
                }
            }
        }
        Ok(CnfFormula { num_vars, clauses })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    /// Clauses-to-variables ratio m/n.
    pub fn density(&self) -> f64 {
        self.clauses.len() as f64 / self.num_vars as f64
    }

    fn check_len(&self, a: &Assignment) -> Result<(), FormulaError> {
        if a.len() != self.num_vars {
            return Err(FormulaError::AssignmentLength {
                expected: self.num_vars,
                got: a.len(),
            });
        }
        Ok(())
    }

    /// True iff every clause has at least one satisfied literal.
    pub fn eval_bool(&self, a: &Assignment) -> Result<bool, FormulaError> {
        self.check_len(a)?;
        Ok(self.clauses.iter().all(|c| c.is_satisfied(a.bits())))
    }

    /// Number of satisfied clauses.
    pub fn eval_count(&self, a: &Assignment) -> Result<usize, FormulaError> {
        self.check_len(a)?;
        Ok(self
            .clauses
            .iter()
            .filter(|c| c.is_satisfied(a.bits()))
            .count())
    }

    /// All satisfying assignments, ascending by index.
    pub fn brute_force_solutions(&self) -> Result<Vec<Assignment>, FormulaError> {
        if self.num_vars > BRUTE_FORCE_VAR_CAP {
            return Err(FormulaError::TooManyVariables {
                num_vars: self.num_vars,
                cap: BRUTE_FORCE_VAR_CAP,
            });
        }
        let mut solutions = Vec::new();
        for index in 0..1u64 << self.num_vars {
            if self.clauses.iter().all(|c| c.is_satisfied_index(index)) {
                solutions.push(Assignment::from_index(self.num_vars, index)?);
            }
        }
        Ok(solutions)
    }

    /// Counts satisfying assignments, stopping at `limit`.
    pub fn count_solutions_up_to(&self, limit: usize) -> Result<usize, FormulaError> {
        if self.num_vars > BRUTE_FORCE_VAR_CAP {
            return Err(FormulaError::TooManyVariables {
                num_vars: self.num_vars,
                cap: BRUTE_FORCE_VAR_CAP,
            });
        }
        let mut count = 0;
        for index in 0..1u64 << self.num_vars {
            if self.clauses.iter().all(|c| c.is_satisfied_index(index)) {
                count += 1;
                if count >= limit {
                    return Ok(count);
                }
            }
        }
        Ok(count)
    }
}

/// Parses DIMACS CNF text. DIMACS variables are 1-based; variable `v` maps to
/// index `v - 1`. Every clause must contain exactly 3 distinct variables.
pub fn parse_dimacs(text: &str) -> Result<CnfFormula, FormulaError> {
    let mut lines = text.lines();
    let header = loop {
        match lines.next() {
            Some(line) => {
                let trimmed = line.trim();
                if trimmed.is_empty() || trimmed.starts_with('c') {
                    continue;
                }
                break trimmed.to_string();
            }
            None => return Err(FormulaError::MalformedHeader("missing header".into())),
        }
    };

    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 4 || fields[0] != "p" || fields[1] != "cnf" {
        return Err(FormulaError::MalformedHeader(header));
    }
    let num_vars: usize = fields[2]
        .parse()
        .map_err(|_| FormulaError::MalformedHeader(header.clone()))?;
    let num_clauses: usize = fields[3]
        .parse()
        .map_err(|_| FormulaError::MalformedHeader(header.clone()))?;
    if num_vars == 0 {
        return Err(FormulaError::MalformedHeader(header));
    }

    let mut clauses = Vec::with_capacity(num_clauses);
    let mut current: Vec<Literal> = Vec::with_capacity(3);
    for line in lines {
        let trimmed = line.trim();
        if trimmed.starts_with('c') {
            continue;
        }
        for token in trimmed.split_whitespace() {
            let code: i64 = token
                .parse()
                .map_err(|_| FormulaError::MalformedHeader(format!("bad literal {token}")))?;
            if code == 0 {
                if current.len() != 3 {
                    return Err(FormulaError::ClauseLength(current.len()));
                }
                clauses.push(Clause::new(current[0], current[1], current[2])?);
                current.clear();
                continue;
            }
            let var = code.unsigned_abs() as usize - 1;
            if var >= num_vars {
                return Err(FormulaError::VariableOutOfRange { var, num_vars });
            }
            current.push(Literal { var, negated: code < 0 });
            if current.len() > 3 {
                return Err(FormulaError::ClauseLength(current.len()));
            }
        }
    }
    if !current.is_empty() {
        return Err(FormulaError::ClauseLength(current.len()));
    }
    if clauses.len() != num_clauses {
        return Err(FormulaError::ClauseCountMismatch {
            expected: num_clauses,
            found: clauses.len(),
        });
    }
    CnfFormula::new(num_vars, clauses)
}

/// Writes DIMACS CNF with a comment header recording n, m, density and, when
/// known, the generator seed.
pub fn emit_dimacs(formula: &CnfFormula, seed: Option<u64>) -> String {
    let mut out = String::new();
    let _ = write!(
        out,
        "c n={} m={} density={:.3}",
        formula.num_vars(),
        formula.num_clauses(),
        formula.density()
    );
    if let Some(seed) = seed {
        let _ = write!(out, " seed={seed}");
    }
    out.push('\n');
    let _ = writeln!(out, "p cnf {} {}", formula.num_vars(), formula.num_clauses());
    for clause in formula.clauses() {
        for lit in clause.literals() {
            let code = (lit.var as i64 + 1) * if lit.negated { -1 } else { 1 };
            let _ = write!(out, "{code} ");
        }
        out.push_str("0\n");
    }
    out
}

fn draw_clause(n: usize, rng: &mut ChaCha8Rng) -> Clause {
    let v0 = rng.random_range(0..n);
    let v1 = loop {
        let v = rng.random_range(0..n);
        if v != v0 {
            break v;
        }
    };
    let v2 = loop {
        let v = rng.random_range(0..n);
        if v != v0 && v != v1 {
            break v;
        }
    };
    let lit = |var: usize, rng: &mut ChaCha8Rng| Literal { var, negated: rng.random::<bool>() };
    let (a, b, c) = (lit(v0, rng), lit(v1, rng), lit(v2, rng));
    Clause { literals: [a, b, c] }
}

/// Random 3-SAT instance with `round(density * n)` clauses. Clauses draw 3
/// distinct variables with independent polarities; duplicates (up to literal
/// reordering) are redrawn. With `unique_solution`, whole instances are
/// rejected and regenerated on the same stream until exactly one satisfying
/// assignment exists.
pub fn generate_random(
    n: usize,
    density: f64,
    unique_solution: bool,
    seed: u64,
) -> Result<CnfFormula, FormulaError> {
    generate_random_with_budget(n, density, unique_solution, seed, UNIQUE_RETRY_BUDGET)
}

pub fn generate_random_with_budget(
    n: usize,
    density: f64,
    unique_solution: bool,
    seed: u64,
    budget: usize,
) -> Result<CnfFormula, FormulaError> {
    if n < 3 {
        return Err(FormulaError::BadGeneratorParams(format!(
            "need at least 3 variables, got {n}"
        )));
    }
    if !density.is_finite() || density <= 0.0 {
        return Err(FormulaError::BadGeneratorParams(format!(
            "density must be positive and finite, got {density}"
        )));
    }
    let m = (density * n as f64).round() as usize;
    if m < 1 {
        return Err(FormulaError::BadGeneratorParams(format!(
            "round(density * n) = {m} clauses"
        )));
    }
    if unique_solution && n > BRUTE_FORCE_VAR_CAP {
        return Err(FormulaError::TooManyVariables { num_vars: n, cap: BRUTE_FORCE_VAR_CAP });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..budget.max(1) {
        let mut clauses = Vec::with_capacity(m);
        let mut seen: HashSet<[Literal; 3]> = HashSet::with_capacity(m);
        while clauses.len() < m {
            let clause = draw_clause(n, &mut rng);
            if seen.insert(clause.canonical()) {
                clauses.push(clause);
            }
        }
        let formula = CnfFormula { num_vars: n, clauses };
        if !unique_solution {
            return Ok(formula);
        }
        if formula.count_solutions_up_to(2)? == 1 {
            return Ok(formula);
        }
    }
    Err(FormulaError::UniquenessBudgetExhausted(budget))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The worked five-clause example used across the crate:
    /// (!x0 | !x1 | !x2) & (x1 | !x3 | !x4) & (x4 | !x2 | !x0)
    /// & (x0 | x1 | !x3) & (x1 | x2 | x0).
    pub const FIVE_CLAUSE_DIMACS: &str =
        "p cnf 5 5\n-1 -2 -3 0\n2 -4 -5 0\n5 -3 -1 0\n1 2 -4 0\n2 3 1 0\n";

    fn five_clause() -> CnfFormula {
        parse_dimacs(FIVE_CLAUSE_DIMACS).unwrap()
    }

    #[test]
    fn parse_maps_dimacs_vars_to_zero_based() {
        let f = parse_dimacs("p cnf 3 1\n1 -2 3 0\n").unwrap();
        assert_eq!(f.num_vars(), 3);
        assert_eq!(
            f.clauses()[0].literals(),
            &[Literal::positive(0), Literal::negative(1), Literal::positive(2)]
        );
    }

    #[test]
    fn parse_rejects_repeated_variable() {
        let err = parse_dimacs("p cnf 3 1\n1 1 2 0\n").unwrap_err();
        assert_eq!(err, FormulaError::RepeatedVariable(0));
    }

    #[test]
    fn parse_rejects_bad_inputs() {
        assert!(matches!(
            parse_dimacs("p dimacs 3 1\n1 2 3 0\n"),
            Err(FormulaError::MalformedHeader(_))
        ));
        assert!(matches!(
            parse_dimacs("p cnf 3 1\n1 2 0\n"),
            Err(FormulaError::ClauseLength(2))
        ));
        assert!(matches!(
            parse_dimacs("p cnf 3 1\n1 2 4 0\n"),
            Err(FormulaError::VariableOutOfRange { var: 3, .. })
        ));
        assert!(matches!(
            parse_dimacs("p cnf 3 2\n1 2 3 0\n"),
            Err(FormulaError::ClauseCountMismatch { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn worked_example_evaluations() {
        let f = five_clause();
        let model = Assignment::from_index(5, 2).unwrap(); // x1 = 1, rest 0
        assert!(f.eval_bool(&model).unwrap());
        assert_eq!(f.eval_count(&model).unwrap(), 5);

        let zeros = Assignment::from_index(5, 0).unwrap();
        assert!(!f.eval_bool(&zeros).unwrap());
        assert_eq!(f.eval_count(&zeros).unwrap(), 4);
    }

    #[test]
    fn empty_formula_is_vacuously_true() {
        let f = CnfFormula::new(3, vec![]).unwrap();
        let a = Assignment::from_index(3, 5).unwrap();
        assert!(f.eval_bool(&a).unwrap());
        assert_eq!(f.eval_count(&a).unwrap(), 0);
    }

    #[test]
    fn eval_rejects_length_mismatch() {
        let f = five_clause();
        let a = Assignment::from_bits(vec![false; 4]);
        assert!(matches!(
            f.eval_bool(&a),
            Err(FormulaError::AssignmentLength { expected: 5, got: 4 })
        ));
    }

    #[test]
    fn brute_force_single_clause_has_seven_solutions() {
        let clause = Clause::new(
            Literal::positive(0),
            Literal::positive(1),
            Literal::positive(2),
        )
        .unwrap();
        let f = CnfFormula::new(3, vec![clause]).unwrap();
        let sols = f.brute_force_solutions().unwrap();
        assert_eq!(sols.len(), 7);
        let indices: Vec<u64> = sols.iter().map(Assignment::index).collect();
        assert_eq!(indices, vec![1, 2, 3, 4, 5, 6, 7]);
    }

    #[test]
    fn brute_force_includes_worked_model() {
        let sols = five_clause().brute_force_solutions().unwrap();
        assert!(sols.iter().any(|a| a.index() == 2));
    }

    #[test]
    fn brute_force_unsat_instance_is_empty() {
        // All eight polarity patterns over {x0, x1, x2}: every assignment
        // falsifies exactly one clause.
        let mut clauses = Vec::new();
        for mask in 0..8 {
            clauses.push(
                Clause::new(
                    Literal { var: 0, negated: mask & 1 != 0 },
                    Literal { var: 1, negated: mask & 2 != 0 },
                    Literal { var: 2, negated: mask & 4 != 0 },
                )
                .unwrap(),
            );
        }
        let f = CnfFormula::new(3, clauses).unwrap();
        assert!(f.brute_force_solutions().unwrap().is_empty());
        assert_eq!(f.count_solutions_up_to(2).unwrap(), 0);
    }

    #[test]
    fn brute_force_respects_cap() {
        let clause = Clause::new(
            Literal::positive(0),
            Literal::positive(1),
            Literal::positive(2),
        )
        .unwrap();
        let f = CnfFormula::new(25, vec![clause]).unwrap();
        assert!(matches!(
            f.brute_force_solutions(),
            Err(FormulaError::TooManyVariables { num_vars: 25, cap: 24 })
        ));
    }

    #[test]
    fn generator_rounds_clause_count() {
        let f = generate_random(10, 4.3, false, 7).unwrap();
        assert_eq!(f.num_clauses(), 43);
        let f = generate_random(7, 4.55, false, 7).unwrap();
        assert_eq!(f.num_clauses(), 32); // round(31.85)
    }

    #[test]
    fn generator_is_deterministic() {
        let a = generate_random(9, 4.0, true, 123).unwrap();
        let b = generate_random(9, 4.0, true, 123).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn generator_unique_instances_have_one_solution() {
        for seed in 0..4 {
            let f = generate_random(7, 4.0, true, seed).unwrap();
            assert_eq!(f.brute_force_solutions().unwrap().len(), 1, "seed {seed}");
        }
    }

    #[test]
    fn generator_clauses_are_distinct_with_distinct_vars() {
        let f = generate_random(8, 4.3, false, 5).unwrap();
        let mut seen = HashSet::new();
        for clause in f.clauses() {
            let lits = clause.literals();
            assert_ne!(lits[0].var, lits[1].var);
            assert_ne!(lits[0].var, lits[2].var);
            assert_ne!(lits[1].var, lits[2].var);
            assert!(seen.insert(clause.canonical()));
        }
    }

    #[test]
    fn generator_rejects_bad_params() {
        assert!(generate_random(2, 4.0, false, 0).is_err());
        assert!(generate_random(5, 0.0, false, 0).is_err());
        assert!(generate_random(5, -1.0, false, 0).is_err());
    }

    #[test]
    fn generator_density_within_rounding_bound() {
        for &(n, d) in &[(7usize, 4.0f64), (10, 4.3), (13, 4.55), (20, 4.3)] {
            let f = generate_random(n, d, false, 11).unwrap();
            assert!((f.density() - d).abs() <= 0.5 / n as f64 + 1e-12);
        }
    }

    #[test]
    fn assignment_index_round_trip() {
        let a = Assignment::from_index(5, 22).unwrap();
        assert_eq!(a.bits(), &[false, true, true, false, true]);
        assert_eq!(a.index(), 22);
        assert!(Assignment::from_index(4, 16).is_err());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn bool_iff_count_equals_m(seed in 0u64..200, index in 0u64..128) {
                let f = generate_random(7, 4.0, false, seed).unwrap();
                let a = Assignment::from_index(7, index).unwrap();
                let sat = f.eval_bool(&a).unwrap();
                let count = f.eval_count(&a).unwrap();
                prop_assert_eq!(sat, count == f.num_clauses());
                prop_assert!(count <= f.num_clauses());
            }

            #[test]
            fn dimacs_round_trip(seed in 0u64..200) {
                let f = generate_random(9, 4.3, false, seed).unwrap();
                let text = emit_dimacs(&f, Some(seed));
                let parsed = parse_dimacs(&text).unwrap();
                prop_assert_eq!(parsed, f);
            }
        }
    }
}
