//! Max-3SAT clause polynomials and QUBO compilation.
//!
//! A clause maps to the 0/1-valued polynomial selected by its negation count
//! (after moving negated literals last):
//!
//! * 0 negations: `xi + xj + xk - xi*xj - xi*xk - xj*xk + xi*xj*xk`
//! * 1 negation:  `1 - xk + xi*xk + xj*xk - xi*xj*xk`
//! * 2 negations: `1 - xj*xk + xi*xj*xk`
//! * 3 negations: `1 - xi*xj*xk`
//!
//! Summing clause polynomials yields the satisfied-clause count; cubic terms
//! are then rewritten through auxiliary products `y_pq = x_p * x_q` with a
//! penalty block per auxiliary, giving a quadratic model in maximize sense.
//! Coefficients stay exact rationals until the sampler boundary.

use std::collections::BTreeMap;

use num_rational::Rational64;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{Clause, CnfFormula};

pub type Coeff = Rational64;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QuboError {
    #[error("polynomial degree {0} exceeds 3")]
    DegreeTooHigh(usize),
    #[error("bit vector has {got} entries, model has {expected} variables")]
    LengthMismatch { expected: usize, got: usize },
    #[error("penalty weight must be positive")]
    NonPositivePenalty,
    #[error("model text is malformed: {0}")]
    ParseError(String),
}

/// Multilinear pseudo-boolean polynomial with exact coefficients, keyed by
/// sorted variable sets (`x_i^2 = x_i` applied on insertion).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Polynomial {
    terms: BTreeMap<Vec<usize>, Coeff>,
}

impl Polynomial {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn constant(value: Coeff) -> Self {
        let mut p = Self::new();
        p.add_term(&[], value);
        p
    }

    /// Adds `coeff * prod(vars)`, merging repeats and dropping zeros.
    pub fn add_term(&mut self, vars: &[usize], coeff: Coeff) {
        use std::collections::btree_map::Entry;
        if coeff.is_zero() {
            return;
        }
        let mut key: Vec<usize> = vars.to_vec();
        key.sort_unstable();
        key.dedup();
        match self.terms.entry(key) {
            Entry::Occupied(mut e) => {
                *e.get_mut() += coeff;
                if e.get().is_zero() {
                    e.remove();
                }
            }
            Entry::Vacant(e) => {
                e.insert(coeff);
            }
        }
    }

    pub fn add(&mut self, other: &Polynomial) {
        for (vars, coeff) in &other.terms {
            self.add_term(vars, *coeff);
        }
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(Vec::len).max().unwrap_or(0)
    }

    pub fn coefficient(&self, vars: &[usize]) -> Coeff {
        let mut key = vars.to_vec();
        key.sort_unstable();
        key.dedup();
        self.terms.get(&key).copied().unwrap_or_else(Coeff::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[usize], Coeff)> {
        self.terms.iter().map(|(k, v)| (k.as_slice(), *v))
    }

    pub fn num_vars(&self) -> usize {
        self.terms
            .keys()
            .filter_map(|k| k.last())
            .max()
            .map_or(0, |v| v + 1)
    }

    pub fn eval(&self, bits: &[bool]) -> Coeff {
        let mut total = Coeff::zero();
        for (vars, coeff) in &self.terms {
            if vars.iter().all(|&v| bits[v]) {
                total += coeff;
            }
        }
        total
    }
}

/// 0/1-exact polynomial of a single clause.
pub fn clause_polynomial(clause: &Clause) -> Polynomial {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for lit in clause.literals() {
        if lit.negated {
            neg.push(lit.var);
        } else {
            pos.push(lit.var);
        }
    }
    let one = Coeff::one();
    let mut p = Polynomial::new();
    match (pos.as_slice(), neg.as_slice()) {
        ([i, j, k], []) => {
            p.add_term(&[*i], one);
            p.add_term(&[*j], one);
            p.add_term(&[*k], one);
            p.add_term(&[*i, *j], -one);
            p.add_term(&[*i, *k], -one);
            p.add_term(&[*j, *k], -one);
            p.add_term(&[*i, *j, *k], one);
        }
        ([i, j], [k]) => {
            p.add_term(&[], one);
            p.add_term(&[*k], -one);
            p.add_term(&[*i, *k], one);
            p.add_term(&[*j, *k], one);
            p.add_term(&[*i, *j, *k], -one);
        }
        ([i], [j, k]) => {
            p.add_term(&[], one);
            p.add_term(&[*j, *k], -one);
            p.add_term(&[*i, *j, *k], one);
        }
        ([], [i, j, k]) => {
            p.add_term(&[], one);
            p.add_term(&[*i, *j, *k], -one);
        }
        _ => unreachable!("clauses always hold exactly 3 literals"),
    }
    p
}

/// Sum of clause polynomials; equals the satisfied-clause count pointwise.
pub fn to_max3sat_poly(formula: &CnfFormula) -> Polynomial {
    let mut p = Polynomial::new();
    for clause in formula.clauses() {
        p.add(&clause_polynomial(clause));
    }
    p
}

/// Auxiliary product variable: column `index` stands for `x_pair.0 * x_pair.1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuxVar {
    pub index: usize,
    pub pair: (usize, usize),
}

/// Upper-triangular quadratic model in maximize sense over original plus
/// auxiliary boolean variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuboModel {
    num_original: usize,
    num_aux: usize,
    coeffs: BTreeMap<(usize, usize), Coeff>,
    offset: Coeff,
    aux_map: Vec<AuxVar>,
}

impl QuboModel {
    pub fn num_original(&self) -> usize {
        self.num_original
    }

    pub fn num_aux(&self) -> usize {
        self.num_aux
    }

    pub fn num_vars(&self) -> usize {
        self.num_original + self.num_aux
    }

    pub fn offset(&self) -> Coeff {
        self.offset
    }

    pub fn aux_map(&self) -> &[AuxVar] {
        &self.aux_map
    }

    /// Nonzero upper-triangular coefficients, ascending by (i, j).
    pub fn coefficients(&self) -> impl Iterator<Item = ((usize, usize), Coeff)> + '_ {
        self.coeffs.iter().map(|(&k, &v)| (k, v))
    }

    /// Coefficient of `x_i * x_j`, folding (j, i) onto (i, j).
    pub fn coefficient(&self, i: usize, j: usize) -> Coeff {
        let key = if i <= j { (i, j) } else { (j, i) };
        self.coeffs.get(&key).copied().unwrap_or_else(Coeff::zero)
    }

    /// `offset + sum_{i <= j} q_ij * bits_i * bits_j`.
    pub fn eval(&self, bits: &[bool]) -> Result<Coeff, QuboError> {
        if bits.len() != self.num_vars() {
            return Err(QuboError::LengthMismatch {
                expected: self.num_vars(),
                got: bits.len(),
            });
        }
        let mut total = self.offset;
        for (&(i, j), &coeff) in &self.coeffs {
            if bits[i] && bits[j] {
                total += coeff;
            }
        }
        Ok(total)
    }

    /// Line-oriented text form: `offset <value>`, one `aux <k> <i> <j>` line
    /// per auxiliary and one `i j coeff` line per nonzero coefficient.
    pub fn to_text(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "c qubo original={} aux={} sense=max",
            self.num_original, self.num_aux
        );
        let _ = writeln!(out, "offset {}", self.offset);
        for aux in &self.aux_map {
            let _ = writeln!(out, "aux {} {} {}", aux.index, aux.pair.0, aux.pair.1);
        }
        for (&(i, j), coeff) in &self.coeffs {
            let _ = writeln!(out, "{i} {j} {coeff}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, QuboError> {
        let mut offset = Coeff::zero();
        let mut aux_map = Vec::new();
        let mut coeffs = BTreeMap::new();
        let mut declared_original: Option<usize> = None;
        let mut max_index = 0usize;
        let parse_coeff = |s: &str| -> Result<Coeff, QuboError> {
            s.parse::<Coeff>()
                .map_err(|_| QuboError::ParseError(format!("bad coefficient {s}")))
        };
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields[0] {
                "c" => {
                    for field in &fields[1..] {
                        if let Some(value) = field.strip_prefix("original=") {
                            declared_original = value.parse().ok();
                        }
                    }
                }
                "offset" => {
                    if fields.len() != 2 {
                        return Err(QuboError::ParseError(line.into()));
                    }
                    offset = parse_coeff(fields[1])?;
                }
                "aux" => {
                    if fields.len() != 4 {
                        return Err(QuboError::ParseError(line.into()));
                    }
                    let nums: Vec<usize> = fields[1..]
                        .iter()
                        .map(|s| s.parse().map_err(|_| QuboError::ParseError(line.into())))
                        .collect::<Result<_, _>>()?;
                    aux_map.push(AuxVar { index: nums[0], pair: (nums[1], nums[2]) });
                    max_index = max_index.max(nums[0] + 1);
                }
                _ => {
                    if fields.len() != 3 {
                        return Err(QuboError::ParseError(line.into()));
                    }
                    let i: usize = fields[0]
                        .parse()
                        .map_err(|_| QuboError::ParseError(line.into()))?;
                    let j: usize = fields[1]
                        .parse()
                        .map_err(|_| QuboError::ParseError(line.into()))?;
                    if i > j {
                        return Err(QuboError::ParseError(format!("not upper-triangular: {line}")));
                    }
                    coeffs.insert((i, j), parse_coeff(fields[2])?);
                    max_index = max_index.max(j + 1);
                }
            }
        }
        let num_aux = aux_map.len();
        let num_original = declared_original.unwrap_or_else(|| max_index.saturating_sub(num_aux));
        Ok(QuboModel { num_original, num_aux, coeffs, offset, aux_map })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&QuboJson::from(self)).expect("qubo serialization")
    }

    pub fn from_json(text: &str) -> Result<Self, QuboError> {
        let raw: QuboJson =
            serde_json::from_str(text).map_err(|e| QuboError::ParseError(e.to_string()))?;
        raw.try_into()
    }
}

/// Stable JSON mirror of [`QuboModel`]; rationals as (numerator, denominator).
#[derive(Serialize, Deserialize)]
struct QuboJson {
    num_original: usize,
    num_aux: usize,
    sense: String,
    offset: (i64, i64),
    coeffs: Vec<(usize, usize, i64, i64)>,
    aux_map: Vec<(usize, usize, usize)>,
}

impl From<&QuboModel> for QuboJson {
    fn from(model: &QuboModel) -> Self {
        QuboJson {
            num_original: model.num_original,
            num_aux: model.num_aux,
            sense: "maximize".into(),
            offset: (*model.offset.numer(), *model.offset.denom()),
            coeffs: model
                .coeffs
                .iter()
                .map(|(&(i, j), c)| (i, j, *c.numer(), *c.denom()))
                .collect(),
            aux_map: model
                .aux_map
                .iter()
                .map(|a| (a.index, a.pair.0, a.pair.1))
                .collect(),
        }
    }
}

impl TryFrom<QuboJson> for QuboModel {
    type Error = QuboError;

    fn try_from(raw: QuboJson) -> Result<Self, QuboError> {
        let mut coeffs = BTreeMap::new();
        for (i, j, n, d) in raw.coeffs {
            if i > j || d == 0 {
                return Err(QuboError::ParseError(format!("bad entry ({i},{j},{n},{d})")));
            }
            coeffs.insert((i, j), Coeff::new(n, d));
        }
        if raw.offset.1 == 0 {
            return Err(QuboError::ParseError("zero denominator offset".into()));
        }
        Ok(QuboModel {
            num_original: raw.num_original,
            num_aux: raw.num_aux,
            coeffs,
            offset: Coeff::new(raw.offset.0, raw.offset.1),
            aux_map: raw
                .aux_map
                .into_iter()
                .map(|(index, i, j)| AuxVar { index, pair: (i, j) })
                .collect(),
        })
    }
}

fn pairs_of(term: &[usize; 3]) -> [(usize, usize); 3] {
    [(term[0], term[1]), (term[0], term[2]), (term[1], term[2])]
}

fn third_of(term: &[usize; 3], pair: (usize, usize)) -> usize {
    term.iter()
        .copied()
        .find(|v| *v != pair.0 && *v != pair.1)
        .expect("cubic term has a third variable")
}

/// Rewrites cubic terms of `poly` through shared auxiliary products and adds
/// a `-M(x_p x_q - 2 x_p y - 2 x_q y + 3 y)` block per auxiliary. Pairs are
/// picked greedily by how many unresolved cubic terms they appear in, ties
/// to the lexicographically smallest pair.
///
/// An auxiliary absorbs at most `M` of positive and `M` of negative cubic
/// weight; beyond that a term falls to another of its pairs. The cap keeps
/// a single penalty block dominant over everything routed through it, so
/// for any assignment of the original variables the consistent completion
/// `y_pq = x_p * x_q` attains the maximum over auxiliary bits and the model
/// maximum equals the polynomial maximum.
pub fn reduce_cubics(poly: &Polynomial, penalty: Coeff) -> Result<QuboModel, QuboError> {
    reduce_cubics_over(poly, penalty, poly.num_vars())
}

type Pair = (usize, usize);
type Term = [usize; 3];

/// Routes cubic weight onto auxiliary pairs under a per-pair, per-sign
/// capacity. Greedy placement can strand weight whose pairs were saturated
/// by other terms first, so placement falls back to augmenting relocations
/// (this is a small transportation problem).
struct PairAssigner {
    cap: Coeff,
    /// Absolute weight placed per (pair, sign) and term.
    placed: BTreeMap<(Pair, bool), BTreeMap<Term, Coeff>>,
    loads: BTreeMap<(Pair, bool), Coeff>,
    /// Pairs in order of first placement; defines auxiliary numbering.
    order: Vec<Pair>,
}

impl PairAssigner {
    fn new(cap: Coeff) -> Self {
        PairAssigner {
            cap,
            placed: BTreeMap::new(),
            loads: BTreeMap::new(),
            order: Vec::new(),
        }
    }

    fn load(&self, pair: Pair, positive: bool) -> Coeff {
        self.loads.get(&(pair, positive)).copied().unwrap_or_else(Coeff::zero)
    }

    fn spare(&self, pair: Pair, positive: bool) -> Coeff {
        let spare = self.cap - self.load(pair, positive);
        spare.max(Coeff::zero())
    }

    fn place(&mut self, term: Term, pair: Pair, positive: bool, amount: Coeff) {
        if amount.is_zero() {
            return;
        }
        if !self.order.contains(&pair) {
            self.order.push(pair);
        }
        *self.loads.entry((pair, positive)).or_insert_with(Coeff::zero) += amount;
        *self
            .placed
            .entry((pair, positive))
            .or_default()
            .entry(term)
            .or_insert_with(Coeff::zero) += amount;
    }

    fn unplace(&mut self, term: Term, pair: Pair, positive: bool, amount: Coeff) {
        let load = self.loads.get_mut(&(pair, positive)).expect("load exists");
        *load -= amount;
        let bucket = self.placed.get_mut(&(pair, positive)).expect("bucket exists");
        let w = bucket.get_mut(&term).expect("placement exists");
        *w -= amount;
        if w.is_zero() {
            bucket.remove(&term);
        }
    }

    /// Frees up to `needed` capacity on (pair, sign) by relocating other
    /// terms' weight to their alternative pairs, recursively. Returns the
    /// spare capacity afterwards (at most `needed`).
    fn ensure_capacity(
        &mut self,
        pair: Pair,
        positive: bool,
        needed: Coeff,
        visited: &mut Vec<Pair>,
    ) -> Coeff {
        let mut available = self.spare(pair, positive);
        if available >= needed {
            return needed;
        }
        let snapshot: Vec<(Term, Coeff)> = self
            .placed
            .get(&(pair, positive))
            .map(|b| b.iter().map(|(t, w)| (*t, *w)).collect())
            .unwrap_or_default();
        'terms: for (term, mut movable) in snapshot {
            for alternative in pairs_of(&term) {
                if alternative == pair || visited.contains(&alternative) {
                    continue;
                }
                visited.push(alternative);
                let want = (needed - available).min(movable);
                let moved = self.ensure_capacity(alternative, positive, want, visited);
                if moved > Coeff::zero() {
                    self.unplace(term, pair, positive, moved);
                    self.place(term, alternative, positive, moved);
                    movable -= moved;
                    available += moved;
                }
                if available >= needed {
                    break 'terms;
                }
                if movable.is_zero() {
                    continue 'terms;
                }
            }
        }
        available.min(needed)
    }

    /// Places `weight` of `term` across its pairs, relocating earlier
    /// placements when direct capacity is exhausted. Returns the residual
    /// that found no capacity anywhere.
    fn place_term(&mut self, term: Term, positive: bool, mut weight: Coeff) -> Coeff {
        for pair in pairs_of(&term) {
            if weight.is_zero() {
                return weight;
            }
            let chunk = weight.min(self.spare(pair, positive));
            if chunk > Coeff::zero() {
                self.place(term, pair, positive, chunk);
                weight -= chunk;
            }
        }
        for pair in pairs_of(&term) {
            if weight.is_zero() {
                return weight;
            }
            let mut visited = vec![pair];
            let freed = self.ensure_capacity(pair, positive, weight, &mut visited);
            if freed > Coeff::zero() {
                self.place(term, pair, positive, freed);
                weight -= freed;
            }
        }
        weight
    }
}

/// Routes all cubic weight of `cubics` onto pairs under capacity `cap`,
/// returning the assignment when it fits.
fn assign_cubics(cubics: &BTreeMap<Term, Coeff>, cap: Coeff) -> Option<PairAssigner> {
    let mut remaining = cubics.clone();
    let mut assigner = PairAssigner::new(cap);

    // Greedy sharing phase: repeatedly pick the pair covering the most
    // unresolved terms and absorb as much of their weight as its capacity
    // allows.
    loop {
        let mut freq: BTreeMap<Pair, usize> = BTreeMap::new();
        for term in remaining.keys() {
            for pair in pairs_of(term) {
                if !assigner.order.contains(&pair) {
                    *freq.entry(pair).or_insert(0) += 1;
                }
            }
        }
        if freq.is_empty() {
            break;
        }
        // BTreeMap iterates in ascending key order, so keeping strict maxima
        // resolves ties to the smallest pair.
        let (pair, _) = freq.iter().fold(((0, 0), 0usize), |acc, (&pair, &count)| {
            if count > acc.1 {
                (pair, count)
            } else {
                acc
            }
        });
        let candidates: Vec<(Term, Coeff)> = remaining
            .iter()
            .filter(|(t, _)| t.contains(&pair.0) && t.contains(&pair.1))
            .map(|(t, w)| (*t, *w))
            .collect();
        let mut placed_any = false;
        for (term, weight) in candidates {
            let positive = weight.is_positive();
            let chunk = weight.abs().min(assigner.spare(pair, positive));
            if chunk.is_zero() {
                continue;
            }
            assigner.place(term, pair, positive, chunk);
            placed_any = true;
            let left = weight.abs() - chunk;
            if left.is_zero() {
                remaining.remove(&term);
            } else {
                remaining.insert(term, if positive { left } else { -left });
            }
        }
        if !placed_any {
            // Pair chosen but nothing fits; mark it used so the loop moves
            // on (pairs without placements never become auxiliaries).
            assigner.order.push(pair);
        }
    }

    // Repair phase for weight whose candidate pairs all saturated.
    let leftovers: Vec<(Term, Coeff)> = remaining.iter().map(|(t, c)| (*t, *c)).collect();
    for (term, weight) in leftovers {
        let residual = assigner.place_term(term, weight.is_positive(), weight.abs());
        if !residual.is_zero() {
            return None;
        }
    }
    Some(assigner)
}

pub fn reduce_cubics_over(
    poly: &Polynomial,
    penalty: Coeff,
    num_original: usize,
) -> Result<QuboModel, QuboError> {
    if poly.degree() > 3 {
        return Err(QuboError::DegreeTooHigh(poly.degree()));
    }
    if !penalty.is_positive() {
        return Err(QuboError::NonPositivePenalty);
    }
    let num_original = num_original.max(poly.num_vars());

    let cubics: BTreeMap<Term, Coeff> = poly
        .terms()
        .filter(|(vars, _)| vars.len() == 3)
        .map(|(vars, coeff)| ([vars[0], vars[1], vars[2]], coeff))
        .collect();

    // Dense instances occasionally carry more same-sign cubic weight than
    // their pairs can hold at the requested weight (stacked clauses on few
    // variable triples); the smallest sufficient multiple keeps the
    // reduction exact.
    let total_weight: Coeff = cubics.values().map(|c| c.abs()).sum();
    let base = penalty;
    let mut penalty = penalty;
    let assigner = loop {
        if let Some(assigner) = assign_cubics(&cubics, penalty) {
            break assigner;
        }
        assert!(penalty <= total_weight, "capacity escalation failed to converge");
        penalty += base;
    };

    let mut coeffs: BTreeMap<(usize, usize), Coeff> = BTreeMap::new();
    let mut offset = Coeff::zero();
    let upsert = |key: (usize, usize), value: Coeff, map: &mut BTreeMap<_, Coeff>| {
        if value.is_zero() {
            return;
        }
        let entry = map.entry(key).or_insert_with(Coeff::zero);
        *entry += value;
        if entry.is_zero() {
            map.remove(&key);
        }
    };

    for (vars, coeff) in poly.terms() {
        match vars {
            [] => offset += coeff,
            [i] => upsert((*i, *i), coeff, &mut coeffs),
            [i, j] => upsert((*i, *j), coeff, &mut coeffs),
            _ => {}
        }
    }

    // Auxiliaries in first-placement order, skipping pairs that ended up
    // with no routed weight.
    let live_pairs: Vec<Pair> = assigner
        .order
        .iter()
        .copied()
        .filter(|&p| {
            assigner.load(p, true) > Coeff::zero() || assigner.load(p, false) > Coeff::zero()
        })
        .collect();
    let mut aux_map = Vec::with_capacity(live_pairs.len());
    let two = Coeff::from_integer(2);
    let three = Coeff::from_integer(3);
    for (slot, &pair) in live_pairs.iter().enumerate() {
        let y = num_original + slot;
        aux_map.push(AuxVar { index: y, pair });
        upsert((pair.0, pair.1), -penalty, &mut coeffs);
        upsert((pair.0, y), two * penalty, &mut coeffs);
        upsert((pair.1, y), two * penalty, &mut coeffs);
        upsert((y, y), -three * penalty, &mut coeffs);
        for positive in [true, false] {
            if let Some(bucket) = assigner.placed.get(&(pair, positive)) {
                for (term, w) in bucket {
                    let signed = if positive { *w } else { -*w };
                    upsert((third_of(term, pair), y), signed, &mut coeffs);
                }
            }
        }
    }

    Ok(QuboModel {
        num_original,
        num_aux: aux_map.len(),
        coeffs,
        offset,
        aux_map,
    })
}

/// Full pipeline with unit penalty weight: clause polynomials, summation,
/// cubic reduction.
pub fn compile(formula: &CnfFormula) -> Result<QuboModel, QuboError> {
    compile_with_penalty(formula, Coeff::one())
}

pub fn compile_with_penalty(
    formula: &CnfFormula,
    penalty: Coeff,
) -> Result<QuboModel, QuboError> {
    reduce_cubics_over(&to_max3sat_poly(formula), penalty, formula.num_vars())
}
