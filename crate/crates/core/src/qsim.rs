//! Exact statevector simulation of the two search circuits at small qubit
//! counts: the biased-superposition (Hamming) search and the cyclical-range
//! search with its gate-level range splitter and incrementer cascade.
//!
//! Reflections about the prepared state are applied as rank-1 updates; the
//! incrementer and range splitter are built gate by gate.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use num_complex::Complex64;
use thiserror::Error;

use crate::formula::{Assignment, CnfFormula, FormulaError};

/// Largest register simulated by the search entry points.
pub const QUBIT_CAP: usize = 20;

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("bias parameter {0} is below 1")]
    AlphaOutOfRange(f64),
    #[error("{n} qubits exceeds the simulator cap of {cap}")]
    QubitCapExceeded { n: usize, cap: usize },
    #[error("oracle holds {0} solutions, need exactly 1")]
    SolutionCountNotOne(usize),
    #[error("increment slice is empty")]
    EmptySlice,
    #[error("invalid range parameters: {0}")]
    BadRange(String),
    #[error("basis index {index} out of range for {n} qubits")]
    IndexOutOfRange { index: u64, n: usize },
    #[error(transparent)]
    Formula(#[from] FormulaError),
}

/// Sign-flip oracle over a set of solution basis states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Oracle {
    solutions: BTreeSet<u64>,
}

impl Oracle {
    pub fn from_solutions<I: IntoIterator<Item = u64>>(solutions: I) -> Self {
        Oracle { solutions: solutions.into_iter().collect() }
    }

    pub fn single(solution: u64) -> Self {
        Self::from_solutions([solution])
    }

    /// Oracle over the brute-force solution set of `formula`.
    pub fn from_formula(formula: &CnfFormula) -> Result<Self, SimError> {
        let solutions = formula.brute_force_solutions()?;
        Ok(Self::from_solutions(solutions.iter().map(Assignment::index)))
    }

    pub fn solutions(&self) -> impl Iterator<Item = u64> + '_ {
        self.solutions.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.solutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solutions.is_empty()
    }

    fn only_solution(&self) -> Result<u64, SimError> {
        if self.solutions.len() != 1 {
            return Err(SimError::SolutionCountNotOne(self.solutions.len()));
        }
        Ok(*self.solutions.iter().next().expect("one solution"))
    }
}

/// Complex amplitudes over the `2^n` basis states of an `n`-qubit register.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn zero(n: usize) -> Result<Self, SimError> {
        Self::basis(n, 0)
    }

    pub fn basis(n: usize, index: u64) -> Result<Self, SimError> {
        if n == 0 || n > QUBIT_CAP {
            return Err(SimError::QubitCapExceeded { n, cap: QUBIT_CAP });
        }
        if index >> n != 0 {
            return Err(SimError::IndexOutOfRange { index, n });
        }
        let mut amps = vec![Complex64::ZERO; 1 << n];
        amps[index as usize] = Complex64::ONE;
        Ok(StateVector { n, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn probability(&self, index: u64) -> f64 {
        self.amps[index as usize].norm_sqr()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(Complex64::norm_sqr).sum()
    }

    fn apply_single_qubit(&mut self, qubit: usize, m: [[f64; 2]; 2]) {
        let stride = 1usize << qubit;
        let size = self.amps.len();
        let mut base = 0;
        while base < size {
            for low in base..base + stride {
                let a = self.amps[low];
                let b = self.amps[low + stride];
                self.amps[low] = m[0][0] * a + m[0][1] * b;
                self.amps[low + stride] = m[1][0] * a + m[1][1] * b;
            }
            base += stride << 1;
        }
    }

    /// Applies the one-qubit bias gate
    /// `[[sqrt(1-1/alpha), sqrt(1/alpha)], [sqrt(1/alpha), -sqrt(1-1/alpha)]]`
    /// to every qubit; `alpha = 2` is the plain Hadamard.
    pub fn apply_biased_hadamard(&mut self, alpha: f64) -> Result<(), SimError> {
        if alpha < 1.0 || alpha.is_nan() {
            return Err(SimError::AlphaOutOfRange(alpha));
        }
        let flip = (1.0 / alpha).sqrt();
        let stay = (1.0 - 1.0 / alpha).sqrt();
        let m = [[stay, flip], [flip, -stay]];
        for qubit in 0..self.n {
            self.apply_single_qubit(qubit, m);
        }
        Ok(())
    }

    pub fn apply_hadamard(&mut self, qubit: usize) {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        self.apply_single_qubit(qubit, [[h, h], [h, -h]]);
    }

    /// Flips the sign of every solution amplitude.
    pub fn apply_oracle(&mut self, oracle: &Oracle) {
        for solution in oracle.solutions() {
            let index = solution as usize;
            if index < self.amps.len() {
                self.amps[index] = -self.amps[index];
            }
        }
    }

    /// Rank-1 reflection `2 |axis><axis| - I` about the normalized axis.
    /// The projection is divided by the axis norm and both accumulate with
    /// compensated summation: the axis carries gate rounding of order 1e-16
    /// in its norm, and without the correction the axis component scales by
    /// (1 + 2e-16) per application, drifting past 1e-10 over the ~1e5
    /// reflections the worst tuning mismatches need.
    pub fn reflect_about(&mut self, axis: &StateVector) {
        debug_assert_eq!(self.n, axis.n);
        let mut dot = Complex64::ZERO;
        let mut dot_carry = Complex64::ZERO;
        let mut norm2 = 0f64;
        let mut norm_carry = 0f64;
        for (a, b) in axis.amps.iter().zip(&self.amps) {
            let term = a.conj() * b - dot_carry;
            let bumped = dot + term;
            dot_carry = (bumped - dot) - term;
            dot = bumped;

            let term = a.norm_sqr() - norm_carry;
            let bumped = norm2 + term;
            norm_carry = (bumped - norm2) - term;
            norm2 = bumped;
        }
        let scale = 2.0 * dot / norm2;
        for (amp, a) in self.amps.iter_mut().zip(&axis.amps) {
            *amp = scale * a - *amp;
        }
    }

    /// Multi-controlled X: flips `target` on states where every control is 1.
    fn apply_mcx(&mut self, controls: std::ops::Range<usize>, target: usize) {
        let mut cmask = 0usize;
        for q in controls {
            cmask |= 1 << q;
        }
        let tbit = 1usize << target;
        for index in 0..self.amps.len() {
            if index & cmask == cmask && index & tbit == 0 {
                self.amps.swap(index, index | tbit);
            }
        }
    }

    /// Adds one to the register formed by qubits `low..n` (a `+2^low mod 2^n`
    /// on the full index), built as the cascade of multi-controlled flips of
    /// the incrementer circuit.
    pub fn increment(&mut self, low: usize) -> Result<(), SimError> {
        if low >= self.n {
            return Err(SimError::EmptySlice);
        }
        for target in (low + 1..self.n).rev() {
            self.apply_mcx(low..target, target);
        }
        self.apply_mcx(low..low, low); // unconditional flip of the slice LSB
        Ok(())
    }

    /// Displacement by `amount mod 2^n`: one increment per set bit, least
    /// significant first.
    pub fn displace(&mut self, amount: u64) {
        let amount = amount & ((1u64 << self.n) - 1);
        for bit in 0..self.n {
            if (amount >> bit) & 1 == 1 {
                self.increment(bit).expect("bit below register size");
            }
        }
    }

    /// `index,probability` CSV of the full distribution.
    pub fn probabilities_csv(&self) -> String {
        let mut out = String::from("index,probability\n");
        for (index, amp) in self.amps.iter().enumerate() {
            let _ = writeln!(out, "{index},{}", amp.norm_sqr());
        }
        out
    }
}

/// Gate-level preparation of the `segment`-th ring segment of `2^r` states
/// around `center`: Hadamards on the low `r` qubits, a controlled write of
/// the segment number onto the high qubits, then the per-bit displacement
/// `center - (segment + 1) * 2^(r-1) + 1 mod 2^n`.
pub fn range_splitter(
    n: usize,
    r: usize,
    segment: u64,
    center: u64,
) -> Result<StateVector, SimError> {
    if r < 1 || r > n {
        return Err(SimError::BadRange(format!("r = {r} outside 1..={n}")));
    }
    if segment >> (n - r) != 0 {
        return Err(SimError::BadRange(format!(
            "segment {segment} does not fit in {} qubits",
            n - r
        )));
    }
    if center >> n != 0 {
        return Err(SimError::IndexOutOfRange { index: center, n });
    }
    let mut state = StateVector::zero(n)?;
    for qubit in 0..r {
        state.apply_hadamard(qubit);
    }
    // Shift the upper half of the superposed block by segment * 2^r: write
    // the segment bits onto the high qubits, controlled on qubit r - 1.
    for bit in 0..n - r {
        if (segment >> bit) & 1 == 1 {
            state.apply_mcx(r - 1..r, r + bit);
        }
    }
    let size = 1u64 << n;
    let displacement = (center + size + 1 - (segment + 1) * (1u64 << (r - 1))) % size;
    state.displace(displacement);
    Ok(state)
}

fn check_cap(n: usize) -> Result<(), SimError> {
    if n > QUBIT_CAP {
        return Err(SimError::QubitCapExceeded { n, cap: QUBIT_CAP });
    }
    Ok(())
}

/// Runs the Hamming search: prepares the biased superposition around
/// `start` with `alpha = n / k`, iterates `rounds` times (oracle then
/// reflection about the prepared state) and returns the probability of
/// measuring the oracle's single solution.
pub fn grover_hamming(
    start: &Assignment,
    oracle: &Oracle,
    k: u32,
    rounds: u64,
) -> Result<f64, SimError> {
    let n = start.len();
    check_cap(n)?;
    let target = oracle.only_solution()?;
    if target >> n != 0 {
        return Err(SimError::IndexOutOfRange { index: target, n });
    }
    if k == 0 {
        return Err(SimError::AlphaOutOfRange(f64::INFINITY));
    }
    let mut prepared = StateVector::basis(n, start.index())?;
    prepared.apply_biased_hadamard(n as f64 / k as f64)?;
    let mut state = prepared.clone();
    for _ in 0..rounds {
        state.apply_oracle(oracle);
        state.reflect_about(&prepared);
    }
    Ok(state.probability(target))
}

/// Runs the cyclical search on one ring segment, returning the probability
/// of the oracle's single solution (zero when it lies outside the segment).
pub fn grover_cyclical(
    center: u64,
    oracle: &Oracle,
    n: usize,
    r: usize,
    segment: u64,
    rounds: u64,
) -> Result<f64, SimError> {
    check_cap(n)?;
    let target = oracle.only_solution()?;
    if target >> n != 0 {
        return Err(SimError::IndexOutOfRange { index: target, n });
    }
    let prepared = range_splitter(n, r, segment, center)?;
    let mut state = prepared.clone();
    for _ in 0..rounds {
        state.apply_oracle(oracle);
        state.reflect_about(&prepared);
    }
    Ok(state.probability(target))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{hamming_amplitude, hamming_iterations};
    use crate::metrics::hamming;
    use approx::assert_relative_eq;

    fn basis_of(state: &StateVector) -> Option<u64> {
        let mut hits = state
            .amps
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm_sqr() > 1e-9);
        let (index, amp) = hits.next()?;
        if hits.next().is_some() || (amp.norm_sqr() - 1.0).abs() > 1e-9 {
            return None;
        }
        Some(index as u64)
    }

    #[test]
    fn bias_two_is_plain_hadamard() {
        let mut state = StateVector::zero(4).unwrap();
        state.apply_biased_hadamard(2.0).unwrap();
        for amp in state.amplitudes() {
            assert_relative_eq!(amp.re, 0.25, epsilon = 1e-12);
            assert_relative_eq!(amp.im, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn bias_one_flips_every_bit() {
        let mut state = StateVector::basis(5, 13).unwrap();
        state.apply_biased_hadamard(1.0).unwrap();
        assert_eq!(basis_of(&state), Some(31 ^ 13));
    }

    #[test]
    fn bias_below_one_is_rejected() {
        let mut state = StateVector::zero(2).unwrap();
        assert!(matches!(
            state.apply_biased_hadamard(0.5),
            Err(SimError::AlphaOutOfRange(_))
        ));
    }

    #[test]
    fn prepared_amplitudes_match_closed_form() {
        for n in [4usize, 7, 10] {
            let start_index = ((1u64 << n) / 3) & ((1 << n) - 1);
            let start = Assignment::from_index(n, start_index).unwrap();
            for k in 1..=n as u32 {
                let mut state = StateVector::basis(n, start_index).unwrap();
                state.apply_biased_hadamard(n as f64 / k as f64).unwrap();
                for target in 0..1u64 << n {
                    let other = Assignment::from_index(n, target).unwrap();
                    let distance = hamming(&start, &other).unwrap();
                    let expected = hamming_amplitude(n as u32, k, distance);
                    assert!(
                        (state.amplitudes()[target as usize].norm() - expected).abs() <= 1e-12,
                        "n {n} k {k} target {target}"
                    );
                }
            }
        }
    }

    #[test]
    fn oracle_is_a_sign_involution() {
        let mut state = StateVector::zero(3).unwrap();
        state.apply_biased_hadamard(2.0).unwrap();
        let oracle = Oracle::from_solutions([5u64]);
        let before = state.clone();
        state.apply_oracle(&oracle);
        assert!(state.amplitudes()[5].re < 0.0);
        let negatives = state.amplitudes().iter().filter(|a| a.re < 0.0).count();
        assert_eq!(negatives, 1);
        state.apply_oracle(&oracle);
        assert_eq!(state, before);
        // Empty oracle is the identity.
        let empty = Oracle::from_solutions([]);
        state.apply_oracle(&empty);
        assert_eq!(state, before);
    }

    #[test]
    fn oracle_from_formula_collects_solutions() {
        let f = crate::formula::parse_dimacs("p cnf 3 1\n1 2 3 0\n").unwrap();
        let oracle = Oracle::from_formula(&f).unwrap();
        assert_eq!(oracle.len(), 7);
        assert!(oracle.solutions().all(|s| s != 0));
    }

    #[test]
    fn search_probability_t0_is_squared_amplitude() {
        let n = 6usize;
        let start = Assignment::from_index(n, 9).unwrap();
        for (k, distance) in [(1u32, 2u32), (3, 1), (2, 4)] {
            let target = 9 ^ ((1u64 << distance) - 1);
            let oracle = Oracle::single(target);
            let p = grover_hamming(&start, &oracle, k, 0).unwrap();
            let amp = hamming_amplitude(n as u32, k, distance);
            assert_relative_eq!(p, amp * amp, epsilon = 1e-12);
        }
    }

    #[test]
    fn search_hits_closed_form_at_tuned_round_count() {
        let n = 6usize;
        let start = Assignment::from_index(n, 22).unwrap();
        for distance in 1..=n as u32 {
            let target = 22 ^ ((1u64 << distance) - 1);
            let oracle = Oracle::single(target);
            let (_, rounds) = hamming_iterations(n as u32, distance, distance).unwrap();
            let p = grover_hamming(&start, &oracle, distance, rounds).unwrap();
            let theta = hamming_amplitude(n as u32, distance, distance).asin();
            let expected = ((2 * rounds + 1) as f64 * theta).sin().powi(2);
            assert_relative_eq!(p, expected, epsilon = 1e-10);
        }
    }

    #[test]
    fn antipodal_concentration_is_certain() {
        let n = 5usize;
        let start = Assignment::from_index(n, 6).unwrap();
        let oracle = Oracle::single(6 ^ 31);
        let p = grover_hamming(&start, &oracle, n as u32, 0).unwrap();
        assert_relative_eq!(p, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn search_demands_single_solution() {
        let start = Assignment::from_index(4, 0).unwrap();
        let oracle = Oracle::from_solutions([1u64, 2]);
        assert!(matches!(
            grover_hamming(&start, &oracle, 1, 1),
            Err(SimError::SolutionCountNotOne(2))
        ));
    }

    #[test]
    fn increment_wraps_full_register() {
        let mut state = StateVector::basis(5, 31).unwrap();
        state.increment(0).unwrap();
        assert_eq!(basis_of(&state), Some(0));
    }

    #[test]
    fn increment_on_high_slice_adds_power_of_two() {
        let mut state = StateVector::basis(5, 14).unwrap();
        state.increment(2).unwrap();
        assert_eq!(basis_of(&state), Some(18));
        // Carry out of the slice is dropped.
        let mut state = StateVector::basis(5, 29).unwrap();
        state.increment(2).unwrap();
        assert_eq!(basis_of(&state), Some(1));
    }

    #[test]
    fn increment_rejects_empty_slice() {
        let mut state = StateVector::zero(3).unwrap();
        assert_eq!(state.increment(3).unwrap_err(), SimError::EmptySlice);
    }

    #[test]
    fn displacement_worked_example() {
        let mut state = StateVector::basis(5, 13).unwrap();
        state.displace(5);
        assert_eq!(basis_of(&state), Some(18));
    }

    #[test]
    fn displacement_is_a_permutation() {
        let mut state = StateVector::zero(4).unwrap();
        state.apply_biased_hadamard(2.0).unwrap();
        state.apply_oracle(&Oracle::single(7));
        let sorted_norms = |s: &StateVector| {
            let mut v: Vec<i64> = s
                .amplitudes()
                .iter()
                .map(|a| (a.re.signum() * a.norm() * 1e12).round() as i64)
                .collect();
            v.sort();
            v
        };
        let before = sorted_norms(&state);
        state.displace(11);
        assert_eq!(sorted_norms(&state), before);
        assert_relative_eq!(state.norm_sqr(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn range_splitter_first_segment_covers_center_window() {
        let state = range_splitter(5, 3, 0, 10).unwrap();
        let expected = 2f64.powf(-1.5);
        for index in 0..32u64 {
            let amp = state.amplitudes()[index as usize];
            if (7..=14).contains(&index) {
                assert_relative_eq!(amp.re, expected, epsilon = 1e-12);
            } else {
                assert_relative_eq!(amp.norm(), 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn range_splitter_segments_tile_the_ring() {
        let mut seen = BTreeSet::new();
        for segment in 0..4u64 {
            let state = range_splitter(5, 3, segment, 10).unwrap();
            for (index, amp) in state.amplitudes().iter().enumerate() {
                if amp.norm_sqr() > 1e-12 {
                    assert!(seen.insert(index), "segment {segment} repeats {index}");
                }
            }
        }
        assert_eq!(seen.len(), 32);
    }

    #[test]
    fn range_splitter_full_width_is_uniform() {
        let state = range_splitter(4, 4, 0, 0).unwrap();
        for amp in state.amplitudes() {
            assert_relative_eq!(amp.re, 0.25, epsilon = 1e-12);
        }
    }

    #[test]
    fn range_splitter_matches_direct_window_construction() {
        // Ring-window membership computed arithmetically, independent of
        // the gate cascade.
        fn in_windows(n: usize, r: usize, segment: u64, center: u64, index: u64) -> bool {
            let size = 1u64 << n;
            let half = 1u64 << (r - 1);
            let up = (index + size - center) % size;
            let down = (center + size - index) % size;
            (up > segment * half && up <= (segment + 1) * half)
                || (down >= segment * half && down < (segment + 1) * half)
        }

        for n in 2..=8usize {
            let size = 1u64 << n;
            for r in 1..=n {
                let uniform = 2f64.powf(-(r as f64) / 2.0);
                for segment in 0..1u64 << (n - r) {
                    for center in 0..size {
                        let state = range_splitter(n, r, segment, center).unwrap();
                        for index in 0..size {
                            let amp = state.amplitudes()[index as usize];
                            let expected = if in_windows(n, r, segment, center, index) {
                                uniform
                            } else {
                                0.0
                            };
                            assert!(
                                (amp.re - expected).abs() < 1e-10 && amp.im.abs() < 1e-12,
                                "n {n} r {r} segment {segment} center {center} index {index}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn range_splitter_rejects_bad_parameters() {
        assert!(range_splitter(5, 0, 0, 0).is_err());
        assert!(range_splitter(5, 6, 0, 0).is_err());
        assert!(range_splitter(5, 3, 4, 0).is_err());
        assert!(range_splitter(5, 3, 0, 32).is_err());
    }

    #[test]
    fn cyclical_search_misses_targets_outside_segment() {
        let oracle = Oracle::single(20);
        for rounds in [0u64, 1, 3] {
            let p = grover_cyclical(10, &oracle, 5, 3, 0, rounds).unwrap();
            assert_relative_eq!(p, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn cyclical_search_amplifies_targets_inside_segment() {
        let n = 5usize;
        let r = 3usize;
        let oracle = Oracle::single(12);
        let rounds = crate::analytic::cyclical_iterations(r as u32);
        let p = grover_cyclical(10, &oracle, n, r, 0, rounds).unwrap();
        assert!(p >= 1.0 - 2f64.powi(-(r as i32)), "p = {p}");
        let theta = 2f64.powf(-(r as f64) / 2.0).asin();
        let expected = ((2 * rounds + 1) as f64 * theta).sin().powi(2);
        assert_relative_eq!(p, expected, epsilon = 1e-10);
    }

    #[test]
    fn full_width_cyclical_search_is_textbook_grover() {
        let n = 6usize;
        let oracle = Oracle::single(41);
        let rounds = crate::analytic::grover_iterations(n as u32);
        let p = grover_cyclical(0, &oracle, n, n, 0, rounds).unwrap();
        let theta = 2f64.powf(-(n as f64) / 2.0).asin();
        let expected = ((2 * rounds + 1) as f64 * theta).sin().powi(2);
        assert_relative_eq!(p, expected, epsilon = 1e-10);
    }

    #[test]
    fn operators_preserve_the_norm() {
        let mut state = StateVector::basis(6, 17).unwrap();
        state.apply_biased_hadamard(3.0).unwrap();
        assert_relative_eq!(state.norm_sqr(), 1.0, epsilon = 1e-12);
        let prepared = state.clone();
        state.apply_oracle(&Oracle::single(9));
        assert_relative_eq!(state.norm_sqr(), 1.0, epsilon = 1e-12);
        state.reflect_about(&prepared);
        assert_relative_eq!(state.norm_sqr(), 1.0, epsilon = 1e-12);
        state.increment(1).unwrap();
        assert_relative_eq!(state.norm_sqr(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn probabilities_csv_lists_all_states() {
        let state = StateVector::basis(3, 5).unwrap();
        let csv = state.probabilities_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 9);
        assert_eq!(lines[0], "index,probability");
        assert_eq!(lines[6], "5,1");
    }
}
