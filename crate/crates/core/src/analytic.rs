//! Closed-form iteration counts for the three search strategies: plain
//! Grover over the full domain, the Hamming-neighbourhood search and the
//! cyclical-range search, in both known-distance and unknown-distance
//! accounting.
//!
//! Rounding is half-away-from-zero throughout, with negative reals floored
//! to zero iterations.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{cyclical_index, MetricError};

/// Attempts stop once the accumulated success probability reaches this.
pub const SUCCESS_TARGET: f64 = 0.9;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PlanError {
    #[error("initial amplitude is zero; the search cannot reach the target")]
    ZeroAmplitude,
    #[error("invalid plan parameters: {0}")]
    BadParams(String),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

fn round_at_least_zero(value: f64) -> u64 {
    if value <= 0.0 {
        0
    } else {
        value.round() as u64
    }
}

/// Iterations of textbook Grover over `2^n` states with a single solution.
pub fn grover_iterations(n: u32) -> u64 {
    assert!(n >= 1, "need at least one qubit");
    let amp = 2f64.powf(-(n as f64) / 2.0);
    round_at_least_zero(PI / (4.0 * amp.asin()) - 0.5)
}

/// Amplitude landed on a state at Hamming distance `distance` after the
/// biased superposition tuned for distance `k` is applied to all `n` qubits:
/// `sqrt((1 - k/n)^(n - distance)) * sqrt((k/n)^distance)`.
pub fn hamming_amplitude(n: u32, k: u32, distance: u32) -> f64 {
    debug_assert!(k >= 1 && k <= n && distance <= n);
    let flip = k as f64 / n as f64;
    ((1.0 - flip).powi((n - distance) as i32)).sqrt() * (flip.powi(distance as i32)).sqrt()
}

/// Real and rounded iteration counts `pi / (4 asin(amp)) - 1/2` for the
/// biased search at tuning `k` against true distance `distance`.
pub fn hamming_iterations(n: u32, k: u32, distance: u32) -> Result<(f64, u64), PlanError> {
    let amp = hamming_amplitude(n, k, distance);
    if amp <= 0.0 {
        return Err(PlanError::ZeroAmplitude);
    }
    let real = PI / (4.0 * amp.asin()) - 0.5;
    Ok((real, round_at_least_zero(real)))
}

fn attempt_iterations(n: u32, k: u32) -> (f64, u64) {
    // Tuning k assumes the true distance equals k, so the amplitude is
    // strictly positive and this cannot fail.
    hamming_iterations(n, k, k).expect("diagonal amplitude is positive")
}

/// Success probability of the attempt at tuning `k` when the true distance
/// is `distance`.
fn attempt_hit_probability(n: u32, k: u32, distance: u32) -> f64 {
    let rounds = attempt_iterations(n, k).1;
    let theta = hamming_amplitude(n, k, distance).asin();
    ((2 * rounds + 1) as f64 * theta).sin().powi(2)
}

/// Probability of having measured the solution within the first `attempts`
/// tunings `k = 1..=attempts` when the true distance is `distance`:
/// one minus the product of per-attempt miss probabilities. Each attempt
/// runs the rounded count for its own tuning.
pub fn success_probability(attempts: u32, distance: u32, n: u32) -> f64 {
    let mut miss = 1.0;
    for k in 1..=attempts.min(n) {
        miss *= 1.0 - attempt_hit_probability(n, k, distance);
    }
    1.0 - miss
}

/// One tuning of the Hamming search inside a plan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HammingAttempt {
    pub k: u32,
    /// Rotation angle actually realised against the true distance.
    pub theta: f64,
    pub iterations_real: f64,
    pub iterations: u64,
    pub hit_probability: f64,
}

/// Iteration accounting for the Hamming search at true distance `distance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HammingPlan {
    pub n: u32,
    pub distance: u32,
    /// First tuning whose cumulative success reaches [`SUCCESS_TARGET`].
    pub stop_k: u32,
    /// True when the target was never reached and the plan stopped at n.
    pub capped: bool,
    pub attempts: Vec<HammingAttempt>,
    pub total_unknown: u64,
    pub total_known: u64,
}

/// Plans the distance-unknown protocol: tunings k = 1, 2, ... each running
/// its own rounded count, stopping once the cumulative success probability
/// reaches 90%. `total_known` is the single run at the true distance.
pub fn plan_hamming(n: u32, distance: u32) -> Result<HammingPlan, PlanError> {
    if n == 0 || distance > n {
        return Err(PlanError::BadParams(format!(
            "distance {distance} over {n} qubits"
        )));
    }
    if distance == 0 {
        return Ok(HammingPlan {
            n,
            distance,
            stop_k: 0,
            capped: false,
            attempts: Vec::new(),
            total_unknown: 0,
            total_known: 0,
        });
    }
    let mut attempts = Vec::new();
    let mut miss = 1.0f64;
    let mut total_unknown = 0u64;
    let mut stop_k = n;
    let mut capped = true;
    for k in 1..=n {
        let (real, rounds) = attempt_iterations(n, k);
        let theta = hamming_amplitude(n, k, distance).asin();
        let hit = ((2 * rounds + 1) as f64 * theta).sin().powi(2);
        attempts.push(HammingAttempt {
            k,
            theta,
            iterations_real: real,
            iterations: rounds,
            hit_probability: hit,
        });
        total_unknown += rounds;
        miss *= 1.0 - hit;
        if 1.0 - miss >= SUCCESS_TARGET {
            stop_k = k;
            capped = false;
            break;
        }
    }
    let total_known = attempt_iterations(n, distance).1;
    Ok(HammingPlan {
        n,
        distance,
        stop_k,
        capped,
        attempts,
        total_unknown,
        total_known,
    })
}

/// Which side of the integer order the start state falls on; the execution
/// count formula differs between the two.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    StartAtOrAboveTarget,
    StartBelowTarget,
}

/// Iteration accounting for the cyclical-range search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CyclicalPlan {
    pub n: u32,
    /// Superposed qubits per execution; each segment holds `2^r` states.
    pub r: u32,
    pub distance: u64,
    pub direction: Direction,
    /// Executions needed for the segment ladder to reach the target.
    pub executions: u64,
    /// Rounded iterations per execution.
    pub per_execution: u64,
    /// Sum over executions 0..=executions, i.e. `(executions + 1)` runs.
    pub total_unknown: u64,
    /// Same ladder counted as `executions` runs; kept for comparison.
    pub total_unknown_alt: u64,
    pub total_known: u64,
    /// Set when the ring distance came from the wrap-around side, where the
    /// integer-order branch choice can overcount by one execution.
    pub wraparound: bool,
}

/// Iterations of one execution over a `2^r`-state segment with one solution.
pub fn cyclical_iterations(r: u32) -> u64 {
    assert!(r >= 1);
    let amp = 2f64.powf(-(r as f64) / 2.0);
    round_at_least_zero(PI / (4.0 * amp.asin()) - 0.5)
}

/// Plans the cyclical search from basis state `start` to `target`;
/// `r` defaults to `n - 1` (half the domain per execution).
pub fn plan_cyclical(
    n: u32,
    start: u64,
    target: u64,
    r: Option<u32>,
) -> Result<CyclicalPlan, PlanError> {
    if n == 0 {
        return Err(PlanError::BadParams("need at least one qubit".into()));
    }
    let r = r.unwrap_or(n.saturating_sub(1).max(1));
    if r < 1 || r > n {
        return Err(PlanError::BadParams(format!("r = {r} outside 1..={n}")));
    }
    let distance = cyclical_index(start, target, n)?;
    let raw_diff = start.abs_diff(target);
    let wraparound = raw_diff > distance;
    let half_segment = 1u64 << (r - 1);
    let (direction, executions) = if start >= target {
        (
            Direction::StartAtOrAboveTarget,
            (distance + 1).div_ceil(half_segment),
        )
    } else {
        (Direction::StartBelowTarget, distance.div_ceil(half_segment))
    };
    let per_execution = cyclical_iterations(r);
    Ok(CyclicalPlan {
        n,
        r,
        distance,
        direction,
        executions,
        per_execution,
        total_unknown: (executions + 1) * per_execution,
        total_unknown_alt: executions * per_execution,
        total_known: per_execution,
        wraparound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn grover_iteration_table() {
        let expected: [(u32, u64); 16] = [
            (7, 8),
            (8, 12),
            (9, 17),
            (10, 25),
            (11, 35),
            (12, 50),
            (13, 71),
            (14, 100),
            (15, 142),
            (16, 201),
            (17, 284),
            (18, 402),
            (19, 568),
            (20, 804),
            (21, 1137),
            (22, 1608),
        ];
        for (n, count) in expected {
            assert_eq!(grover_iterations(n), count, "n = {n}");
        }
    }

    #[test]
    fn amplitude_special_cases() {
        assert_relative_eq!(hamming_amplitude(5, 5, 5), 1.0, epsilon = 1e-15);
        assert_relative_eq!(hamming_amplitude(7, 1, 1), 0.238027, epsilon = 1e-5);
        assert_eq!(hamming_amplitude(6, 6, 3), 0.0);
    }

    #[test]
    fn iteration_count_example() {
        let (real, rounds) = hamming_iterations(7, 1, 1).unwrap();
        assert_relative_eq!(real, 2.7676, epsilon = 1e-3);
        assert_eq!(rounds, 3);
    }

    #[test]
    fn unit_amplitude_floors_to_zero_iterations() {
        let (real, rounds) = hamming_iterations(4, 4, 4).unwrap();
        assert_eq!(real, 0.0);
        assert_eq!(rounds, 0);
    }

    #[test]
    fn zero_amplitude_is_an_error() {
        assert_eq!(hamming_iterations(6, 6, 2).unwrap_err(), PlanError::ZeroAmplitude);
    }

    #[test]
    fn success_probability_examples() {
        assert_relative_eq!(success_probability(1, 1, 7), 0.9876, epsilon = 1e-4);
        // Single factor: equals the per-attempt hit probability.
        let hit = attempt_hit_probability(9, 1, 2);
        assert_relative_eq!(success_probability(1, 2, 9), hit, epsilon = 1e-15);
        // Monotone non-decreasing in the attempt count.
        for n in [7u32, 12, 16] {
            for distance in 1..=n {
                let mut last = 0.0;
                for attempts in 1..=n {
                    let p = success_probability(attempts, distance, n);
                    assert!(p >= last - 1e-12);
                    last = p;
                }
            }
        }
    }

    #[test]
    fn plan_hamming_worked_example() {
        let plan = plan_hamming(7, 1).unwrap();
        assert_eq!(plan.stop_k, 1);
        assert!(!plan.capped);
        assert_eq!(plan.total_unknown, 3);
        assert_eq!(plan.total_known, 3);
        assert_eq!(plan.attempts.len(), 1);
        assert_eq!(plan.attempts[0].iterations, 3);
    }

    #[test]
    fn plan_hamming_zero_distance_degenerates() {
        let plan = plan_hamming(9, 0).unwrap();
        assert_eq!(plan.total_unknown, 0);
        assert_eq!(plan.total_known, 0);
        assert_eq!(plan.stop_k, 0);
        assert!(plan.attempts.is_empty());
    }

    #[test]
    fn plan_hamming_rejects_bad_distance() {
        assert!(plan_hamming(5, 6).is_err());
    }

    #[test]
    fn plans_reach_target_and_known_never_exceeds_unknown() {
        for n in 7..=22u32 {
            for distance in 1..=n {
                let plan = plan_hamming(n, distance).unwrap();
                assert!(!plan.capped, "n {n} distance {distance}");
                assert!(
                    plan.total_known <= plan.total_unknown,
                    "n {n} distance {distance}"
                );
                assert!(plan.stop_k <= n);
            }
        }
    }

    #[test]
    fn cyclical_iterations_for_small_r() {
        assert_eq!(cyclical_iterations(6), 6);
        assert_eq!(cyclical_iterations(4), 3);
    }

    #[test]
    fn plan_cyclical_worked_case() {
        let plan = plan_cyclical(5, 10, 2, Some(4)).unwrap();
        assert_eq!(plan.distance, 8);
        assert_eq!(plan.direction, Direction::StartAtOrAboveTarget);
        assert_eq!(plan.executions, 2); // ceil(9 / 8)
        assert_eq!(plan.per_execution, 3);
        assert_eq!(plan.total_unknown, 9);
        assert_eq!(plan.total_unknown_alt, 6);
        assert_eq!(plan.total_known, 3);
        assert!(!plan.wraparound);
    }

    #[test]
    fn plan_cyclical_identity_start() {
        let plan = plan_cyclical(6, 9, 9, None).unwrap();
        assert_eq!(plan.r, 5);
        assert_eq!(plan.distance, 0);
        assert_eq!(plan.executions, 1); // ceil(1 / 2^(r-1))
    }

    #[test]
    fn plan_cyclical_flags_wraparound() {
        let plan = plan_cyclical(5, 1, 30, None).unwrap();
        assert_eq!(plan.distance, 3);
        assert!(plan.wraparound);
        assert_eq!(plan.direction, Direction::StartBelowTarget);
    }

    #[test]
    fn plan_cyclical_default_r_is_n_minus_one() {
        let plan = plan_cyclical(8, 3, 200, None).unwrap();
        assert_eq!(plan.r, 7);
        assert_eq!(plan.total_known, plan.per_execution);
        assert!(plan.total_known <= plan.total_unknown);
    }

    #[test]
    fn plan_cyclical_rejects_bad_r() {
        assert!(plan_cyclical(5, 0, 1, Some(0)).is_err());
        assert!(plan_cyclical(5, 0, 1, Some(6)).is_err());
        assert!(plan_cyclical(5, 40, 1, None).is_err());
    }

    #[test]
    fn plans_serialize_to_json() {
        let plan = plan_hamming(7, 2).unwrap();
        let text = serde_json::to_string(&plan).unwrap();
        let back: HammingPlan = serde_json::from_str(&text).unwrap();
        assert_eq!(back, plan);
        let plan = plan_cyclical(7, 5, 99, None).unwrap();
        let text = serde_json::to_string(&plan).unwrap();
        let back: CyclicalPlan = serde_json::from_str(&text).unwrap();
        assert_eq!(back, plan);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn translation_preserves_totals_when_branch_preserved(
                start in 0u64..(1 << 9),
                target in 0u64..(1 << 9),
                shift in 0u64..(1 << 9),
            ) {
                let n = 9u32;
                let size = 1u64 << n;
                let a = plan_cyclical(n, start, target, None).unwrap();
                let b = plan_cyclical(n, (start + shift) % size, (target + shift) % size, None)
                    .unwrap();
                if a.direction == b.direction {
                    prop_assert_eq!(a.total_unknown, b.total_unknown);
                    prop_assert_eq!(a.total_known, b.total_known);
                }
            }
        }
    }
}
