//! Distances between the annealing output state and the true solution:
//! bitwise (Hamming) and ring (cyclical) distance on basis-state indices.

use thiserror::Error;

use crate::formula::Assignment;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricError {
    #[error("assignments have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("index {index} out of range for {num_vars} variables")]
    IndexOutOfRange { index: u64, num_vars: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DistanceReport {
    pub hamming: u32,
    pub cyclical: u64,
}

/// Number of differing bits.
pub fn hamming(a: &Assignment, b: &Assignment) -> Result<u32, MetricError> {
    if a.len() != b.len() {
        return Err(MetricError::LengthMismatch(a.len(), b.len()));
    }
    Ok(a.bits()
        .iter()
        .zip(b.bits())
        .filter(|(x, y)| x != y)
        .count() as u32)
}

/// `min(|a - b|, 2^n - |a - b|)` on basis-state indices.
pub fn cyclical_index(a: u64, b: u64, num_vars: u32) -> Result<u64, MetricError> {
    let size = 1u64 << num_vars;
    for index in [a, b] {
        if index >= size {
            return Err(MetricError::IndexOutOfRange { index, num_vars });
        }
    }
    let diff = a.abs_diff(b);
    Ok(diff.min(size - diff))
}

pub fn cyclical(a: &Assignment, b: &Assignment) -> Result<u64, MetricError> {
    if a.len() != b.len() {
        return Err(MetricError::LengthMismatch(a.len(), b.len()));
    }
    cyclical_index(a.index(), b.index(), a.len() as u32)
}

pub fn report(a: &Assignment, b: &Assignment) -> Result<DistanceReport, MetricError> {
    Ok(DistanceReport {
        hamming: hamming(a, b)?,
        cyclical: cyclical(a, b)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_pair() {
        // |0010> vs |1101> on four qubits: indices 2 and 13.
        let a = Assignment::from_index(4, 2).unwrap();
        let b = Assignment::from_index(4, 13).unwrap();
        assert_eq!(hamming(&a, &b).unwrap(), 4);
        assert_eq!(cyclical(&a, &b).unwrap(), 5);
    }

    #[test]
    fn ring_wraps_between_extremes() {
        for n in 1..=16u32 {
            assert_eq!(cyclical_index(0, (1 << n) - 1, n).unwrap(), 1);
        }
    }

    #[test]
    fn zero_at_identity() {
        let a = Assignment::from_index(6, 37).unwrap();
        assert_eq!(hamming(&a, &a).unwrap(), 0);
        assert_eq!(cyclical(&a, &a).unwrap(), 0);
        let r = report(&a, &a).unwrap();
        assert_eq!((r.hamming, r.cyclical), (0, 0));
    }

    #[test]
    fn errors_on_bad_inputs() {
        let a = Assignment::from_index(4, 1).unwrap();
        let b = Assignment::from_index(5, 1).unwrap();
        assert!(matches!(hamming(&a, &b), Err(MetricError::LengthMismatch(4, 5))));
        assert!(matches!(
            cyclical_index(16, 0, 4),
            Err(MetricError::IndexOutOfRange { index: 16, num_vars: 4 })
        ));
    }

    #[test]
    fn exhaustive_metric_properties_small_n() {
        for n in 1..=6u32 {
            let size = 1u64 << n;
            for a in 0..size {
                for b in 0..size {
                    let d = cyclical_index(a, b, n).unwrap();
                    assert_eq!(d, cyclical_index(b, a, n).unwrap());
                    assert!(d <= size / 2);
                    let ha = Assignment::from_index(n as usize, a).unwrap();
                    let hb = Assignment::from_index(n as usize, b).unwrap();
                    let h = hamming(&ha, &hb).unwrap();
                    assert_eq!(h, (a ^ b).count_ones());
                    assert!(h <= n);
                    assert_eq!(h == 0, d == 0);
                }
            }
        }
    }

    #[test]
    fn triangle_inequality_exhaustive() {
        let n = 5u32;
        let size = 1u64 << n;
        for a in 0..size {
            for b in 0..size {
                for c in 0..size {
                    let ab = cyclical_index(a, b, n).unwrap();
                    let bc = cyclical_index(b, c, n).unwrap();
                    let ac = cyclical_index(a, c, n).unwrap();
                    assert!(ac <= ab + bc);
                    let h = |x: u64, y: u64| (x ^ y).count_ones();
                    assert!(h(a, c) <= h(a, b) + h(b, c));
                }
            }
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn hamming_matches_popcount(a in 0u64..(1 << 16), b in 0u64..(1 << 16)) {
                let x = Assignment::from_index(16, a).unwrap();
                let y = Assignment::from_index(16, b).unwrap();
                prop_assert_eq!(hamming(&x, &y).unwrap(), (a ^ b).count_ones());
            }

            #[test]
            fn cyclical_is_translation_invariant(
                a in 0u64..(1 << 12),
                b in 0u64..(1 << 12),
                shift in 0u64..(1 << 12),
            ) {
                let n = 12u32;
                let size = 1u64 << n;
                let d = cyclical_index(a, b, n).unwrap();
                let ds = cyclical_index((a + shift) % size, (b + shift) % size, n).unwrap();
                prop_assert_eq!(d, ds);
            }
        }
    }
}
