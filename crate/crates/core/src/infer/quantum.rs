//! Measurement-unit (quantum) detection under noise.
//!
//! Values are brought to a common decimal scale and read as exact integers.
//! Candidate units are greatest common divisors of gaps between values of a
//! trimmed sample; each candidate is then scored by counting conforming
//! values over the whole column. The largest candidate that reaches the
//! required conformance wins.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantum {
    pub value: f64,
    pub conforming_fraction: f64,
}

/// Minimum number of distinct values before a quantum is reported.
pub const MIN_DISTINCT: usize = 10;
const MAX_SCALE: u32 = 9;
const SAMPLE_SIZE: usize = 64;
/// Fraction trimmed from each tail of the sample before taking gaps.
const TRIM: f64 = 0.02;

/// `true` when `v` is within `rel_tolerance · q` of a multiple of `q`.
pub fn conforms(v: f64, q: f64, rel_tolerance: f64) -> bool {
    (v - q * (v / q).round()).abs() <= rel_tolerance * q
}

pub fn infer_quantum(values: &[f64], dirt_tolerance: f64, rel_tolerance: f64) -> Option<Quantum> {
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    let distinct: BTreeSet<u64> = finite.iter().map(|v| v.to_bits()).collect();
    if distinct.len() < MIN_DISTINCT {
        return None;
    }
    let n = finite.len();
    let max_dirty = (dirt_tolerance * n as f64 + 1e-9).floor() as usize;

    let scale = (0..=MAX_SCALE).find(|&s| {
        let m = 10f64.powi(s as i32);
        let off = finite
            .iter()
            .filter(|v| {
                let x = *v * m;
                (x - x.round()).abs() > 1e-6 || x.abs() > 1e17
            })
            .count();
        off <= max_dirty
    })?;
    let m = 10f64.powi(scale as i32);
    let mut ints: Vec<i128> = finite
        .iter()
        .map(|v| v * m)
        .filter(|x| (x - x.round()).abs() <= 1e-6 && x.abs() <= 1e17)
        .map(|x| x.round() as i128)
        .collect();
    ints.sort_unstable();
    ints.dedup();

    let sample = trimmed_sample(&ints);
    let mut candidates: BTreeSet<i128> = BTreeSet::new();
    candidates.insert(1);
    let gaps: Vec<i128> = sample.windows(2).map(|w| w[1] - w[0]).filter(|g| *g > 0).collect();
    let mut all = 0i128;
    for (i, &a) in gaps.iter().enumerate() {
        candidates.insert(a);
        all = gcd(all, a);
        for &b in &gaps[i + 1..] {
            candidates.insert(gcd(a, b));
        }
    }
    if all > 0 {
        candidates.insert(all);
    }

    let q_int = candidates.into_iter().rev().find(|&c| {
        let q = c as f64 / m;
        let mut bad = 0usize;
        for &v in &finite {
            if !conforms(v, q, rel_tolerance) {
                bad += 1;
                if bad > max_dirty {
                    return false;
                }
            }
        }
        true
    })?;
    let q = q_int as f64 / m;

    // Only the bare decimal resolution qualified: for sparse real-valued data
    // that is an artifact of the print precision rather than a unit.
    if q_int == 1 && scale > 0 {
        let conforming: Vec<f64> = ints.iter().map(|&i| i as f64 / m).collect();
        let mut diffs: Vec<f64> = conforming.windows(2).map(|w| w[1] - w[0]).collect();
        diffs.sort_by(f64::total_cmp);
        let median_gap = diffs.get(diffs.len() / 2).copied().unwrap_or(0.0);
        if median_gap > 100.0 * q {
            return None;
        }
    }
    let ok = finite.iter().filter(|&&v| conforms(v, q, rel_tolerance)).count();
    Some(Quantum {
        value: q,
        conforming_fraction: ok as f64 / n as f64,
    })
}

/// Evenly spaced sample of the sorted distinct values after trimming both
/// tails, which is where corrupted values tend to sit.
fn trimmed_sample(sorted: &[i128]) -> Vec<i128> {
    let n = sorted.len();
    let cut = ((n as f64) * TRIM).floor() as usize;
    let body = &sorted[cut..n - cut];
    if body.len() <= SAMPLE_SIZE {
        return body.to_vec();
    }
    (0..SAMPLE_SIZE)
        .map(|k| body[k * (body.len() - 1) / (SAMPLE_SIZE - 1)])
        .collect()
}

fn gcd(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn noisy_multiples(q: f64, n: usize, corrupt: f64, seed: u64) -> (Vec<f64>, usize) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut exact = 0;
        let v = (0..n)
            .map(|_| {
                if rng.random::<f64>() < corrupt {
                    rng.random_range(0.0..1000.0 * q) + 0.123
                } else {
                    exact += 1;
                    q * rng.random_range(1..400) as f64
                }
            })
            .collect();
        (v, exact)
    }

    #[test]
    fn exact_multiples_of_4500() {
        let v: Vec<f64> = (1..=60).map(|k| 4500.0 * k as f64).collect();
        assert_eq!(
            infer_quantum(&v, 0.02, 1e-9),
            Some(Quantum {
                value: 4500.0,
                conforming_fraction: 1.0
            })
        );
    }

    #[test]
    fn consecutive_integers() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        let q = infer_quantum(&v, 0.02, 1e-9).unwrap();
        assert_eq!(q.value, 1.0);
        assert_eq!(q.conforming_fraction, 1.0);
    }

    #[test]
    fn multiples_of_250_with_corruption() {
        let (v, exact) = noisy_multiples(250.0, 2000, 0.01, 7);
        let q = infer_quantum(&v, 0.02, 1e-9).unwrap();
        assert_eq!(q.value, 250.0);
        // oracle: the exact-multiple count
        let oracle = v.iter().filter(|x| *x % 250.0 == 0.0).count();
        assert_eq!(oracle, exact);
        assert!((q.conforming_fraction - exact as f64 / v.len() as f64).abs() < 1e-12);
        assert!(q.conforming_fraction >= 0.98);
    }

    #[test]
    fn decimal_quantum() {
        let v: Vec<f64> = (1..=50).map(|k| k as f64 * 0.25).collect();
        assert_eq!(infer_quantum(&v, 0.0, 1e-6).unwrap().value, 0.25);
    }

    #[test]
    fn too_few_distinct_values() {
        let v = vec![1.0, 2.0, 3.0, 1.0, 2.0];
        assert_eq!(infer_quantum(&v, 0.02, 1e-9), None);
    }

    #[test]
    fn continuous_values_have_no_quantum() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v: Vec<f64> = (0..500).map(|_| rng.random::<f64>() * 100.0).collect();
        assert_eq!(infer_quantum(&v, 0.02, 1e-6), None);
    }

    proptest::proptest! {
        #[test]
        fn accepted_values_satisfy_the_tolerance(
            ks in proptest::collection::vec(-500i64..500, 10..80),
            unit in proptest::sample::select(vec![1.0, 2.0, 5.0, 0.5, 250.0, 4500.0]),
        ) {
            let v: Vec<f64> = ks.iter().map(|&k| k as f64 * unit).collect();
            if let Some(q) = infer_quantum(&v, 0.02, 1e-9) {
                let ok = v.iter().filter(|&&x| (x / q.value - (x / q.value).round()).abs() <= 1e-9).count();
                proptest::prop_assert!((ok as f64 / v.len() as f64 - q.conforming_fraction).abs() < 1e-12);
                proptest::prop_assert!(q.conforming_fraction >= 0.98);
                // the planted unit always divides the answer
                proptest::prop_assert!(conforms(q.value, unit, 1e-9));
            }
        }
    }
}
