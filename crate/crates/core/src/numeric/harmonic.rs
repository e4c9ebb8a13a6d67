//! Harmonic numbers, exact and for astronomically large arguments.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const DIRECT_LIMIT: f64 = 1024.0;

/// `H_n` as an exact rational.
pub fn harmonic_exact(n: u64) -> BigRational {
    (1..=n).fold(BigRational::zero(), |acc, j| {
        acc + BigRational::new(BigInt::from(1), BigInt::from(j))
    })
}

fn harmonic_direct(n: u64) -> f64 {
    // summed smallest-first
    (1..=n).rev().map(|j| 1.0 / j as f64).sum()
}

fn harmonic_tail_correction(n: f64) -> f64 {
    let inv = 1.0 / n;
    let inv2 = inv * inv;
    0.5 * inv - inv2 / 12.0 + inv2 * inv2 / 120.0 - inv2 * inv2 * inv2 / 252.0
}

/// `H_n` for real-valued (possibly huge) `n ≥ 0`; exact summation below 1024.
pub fn harmonic(n: f64) -> f64 {
    if n < 1.0 {
        return 0.0;
    }
    if n < DIRECT_LIMIT {
        return harmonic_direct(n as u64);
    }
    n.ln() + EULER_GAMMA + harmonic_tail_correction(n)
}

/// `H_{start+count} - H_start` without cancellation for huge arguments.
pub fn harmonic_range(start: f64, count: f64) -> f64 {
    if count <= 0.0 {
        return 0.0;
    }
    let end = start + count;
    if end < DIRECT_LIMIT {
        let (s, e) = (start as u64, end as u64);
        return ((s + 1)..=e).rev().map(|j| 1.0 / j as f64).sum();
    }
    if start < DIRECT_LIMIT {
        return harmonic(end) - harmonic(start);
    }
    (count / start).ln_1p() + harmonic_tail_correction(end) - harmonic_tail_correction(start)
}
