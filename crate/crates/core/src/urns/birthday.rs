//! Waiting time of the first collision.

use std::f64::consts::PI;

use super::{class_floats, UrnError, UrnModel};
use crate::numeric::quad::{integrate, QuadOptions};
use crate::scalar::rational_to_f64;

#[derive(Clone, Copy, Debug)]
pub struct BirthdayOptions {
    pub rel_tol: f64,
    /// The integrand is cut where it falls below this fraction of its peak.
    pub truncation_ratio: f64,
    pub max_intervals: usize,
}

impl Default for BirthdayOptions {
    fn default() -> Self {
        BirthdayOptions {
            rel_tol: 1e-9,
            truncation_ratio: 1e-15,
            max_intervals: 20_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BirthdayEstimate {
    pub value: f64,
    pub error_estimate: f64,
    pub truncation: f64,
    pub intervals: usize,
}

/// `ln(1 + x) - x` without cancellation for small `x`.
fn ln1p_minus_x(x: f64) -> f64 {
    if x.abs() < 1e-2 {
        // -x²/2 + x³/3 - x⁴/4 + ...
        let mut power = x;
        let mut sum = 0.0;
        for j in 2..16 {
            power *= -x;
            sum += power / j as f64;
        }
        sum
    } else {
        x.ln_1p() - x
    }
}

/// `E(B) = ∫₀^∞ Π_i (1 + p_i t)^{c_i} e^{-t} dt`, evaluated as
/// `∫ exp(ψ(t)) dt` with `ψ(t) = Σ c_i (ln(1 + p_i t) - p_i t)`, which uses
/// `Σ c_i p_i = 1`. `ψ` is concave with `ψ(0) = 0`, so the integrand peaks at
/// 1 at the origin and the truncation point is found by doubling.
pub fn birthday_exact(u: &UrnModel, opts: BirthdayOptions) -> Result<BirthdayEstimate, UrnError> {
    let classes: Vec<(f64, f64)> = class_floats(u).into_iter().map(|(p, m, _)| (p, m)).collect();
    let psi = move |t: f64| -> f64 { classes.iter().map(|&(p, c)| c * ln1p_minus_x(p * t)).sum() };
    let floor = opts.truncation_ratio.ln();
    let mut t = 1.0 / rational_to_f64(&u.alpha2()).sqrt();
    let mut guard = 0;
    while psi(t) > floor {
        t *= 2.0;
        guard += 1;
        if guard > 2000 {
            break;
        }
    }
    let integrand = |s: f64| psi(s).exp();
    let r = integrate(
        integrand,
        0.0,
        t,
        QuadOptions {
            rel_tol: opts.rel_tol,
            abs_tol: 0.0,
            max_intervals: opts.max_intervals,
        },
    )?;
    Ok(BirthdayEstimate {
        value: r.value,
        error_estimate: r.error_estimate,
        truncation: t,
        intervals: r.intervals,
    })
}

/// `√(π / (2 α₂))`.
pub fn birthday_asymptotic(u: &UrnModel) -> f64 {
    (PI / (2.0 * rational_to_f64(&u.alpha2()))).sqrt()
}
