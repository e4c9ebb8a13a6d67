//! Waiting time of the full collection.

use std::f64::consts::E;

use num_bigint::BigInt;
use num_rational::BigRational;

use super::UrnModel;
use crate::numeric::harmonic::{harmonic, harmonic_exact, harmonic_range};
use crate::scalar::{rational_to_f64, Scalar};

/// `m · H_m`, the uniform coupon-collector time.
pub fn coupon_uniform_exact(m: u64) -> BigRational {
    harmonic_exact(m) * BigRational::from_integer(BigInt::from(m))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CouponBounds {
    /// `1 / p₁`.
    pub lower: f64,
    /// `2 H_m / p₁`.
    pub upper: f64,
    /// `Ξ_m = Σ_i 1 / (i p_i)` over urns ranked by increasing probability.
    pub xi: f64,
    /// `[Ξ / (3e · log₂ log₂ m), 2 Ξ]`, present for `m ≥ 3`.
    pub berenbrink: Option<(f64, f64)>,
}

/// `Ξ_m` by classes: a class of `c` urns of probability `p` occupying ranks
/// `r+1..=r+c` contributes `(H_{r+c} - H_r) / p`.
pub fn xi_estimate(u: &UrnModel) -> f64 {
    let mut rank = 0.0;
    let mut xi = 0.0;
    for c in u.classes() {
        let count = c.multiplicity.to_f64();
        xi += harmonic_range(rank, count) / rational_to_f64(&c.probability);
        rank += count;
    }
    xi
}

pub fn coupon_bounds(u: &UrnModel) -> CouponBounds {
    let m = u.urn_count().to_f64();
    let inv_p1 = rational_to_f64(&u.min_probability().recip());
    let xi = xi_estimate(u);
    let berenbrink = (m >= 3.0).then(|| {
        let ll = m.log2().log2();
        (xi / (3.0 * E * ll), 2.0 * xi)
    });
    CouponBounds {
        lower: inv_p1,
        upper: 2.0 * harmonic(m) * inv_p1,
        xi,
        berenbrink,
    }
}
