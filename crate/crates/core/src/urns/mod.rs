//! Urn occupancy models: one urn per word of `L_n`, with probability
//! proportional to the word's weight. Classes group urns of equal
//! probability so that models with astronomically many urns stay small.

mod birthday;
mod coupon;
mod report;
mod simulate;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Pow, Zero};
use thiserror::Error;

use crate::counting::WeightSpectrum;
use crate::numeric::quad::QuadError;
use crate::scalar::{natural_to_rational, rational_to_f64, Scalar};

pub use birthday::{birthday_asymptotic, birthday_exact, BirthdayEstimate, BirthdayOptions};
pub use coupon::{coupon_bounds, coupon_uniform_exact, xi_estimate, CouponBounds};
pub use report::{analyze, AnalyticsReport, Method, ReportRow};
pub use simulate::{simulate, simulate_words, SimOptions, SimResult, Statistic};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum UrnError {
    #[error("empty spectrum: no urn")]
    EmptySpectrum,
    #[error("class weights must be positive")]
    NonpositiveWeight,
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error("{what} limit of {limit} exceeded")]
    CapExceeded { what: &'static str, limit: u128 },
    #[error("trials must be at least 1")]
    NoTrials,
}

/// Urns of one probability.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UrnClass {
    pub probability: BigRational,
    pub multiplicity: BigUint,
    /// Unnormalized weight `χ` of each urn in the class.
    pub weight: BigRational,
}

/// Classes sorted by strictly increasing probability.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UrnModel {
    classes: Vec<UrnClass>,
    urns: BigUint,
    total_weight: BigRational,
}

impl UrnModel {
    /// Builds a model from `(weight, multiplicity)` pairs; equal weights merge.
    pub fn from_weights(pairs: impl IntoIterator<Item = (BigRational, BigUint)>) -> Result<Self, UrnError> {
        let sp = WeightSpectrum::from_pairs(0, pairs);
        if sp.classes.iter().any(|c| c.weight <= BigRational::zero()) {
            return Err(UrnError::NonpositiveWeight);
        }
        from_spectrum(&sp)
    }

    /// `m` equiprobable urns.
    pub fn uniform(m: u64) -> Self {
        Self::from_weights([(BigRational::one(), BigUint::from(m))]).expect("m >= 1")
    }

    /// One urn per listed probability (or weight; they are normalized).
    pub fn from_probabilities(p: &[BigRational]) -> Result<Self, UrnError> {
        Self::from_weights(p.iter().map(|x| (x.clone(), BigUint::one())))
    }

    pub fn classes(&self) -> &[UrnClass] {
        &self.classes
    }

    /// Total number of urns `m = Σ c_i`.
    pub fn urn_count(&self) -> &BigUint {
        &self.urns
    }

    /// `μ = Σ c_i χ_i`.
    pub fn total_weight(&self) -> &BigRational {
        &self.total_weight
    }

    pub fn min_probability(&self) -> &BigRational {
        &self.classes[0].probability
    }

    pub fn max_probability(&self) -> &BigRational {
        &self.classes[self.classes.len() - 1].probability
    }

    /// `α₂ = Σ c_i p_i²`.
    pub fn alpha2(&self) -> BigRational {
        self.classes
            .iter()
            .map(|c| natural_to_rational(&c.multiplicity) * &c.probability * &c.probability)
            .sum()
    }

    /// Individual urn probabilities, expanded; for small models and oracles.
    pub fn expanded_probabilities(&self) -> Vec<BigRational> {
        let mut out = Vec::new();
        for c in &self.classes {
            let mut i = BigUint::zero();
            while i < c.multiplicity {
                out.push(c.probability.clone());
                i += 1u32;
            }
        }
        out
    }

    /// Same probabilities with every weight multiplied by `c`.
    pub fn rescaled(&self, c: &BigRational) -> UrnModel {
        UrnModel {
            classes: self
                .classes
                .iter()
                .map(|k| UrnClass {
                    weight: &k.weight * c,
                    ..k.clone()
                })
                .collect(),
            urns: self.urns.clone(),
            total_weight: &self.total_weight * c,
        }
    }
}

/// Normalizes a weight spectrum into an urn model, `p_i = χ_i / Π_W(n)`.
pub fn from_spectrum(sp: &WeightSpectrum) -> Result<UrnModel, UrnError> {
    if sp.classes.is_empty() {
        return Err(UrnError::EmptySpectrum);
    }
    let total = sp.total_weight();
    let classes = sp
        .classes
        .iter()
        .map(|c| UrnClass {
            probability: &c.weight / &total,
            multiplicity: c.multiplicity.clone(),
            weight: c.weight.clone(),
        })
        .collect();
    Ok(UrnModel {
        classes,
        urns: sp.word_count(),
        total_weight: total,
    })
}

/// An expectation with its exact value when it was affordable.
#[derive(Clone, Debug, PartialEq)]
pub struct UrnValue {
    pub exact: Option<BigRational>,
    pub value: f64,
}

impl UrnValue {
    fn exact(r: BigRational) -> Self {
        UrnValue {
            value: rational_to_f64(&r),
            exact: Some(r),
        }
    }

    fn float(value: f64) -> Self {
        UrnValue { exact: None, value }
    }
}

/// Largest `k` for which powers `(1 - p)^k` are taken exactly.
pub const EXACT_POWER_MAX_K: u64 = 1_000_000;
/// Bit budget for the numerator plus denominator of one exact power.
pub const EXACT_POWER_BITS: u64 = 1 << 16;

fn pow_rational(base: &BigRational, k: u64) -> BigRational {
    // a reduced fraction stays reduced under powers
    let k = u32::try_from(k).expect("exponent within the exact budget");
    BigRational::new_raw(Pow::pow(base.numer(), k), Pow::pow(base.denom(), k))
}

fn exact_affordable(u: &UrnModel, k: u64) -> bool {
    k <= EXACT_POWER_MAX_K
        && u.classes.iter().all(|c| {
            let q = BigRational::one() - &c.probability;
            let bits = q.numer().bits() + q.denom().bits();
            bits.saturating_mul(k) <= EXACT_POWER_BITS
        })
}

/// `1 - (1-p_i)^k` per class, exactly.
fn hit_exact(u: &UrnModel, k: u64) -> Vec<BigRational> {
    u.classes
        .iter()
        .map(|c| BigRational::one() - pow_rational(&(BigRational::one() - &c.probability), k))
        .collect()
}

/// `1 - (1-p)^k = -expm1(k · ln(1 - p))`, accurate for tiny `p` and huge `k`.
pub fn hit_float(p: f64, k: f64) -> f64 {
    if p >= 1.0 {
        return if k > 0.0 { 1.0 } else { 0.0 };
    }
    -(k * (-p).ln_1p()).exp_m1()
}

fn class_floats(u: &UrnModel) -> Vec<(f64, f64, f64)> {
    u.classes
        .iter()
        .map(|c| {
            (
                rational_to_f64(&c.probability),
                c.multiplicity.to_f64(),
                rational_to_f64(&c.weight),
            )
        })
        .collect()
}

fn combine(
    u: &UrnModel,
    k: u64,
    coeff: impl Fn(&UrnClass) -> BigRational,
    float_coeff: impl Fn(f64, f64, f64) -> f64,
) -> UrnValue {
    if exact_affordable(u, k) {
        let hits = hit_exact(u, k);
        let v = u.classes.iter().zip(hits).map(|(c, h)| coeff(c) * h).sum();
        UrnValue::exact(v)
    } else {
        let v = class_floats(u)
            .into_iter()
            .map(|(p, m, w)| float_coeff(p, m, w) * hit_float(p, k as f64))
            .sum();
        UrnValue::float(v)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DistinctEstimate {
    /// `Σ c_i (1 - (1-p_i)^k)`.
    pub expected: UrnValue,
    /// `Σ c_i (1 - e^{-p_i k})`.
    pub exponential: f64,
}

/// Expected number of distinct urns reached after `k` draws.
pub fn expected_distinct(u: &UrnModel, k: u64) -> DistinctEstimate {
    let expected = combine(u, k, |c| natural_to_rational(&c.multiplicity), |_, m, _| m);
    let exponential = class_floats(u)
        .into_iter()
        .map(|(p, m, _)| -m * (-p * k as f64).exp_m1())
        .sum();
    DistinctEstimate { expected, exponential }
}

/// Expected probability mass of the urns reached after `k` draws.
pub fn expected_coverage(u: &UrnModel, k: u64) -> UrnValue {
    combine(
        u,
        k,
        |c| natural_to_rational(&c.multiplicity) * &c.probability,
        |p, m, _| m * p,
    )
}

/// Expected total weight `E[W_k] = Σ c_i χ_i (1 - (1-p_i)^k)` of reached urns.
pub fn expected_occupied_weight(u: &UrnModel, k: u64) -> UrnValue {
    combine(
        u,
        k,
        |c| natural_to_rational(&c.multiplicity) * &c.weight,
        |_, m, w| m * w,
    )
}

/// Default validity threshold on `k · p_max` for the first-order coverage.
pub const FIRST_ORDER_THRESHOLD: f64 = 0.01;

#[derive(Clone, Debug, PartialEq)]
pub struct FirstOrderCoverage {
    /// `k · α₂`.
    pub value: BigRational,
    pub valid: bool,
    pub k_times_pmax: f64,
}

/// First-order coverage `k · α₂`, flagged invalid when `k · p_max` exceeds
/// `threshold`.
pub fn coverage_first_order(u: &UrnModel, k: u64, threshold: f64) -> FirstOrderCoverage {
    let value = u.alpha2() * BigRational::from_integer(BigInt::from(k));
    let k_times_pmax = rational_to_f64(u.max_probability()) * k as f64;
    FirstOrderCoverage {
        value,
        valid: k_times_pmax <= threshold,
        k_times_pmax,
    }
}
