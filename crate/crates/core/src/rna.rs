//! Homopolymer RNA secondary structures: Motzkin words without `t`-plateaux
//! for `t < θ`, every base pair weighted by its Boltzmann factor.

use std::f64::consts::PI;
use std::ops::RangeInclusive;

use num_bigint::{BigInt, BigUint};
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::counting::WeightSpectrum;
use crate::grammar::{GrammarBuilder, WeightedGrammar};
use crate::numeric::decimal::{exp_rational, parse_rational, DEFAULT_SIGNIFICANT_DIGITS};
use crate::numeric::poly::{series_sqrt, Polynomial, SturmChain};
use crate::scalar::rational_to_f64;
use crate::urns::{
    analyze, expected_coverage, expected_distinct, from_spectrum, AnalyticsReport, Method, ReportRow, UrnError,
};

/// `RT` in kcal/mol at 310.15 K.
pub const DEFAULT_RT: f64 = 0.6163;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RnaError {
    #[error("theta must be at least 1")]
    Theta,
    #[error("RT must be positive")]
    Temperature,
    #[error("not a finite number: {0}")]
    NotFinite(f64),
    #[error("no root of the discriminant in (0, 1); samples {0:?}")]
    NoRoot(Vec<(f64, f64)>),
    #[error(transparent)]
    Urn(#[from] UrnError),
}

/// Sign convention of the Boltzmann factor of a base pair of energy `E < 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum WeightConvention {
    /// `w = e^{-E/RT} > 1`: stable pairs are favoured.
    #[default]
    Stabilizing,
    /// `w = e^{E/RT}` as printed.
    Literal,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RnaModel {
    pub theta: usize,
    pub energy: BigRational,
    pub rt: BigRational,
    pub convention: WeightConvention,
    /// Base-pair weight, rounded to 30 significant digits.
    pub w: BigRational,
}

fn f64_to_rational(x: f64) -> Result<BigRational, RnaError> {
    if !x.is_finite() {
        return Err(RnaError::NotFinite(x));
    }
    Ok(parse_rational(&format!("{x}")).expect("decimal rendering of a finite f64"))
}

impl RnaModel {
    pub fn new(
        theta: usize,
        energy: BigRational,
        rt: BigRational,
        convention: WeightConvention,
    ) -> Result<Self, RnaError> {
        if theta == 0 {
            return Err(RnaError::Theta);
        }
        if !rt.is_positive() {
            return Err(RnaError::Temperature);
        }
        let x = match convention {
            WeightConvention::Stabilizing => -&energy / &rt,
            WeightConvention::Literal => &energy / &rt,
        };
        let w = exp_rational(&x, DEFAULT_SIGNIFICANT_DIGITS);
        Ok(RnaModel {
            theta,
            energy,
            rt,
            convention,
            w,
        })
    }

    /// Model at the default `RT` under the stabilizing convention.
    pub fn standard(theta: usize, energy: f64) -> Result<Self, RnaError> {
        Self::from_f64(theta, energy, DEFAULT_RT, WeightConvention::Stabilizing)
    }

    pub fn from_f64(theta: usize, energy: f64, rt: f64, convention: WeightConvention) -> Result<Self, RnaError> {
        Self::new(theta, f64_to_rational(energy)?, f64_to_rational(rt)?, convention)
    }

    pub fn grammar(&self) -> WeightedGrammar {
        rna_grammar(self.theta, self.w.clone())
    }

    pub fn rho(&self) -> Result<f64, RnaError> {
        rna_rho(&self.w, self.theta)
    }

    pub fn gamma(&self) -> Result<f64, RnaError> {
        rna_gamma(&self.w, self.theta)
    }

    pub fn spectrum(&self, n: usize) -> WeightSpectrum {
        WeightSpectrum::from_pairs(n, class_counts_by_pairs(n, self.theta, &self.w))
    }
}

/// `S -> ( T ) S | . S | _` and `T -> ( T ) S | . T | .^θ`, with weight `w`
/// on `(`.
pub fn rna_grammar(theta: usize, w: BigRational) -> WeightedGrammar {
    assert!(theta >= 1, "theta must be at least 1");
    let dots = vec!["."; theta];
    GrammarBuilder::new("S")
        .terminal("(", w)
        .terminal(")", BigRational::one())
        .terminal(".", BigRational::one())
        .rule("S", &["(", "T", ")", "S"])
        .rule("S", &[".", "S"])
        .rule("S", &[])
        .rule("T", &["(", "T", ")", "S"])
        .rule("T", &[".", "T"])
        .rule("T", &dots)
        .build()
        .expect("rna grammar is well formed")
}

fn q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// The discriminant `Δ_{w,θ}(z)`.
pub fn rna_delta(w: &BigRational, theta: usize) -> Polynomial<BigRational> {
    let mut c = vec![BigRational::zero(); 2 * theta + 5];
    let one = BigRational::one();
    c[0] += &one;
    c[1] += q(-4);
    c[2] += q(6) - q(2) * w;
    c[3] += q(4) * (w - &one);
    c[4] += Pow::pow(&(w - &one), 2u32);
    c[theta + 2] -= q(2) * w;
    c[theta + 3] += q(4) * w;
    c[theta + 4] -= q(2) * w * (&one + w);
    c[2 * theta + 4] += w * w;
    Polynomial::new(c)
}

/// Taylor coefficients of `(1 - 2z + (w+1)z² - w z^{θ+2} - √Δ) / (2w z² (1-z))`,
/// which equal `Π_w(n)`. The printed closed form lacks the factor `w` in the
/// denominator; its series is `w Π_w(n)`.
pub fn closed_form_series(w: &BigRational, theta: usize, len: usize) -> Vec<BigRational> {
    let delta = rna_delta(w, theta);
    let root = series_sqrt(delta.coeffs(), len + 3);
    let mut num: Vec<BigRational> = root.iter().map(|c| -c).collect();
    num[0] += BigRational::one();
    num[1] += q(-2);
    num[2] += w + BigRational::one();
    if theta + 2 < num.len() {
        num[theta + 2] -= w;
    }
    // numerator vanishes to order 2; divide by z², then by (1-z) via prefix sums
    debug_assert!(num[0].is_zero() && num[1].is_zero());
    let two_w = q(2) * w;
    let mut acc = BigRational::zero();
    (0..len)
        .map(|n| {
            acc += &num[n + 2];
            &acc / &two_w
        })
        .collect()
}

/// Smallest root of `Δ_{w,θ}` in `(0, 1)`: the dominant singularity `ρ_w`.
pub fn rna_rho(w: &BigRational, theta: usize) -> Result<f64, RnaError> {
    let delta = rna_delta(w, theta);
    let sturm = SturmChain::new(&delta);
    let coarse = BigRational::new(BigInt::one(), BigInt::from(1024));
    let fine = BigRational::new(BigInt::one(), BigInt::from(10u64).pow(16u32));
    match sturm.smallest_root(&BigRational::zero(), &BigRational::one(), &coarse) {
        Some((mut a, mut b)) => {
            let positive_at_a = delta.eval(&a).is_positive();
            if positive_at_a == delta.eval(&b).is_positive() {
                // even multiplicity: stay with root counting
                let (a, b) = sturm.smallest_root(&a, &b, &fine).expect("bracket holds a root");
                return Ok(rational_to_f64(&((a + b) / q(2))));
            }
            // simple crossing: bisect on the sign of Δ, cheaper than the chain
            while &b - &a > fine {
                let mid = (&a + &b) / q(2);
                if delta.eval(&mid).is_positive() == positive_at_a {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            Ok(rational_to_f64(&((a + b) / q(2))))
        }
        None => Err(RnaError::NoRoot(
            (0..=10)
                .map(|j| {
                    let z = j as f64 / 10.0;
                    (z, delta.eval_f64(z))
                })
                .collect(),
        )),
    }
}

/// Square-root singularity data: `Π_w(n) ~ κ ρ^{-n} n^{-3/2}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RnaSingularity {
    pub rho: f64,
    pub kappa: f64,
}

/// With `Δ(z) ≈ -ρΔ'(ρ)(1 - z/ρ)` near `ρ`, the coefficients of `-√Δ / Q`
/// are `√(-ρΔ'(ρ)) / (2√π Q(ρ)) ρ^{-n} n^{-3/2}` for `Q = 2w z² (1-z)`.
pub fn rna_singularity(w: &BigRational, theta: usize) -> Result<RnaSingularity, RnaError> {
    let rho = rna_rho(w, theta)?;
    let slope = rna_delta(w, theta).derivative().eval_f64(rho);
    let wf = rational_to_f64(w);
    let qrho = 2.0 * wf * rho * rho * (1.0 - rho);
    Ok(RnaSingularity {
        rho,
        kappa: (-rho * slope).sqrt() / (2.0 * PI.sqrt() * qrho),
    })
}

/// `√ρ_{w²} / ρ_w`, the exponential base of the first-collision time.
pub fn rna_gamma(w: &BigRational, theta: usize) -> Result<f64, RnaError> {
    Ok(rna_rho(&(w * w), theta)?.sqrt() / rna_rho(w, theta)?)
}

/// First-order first collision `c γ^n / n^{3/4}` with
/// `c = √(π/2) κ_w / √κ_{w²}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CollisionAsymptote {
    pub constant: f64,
    pub gamma: f64,
}

impl CollisionAsymptote {
    pub fn at(&self, n: usize) -> f64 {
        let nf = n as f64;
        self.constant * self.gamma.powf(nf) / nf.powf(0.75)
    }
}

pub fn collision_asymptote(w: &BigRational, theta: usize) -> Result<CollisionAsymptote, RnaError> {
    let s1 = rna_singularity(w, theta)?;
    let s2 = rna_singularity(&(w * w), theta)?;
    Ok(CollisionAsymptote {
        constant: (PI / 2.0).sqrt() * s1.kappa / s2.kappa.sqrt(),
        gamma: s2.rho.sqrt() / s1.rho,
    })
}

/// `N(a, b) = C(a, b) C(a, b-1) / a`, Dyck words with `a` up steps and `b`
/// peaks; `N(0, 0) = 1`.
pub fn narayana(a: u64, b: u64) -> BigUint {
    if a == 0 {
        return if b == 0 { BigUint::one() } else { BigUint::zero() };
    }
    if b == 0 || b > a {
        return BigUint::zero();
    }
    let big = |x: u64| BigUint::from(x);
    binomial(big(a), big(b)) * binomial(big(a), big(b - 1)) / big(a)
}

/// `s[k][i]`: structures of length `n` with `k` base pairs and `i` plateaux,
/// `N(k, i) · C(n - θi, 2k)`.
///
/// Stripping `θ` dots from every plateau leaves a Motzkin word of length
/// `n - θi` whose Dyck skeleton has `k` up steps and `i` peaks, and dots can
/// be inserted anywhere in that skeleton. The printed formula swaps `k` and
/// `i` and strips `θk` dots, which undercounts, e.g. `((.))` at `θ = 1`.
pub fn structure_counts(n: usize, theta: usize) -> Vec<Vec<BigUint>> {
    let n = n as u64;
    let t = theta as u64;
    let kmax = n / 2;
    (0..=kmax)
        .map(|k| {
            (0..=k)
                .map(|i| {
                    let used = 2 * k + t * i;
                    if used > n {
                        return BigUint::zero();
                    }
                    narayana(k, i) * binomial(BigUint::from(n - t * i), BigUint::from(2 * k))
                })
                .collect()
        })
        .collect()
}

/// Weight classes `(w^k, Σ_i s[k][i])` with nonzero multiplicity.
pub fn class_counts_by_pairs(n: usize, theta: usize, w: &BigRational) -> Vec<(BigRational, BigUint)> {
    structure_counts(n, theta)
        .into_iter()
        .enumerate()
        .filter_map(|(k, row)| {
            let c: BigUint = row.into_iter().sum();
            (!c.is_zero()).then(|| (Pow::pow(w, k as u32), c))
        })
        .collect()
}

/// Urn analytics of length-`n` structures after `k_draws` samples, with the
/// first-order growth constants of the model.
pub fn rna_report(model: &RnaModel, n: usize, k_draws: u64) -> Result<AnalyticsReport, RnaError> {
    let u = from_spectrum(&model.spectrum(n))?;
    let mut rep = analyze(&u, Some(n), k_draws)?;
    let s1 = rna_singularity(&model.w, model.theta)?;
    let ca = collision_asymptote(&model.w, model.theta)?;
    rep.push(
        ReportRow::new("rho_w", Method::Exact, None, None)
            .value(s1.rho)
            .note("smallest root of the discriminant"),
    );
    rep.push(ReportRow::new("gamma", Method::Exact, None, None).value(ca.gamma));
    rep.push(
        ReportRow::new("first_collision", Method::Estimate, Some(n), None)
            .value(ca.at(n))
            .note(format!("{:.4} * {:.4}^n / n^(3/4)", ca.constant, ca.gamma)),
    );
    let s_unit = rna_singularity(&BigRational::one(), model.theta)?;
    let min_w = u.classes()[0].weight.clone();
    let nf = n as f64;
    let core = s1.kappa * s1.rho.powf(-nf) / rational_to_f64(&min_w);
    let lower = core / nf.powf(1.5);
    let upper = 2.0 * (1.0 / s_unit.rho).ln() * core / nf.sqrt();
    rep.push(
        ReportRow::new("full_collection", Method::Asymptotic, Some(n), None)
            .bounds(lower, upper)
            .note(format!("kappa {:.4}, 1/rho {:.4}", s1.kappa, 1.0 / s1.rho)),
    );
    Ok(rep)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub n: usize,
    pub k: u64,
    pub expected_distinct: f64,
    pub expected_coverage: f64,
    /// `E[N] / k`.
    pub distinct_fraction: f64,
}

/// Coverage and distinct counts after `k` draws for every `n` in `ns`.
pub fn rna_sweep(model: &RnaModel, ns: RangeInclusive<usize>, k: u64) -> Result<Vec<SweepRow>, RnaError> {
    ns.into_par_iter()
        .map(|n| {
            let u = from_spectrum(&model.spectrum(n))?;
            let d = expected_distinct(&u, k).expected.value;
            Ok(SweepRow {
                n,
                k,
                expected_distinct: d,
                expected_coverage: expected_coverage(&u, k).value,
                distinct_fraction: if k == 0 { 0.0 } else { d / k as f64 },
            })
        })
        .collect()
}
