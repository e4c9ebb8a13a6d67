//! Numeric singularity analysis of coefficient sequences
//! `c_n ~ κ ρ^{-n} n^{-k}`, the growth base of the first collision, heuristic
//! checks of the three growth conditions, and the collision and collection
//! envelopes.

use std::f64::consts::PI;
use std::fmt;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Pow, ToPrimitive, Zero};
use thiserror::Error;

use crate::counting::{exact_counts, extremal_weights, CountingError, Extremum};
use crate::grammar::NormalizedGrammar;
use crate::numeric::harmonic::harmonic;
use crate::sampler::float_table;
use crate::scalar::{ln_rational, WideFloat};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AsymptoticsError {
    #[error("need at least {needed} coefficients, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("coefficient {0} is not positive")]
    NonPositive(usize),
    #[error(transparent)]
    Counting(#[from] CountingError),
}

/// Fewest coefficients accepted by [`estimate_singularity`].
pub const MIN_TERMS: usize = 64;
/// Order of the Richardson extrapolation of coefficient ratios.
const RICHARDSON_ORDER: usize = 6;
/// Relative agreement required between the even and odd ratio limits.
const PARITY_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct SingularityEstimate {
    pub rho: f64,
    pub kappa: f64,
    /// Polynomial exponent `k` in `n^{-k}`.
    pub k_exp: f64,
    /// `ρ` from even and odd indices separately.
    pub rho_even: f64,
    pub rho_odd: f64,
    /// Change of the extrapolated ratio between the last two orders.
    pub extrapolation_error: f64,
    /// Number of terms in the log-log fit.
    pub tail_len: usize,
    /// Root mean square residual of the log-log fit.
    pub residual: f64,
    pub converged: bool,
}

impl fmt::Display for SingularityEstimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "rho        {:.12}", self.rho)?;
        writeln!(f, "1/rho      {:.12}", 1.0 / self.rho)?;
        writeln!(f, "kappa      {:.9}", self.kappa)?;
        writeln!(f, "k          {:.9}", self.k_exp)?;
        writeln!(f, "rho even   {:.12}", self.rho_even)?;
        writeln!(f, "rho odd    {:.12}", self.rho_odd)?;
        writeln!(f, "extrap err {:.3e}", self.extrapolation_error)?;
        writeln!(
            f,
            "tail       {} terms, rms residual {:.3e}",
            self.tail_len, self.residual
        )?;
        write!(f, "converged  {}", self.converged)
    }
}

/// Value at `x = 0` of the polynomial through `(xs[i], ys[i])`, and the
/// same extrapolation one order lower.
fn neville_at_zero(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let mut p = ys.to_vec();
    let n = xs.len();
    let mut prev = p[0];
    for level in 1..n {
        prev = p[0];
        for i in 0..n - level {
            let (a, b) = (xs[i], xs[i + level]);
            p[i] = (b * p[i] - a * p[i + 1]) / (b - a);
        }
    }
    (p[0], prev)
}

/// Limit of `c_n / c_{n-2}` over indices of one parity, extrapolated in `1/n`.
fn ratio_limit(ln_c: &[f64], parity: usize) -> (f64, f64) {
    let last = ln_c.len() - 1;
    let top = if last % 2 == parity { last } else { last - 1 };
    let step = 2 * (ln_c.len() / (4 * RICHARDSON_ORDER)).max(1);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for j in 0..=RICHARDSON_ORDER {
        let n = top - j * step;
        xs.push(1.0 / n as f64);
        ys.push((ln_c[n] - ln_c[n - 2]).exp());
    }
    neville_at_zero(&xs, &ys)
}

/// Estimates `(ρ, κ, k)` from natural logarithms of the coefficients
/// `c_0, c_1, ...`. The terms used (the last three quarters) must be finite.
pub fn estimate_singularity_ln(ln_c: &[f64]) -> Result<SingularityEstimate, AsymptoticsError> {
    if ln_c.len() < MIN_TERMS {
        return Err(AsymptoticsError::InsufficientData {
            needed: MIN_TERMS,
            got: ln_c.len(),
        });
    }
    let start = ln_c.len() / 4;
    if let Some(i) = (start..ln_c.len()).find(|&i| !ln_c[i].is_finite()) {
        return Err(AsymptoticsError::NonPositive(i));
    }
    let (even, even_lower) = ratio_limit(ln_c, 0);
    let (odd, odd_lower) = ratio_limit(ln_c, 1);
    let rho_even = even.powf(-0.5);
    let rho_odd = odd.powf(-0.5);
    let rho = 0.5 * (rho_even + rho_odd);
    let extrapolation_error = ((even - even_lower) / even).abs().max(((odd - odd_lower) / odd).abs());

    // ln c_n + n ln ρ = ln κ - k ln n on the last quarter
    let lr = rho.ln();
    let from = (3 * ln_c.len()).div_ceil(4).max(1);
    let pts: Vec<(f64, f64)> = (from..ln_c.len())
        .map(|n| ((n as f64).ln(), ln_c[n] + n as f64 * lr))
        .collect();
    let len = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / len;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / len;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum::<f64>() / len).sqrt();
    Ok(SingularityEstimate {
        rho,
        kappa: intercept.exp(),
        k_exp: -slope,
        rho_even,
        rho_odd,
        extrapolation_error,
        tail_len: pts.len(),
        residual,
        converged: ((rho_even - rho_odd) / rho).abs() < PARITY_TOL && extrapolation_error < PARITY_TOL,
    })
}

/// [`estimate_singularity_ln`] on plain coefficients.
pub fn estimate_singularity(coeffs: &[f64]) -> Result<SingularityEstimate, AsymptoticsError> {
    let ln_c: Vec<f64> = coeffs
        .iter()
        .map(|&c| if c > 0.0 { c.ln() } else { f64::NEG_INFINITY })
        .collect();
    estimate_singularity_ln(&ln_c)
}

/// `Π_W(0..n_terms)` in wide floating point.
pub fn coefficient_tail(g: &NormalizedGrammar, w: &[BigRational], n_terms: usize) -> Vec<WideFloat> {
    float_table(g, w, n_terms.saturating_sub(1)).totals()
}

fn powered(w: &[BigRational], k: u32) -> Vec<BigRational> {
    w.iter().map(|x| Pow::pow(x, k)).collect()
}

/// Singularity estimate of `Π_{W^k}`.
pub fn grammar_singularity(
    g: &NormalizedGrammar,
    w: &[BigRational],
    k: u32,
    n_terms: usize,
) -> Result<SingularityEstimate, AsymptoticsError> {
    let ln_c: Vec<f64> = coefficient_tail(g, &powered(w, k), n_terms)
        .into_iter()
        .map(WideFloat::ln)
        .collect();
    estimate_singularity_ln(&ln_c)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GammaEstimate {
    /// Exponential base of the first-collision time, `√ρ_{W²} / ρ_W`.
    pub gamma: f64,
    pub w: SingularityEstimate,
    pub w2: SingularityEstimate,
}

/// Growth base of `E[B_n] ≈ Π_W(n) / √Π_{W²}(n)`. As `Π_W(n)` grows like
/// `ρ_W^{-n}` this base is `√ρ_{W²} / ρ_W`; it exceeds 1 under the growth
/// conditions.
pub fn growth_gamma(
    g: &NormalizedGrammar,
    w: &[BigRational],
    n_terms: usize,
) -> Result<GammaEstimate, AsymptoticsError> {
    let e1 = grammar_singularity(g, w, 1, n_terms)?;
    let e2 = grammar_singularity(g, w, 2, n_terms)?;
    Ok(GammaEstimate {
        gamma: e2.rho.sqrt() / e1.rho,
        w: e1,
        w2: e2,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiversityProbe {
    /// `(n, p_max(n))` at the probe ladder.
    pub samples: Vec<(usize, f64)>,
    /// Fitted `β` in `p_max(n) ≈ C β^{-n}`.
    pub beta: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DependencyProbe {
    pub k: u32,
    /// `ρ_W^k`.
    pub rho_w_pow: f64,
    /// `ρ_{W^k}`.
    pub rho_wk: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionReport {
    pub c1: DiversityProbe,
    /// Every terminal weight exceeds 1 (exact).
    pub c2: bool,
    pub c3: Vec<DependencyProbe>,
}

impl ConditionReport {
    pub fn all_hold(&self) -> bool {
        self.c1.holds && self.c2 && self.c3.iter().all(|p| p.holds)
    }
}

impl fmt::Display for ConditionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let yes = |b: bool| if b { "holds" } else { "fails" };
        writeln!(
            f,
            "C1 diversity (heuristic): {}, beta = {:.6}",
            yes(self.c1.holds),
            self.c1.beta
        )?;
        for (n, p) in &self.c1.samples {
            writeln!(f, "  p_max({n}) = {p:.6e}")?;
        }
        writeln!(f, "C2 weights > 1 (exact): {}", yes(self.c2))?;
        if !self.c2 {
            writeln!(
                f,
                "  rescaling all weights by a common factor leaves the distribution unchanged"
            )?;
        }
        for p in &self.c3 {
            writeln!(
                f,
                "C3 k={} (heuristic): {}, rho_W^k = {:.9}, rho_W^k' = {:.9}",
                p.k,
                yes(p.holds),
                p.rho_w_pow,
                p.rho_wk
            )?;
        }
        Ok(())
    }
}

fn probe_ladder(n_probe: usize) -> Vec<usize> {
    let mut ladder: Vec<usize> = std::iter::successors(Some(8usize), |&n| Some(n * 2))
        .take_while(|&n| n <= n_probe)
        .collect();
    if ladder.len() < 2 {
        ladder = ((n_probe / 2).max(1)..=n_probe.max(2)).collect();
    }
    ladder
}

/// Heuristic probes of the three growth conditions; `n_probe` bounds the
/// exact `p_max` ladder and `n_terms` the coefficient tails.
pub fn check_conditions(
    g: &NormalizedGrammar,
    w: &[BigRational],
    n_probe: usize,
    n_terms: usize,
) -> Result<ConditionReport, AsymptoticsError> {
    let ladder = probe_ladder(n_probe);
    let top = *ladder.last().expect("nonempty ladder");
    let pi = exact_counts(g, w, top)?;
    let maxw = extremal_weights(g, w, top, Extremum::Max);
    let samples: Vec<(usize, f64)> = ladder
        .iter()
        .filter_map(|&n| {
            let m = maxw[n].as_ref()?;
            (!pi.total(n).is_zero()).then(|| (n, ln_rational(&(m / pi.total(n)))))
        })
        .collect();
    let beta = if samples.len() >= 2 {
        let len = samples.len() as f64;
        let mx = samples.iter().map(|s| s.0 as f64).sum::<f64>() / len;
        let my = samples.iter().map(|s| s.1).sum::<f64>() / len;
        let sxy: f64 = samples.iter().map(|s| (s.0 as f64 - mx) * (s.1 - my)).sum();
        let sxx: f64 = samples.iter().map(|s| (s.0 as f64 - mx).powi(2)).sum();
        (-sxy / sxx).exp()
    } else {
        1.0
    };
    let c1 = DiversityProbe {
        samples: samples.iter().map(|&(n, l)| (n, l.exp())).collect(),
        beta,
        holds: beta > 1.0 + 1e-6,
    };
    let c2 = w.iter().all(|x| *x > BigRational::one());
    let mut c3 = Vec::new();
    if c1.holds {
        let base = grammar_singularity(g, w, 1, n_terms)?;
        for k in [2u32, 3] {
            let ek = grammar_singularity(g, w, k, n_terms)?;
            let pow = base.rho.powi(k as i32);
            let tol = 1e-6 + base.extrapolation_error + ek.extrapolation_error;
            c3.push(DependencyProbe {
                k,
                rho_w_pow: pow,
                rho_wk: ek.rho,
                holds: pow < ek.rho * (1.0 - tol),
            });
        }
    } else {
        // tails of polynomially growing languages carry no singularity
        for k in [2u32, 3] {
            c3.push(DependencyProbe {
                k,
                rho_w_pow: f64::NAN,
                rho_wk: f64::NAN,
                holds: false,
            });
        }
    }
    Ok(ConditionReport { c1, c2, c3 })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CollisionEnvelope {
    pub n: usize,
    /// `Π_W(n) √π / √(2 Π_{W²}(n))`, exact inputs.
    pub plug_in: f64,
    /// `√(π/2) (κ_W / √κ_{W²}) γ^n n^{k_{W²}/2 - k_W}` from fitted tails.
    pub fitted: Option<f64>,
    /// The two differ by more than 5%.
    pub disagree: bool,
}

/// Relative disagreement above which the envelope flags its two versions.
pub const ENVELOPE_DISAGREEMENT: f64 = 0.05;

/// Finite-`n` plug-in `√(π / (2 α_{2,n}))`; with `n_terms > 0` also the
/// version built from the fitted singularity data.
pub fn collision_envelope(
    g: &NormalizedGrammar,
    w: &[BigRational],
    n: usize,
    n_terms: usize,
) -> Result<CollisionEnvelope, AsymptoticsError> {
    let p1 = exact_counts(g, w, n)?.total(n).clone();
    if p1.is_zero() {
        return Err(CountingError::EmptyLanguage(n).into());
    }
    let p2 = exact_counts(g, &powered(w, 2), n)?.total(n).clone();
    let ln_val = ln_rational(&p1) - 0.5 * ln_rational(&p2) + 0.5 * (PI / 2.0).ln();
    let plug_in = ln_val.exp();
    let fitted = if n_terms > 0 {
        let g = growth_gamma(g, w, n_terms)?;
        let nf = n as f64;
        let l = 0.5 * (PI / 2.0).ln() + g.w.kappa.ln() - 0.5 * g.w2.kappa.ln()
            + nf * g.gamma.ln()
            + (0.5 * g.w2.k_exp - g.w.k_exp) * nf.ln();
        Some(l.exp())
    } else {
        None
    };
    let disagree = fitted.is_some_and(|f| ((f - plug_in) / plug_in).abs() > ENVELOPE_DISAGREEMENT);
    Ok(CollisionEnvelope {
        n,
        plug_in,
        fitted,
        disagree,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CollectionEnvelope {
    pub n: usize,
    /// `Π_W(n) / μ∇(n)` and `2 H_{M_n} Π_W(n) / μ∇(n)`.
    pub finite_lower: WideFloat,
    pub finite_upper: WideFloat,
    /// `κ ρ^{-n} / (μ∇ n^k)`.
    pub lower: WideFloat,
    /// `2 log(1/ρ₁) κ ρ^{-n} / (μ∇ n^{k-1})`, with `ρ₁` the singularity of the
    /// unweighted counts (the `H_{M_n}` factor grows like `n log(1/ρ₁)`).
    pub upper: WideFloat,
    /// `M_n H_{M_n}` when all weights are 1.
    pub uniform_exact: Option<f64>,
    pub weighted: SingularityEstimate,
    pub unweighted: SingularityEstimate,
}

pub fn collection_envelope(
    g: &NormalizedGrammar,
    w: &[BigRational],
    n: usize,
    n_terms: usize,
) -> Result<CollectionEnvelope, AsymptoticsError> {
    let pi = exact_counts(g, w, n)?.total(n).clone();
    let Some(Some(min_w)) = extremal_weights(g, w, n, Extremum::Min).pop() else {
        return Err(CountingError::EmptyLanguage(n).into());
    };
    let ones = vec![BigRational::one(); w.len()];
    let m_n = exact_counts(g, &ones, n)?.total(n).to_integer();
    let h = match m_n.to_f64().filter(|m| m.is_finite()) {
        Some(m) => harmonic(m.round()),
        None => WideFloat::from_rational(&BigRational::from_integer(m_n.clone())).ln() + 0.577_215_664_901_532_9,
    };
    let ratio = WideFloat::from_rational(&(pi / &min_w));
    let weighted = grammar_singularity(g, w, 1, n_terms)?;
    let unweighted = grammar_singularity(g, &ones, 1, n_terms)?;
    let nf = n as f64;
    let ln_core = weighted.kappa.ln() - nf * weighted.rho.ln() - ln_rational(&min_w);
    let lower = WideFloat::from_ln(ln_core - weighted.k_exp * nf.ln());
    let upper =
        WideFloat::from_ln((2.0 * (1.0 / unweighted.rho).ln()).ln() + ln_core - (weighted.k_exp - 1.0) * nf.ln());
    let uniform_exact = w
        .iter()
        .all(|x| x.is_one())
        .then(|| m_n.to_biguint().and_then(|m: BigUint| m.to_f64()).map(|m| m * h))
        .flatten();
    Ok(CollectionEnvelope {
        n,
        finite_lower: ratio,
        finite_upper: ratio * WideFloat::from_f64(2.0 * h),
        lower,
        upper,
        uniform_exact,
        weighted,
        unweighted,
    })
}
