//! Dense univariate polynomials, Sturm-chain root isolation over exact
//! rationals, and truncated power-series helpers.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::scalar::Scalar;

/// Polynomial with coefficients in ascending degree order.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial<S> {
    coeffs: Vec<S>,
}

impl<S: Scalar> Polynomial<S> {
    pub fn new(mut coeffs: Vec<S>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(S::zero());
        }
        Polynomial { coeffs }
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_zero()
    }

    /// Horner evaluation.
    pub fn eval(&self, x: &S) -> S {
        self.coeffs
            .iter()
            .rev()
            .fold(S::zero(), |acc, c| acc.mul_ref(x).add_ref(c))
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c.mul_ref(&S::from_natural(&(i as u64).into())))
            .collect();
        Polynomial::new(coeffs)
    }

    /// Evaluates in `f64` regardless of the coefficient type.
    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c.to_f64())
    }
}

impl Polynomial<BigRational> {
    fn leading(&self) -> &BigRational {
        self.coeffs.last().expect("nonempty")
    }

    /// Remainder of Euclidean division by a nonzero polynomial.
    pub fn rem(&self, divisor: &Self) -> Self {
        assert!(!divisor.is_zero(), "division by the zero polynomial");
        let mut r = self.coeffs.clone();
        let dd = divisor.degree();
        let lead = divisor.leading().clone();
        while r.len() > dd && !(r.len() == 1 && r[0].is_zero()) {
            let top = r.len() - 1;
            let factor = &r[top] / &lead;
            if !factor.is_zero() {
                for (i, c) in divisor.coeffs.iter().enumerate() {
                    let idx = top - dd + i;
                    r[idx] = &r[idx] - &factor * c;
                }
            }
            r.pop();
            if r.is_empty() {
                break;
            }
        }
        Polynomial::new(r)
    }

    /// Scales by the reciprocal of |leading coefficient|; signs are kept.
    fn normalized(self) -> Self {
        let lead = self.leading().abs();
        if lead.is_zero() {
            return self;
        }
        Polynomial::new(self.coeffs.iter().map(|c| c / &lead).collect())
    }
}

/// Sturm sequence of a rational polynomial, used to count distinct real roots.
#[derive(Clone, Debug)]
pub struct SturmChain {
    chain: Vec<Polynomial<BigRational>>,
}

impl SturmChain {
    pub fn new(p: &Polynomial<BigRational>) -> Self {
        let mut chain = vec![p.clone().normalized()];
        let d = p.derivative();
        if !d.is_zero() {
            chain.push(d.normalized());
            loop {
                let n = chain.len();
                let r = chain[n - 2].rem(&chain[n - 1]);
                if r.is_zero() {
                    break;
                }
                let neg = Polynomial::new(r.coeffs.iter().map(|c| -c).collect());
                chain.push(neg.normalized());
            }
        }
        SturmChain { chain }
    }

    fn variations(&self, x: &BigRational) -> usize {
        let mut count = 0;
        let mut last: Option<bool> = None;
        for p in &self.chain {
            let v = p.eval(x);
            if v.is_zero() {
                continue;
            }
            let positive = v.is_positive();
            if let Some(prev) = last {
                if prev != positive {
                    count += 1;
                }
            }
            last = Some(positive);
        }
        count
    }

    /// Number of distinct real roots in the half-open interval `(a, b]`.
    pub fn count_roots(&self, a: &BigRational, b: &BigRational) -> usize {
        self.variations(a).saturating_sub(self.variations(b))
    }

    /// Brackets the smallest root in `(lo, hi]` to width `tol` by bisection on
    /// root counts. Returns the bracket, or `None` when the interval has no root.
    pub fn smallest_root(
        &self,
        lo: &BigRational,
        hi: &BigRational,
        tol: &BigRational,
    ) -> Option<(BigRational, BigRational)> {
        if self.count_roots(lo, hi) == 0 {
            return None;
        }
        let two = BigRational::from_integer(BigInt::from(2));
        let (mut a, mut b) = (lo.clone(), hi.clone());
        while &(&b - &a) > tol {
            let mid = (&a + &b) / &two;
            if self.count_roots(&a, &mid) > 0 {
                b = mid;
            } else {
                a = mid;
            }
        }
        Some((a, b))
    }
}

/// Square root of a power series with constant term 1, truncated to `len` terms.
pub fn series_sqrt(f: &[BigRational], len: usize) -> Vec<BigRational> {
    assert!(
        f.first().is_some_and(|c| c.is_one()),
        "series_sqrt needs constant term 1"
    );
    let coeff = |i: usize| f.get(i).cloned().unwrap_or_else(BigRational::zero);
    let two = BigRational::from_integer(BigInt::from(2));
    let mut g: Vec<BigRational> = Vec::with_capacity(len);
    if len == 0 {
        return g;
    }
    g.push(BigRational::one());
    for n in 1..len {
        // f_n = sum_{i+j=n} g_i g_j = 2 g_0 g_n + sum_{0<i<n} g_i g_{n-i}
        let mut acc = coeff(n);
        for i in 1..n {
            acc -= &g[i] * &g[n - i];
        }
        g.push(acc / &two);
    }
    g
}
