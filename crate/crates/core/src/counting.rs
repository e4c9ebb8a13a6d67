//! Weighted counting `Π_W(n)`, moments of the weighted distribution, and the
//! spectrum of distinct word weights in `L_n`.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Pow, Zero};
use thiserror::Error;

use crate::grammar::{NormRhs, NormalizedGrammar};
use crate::scalar::{natural_to_rational, Scalar};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CountingError {
    #[error("no word of length {0}")]
    EmptyLanguage(usize),
    #[error("more than {cap} weight classes at length {n}")]
    ClassCapExceeded { cap: usize, n: usize },
    #[error("expected {expected} weights, got {got}")]
    WeightCount { expected: usize, got: usize },
}

/// `Π` values for every nonterminal of a normalized grammar and every length
/// up to a horizon. With unit weights the table counts derivations, i.e.
/// `|L_m|` for an unambiguous grammar.
#[derive(Clone, Debug)]
pub struct CountTable<S> {
    grammar: Arc<NormalizedGrammar>,
    weights: Vec<S>,
    horizon: usize,
    counts: Vec<Vec<S>>,
}

impl<S: Scalar> CountTable<S> {
    /// Fills the table in `O(|rules| · n²)` semiring operations.
    pub fn build(g: &NormalizedGrammar, weights: &[S], horizon: usize) -> Self {
        Self::build_shared(Arc::new(g.clone()), weights, horizon)
    }

    pub fn build_shared(g: Arc<NormalizedGrammar>, weights: &[S], horizon: usize) -> Self {
        assert_eq!(weights.len(), g.terminal_count(), "one weight per terminal");
        let nt = g.nonterminal_count();
        let mults: Vec<S> = g.rules().iter().map(|r| S::from_natural(&r.multiplicity)).collect();
        let mut counts = vec![vec![S::zero(); horizon + 1]; nt];
        for m in 0..=horizon {
            for (r, mult) in g.rules().iter().zip(&mults) {
                let v = match r.rhs {
                    NormRhs::Empty if m == 0 => mult.clone(),
                    NormRhs::Terminal(t) if m == 1 => mult.mul_ref(&weights[t]),
                    NormRhs::Pair(b, c) if m >= 2 => {
                        let mut acc = S::zero();
                        for k in 1..m {
                            let (x, y) = (&counts[b][k], &counts[c][m - k]);
                            if !x.is_zero() && !y.is_zero() {
                                acc.add_assign_ref(&x.mul_ref(y));
                            }
                        }
                        if acc.is_zero() {
                            continue;
                        }
                        acc.mul_ref(mult)
                    }
                    _ => continue,
                };
                counts[r.lhs][m].add_assign_ref(&v);
            }
        }
        CountTable {
            grammar: g,
            weights: weights.to_vec(),
            horizon,
            counts,
        }
    }

    pub fn grammar(&self) -> &NormalizedGrammar {
        &self.grammar
    }

    pub fn shared_grammar(&self) -> Arc<NormalizedGrammar> {
        self.grammar.clone()
    }

    pub fn weights(&self) -> &[S] {
        &self.weights
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// `Π` for nonterminal `a` at length `m`.
    pub fn count(&self, a: usize, m: usize) -> &S {
        &self.counts[a][m]
    }

    /// `Π_W(m)`, the total weight of `L_m`.
    pub fn total(&self, m: usize) -> &S {
        &self.counts[self.grammar.axiom()][m]
    }

    /// `Π_W(0), …, Π_W(horizon)`.
    pub fn totals(&self) -> Vec<S> {
        self.counts[self.grammar.axiom()].clone()
    }

    /// Weight of the completions of rule `rule` at length `m`.
    pub fn rule_weight(&self, rule: usize, m: usize) -> S {
        let r = &self.grammar.rules()[rule];
        let mult = S::from_natural(&r.multiplicity);
        match r.rhs {
            NormRhs::Empty if m == 0 => mult,
            NormRhs::Terminal(t) if m == 1 => mult.mul_ref(&self.weights[t]),
            NormRhs::Pair(..) if m >= 2 => {
                let mut acc = S::zero();
                for k in 1..m {
                    acc.add_assign_ref(&self.split_weight(rule, k, m));
                }
                acc
            }
            _ => S::zero(),
        }
    }

    /// Weight of the completions of pair rule `A -> B C` at length `m` with
    /// `|B| = k`.
    pub fn split_weight(&self, rule: usize, k: usize, m: usize) -> S {
        let r = &self.grammar.rules()[rule];
        match r.rhs {
            NormRhs::Pair(b, c) if k >= 1 && k < m => {
                let x = self.counts[b][k].mul_ref(&self.counts[c][m - k]);
                if r.multiplicity.is_one() {
                    x
                } else {
                    x.mul_ref(&S::from_natural(&r.multiplicity))
                }
            }
            _ => S::zero(),
        }
    }

    /// Split weights of a pair rule for `k = 1..m-1`.
    pub fn split_weights(&self, rule: usize, m: usize) -> Vec<S> {
        (1..m).map(|k| self.split_weight(rule, k, m)).collect()
    }
}

fn check_weights(g: &NormalizedGrammar, w: &[BigRational]) -> Result<(), CountingError> {
    if w.len() != g.terminal_count() {
        return Err(CountingError::WeightCount {
            expected: g.terminal_count(),
            got: w.len(),
        });
    }
    Ok(())
}

/// Exact `Π_W(0..=n)`.
pub fn exact_counts(
    g: &NormalizedGrammar,
    w: &[BigRational],
    n: usize,
) -> Result<CountTable<BigRational>, CountingError> {
    check_weights(g, w)?;
    Ok(CountTable::build(g, w, n))
}

/// `α_{k,n} = Π_{W^k}(n) / Π_W(n)^k`.
pub fn moment(g: &NormalizedGrammar, w: &[BigRational], k: u32, n: usize) -> Result<BigRational, CountingError> {
    assert!(k >= 1, "moment order must be positive");
    check_weights(g, w)?;
    let pi = CountTable::build(g, w, n).total(n).clone();
    if pi.is_zero() {
        return Err(CountingError::EmptyLanguage(n));
    }
    let wk: Vec<BigRational> = w.iter().map(|x| Pow::pow(x, k)).collect();
    let pik = CountTable::build(g, &wk, n).total(n).clone();
    Ok(pik / Pow::pow(&pi, k))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightClass {
    pub weight: BigRational,
    pub multiplicity: BigUint,
    /// Terminal compositions realizing this weight, as letter counts of the
    /// spectrum's weighted terminals.
    pub compositions: Vec<Vec<u32>>,
}

/// Distinct word weights of `L_n` with their multiplicities, sorted by
/// strictly increasing weight. For ambiguous grammars the multiplicities
/// count derivations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightSpectrum {
    pub n: usize,
    /// Terminals with a weight other than 1; compositions are indexed by these.
    pub weighted_terminals: Vec<usize>,
    pub classes: Vec<WeightClass>,
}

impl WeightSpectrum {
    /// Builds a spectrum directly from `(weight, multiplicity)` pairs, merging
    /// equal weights and dropping empty classes.
    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (BigRational, BigUint)>) -> Self {
        let mut merged: BTreeMap<BigRational, BigUint> = BTreeMap::new();
        for (w, m) in pairs {
            if !m.is_zero() {
                *merged.entry(w).or_default() += m;
            }
        }
        WeightSpectrum {
            n,
            weighted_terminals: Vec::new(),
            classes: merged
                .into_iter()
                .map(|(weight, multiplicity)| WeightClass {
                    weight,
                    multiplicity,
                    compositions: Vec::new(),
                })
                .collect(),
        }
    }

    /// `M_n = Σ m_i`.
    pub fn word_count(&self) -> BigUint {
        self.classes.iter().map(|c| &c.multiplicity).sum()
    }

    /// `Π_W(n) = Σ m_i χ_i`.
    pub fn total_weight(&self) -> BigRational {
        self.classes
            .iter()
            .map(|c| &c.weight * natural_to_rational(&c.multiplicity))
            .sum()
    }

    /// `(weight, multiplicity)` pairs.
    pub fn pairs(&self) -> Vec<(BigRational, BigUint)> {
        self.classes
            .iter()
            .map(|c| (c.weight.clone(), c.multiplicity.clone()))
            .collect()
    }
}

/// `(μ∇, μΔ)`: the lightest and heaviest word weights.
pub fn min_max_weight(sp: &WeightSpectrum) -> Option<(BigRational, BigRational)> {
    Some((sp.classes.first()?.weight.clone(), sp.classes.last()?.weight.clone()))
}

type Compositions = HashMap<Vec<u32>, BigUint>;

/// Weight spectrum of `L_n` by a composition DP that tracks letter counts of
/// the non-unit-weight terminals only, followed by merging of equal weights.
pub fn weight_spectrum(
    g: &NormalizedGrammar,
    w: &[BigRational],
    n: usize,
    class_cap: usize,
) -> Result<WeightSpectrum, CountingError> {
    check_weights(g, w)?;
    let weighted: Vec<usize> = (0..w.len()).filter(|&t| !w[t].is_one()).collect();
    let slot: HashMap<usize, usize> = weighted.iter().enumerate().map(|(i, &t)| (t, i)).collect();
    let dims = weighted.len();
    let nt = g.nonterminal_count();
    let mut table: Vec<Vec<Compositions>> = vec![vec![Compositions::new(); n + 1]; nt];
    for m in 0..=n {
        for r in g.rules() {
            let mut add: Compositions = Compositions::new();
            match r.rhs {
                NormRhs::Empty if m == 0 => {
                    add.insert(vec![0; dims], r.multiplicity.clone());
                }
                NormRhs::Terminal(t) if m == 1 => {
                    let mut v = vec![0; dims];
                    if let Some(&s) = slot.get(&t) {
                        v[s] = 1;
                    }
                    add.insert(v, r.multiplicity.clone());
                }
                NormRhs::Pair(b, c) if m >= 2 => {
                    for k in 1..m {
                        let (left, right) = (&table[b][k], &table[c][m - k]);
                        if left.is_empty() || right.is_empty() {
                            continue;
                        }
                        for (u, cu) in left {
                            for (v, cv) in right {
                                let sum: Vec<u32> = u.iter().zip(v).map(|(x, y)| x + y).collect();
                                *add.entry(sum).or_default() += cu * cv * &r.multiplicity;
                            }
                        }
                    }
                }
                _ => continue,
            }
            let cell = &mut table[r.lhs][m];
            for (k, v) in add {
                *cell.entry(k).or_default() += v;
            }
            if cell.len() > class_cap {
                return Err(CountingError::ClassCapExceeded { cap: class_cap, n: m });
            }
        }
    }
    let top = std::mem::take(&mut table[g.axiom()][n]);
    if top.is_empty() {
        return Err(CountingError::EmptyLanguage(n));
    }
    let mut merged: BTreeMap<BigRational, (BigUint, Vec<Vec<u32>>)> = BTreeMap::new();
    for (comp, count) in top {
        let weight = comp
            .iter()
            .zip(&weighted)
            .fold(BigRational::one(), |acc, (&e, &t)| acc * Pow::pow(&w[t], e));
        let entry = merged.entry(weight).or_insert_with(|| (BigUint::zero(), Vec::new()));
        entry.0 += count;
        entry.1.push(comp);
    }
    let classes = merged
        .into_iter()
        .map(|(weight, (multiplicity, mut compositions))| {
            compositions.sort();
            WeightClass {
                weight,
                multiplicity,
                compositions,
            }
        })
        .collect();
    Ok(WeightSpectrum {
        n,
        weighted_terminals: weighted,
        classes,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Extremum {
    Min,
    Max,
}

/// Lightest or heaviest word weight in `L_m` for every `m ≤ n` (`None` when
/// `L_m` is empty), by the same DP over the (min, ×) or (max, ×) semiring.
pub fn extremal_weights(
    g: &NormalizedGrammar,
    w: &[BigRational],
    n: usize,
    which: Extremum,
) -> Vec<Option<BigRational>> {
    let better = |a: &BigRational, b: &BigRational| match which {
        Extremum::Max => a > b,
        Extremum::Min => a < b,
    };
    let nt = g.nonterminal_count();
    let mut best: Vec<Vec<Option<BigRational>>> = vec![vec![None; n + 1]; nt];
    for m in 0..=n {
        for r in g.rules() {
            let cand = match r.rhs {
                NormRhs::Empty if m == 0 => Some(BigRational::one()),
                NormRhs::Terminal(t) if m == 1 => Some(w[t].clone()),
                NormRhs::Pair(b, c) if m >= 2 => {
                    let mut acc: Option<BigRational> = None;
                    for k in 1..m {
                        if let (Some(x), Some(y)) = (&best[b][k], &best[c][m - k]) {
                            let v = x * y;
                            if acc.as_ref().is_none_or(|a| better(&v, a)) {
                                acc = Some(v);
                            }
                        }
                    }
                    acc
                }
                _ => None,
            };
            if let Some(v) = cand {
                let cell = &mut best[r.lhs][m];
                if cell.as_ref().is_none_or(|a| better(&v, a)) {
                    *cell = Some(v);
                }
            }
        }
    }
    std::mem::take(&mut best[g.axiom()])
}
