//! Random generation of words of a fixed length under the weighted
//! distribution `P(w) = π(w) / Π_W(n)`, by the recursive method.
//!
//! Two precision policies share the same code:
//!
//! * exact: weights are multiplied by the lcm `D` of their denominators, which
//!   rescales every `Π(m)` by `D^m` and leaves all probabilities unchanged;
//!   counts are then naturals and each choice draws a uniform integer below
//!   the exact total, so words come out with exactly the target probability.
//! * float: counts are [`WideFloat`]s and each choice compares a uniform
//!   53-bit draw against cumulative weights; the per-choice bias is at most
//!   `2^(1-53)`.
//!
//! Choices are made by a linear scan over the alternatives of a nonterminal
//! and, for `A -> B C`, over split points, so one choice costs `O(n)`.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint, RandBigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::counting::CountTable;
use crate::grammar::{NormRhs, NormalizedGrammar, WeightedGrammar, Word};
use crate::numeric::decimal::lcm_of_denominators;
use crate::scalar::{natural_to_rational, Scalar, WideFloat};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SamplerError {
    #[error("no word of length {0}")]
    EmptyLanguage(usize),
    #[error("length {n} is beyond the count table horizon {horizon}")]
    BeyondHorizon { n: usize, horizon: usize },
    #[error("unknown terminal index {0}")]
    UnknownTerminal(usize),
    #[error("decision tree has more than {0} leaves")]
    CapExceeded(usize),
}

/// Scalars the sampler can draw against.
pub trait SampleScalar: Scalar {
    /// A value uniform in `[0, bound)`; `bound` is positive.
    fn uniform_below<R: Rng + ?Sized>(bound: &Self, rng: &mut R) -> Self;
}

impl SampleScalar for BigUint {
    fn uniform_below<R: Rng + ?Sized>(bound: &Self, rng: &mut R) -> Self {
        rng.gen_biguint_below(bound)
    }
}

impl SampleScalar for WideFloat {
    fn uniform_below<R: Rng + ?Sized>(bound: &Self, rng: &mut R) -> Self {
        WideFloat::from_f64(rng.gen::<f64>()) * *bound
    }
}

impl SampleScalar for f64 {
    fn uniform_below<R: Rng + ?Sized>(bound: &Self, rng: &mut R) -> Self {
        rng.gen::<f64>() * bound
    }
}

/// One derivation step: a rule, plus the length of `B` for `A -> B C`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Choice {
    pub rule: usize,
    pub split: usize,
}

/// All derivation steps available to nonterminal `a` at length `m`, with the
/// total weight of their completions, in scan order.
pub fn choices<S: Scalar>(table: &CountTable<S>, a: usize, m: usize) -> impl Iterator<Item = (Choice, S)> + '_ {
    let g = table.grammar();
    g.rule_indices(a).iter().flat_map(move |&rule| {
        let rhs = g.rules()[rule].rhs;
        let range = match rhs {
            NormRhs::Pair(..) if m >= 2 => 1..m,
            NormRhs::Terminal(_) if m == 1 => 0..1,
            NormRhs::Empty if m == 0 => 0..1,
            _ => 0..0,
        };
        range.filter_map(move |k| {
            let w = match rhs {
                NormRhs::Pair(..) => table.split_weight(rule, k, m),
                _ => table.rule_weight(rule, m),
            };
            (!w.is_zero()).then_some((Choice { rule, split: k }, w))
        })
    })
}

/// Applies a choice: emits a terminal or returns the two sub-tasks.
fn apply(g: &NormalizedGrammar, c: Choice, m: usize, out: &mut Word, stack: &mut Vec<(usize, usize)>) {
    match g.rules()[c.rule].rhs {
        NormRhs::Pair(b, cc) => {
            stack.push((cc, m - c.split));
            stack.push((b, c.split));
        }
        NormRhs::Terminal(t) => out.push(t),
        NormRhs::Empty => {}
    }
}

/// Sampler state: a shared count table and a seeded ChaCha20 stream.
#[derive(Clone, Debug)]
pub struct Sampler<S> {
    table: Arc<CountTable<S>>,
    rng: ChaCha20Rng,
}

impl<S: SampleScalar> Sampler<S> {
    pub fn new(table: Arc<CountTable<S>>, seed: u64) -> Self {
        Self::with_stream(table, seed, 0)
    }

    /// Independent substream `stream` of the generator seeded with `seed`.
    pub fn with_stream(table: Arc<CountTable<S>>, seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Sampler { table, rng }
    }

    pub fn table(&self) -> &CountTable<S> {
        &self.table
    }

    pub fn sample_word(&mut self, n: usize) -> Result<Word, SamplerError> {
        let table = &*self.table;
        if n > table.horizon() {
            return Err(SamplerError::BeyondHorizon {
                n,
                horizon: table.horizon(),
            });
        }
        if table.total(n).is_zero() {
            return Err(SamplerError::EmptyLanguage(n));
        }
        let g = table.grammar();
        let mut out = Vec::with_capacity(n);
        let mut stack = vec![(g.axiom(), n)];
        while let Some((a, m)) = stack.pop() {
            let r = S::uniform_below(table.count(a, m), &mut self.rng);
            let mut cum = S::zero();
            let mut chosen = None;
            let mut last = None;
            for (c, w) in choices(table, a, m) {
                cum.add_assign_ref(&w);
                last = Some(c);
                if r < cum {
                    chosen = Some(c);
                    break;
                }
            }
            // only reachable through float rounding at the very top
            let c = chosen.or(last).expect("positive count has a choice");
            apply(g, c, m, &mut out, &mut stack);
        }
        Ok(out)
    }
}

/// Integer-scaled exact table: weights times the lcm of their denominators.
pub fn exact_table(g: &NormalizedGrammar, w: &[BigRational], horizon: usize) -> CountTable<BigUint> {
    let d = lcm_of_denominators(w);
    let scaled: Vec<BigUint> = w
        .iter()
        .map(|x| {
            let v = (x * BigRational::from_integer(d.clone())).to_integer();
            v.to_biguint().expect("weights are positive")
        })
        .collect();
    CountTable::build(g, &scaled, horizon)
}

pub fn float_table(g: &NormalizedGrammar, w: &[BigRational], horizon: usize) -> CountTable<WideFloat> {
    let wf: Vec<WideFloat> = w.iter().map(WideFloat::from_rational).collect();
    CountTable::build(g, &wf, horizon)
}

/// Draws `count` words in parallel. Words are produced in chunks of fixed
/// size, chunk `i` using substream `i`, so the output does not depend on the
/// number of worker threads.
pub fn sample_many<S: SampleScalar>(
    table: Arc<CountTable<S>>,
    n: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<Word>, SamplerError> {
    const CHUNK: usize = 1024;
    let chunks = count.div_ceil(CHUNK);
    let parts: Vec<Result<Vec<Word>, SamplerError>> = (0..chunks)
        .into_par_iter()
        .map(|i| {
            let mut s = Sampler::with_stream(table.clone(), seed, i as u64);
            let len = CHUNK.min(count - i * CHUNK);
            (0..len).map(|_| s.sample_word(n)).collect()
        })
        .collect();
    let mut out = Vec::with_capacity(count);
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

/// `π(w)`, the product of the letter weights.
pub fn word_weight(g: &WeightedGrammar, word: &[usize]) -> Result<BigRational, SamplerError> {
    if let Some(&t) = word.iter().find(|&&t| t >= g.terminals().len()) {
        return Err(SamplerError::UnknownTerminal(t));
    }
    Ok(g.word_weight(word))
}

/// `π(w) / Π_W(|w|)` from an exact table built with the grammar's weights.
pub fn word_probability(table: &CountTable<BigRational>, word: &[usize]) -> Result<BigRational, SamplerError> {
    let n = word.len();
    if n > table.horizon() {
        return Err(SamplerError::BeyondHorizon {
            n,
            horizon: table.horizon(),
        });
    }
    let total = table.total(n);
    if total.is_zero() {
        return Err(SamplerError::EmptyLanguage(n));
    }
    let nt = table.weights().len();
    if let Some(&t) = word.iter().find(|&&t| t >= nt) {
        return Err(SamplerError::UnknownTerminal(t));
    }
    let w = word
        .iter()
        .fold(BigRational::one(), |acc, &t| acc * &table.weights()[t]);
    Ok(w / total)
}

/// The exact output distribution of the exact sampler at length `n`, found by
/// following every branch of its decision tree with the probability of the
/// branch (`choice weight / current total`) instead of a random draw.
pub fn exact_distribution(
    table: &CountTable<BigUint>,
    n: usize,
    leaf_cap: usize,
) -> Result<BTreeMap<Word, BigRational>, SamplerError> {
    if n > table.horizon() {
        return Err(SamplerError::BeyondHorizon {
            n,
            horizon: table.horizon(),
        });
    }
    if table.total(n).is_zero() {
        return Err(SamplerError::EmptyLanguage(n));
    }
    let mut out = BTreeMap::new();
    let mut leaves = 0usize;
    let stack = vec![(table.grammar().axiom(), n)];
    explore(
        table,
        stack,
        Vec::new(),
        BigRational::one(),
        &mut out,
        &mut leaves,
        leaf_cap,
    )?;
    Ok(out)
}

fn explore(
    table: &CountTable<BigUint>,
    mut stack: Vec<(usize, usize)>,
    word: Word,
    prob: BigRational,
    out: &mut BTreeMap<Word, BigRational>,
    leaves: &mut usize,
    cap: usize,
) -> Result<(), SamplerError> {
    let Some((a, m)) = stack.pop() else {
        *leaves += 1;
        if *leaves > cap {
            return Err(SamplerError::CapExceeded(cap));
        }
        *out.entry(word).or_insert_with(BigRational::zero) += prob;
        return Ok(());
    };
    let total = natural_to_rational(table.count(a, m));
    for (c, w) in choices(table, a, m) {
        let p = &prob * BigRational::from_integer(BigInt::from_biguint(Sign::Plus, w)) / &total;
        let mut st = stack.clone();
        let mut wd = word.clone();
        apply(table.grammar(), c, m, &mut wd, &mut st);
        explore(table, st, wd, p, out, leaves, cap)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::exact_counts;
    use crate::grammar::{builtin, enumerate_words, normalize, parse_grammar};

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn motzkin_table(h: BigRational, n: usize) -> (NormalizedGrammar, Arc<CountTable<BigUint>>) {
        let g = normalize(&builtin::motzkin(h)).unwrap();
        let t = exact_table(&g, &g.original().weights(), n);
        (g, Arc::new(t))
    }

    #[test]
    fn exact_distribution_weighted_motzkin() {
        let (g, t) = motzkin_table(q(2, 1), 4);
        let d = exact_distribution(&t, 2, 100).unwrap();
        let o = g.original();
        assert_eq!(d[&o.parse_word("..").unwrap()], q(4, 5));
        assert_eq!(d[&o.parse_word("()").unwrap()], q(1, 5));
        assert_eq!(d.len(), 2);
    }

    #[test]
    fn exact_distribution_matches_formula() {
        for text in [
            "axiom S\nterminal a weight 3/2\nterminal b\nterminal c weight 1/3\nS -> a S b S | c S | _",
            "axiom S\nterminal x weight 2\nterminal y weight 5/7\nS -> A B | x\nA -> x A | y\nB -> y y B | x | _",
        ] {
            let g = normalize(&parse_grammar(text).unwrap()).unwrap();
            let w = g.original().weights();
            let t = exact_table(&g, &w, 7);
            let r = exact_counts(&g, &w, 7).unwrap();
            for n in 0..=7 {
                let words = enumerate_words(g.original(), n, 10_000).unwrap();
                if words.is_empty() {
                    continue;
                }
                let d = exact_distribution(&t, n, 10_000).unwrap();
                assert_eq!(d.len(), words.len());
                for (word, p) in &d {
                    assert_eq!(*p, word_probability(&r, word).unwrap(), "{text} {word:?}");
                }
            }
        }
    }

    #[test]
    fn seeded_streams_are_reproducible() {
        let (_, t) = motzkin_table(q(2, 1), 30);
        let a = sample_many(t.clone(), 30, 3000, 7).unwrap();
        let b = sample_many(t.clone(), 30, 3000, 7).unwrap();
        let c = sample_many(t, 30, 3000, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn samples_have_length_n_and_are_in_language() {
        let (g, t) = motzkin_table(q(3, 2), 9);
        let lang = enumerate_words(g.original(), 9, 100_000).unwrap();
        let mut s = Sampler::new(t, 1);
        for _ in 0..500 {
            let w = s.sample_word(9).unwrap();
            assert_eq!(w.len(), 9);
            assert!(lang.contains_key(&w));
        }
    }

    #[test]
    fn single_word_languages() {
        let g = normalize(&parse_grammar("axiom S\nterminal a weight 2\nS -> a S | a").unwrap()).unwrap();
        let t = Arc::new(exact_table(&g, &g.original().weights(), 5));
        let mut s = Sampler::new(t.clone(), 3);
        for _ in 0..10 {
            assert_eq!(s.sample_word(5).unwrap(), vec![0; 5]);
        }
        assert_eq!(s.sample_word(0), Err(SamplerError::EmptyLanguage(0)));
        assert!(matches!(s.sample_word(6), Err(SamplerError::BeyondHorizon { .. })));
    }

    #[test]
    fn float_policy_samples_the_same_support() {
        let g = normalize(&builtin::motzkin(q(2, 1))).unwrap();
        let t = Arc::new(float_table(&g, &g.original().weights(), 12));
        let lang = enumerate_words(g.original(), 12, 100_000).unwrap();
        for w in sample_many(t, 12, 200, 5).unwrap() {
            assert!(lang.contains_key(&w));
        }
    }

    #[test]
    fn weights_and_probabilities() {
        let g = builtin::motzkin(q(2, 1));
        assert_eq!(word_weight(&g, &g.parse_word("..(").unwrap()).unwrap(), q(4, 1));
        assert_eq!(word_weight(&g, &g.parse_word("(.)").unwrap()).unwrap(), q(2, 1));
        assert_eq!(word_weight(&g, &[]).unwrap(), q(1, 1));
        assert_eq!(word_weight(&g, &[7]), Err(SamplerError::UnknownTerminal(7)));
        let ng = normalize(&g).unwrap();
        let r = exact_counts(&ng, &g.weights(), 3).unwrap();
        assert_eq!(word_probability(&r, &g.parse_word("...").unwrap()).unwrap(), q(8, 14));
    }
}
