//! Exhaustive derivation enumeration directly on the source grammar, used as
//! an independent oracle and by the ambiguity probe.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::rc::Rc;

use num_bigint::BigUint;
use num_traits::One;

use super::{normalize, GrammarError, Symbol, WeightedGrammar, Word};
use crate::counting::CountTable;

/// Words of one length with their number of derivations.
pub type WordCounts = BTreeMap<Word, BigUint>;

struct Enumerator<'g> {
    g: &'g WeightedGrammar,
    cap: usize,
    min_len: Vec<usize>,
    rules_of: Vec<Vec<usize>>,
    memo: HashMap<(usize, usize), Rc<WordCounts>>,
    active: HashSet<(usize, usize)>,
}

impl<'g> Enumerator<'g> {
    fn new(g: &'g WeightedGrammar, cap: usize) -> Self {
        let n = g.nonterminals().len();
        let mut rules_of = vec![Vec::new(); n];
        for (i, r) in g.rules().iter().enumerate() {
            rules_of[r.lhs].push(i);
        }
        let mut min_len = vec![usize::MAX; n];
        let mut changed = true;
        while changed {
            changed = false;
            for r in g.rules() {
                let len = r.rhs.iter().try_fold(0usize, |acc, s| match *s {
                    Symbol::Terminal(_) => Some(acc + 1),
                    Symbol::Nonterminal(b) => (min_len[b] != usize::MAX).then(|| acc + min_len[b]),
                });
                if let Some(len) = len {
                    if len < min_len[r.lhs] {
                        min_len[r.lhs] = len;
                        changed = true;
                    }
                }
            }
        }
        Enumerator {
            g,
            cap,
            min_len,
            rules_of,
            memo: HashMap::new(),
            active: HashSet::new(),
        }
    }

    fn min_of(&self, syms: &[Symbol]) -> usize {
        syms.iter()
            .map(|s| match *s {
                Symbol::Terminal(_) => 1,
                Symbol::Nonterminal(b) => self.min_len[b],
            })
            .sum()
    }

    fn check(&self, m: &WordCounts) -> Result<(), GrammarError> {
        if m.len() > self.cap {
            Err(GrammarError::CapExceeded(self.cap))
        } else {
            Ok(())
        }
    }

    fn nonterminal(&mut self, a: usize, n: usize) -> Result<Rc<WordCounts>, GrammarError> {
        if let Some(r) = self.memo.get(&(a, n)) {
            return Ok(r.clone());
        }
        if !self.active.insert((a, n)) {
            return Err(GrammarError::InfiniteAmbiguity(self.g.nonterminals()[a].clone()));
        }
        let mut out = WordCounts::new();
        for ri in self.rules_of[a].clone() {
            let rhs = &self.g.rules()[ri].rhs;
            for (w, c) in self.sequence(rhs, n)? {
                *out.entry(w).or_default() += c;
            }
            self.check(&out)?;
        }
        self.active.remove(&(a, n));
        let out = Rc::new(out);
        self.memo.insert((a, n), out.clone());
        Ok(out)
    }

    fn sequence(&mut self, syms: &[Symbol], n: usize) -> Result<WordCounts, GrammarError> {
        let Some((first, rest)) = syms.split_first() else {
            let mut m = WordCounts::new();
            if n == 0 {
                m.insert(Vec::new(), BigUint::one());
            }
            return Ok(m);
        };
        let rest_min = self.min_of(rest);
        let mut out = WordCounts::new();
        match *first {
            Symbol::Terminal(t) => {
                if n > rest_min {
                    for (w, c) in self.sequence(rest, n - 1)? {
                        let mut word = Vec::with_capacity(n);
                        word.push(t);
                        word.extend(w);
                        out.insert(word, c);
                    }
                }
            }
            Symbol::Nonterminal(b) => {
                let lo = self.min_len[b];
                if n < rest_min {
                    return Ok(out);
                }
                for len in lo..=(n - rest_min) {
                    let left = self.nonterminal(b, len)?;
                    if left.is_empty() {
                        continue;
                    }
                    let right = self.sequence(rest, n - len)?;
                    for (u, cu) in left.iter() {
                        for (v, cv) in &right {
                            let mut w = u.clone();
                            w.extend_from_slice(v);
                            *out.entry(w).or_default() += cu * cv;
                        }
                    }
                    self.check(&out)?;
                }
            }
        }
        Ok(out)
    }
}

/// All words of length `n` with their derivation counts, by recursive descent
/// over the source rules. Fails when more than `cap` distinct words appear in
/// any intermediate set, or when a word has infinitely many derivations.
pub fn enumerate_words(g: &WeightedGrammar, n: usize, cap: usize) -> Result<WordCounts, GrammarError> {
    let mut e = Enumerator::new(g, cap);
    let r = e.nonterminal(g.axiom(), n)?;
    Ok((*r).clone())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AmbiguityReport {
    pub n_max: usize,
    /// First length where the derivation count exceeds the number of
    /// distinct words: `(n, derivations, distinct words)`.
    pub first_mismatch: Option<(usize, BigUint, usize)>,
}

impl fmt::Display for AmbiguityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.first_mismatch {
            None => write!(f, "no ambiguity detected up to n={}", self.n_max),
            Some((n, d, w)) => write!(f, "ambiguity detected at n={n}: {d} derivations for {w} distinct words"),
        }
    }
}

/// Compares the unit-weight count of the DP (which counts derivations) with
/// the number of distinct words found by enumeration, for `n ≤ n_max`.
pub fn ambiguity_probe(g: &WeightedGrammar, n_max: usize, cap: usize) -> Result<AmbiguityReport, GrammarError> {
    let ng = normalize(g)?;
    let ones = vec![BigUint::one(); g.terminals().len()];
    let table = CountTable::build(&ng, &ones, n_max);
    let mut e = Enumerator::new(g, cap);
    for n in 0..=n_max {
        let distinct = e.nonterminal(g.axiom(), n)?.len();
        let derivations = table.total(n).clone();
        if derivations != BigUint::from(distinct) {
            return Ok(AmbiguityReport {
                n_max,
                first_mismatch: Some((n, derivations, distinct)),
            });
        }
    }
    Ok(AmbiguityReport {
        n_max,
        first_mismatch: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::{builtin, parse_grammar};

    #[test]
    fn motzkin_words() {
        let g = builtin::motzkin_uniform();
        let words = enumerate_words(&g, 4, 1000).unwrap();
        assert_eq!(words.len(), 9);
        assert!(words.values().all(|c| c.is_one()));
        let rendered: Vec<String> = words.keys().map(|w| g.render_word(w, "")).collect();
        assert!(rendered.contains(&"(())".to_string()));
        assert!(rendered.contains(&"....".to_string()));
    }

    #[test]
    fn probe_unambiguous_motzkin() {
        let g = builtin::motzkin_uniform();
        let r = ambiguity_probe(&g, 8, 100_000).unwrap();
        assert_eq!(r.first_mismatch, None);
        assert_eq!(r.to_string(), "no ambiguity detected up to n=8");
        assert_eq!(ambiguity_probe(&g, 0, 10).unwrap().first_mismatch, None);
    }

    #[test]
    fn probe_ambiguous_grammar() {
        let g = parse_grammar("axiom S\nterminal a\nS -> S S | a").unwrap();
        let r = ambiguity_probe(&g, 3, 1000).unwrap();
        assert_eq!(r.first_mismatch, Some((3, BigUint::from(2u32), 1)));
    }

    #[test]
    fn cap_is_enforced() {
        let g = builtin::motzkin_uniform();
        assert_eq!(enumerate_words(&g, 10, 100), Err(GrammarError::CapExceeded(100)));
    }
}
