//! Binary normal form: every rule is `A -> B C`, `A -> t`, or `S -> ε` at the
//! axiom only. Each normalized rule carries a multiplicity, the number of
//! source derivation fragments it stands for, so derivation counts (and hence
//! weighted counts of ambiguous grammars) are preserved exactly.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt;
use std::rc::Rc;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use super::{GrammarError, Symbol, WeightedGrammar, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NormRhs {
    Pair(usize, usize),
    Terminal(usize),
    Empty,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormRule {
    pub lhs: usize,
    pub rhs: NormRhs,
    pub multiplicity: BigUint,
    /// Index of the source rule this rule was derived from; `None` for the
    /// axiom's ε-rule and for terminal wrappers `<t> -> t`.
    pub source: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct NormalizedGrammar {
    original: Arc<WeightedGrammar>,
    names: Vec<String>,
    rules: Vec<NormRule>,
    by_lhs: Vec<Vec<usize>>,
    axiom: usize,
}

impl NormalizedGrammar {
    pub fn original(&self) -> &WeightedGrammar {
        &self.original
    }

    pub fn nonterminal_count(&self) -> usize {
        self.names.len()
    }

    pub fn terminal_count(&self) -> usize {
        self.original.terminals().len()
    }

    pub fn name(&self, a: usize) -> &str {
        &self.names[a]
    }

    pub fn rules(&self) -> &[NormRule] {
        &self.rules
    }

    /// Rules with left-hand side `a`, in a fixed order.
    pub fn rules_of(&self, a: usize) -> impl Iterator<Item = &NormRule> {
        self.by_lhs[a].iter().map(move |&i| &self.rules[i])
    }

    /// Indices into [`rules`](Self::rules) of the rules of `a`.
    pub fn rule_indices(&self, a: usize) -> &[usize] {
        &self.by_lhs[a]
    }

    pub fn axiom(&self) -> usize {
        self.axiom
    }

    /// Number of derivations of the empty word (0 when `ε ∉ L`).
    pub fn empty_word_multiplicity(&self) -> BigUint {
        self.rules_of(self.axiom)
            .filter(|r| r.rhs == NormRhs::Empty)
            .map(|r| r.multiplicity.clone())
            .sum()
    }

    /// Every word of length `n` with its number of derivations. Exponential;
    /// meant for oracles on small `n`.
    pub fn derivation_counts(&self, n: usize) -> BTreeMap<Word, BigUint> {
        let mut memo = HashMap::new();
        (*self.words(self.axiom, n, &mut memo)).clone()
    }

    fn words(
        &self,
        a: usize,
        n: usize,
        memo: &mut HashMap<(usize, usize), Rc<BTreeMap<Word, BigUint>>>,
    ) -> Rc<BTreeMap<Word, BigUint>> {
        if let Some(r) = memo.get(&(a, n)) {
            return r.clone();
        }
        let mut out: BTreeMap<Word, BigUint> = BTreeMap::new();
        for r in self.rules_of(a) {
            match r.rhs {
                NormRhs::Empty if n == 0 => {
                    *out.entry(Vec::new()).or_default() += &r.multiplicity;
                }
                NormRhs::Terminal(t) if n == 1 => {
                    *out.entry(vec![t]).or_default() += &r.multiplicity;
                }
                NormRhs::Pair(b, c) => {
                    // B and C never derive ε, so both parts are nonempty
                    for split in 1..n {
                        let left = self.words(b, split, memo);
                        if left.is_empty() {
                            continue;
                        }
                        let right = self.words(c, n - split, memo);
                        for (u, cu) in left.iter() {
                            for (v, cv) in right.iter() {
                                let mut w = u.clone();
                                w.extend_from_slice(v);
                                *out.entry(w).or_default() += &r.multiplicity * cu * cv;
                            }
                        }
                    }
                }
                _ => {}
            }
        }
        let out = Rc::new(out);
        memo.insert((a, n), out.clone());
        out
    }
}

impl fmt::Display for NormalizedGrammar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "axiom {}", self.names[self.axiom])?;
        for r in &self.rules {
            let rhs = match r.rhs {
                NormRhs::Pair(b, c) => format!("{} {}", self.names[b], self.names[c]),
                NormRhs::Terminal(t) => self.original.terminals()[t].name.clone(),
                NormRhs::Empty => "_".into(),
            };
            write!(f, "{} -> {}", self.names[r.lhs], rhs)?;
            if !r.multiplicity.is_one() {
                write!(f, "  [x{}]", r.multiplicity)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Item {
    T(usize),
    N(usize),
}

struct Production {
    items: Vec<Item>,
    multiplicity: BigUint,
    source: usize,
}

/// Number of ε-derivations of every nonterminal, by Kleene iteration. A tree
/// deeper than `|N|` rounds repeats a nonterminal on a path, so a change in
/// round `|N| + 1` means infinitely many ε-derivations.
fn empty_derivations(g: &WeightedGrammar) -> Result<Vec<BigUint>, GrammarError> {
    let n = g.nonterminals().len();
    let mut eps = vec![BigUint::zero(); n];
    for round in 1..=n + 1 {
        let mut next = vec![BigUint::zero(); n];
        for r in g.rules() {
            let mut prod = BigUint::one();
            for s in &r.rhs {
                match *s {
                    Symbol::Terminal(_) => {
                        prod = BigUint::zero();
                        break;
                    }
                    Symbol::Nonterminal(b) => prod *= &eps[b],
                }
            }
            next[r.lhs] += prod;
        }
        if round == n + 1 {
            if let Some(a) = (0..n).find(|&a| next[a] != eps[a]) {
                return Err(GrammarError::InfiniteAmbiguity(g.nonterminals()[a].clone()));
            }
        }
        eps = next;
    }
    Ok(eps)
}

/// Nonterminals deriving at least one nonempty word.
fn nonempty_nonterminals(g: &WeightedGrammar) -> Vec<bool> {
    let mut ne = vec![false; g.nonterminals().len()];
    let mut changed = true;
    while changed {
        changed = false;
        for r in g.rules() {
            if !ne[r.lhs]
                && r.rhs.iter().any(|s| match *s {
                    Symbol::Terminal(_) => true,
                    Symbol::Nonterminal(b) => ne[b],
                })
            {
                ne[r.lhs] = true;
                changed = true;
            }
        }
    }
    ne
}

fn expand_rule(rhs: &[Symbol], eps: &[BigUint], nonempty: &[bool], source: usize, out: &mut Vec<Production>) {
    fn go(
        rhs: &[Symbol],
        eps: &[BigUint],
        nonempty: &[bool],
        items: &mut Vec<Item>,
        mult: BigUint,
        source: usize,
        out: &mut Vec<Production>,
    ) {
        let Some((first, rest)) = rhs.split_first() else {
            if !items.is_empty() {
                out.push(Production {
                    items: items.clone(),
                    multiplicity: mult,
                    source,
                });
            }
            return;
        };
        match *first {
            Symbol::Terminal(t) => {
                items.push(Item::T(t));
                go(rest, eps, nonempty, items, mult, source, out);
                items.pop();
            }
            Symbol::Nonterminal(b) => {
                if nonempty[b] {
                    items.push(Item::N(b));
                    go(rest, eps, nonempty, items, mult.clone(), source, out);
                    items.pop();
                }
                if !eps[b].is_zero() {
                    go(rest, eps, nonempty, items, &mult * &eps[b], source, out);
                }
            }
        }
    }
    go(rhs, eps, nonempty, &mut Vec::new(), BigUint::one(), source, out);
}

/// Unit-path counts `P[a][b]` (paths of length ≥ 1 through unit productions).
fn unit_paths(n: usize, units: &[Vec<(usize, BigUint)>], names: &[String]) -> Result<Vec<Vec<BigUint>>, GrammarError> {
    let mut paths = vec![vec![BigUint::zero(); n]; n];
    for round in 1..=n + 1 {
        let mut next = vec![vec![BigUint::zero(); n]; n];
        for a in 0..n {
            for (b, m) in &units[a] {
                next[a][*b] += m;
                for c in 0..n {
                    if !paths[*b][c].is_zero() {
                        next[a][c] += m * &paths[*b][c];
                    }
                }
            }
        }
        if round == n + 1 && next != paths {
            let a = (0..n).find(|&a| next[a] != paths[a]).unwrap_or(0);
            return Err(GrammarError::InfiniteAmbiguity(names[a].clone()));
        }
        paths = next;
    }
    Ok(paths)
}

struct Namer {
    used: HashSet<String>,
}

impl Namer {
    fn fresh(&mut self, base: String) -> String {
        let mut name = base;
        while self.used.contains(&name) {
            name.push('\'');
        }
        self.used.insert(name.clone());
        name
    }
}

/// Converts a grammar to binary normal form.
///
/// ε-rules are removed by expanding every nullable occurrence, with the
/// number of ε-derivations folded into the multiplicity; unit rules are
/// removed by path counting; long right-hand sides are split into chains of
/// fresh nonterminals; terminals inside pairs get wrappers `<t> -> t`. If the
/// axiom derives ε, a fresh axiom carries the single ε-rule. Grammars with
/// infinitely many derivations for some word are rejected.
pub fn normalize(g: &WeightedGrammar) -> Result<NormalizedGrammar, GrammarError> {
    let n = g.nonterminals().len();
    let eps = empty_derivations(g)?;
    let nonempty = nonempty_nonterminals(g);

    let mut productions: Vec<Vec<Production>> = (0..n).map(|_| Vec::new()).collect();
    for (ri, r) in g.rules().iter().enumerate() {
        let mut out = Vec::new();
        expand_rule(&r.rhs, &eps, &nonempty, ri, &mut out);
        productions[r.lhs].extend(out);
    }

    let mut units: Vec<Vec<(usize, BigUint)>> = vec![Vec::new(); n];
    let mut direct: Vec<Vec<Production>> = (0..n).map(|_| Vec::new()).collect();
    for (a, prods) in productions.into_iter().enumerate() {
        for p in prods {
            match p.items.as_slice() {
                [Item::N(b)] => units[a].push((*b, p.multiplicity)),
                _ => direct[a].push(p),
            }
        }
    }
    let paths = unit_paths(n, &units, g.nonterminals())?;

    let mut namer = Namer {
        used: g
            .nonterminals()
            .iter()
            .chain(g.terminals().iter().map(|t| &t.name))
            .cloned()
            .collect(),
    };
    let mut names: Vec<String> = Vec::new();
    let mut pos: Vec<Option<usize>> = vec![None; n];
    for a in 0..n {
        if nonempty[a] {
            pos[a] = Some(names.len());
            names.push(if eps[a].is_zero() {
                g.nonterminals()[a].clone()
            } else {
                namer.fresh(format!("{}+", g.nonterminals()[a]))
            });
        }
    }

    let mut rules: Vec<NormRule> = Vec::new();
    let mut wrappers: HashMap<usize, usize> = HashMap::new();

    for a in 0..n {
        let Some(pa) = pos[a] else { continue };
        let mut emitted: Vec<(&Production, BigUint)> = direct[a].iter().map(|p| (p, p.multiplicity.clone())).collect();
        for b in 0..n {
            if !paths[a][b].is_zero() {
                for p in &direct[b] {
                    emitted.push((p, &p.multiplicity * &paths[a][b]));
                }
            }
        }
        for (p, mult) in emitted {
            match p.items.as_slice() {
                [Item::T(t)] => rules.push(NormRule {
                    lhs: pa,
                    rhs: NormRhs::Terminal(*t),
                    multiplicity: mult,
                    source: Some(p.source),
                }),
                items => {
                    let syms: Vec<usize> = items
                        .iter()
                        .map(|&it| match it {
                            Item::N(b) => pos[b].expect("kept occurrences are nonempty"),
                            Item::T(t) => *wrappers.entry(t).or_insert_with(|| {
                                let w = names.len();
                                names.push(namer.fresh(format!("<{}>", g.terminals()[t].name)));
                                rules.push(NormRule {
                                    lhs: w,
                                    rhs: NormRhs::Terminal(t),
                                    multiplicity: BigUint::one(),
                                    source: None,
                                });
                                w
                            }),
                        })
                        .collect();
                    let k = syms.len();
                    let mut lhs = pa;
                    let mut m = mult;
                    for (j, &s) in syms.iter().enumerate().take(k - 2) {
                        let z = names.len();
                        let base = format!("{}.{}", names[pa], j + 1);
                        names.push(namer.fresh(base));
                        rules.push(NormRule {
                            lhs,
                            rhs: NormRhs::Pair(s, z),
                            multiplicity: std::mem::replace(&mut m, BigUint::one()),
                            source: Some(p.source),
                        });
                        lhs = z;
                    }
                    rules.push(NormRule {
                        lhs,
                        rhs: NormRhs::Pair(syms[k - 2], syms[k - 1]),
                        multiplicity: m,
                        source: Some(p.source),
                    });
                }
            }
        }
    }

    let s = g.axiom();
    let axiom = if eps[s].is_zero() {
        pos[s].expect("a nonterminal without ε-derivations derives nonempty words")
    } else {
        let fresh = names.len();
        names.push(namer.fresh(g.nonterminals()[s].clone()));
        rules.push(NormRule {
            lhs: fresh,
            rhs: NormRhs::Empty,
            multiplicity: eps[s].clone(),
            source: None,
        });
        if let Some(ps) = pos[s] {
            let copies: Vec<NormRule> = rules
                .iter()
                .filter(|r| r.lhs == ps)
                .map(|r| NormRule {
                    lhs: fresh,
                    ..r.clone()
                })
                .collect();
            rules.extend(copies);
        }
        fresh
    };

    Ok(trim(g, names, rules, axiom))
}

/// Drops nonterminals unreachable from the axiom and renumbers.
fn trim(g: &WeightedGrammar, names: Vec<String>, rules: Vec<NormRule>, axiom: usize) -> NormalizedGrammar {
    let count = names.len();
    let mut by_lhs: Vec<Vec<usize>> = vec![Vec::new(); count];
    for (i, r) in rules.iter().enumerate() {
        by_lhs[r.lhs].push(i);
    }
    let mut reached = vec![false; count];
    reached[axiom] = true;
    let mut queue = VecDeque::from([axiom]);
    while let Some(a) = queue.pop_front() {
        for &i in &by_lhs[a] {
            if let NormRhs::Pair(b, c) = rules[i].rhs {
                for x in [b, c] {
                    if !reached[x] {
                        reached[x] = true;
                        queue.push_back(x);
                    }
                }
            }
        }
    }
    let mut remap = vec![usize::MAX; count];
    let mut new_names = Vec::new();
    for a in 0..count {
        if reached[a] {
            remap[a] = new_names.len();
            new_names.push(names[a].clone());
        }
    }
    let mut new_rules: Vec<NormRule> = rules
        .into_iter()
        .filter(|r| reached[r.lhs])
        .map(|r| NormRule {
            lhs: remap[r.lhs],
            rhs: match r.rhs {
                NormRhs::Pair(b, c) => NormRhs::Pair(remap[b], remap[c]),
                other => other,
            },
            ..r
        })
        .collect();
    new_rules.sort_by_key(|r| r.lhs);
    let mut by_lhs = vec![Vec::new(); new_names.len()];
    for (i, r) in new_rules.iter().enumerate() {
        by_lhs[r.lhs].push(i);
    }
    NormalizedGrammar {
        original: Arc::new(g.clone()),
        names: new_names,
        rules: new_rules,
        by_lhs,
        axiom: remap[axiom],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::{builtin, enumerate_words, parse_grammar};

    fn agree_with_source(text: &str, n_max: usize) {
        let g = parse_grammar(text).unwrap();
        let ng = normalize(&g).unwrap();
        for n in 0..=n_max {
            let expected = enumerate_words(&g, n, 1_000_000).unwrap();
            assert_eq!(ng.derivation_counts(n), expected, "{text:?} at n = {n}");
        }
    }

    #[test]
    fn right_linear_grammar() {
        let g = parse_grammar("axiom S\nterminal a\nS -> a S | _").unwrap();
        let ng = normalize(&g).unwrap();
        assert_eq!(ng.empty_word_multiplicity(), BigUint::one());
        for r in ng.rules() {
            if r.rhs == NormRhs::Empty {
                assert_eq!(r.lhs, ng.axiom());
            }
        }
        for n in 0..6 {
            assert_eq!(ng.derivation_counts(n).len(), 1);
        }
    }

    #[test]
    fn motzkin_counts() {
        let ng = normalize(&builtin::motzkin_uniform()).unwrap();
        let counts: Vec<usize> = (0..=6).map(|n| ng.derivation_counts(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 4, 9, 21, 51]);
    }

    #[test]
    fn binary_grammar_is_kept() {
        let text = "axiom S\nterminal a\nterminal b\nS -> A B | a\nA -> a\nB -> b\n";
        let g = parse_grammar(text).unwrap();
        let ng = normalize(&g).unwrap();
        assert_eq!(ng.nonterminal_count(), 3);
        assert_eq!(ng.rules().len(), 4);
        assert!(ng.rules().iter().all(|r| r.multiplicity.is_one()));
    }

    #[test]
    fn preserves_derivation_multisets() {
        agree_with_source("axiom S\nterminal (\nterminal )\nterminal .\nS -> ( S ) S | . S | _", 8);
        agree_with_source("axiom S\nterminal a\nS -> S S | a", 7);
        agree_with_source(
            "axiom S\nterminal a\nterminal b\nS -> A B A | b\nA -> a A | _ | B\nB -> b | b b",
            7,
        );
        agree_with_source("axiom S\nterminal a\nS -> A A\nA -> a | _ | _", 4);
        agree_with_source(
            "axiom S\nterminal x\nterminal y\nS -> T | x S y\nT -> U\nU -> x | y y | _",
            8,
        );
    }

    #[test]
    fn rejects_infinite_ambiguity() {
        for text in [
            "axiom S\nterminal a\nS -> S S | a | _",
            "axiom S\nterminal a\nS -> T | a\nT -> S",
            "axiom S\nterminal a\nS -> A S | a\nA -> a | _",
        ] {
            let g = parse_grammar(text).unwrap();
            assert!(
                matches!(normalize(&g), Err(GrammarError::InfiniteAmbiguity(_))),
                "{text}"
            );
        }
    }

    #[test]
    fn display_lists_rules() {
        let ng = normalize(&builtin::motzkin_uniform()).unwrap();
        let text = ng.to_string();
        assert!(text.starts_with("axiom S"));
        assert!(text.contains("<(>"));
    }
}
