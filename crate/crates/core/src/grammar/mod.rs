//! Weighted context-free grammars: the 5-tuple (terminals, nonterminals,
//! rules, axiom, weights), its text format, binary normal form, and an
//! exhaustive-derivation oracle used to probe for ambiguity.

mod enumerate;
mod normalize;
mod parse;

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed};
use thiserror::Error;

pub use enumerate::{ambiguity_probe, enumerate_words, AmbiguityReport, WordCounts};
pub use normalize::{normalize, NormRhs, NormRule, NormalizedGrammar};
pub use parse::{parse_grammar, parse_grammar_with, ParseOptions};

/// A word over the terminal alphabet, as terminal indices.
pub type Word = Vec<usize>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    Terminal(usize),
    Nonterminal(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Terminal {
    pub name: String,
    pub weight: BigRational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub lhs: usize,
    pub rhs: Vec<Symbol>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GrammarError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}, column {column}: {error}")]
    At {
        line: usize,
        column: usize,
        error: Box<GrammarError>,
    },
    #[error("unknown symbol {0}")]
    UnknownSymbol(String),
    #[error("unknown terminal {0}")]
    UnknownTerminal(String),
    #[error("invalid weight {text:?} for terminal {symbol}: {reason}")]
    InvalidWeight {
        symbol: String,
        text: String,
        reason: String,
    },
    #[error("missing axiom declaration")]
    MissingAxiom,
    #[error("axiom declared more than once")]
    DuplicateAxiom,
    #[error("axiom {0} has no rules")]
    AxiomWithoutRules(String),
    #[error("terminal {0} declared more than once")]
    DuplicateTerminal(String),
    #[error("symbol {0} is declared both as a terminal and as a nonterminal")]
    SymbolClash(String),
    #[error("nonterminal {0} is unproductive (derives no terminal word)")]
    Unproductive(String),
    #[error("nonterminal {0} is unreachable from the axiom")]
    Unreachable(String),
    #[error("nonterminal {0} has infinitely many derivations of a single word (epsilon or unit cycle)")]
    InfiniteAmbiguity(String),
    #[error("enumeration cap of {0} words exceeded")]
    CapExceeded(usize),
}

/// A validated weighted context-free grammar.
///
/// Nonterminals are the symbols appearing on a left-hand side; index 0 is not
/// necessarily the axiom. Rules are stored grouped by left-hand side in
/// nonterminal order, which keeps printing and reparsing structurally stable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedGrammar {
    terminals: Vec<Terminal>,
    nonterminals: Vec<String>,
    rules: Vec<Rule>,
    axiom: usize,
}

impl WeightedGrammar {
    pub fn terminals(&self) -> &[Terminal] {
        &self.terminals
    }

    pub fn nonterminals(&self) -> &[String] {
        &self.nonterminals
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn axiom(&self) -> usize {
        self.axiom
    }

    pub fn axiom_name(&self) -> &str {
        &self.nonterminals[self.axiom]
    }

    pub fn terminal_index(&self, name: &str) -> Option<usize> {
        self.terminals.iter().position(|t| t.name == name)
    }

    /// The weight vector, indexed like [`terminals`](Self::terminals).
    pub fn weights(&self) -> Vec<BigRational> {
        self.terminals.iter().map(|t| t.weight.clone()).collect()
    }

    /// Copy of the grammar with some terminal weights replaced.
    pub fn with_weights<'a>(
        &self,
        overrides: impl IntoIterator<Item = (&'a str, BigRational)>,
    ) -> Result<WeightedGrammar, GrammarError> {
        let mut g = self.clone();
        for (name, w) in overrides {
            let i = g
                .terminal_index(name)
                .ok_or_else(|| GrammarError::UnknownTerminal(name.to_string()))?;
            check_weight(name, &w)?;
            g.terminals[i].weight = w;
        }
        Ok(g)
    }

    /// Multiplicative weight of a word, `∏ W_t` over its letters.
    pub fn word_weight(&self, word: &[usize]) -> BigRational {
        word.iter()
            .fold(BigRational::one(), |acc, &t| acc * &self.terminals[t].weight)
    }

    /// Renders a word with terminal names joined by `sep`.
    pub fn render_word(&self, word: &[usize], sep: &str) -> String {
        word.iter()
            .map(|&t| self.terminals[t].name.as_str())
            .collect::<Vec<_>>()
            .join(sep)
    }

    /// Parses a word: whitespace-separated terminal names, or, when every
    /// terminal name is one character and the text has no whitespace, one
    /// terminal per character.
    pub fn parse_word(&self, text: &str) -> Result<Word, GrammarError> {
        let text = text.trim();
        let single_chars = self.terminals.iter().all(|t| t.name.chars().count() == 1);
        let tokens: Vec<String> = if single_chars && !text.contains(char::is_whitespace) {
            text.chars().map(|c| c.to_string()).collect()
        } else {
            text.split_whitespace().map(str::to_string).collect()
        };
        tokens
            .iter()
            .map(|tok| {
                self.terminal_index(tok)
                    .ok_or_else(|| GrammarError::UnknownTerminal(tok.clone()))
            })
            .collect()
    }

    fn from_parts(
        terminals: Vec<Terminal>,
        nonterminals: Vec<String>,
        mut rules: Vec<Rule>,
        axiom: usize,
    ) -> Result<Self, GrammarError> {
        let mut seen = HashSet::new();
        for t in &terminals {
            if !seen.insert(t.name.as_str()) {
                return Err(GrammarError::DuplicateTerminal(t.name.clone()));
            }
            check_weight(&t.name, &t.weight)?;
        }
        for n in &nonterminals {
            if seen.contains(n.as_str()) {
                return Err(GrammarError::SymbolClash(n.clone()));
            }
        }
        rules.sort_by_key(|r| r.lhs);
        let g = WeightedGrammar {
            terminals,
            nonterminals,
            rules,
            axiom,
        };
        if !g.rules.iter().any(|r| r.lhs == axiom) {
            return Err(GrammarError::AxiomWithoutRules(g.nonterminals[axiom].clone()));
        }
        g.check_productive()?;
        g.check_reachable()?;
        Ok(g)
    }

    fn check_productive(&self) -> Result<(), GrammarError> {
        let mut productive = vec![false; self.nonterminals.len()];
        let mut changed = true;
        while changed {
            changed = false;
            for r in &self.rules {
                if productive[r.lhs] {
                    continue;
                }
                let ok = r.rhs.iter().all(|s| match s {
                    Symbol::Terminal(_) => true,
                    Symbol::Nonterminal(b) => productive[*b],
                });
                if ok {
                    productive[r.lhs] = true;
                    changed = true;
                }
            }
        }
        match productive.iter().position(|p| !p) {
            Some(i) => Err(GrammarError::Unproductive(self.nonterminals[i].clone())),
            None => Ok(()),
        }
    }

    fn check_reachable(&self) -> Result<(), GrammarError> {
        let mut reached = vec![false; self.nonterminals.len()];
        reached[self.axiom] = true;
        let mut queue = VecDeque::from([self.axiom]);
        while let Some(a) = queue.pop_front() {
            for r in self.rules.iter().filter(|r| r.lhs == a) {
                for s in &r.rhs {
                    if let Symbol::Nonterminal(b) = *s {
                        if !reached[b] {
                            reached[b] = true;
                            queue.push_back(b);
                        }
                    }
                }
            }
        }
        match reached.iter().position(|r| !r) {
            Some(i) => Err(GrammarError::Unreachable(self.nonterminals[i].clone())),
            None => Ok(()),
        }
    }
}

fn check_weight(name: &str, w: &BigRational) -> Result<(), GrammarError> {
    if w.is_positive() {
        Ok(())
    } else {
        Err(GrammarError::InvalidWeight {
            symbol: name.to_string(),
            text: w.to_string(),
            reason: "weights must be positive".into(),
        })
    }
}

/// Programmatic construction by symbol names.
///
/// ```
/// use wcfg_core::grammar::GrammarBuilder;
/// use wcfg_core::Rational;
///
/// let g = GrammarBuilder::new("S")
///     .terminal("a", Rational::from_integer(2.into()))
///     .rule("S", &["a", "S"])
///     .rule("S", &[])
///     .build()
///     .unwrap();
/// assert_eq!(g.rules().len(), 2);
/// ```
#[derive(Clone, Debug)]
pub struct GrammarBuilder {
    axiom: String,
    terminals: Vec<Terminal>,
    rules: Vec<(String, Vec<String>)>,
}

impl GrammarBuilder {
    pub fn new(axiom: impl Into<String>) -> Self {
        GrammarBuilder {
            axiom: axiom.into(),
            terminals: Vec::new(),
            rules: Vec::new(),
        }
    }

    pub fn terminal(mut self, name: impl Into<String>, weight: BigRational) -> Self {
        self.terminals.push(Terminal {
            name: name.into(),
            weight,
        });
        self
    }

    /// Adds `lhs -> rhs`; an empty `rhs` is the ε-rule.
    pub fn rule(mut self, lhs: &str, rhs: &[&str]) -> Self {
        self.rules
            .push((lhs.to_string(), rhs.iter().map(|s| s.to_string()).collect()));
        self
    }

    pub fn build(self) -> Result<WeightedGrammar, GrammarError> {
        let mut nonterminals = vec![self.axiom.clone()];
        let mut index: HashMap<String, usize> = HashMap::from([(self.axiom.clone(), 0)]);
        for (lhs, _) in &self.rules {
            if !index.contains_key(lhs) {
                index.insert(lhs.clone(), nonterminals.len());
                nonterminals.push(lhs.clone());
            }
        }
        let term_index: HashMap<&str, usize> = self
            .terminals
            .iter()
            .enumerate()
            .map(|(i, t)| (t.name.as_str(), i))
            .collect();
        let mut rules = Vec::with_capacity(self.rules.len());
        for (lhs, rhs) in &self.rules {
            let rhs = rhs
                .iter()
                .map(|s| resolve(s, &term_index, &index))
                .collect::<Result<Vec<_>, _>>()?;
            rules.push(Rule { lhs: index[lhs], rhs });
        }
        WeightedGrammar::from_parts(self.terminals, nonterminals, rules, 0)
    }
}

fn resolve(
    name: &str,
    terminals: &HashMap<&str, usize>,
    nonterminals: &HashMap<String, usize>,
) -> Result<Symbol, GrammarError> {
    if let Some(&t) = terminals.get(name) {
        Ok(Symbol::Terminal(t))
    } else if let Some(&n) = nonterminals.get(name) {
        Ok(Symbol::Nonterminal(n))
    } else {
        Err(GrammarError::UnknownSymbol(name.to_string()))
    }
}

fn format_weight(w: &BigRational) -> String {
    if w.is_integer() {
        w.numer().to_string()
    } else {
        format!("{}/{}", w.numer(), w.denom())
    }
}

/// Prints the grammar in the text format accepted by [`parse_grammar`].
impl fmt::Display for WeightedGrammar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "axiom {}", self.axiom_name())?;
        for t in &self.terminals {
            writeln!(f, "terminal {} weight {}", t.name, format_weight(&t.weight))?;
        }
        let mut grouped: BTreeMap<usize, Vec<&Rule>> = BTreeMap::new();
        for r in &self.rules {
            grouped.entry(r.lhs).or_default().push(r);
        }
        for (lhs, rules) in grouped {
            let alts: Vec<String> = rules
                .iter()
                .map(|r| {
                    if r.rhs.is_empty() {
                        "_".to_string()
                    } else {
                        r.rhs
                            .iter()
                            .map(|s| match *s {
                                Symbol::Terminal(t) => self.terminals[t].name.as_str(),
                                Symbol::Nonterminal(n) => self.nonterminals[n].as_str(),
                            })
                            .collect::<Vec<_>>()
                            .join(" ")
                    }
                })
                .collect();
            writeln!(f, "{} -> {}", self.nonterminals[lhs], alts.join(" | "))?;
        }
        Ok(())
    }
}

/// Built-in grammars.
pub mod builtin {
    use super::*;

    /// Motzkin words `S -> ( S ) S | . S | _` with weight `horizontal` on `.`.
    pub fn motzkin(horizontal: BigRational) -> WeightedGrammar {
        GrammarBuilder::new("S")
            .terminal("(", BigRational::one())
            .terminal(")", BigRational::one())
            .terminal(".", horizontal)
            .rule("S", &["(", "S", ")", "S"])
            .rule("S", &[".", "S"])
            .rule("S", &[])
            .build()
            .expect("motzkin grammar is well formed")
    }

    /// Motzkin grammar with all weights 1.
    pub fn motzkin_uniform() -> WeightedGrammar {
        motzkin(BigRational::one())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn builder_rejects_unknown_symbols() {
        let err = GrammarBuilder::new("S")
            .terminal("a", q(1))
            .rule("S", &["a", "T"])
            .build()
            .unwrap_err();
        assert_eq!(err, GrammarError::UnknownSymbol("T".into()));
        assert_eq!(err.to_string(), "unknown symbol T");
    }

    #[test]
    fn rejects_unproductive_nonterminals() {
        // T -> a T never terminates
        let err = GrammarBuilder::new("S")
            .terminal("a", q(1))
            .rule("S", &["a"])
            .rule("S", &["T"])
            .rule("T", &["a", "T"])
            .build()
            .unwrap_err();
        assert_eq!(err, GrammarError::Unproductive("T".into()));
        // mutual recursion without exit
        let err = GrammarBuilder::new("S")
            .terminal("a", q(1))
            .rule("S", &["a"])
            .rule("S", &["A", "B"])
            .rule("A", &["B", "a"])
            .rule("B", &["A"])
            .build()
            .unwrap_err();
        assert!(matches!(err, GrammarError::Unproductive(_)));
    }

    #[test]
    fn rejects_unreachable_and_clashes() {
        let err = GrammarBuilder::new("S")
            .terminal("a", q(1))
            .rule("S", &["a"])
            .rule("U", &["a"])
            .build()
            .unwrap_err();
        assert_eq!(err, GrammarError::Unreachable("U".into()));
        let err = GrammarBuilder::new("S")
            .terminal("S", q(1))
            .rule("S", &["S"])
            .build()
            .unwrap_err();
        assert_eq!(err, GrammarError::SymbolClash("S".into()));
        let err = GrammarBuilder::new("S")
            .terminal("a", q(0))
            .rule("S", &["a"])
            .build()
            .unwrap_err();
        assert!(matches!(err, GrammarError::InvalidWeight { .. }));
    }

    #[test]
    fn word_weight_is_a_product() {
        let g = builtin::motzkin(q(2));
        let w = g.parse_word("(.)").unwrap();
        assert_eq!(g.word_weight(&w), q(2));
        assert_eq!(g.word_weight(&g.parse_word("..").unwrap()), q(4));
        assert_eq!(g.word_weight(&[]), q(1));
        assert_eq!(g.render_word(&w, " "), "( . )");
        assert!(g.parse_word("(x)").is_err());
    }

    #[test]
    fn weight_overrides() {
        let g = builtin::motzkin_uniform();
        let h = g.with_weights([(".", q(3))]).unwrap();
        assert_eq!(h.terminals()[2].weight, q(3));
        assert!(g.with_weights([("x", q(3))]).is_err());
        assert!(g.with_weights([(".", q(-1))]).is_err());
    }
}
