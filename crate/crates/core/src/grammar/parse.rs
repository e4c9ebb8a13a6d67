//! Line-oriented grammar files.
//!
//! ```text
//! # Motzkin words
//! axiom S
//! terminal ( weight 1
//! terminal ) weight 1
//! terminal . weight 2
//! S -> ( S ) S | . S | _
//! ```

use std::collections::HashMap;

use num_rational::BigRational;
use num_traits::One;

use super::{GrammarError, Rule, Symbol, Terminal, WeightedGrammar};
use crate::numeric::decimal::{parse_rational, round_significant, DEFAULT_SIGNIFICANT_DIGITS};

#[derive(Clone, Copy, Debug)]
pub struct ParseOptions {
    /// Significant digits kept for decimal weight literals; `p/q` and integer
    /// literals are always exact.
    pub significant_digits: u32,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            significant_digits: DEFAULT_SIGNIFICANT_DIGITS,
        }
    }
}

pub fn parse_grammar(text: &str) -> Result<WeightedGrammar, GrammarError> {
    parse_grammar_with(text, ParseOptions::default())
}

struct Token<'a> {
    column: usize,
    text: &'a str,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let mut tokens = Vec::new();
    let mut start: Option<usize> = None;
    for (i, c) in line.char_indices() {
        if c.is_whitespace() {
            if let Some(s) = start.take() {
                tokens.push((s, i));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        tokens.push((s, line.len()));
    }
    tokens
        .into_iter()
        .map(|(s, e)| Token {
            column: line[..s].chars().count() + 1,
            text: &line[s..e],
        })
        .collect()
}

struct RawRule<'a> {
    line: usize,
    lhs: Token<'a>,
    alts: Vec<Vec<Token<'a>>>,
}

pub fn parse_grammar_with(text: &str, opts: ParseOptions) -> Result<WeightedGrammar, GrammarError> {
    let syntax = |line: usize, column: usize, message: String| GrammarError::Syntax { line, column, message };
    let at = |line: usize, column: usize, error: GrammarError| GrammarError::At {
        line,
        column,
        error: Box::new(error),
    };

    let mut axiom: Option<(usize, Token)> = None;
    let mut terminals: Vec<Terminal> = Vec::new();
    let mut terminal_lines: Vec<(usize, usize)> = Vec::new();
    let mut raw_rules: Vec<RawRule> = Vec::new();

    for (idx, full) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match full.find('#') {
            Some(i) => &full[..i],
            None => full,
        };
        let tokens = tokenize(line);
        if tokens.is_empty() {
            continue;
        }
        if tokens.len() >= 2 && tokens[1].text == "->" {
            let mut iter = tokens.into_iter();
            let lhs = iter.next().expect("lhs");
            iter.next();
            let mut alts: Vec<Vec<Token>> = vec![Vec::new()];
            let mut last_col = lhs.column;
            for tok in iter {
                last_col = tok.column;
                if tok.text == "|" {
                    alts.push(Vec::new());
                } else if tok.text == "->" {
                    return Err(syntax(line_no, tok.column, "unexpected '->'".into()));
                } else {
                    alts.last_mut().expect("nonempty").push(tok);
                }
            }
            for alt in &alts {
                if alt.is_empty() {
                    return Err(syntax(
                        line_no,
                        last_col,
                        "empty alternative (write _ for the empty word)".into(),
                    ));
                }
                if alt.len() > 1 && alt.iter().any(|t| t.text == "_") {
                    let t = alt.iter().find(|t| t.text == "_").expect("found");
                    return Err(syntax(line_no, t.column, "_ must stand alone in an alternative".into()));
                }
            }
            raw_rules.push(RawRule {
                line: line_no,
                lhs,
                alts,
            });
            continue;
        }
        match tokens[0].text {
            "axiom" => {
                if tokens.len() != 2 {
                    return Err(syntax(
                        line_no,
                        tokens[0].column,
                        "expected `axiom <nonterminal>`".into(),
                    ));
                }
                if axiom.is_some() {
                    return Err(at(line_no, tokens[0].column, GrammarError::DuplicateAxiom));
                }
                let mut it = tokens.into_iter();
                it.next();
                axiom = Some((line_no, it.next().expect("two tokens")));
            }
            "terminal" => {
                let weight = match tokens.len() {
                    2 => BigRational::one(),
                    4 if tokens[2].text == "weight" => {
                        let name = tokens[1].text;
                        let lit = tokens[3].text;
                        let invalid = |reason: &str| {
                            at(
                                line_no,
                                tokens[3].column,
                                GrammarError::InvalidWeight {
                                    symbol: name.to_string(),
                                    text: lit.to_string(),
                                    reason: reason.to_string(),
                                },
                            )
                        };
                        let value = parse_rational(lit).ok_or_else(|| invalid("malformed number"))?;
                        if value <= BigRational::from_integer(0.into()) {
                            return Err(invalid("weights must be positive"));
                        }
                        if lit.contains('/') {
                            value
                        } else {
                            round_significant(&value, opts.significant_digits)
                        }
                    }
                    _ => {
                        return Err(syntax(
                            line_no,
                            tokens[0].column,
                            "expected `terminal <symbol> [weight <value>]`".into(),
                        ))
                    }
                };
                let name = tokens[1].text;
                if name == "_" || name == "|" || name == "->" {
                    return Err(syntax(
                        line_no,
                        tokens[1].column,
                        format!("reserved token {name} cannot be a terminal"),
                    ));
                }
                if terminals.iter().any(|t| t.name == name) {
                    return Err(at(
                        line_no,
                        tokens[1].column,
                        GrammarError::DuplicateTerminal(name.into()),
                    ));
                }
                terminals.push(Terminal {
                    name: name.to_string(),
                    weight,
                });
                terminal_lines.push((line_no, tokens[1].column));
            }
            other => {
                return Err(syntax(
                    line_no,
                    tokens[0].column,
                    format!("expected `axiom`, `terminal` or a rule `A -> ...`, found {other:?}"),
                ))
            }
        }
    }

    let (axiom_line, axiom_tok) = axiom.ok_or(GrammarError::MissingAxiom)?;
    let mut nonterminals = vec![axiom_tok.text.to_string()];
    let mut nt_index: HashMap<&str, usize> = HashMap::from([(axiom_tok.text, 0)]);
    let mut first_line: HashMap<usize, (usize, usize)> = HashMap::new();
    for r in &raw_rules {
        let next = nonterminals.len();
        let i = *nt_index.entry(r.lhs.text).or_insert_with(|| {
            nonterminals.push(r.lhs.text.to_string());
            next
        });
        first_line.entry(i).or_insert((r.line, r.lhs.column));
    }
    let term_index: HashMap<&str, usize> = terminals
        .iter()
        .enumerate()
        .map(|(i, t)| (t.name.as_str(), i))
        .collect();
    for (i, t) in terminals.iter().enumerate() {
        if nt_index.contains_key(t.name.as_str()) {
            let (l, c) = terminal_lines[i];
            return Err(at(l, c, GrammarError::SymbolClash(t.name.clone())));
        }
    }

    let mut rules = Vec::new();
    for r in &raw_rules {
        let lhs = nt_index[r.lhs.text];
        for alt in &r.alts {
            let rhs = if alt.len() == 1 && alt[0].text == "_" {
                Vec::new()
            } else {
                alt.iter()
                    .map(|tok| {
                        if let Some(&t) = term_index.get(tok.text) {
                            Ok(Symbol::Terminal(t))
                        } else if let Some(&n) = nt_index.get(tok.text) {
                            Ok(Symbol::Nonterminal(n))
                        } else {
                            Err(at(r.line, tok.column, GrammarError::UnknownSymbol(tok.text.into())))
                        }
                    })
                    .collect::<Result<Vec<_>, _>>()?
            };
            rules.push(Rule { lhs, rhs });
        }
    }

    let names = nonterminals.clone();
    WeightedGrammar::from_parts(terminals, nonterminals, rules, 0).map_err(|e| {
        let name = match &e {
            GrammarError::Unproductive(n) | GrammarError::Unreachable(n) => Some(n.clone()),
            GrammarError::AxiomWithoutRules(_) => {
                return at(axiom_line, axiom_tok.column, e);
            }
            _ => None,
        };
        match name
            .and_then(|n| names.iter().position(|x| *x == n))
            .and_then(|i| first_line.get(&i))
        {
            Some(&(l, c)) => at(l, c, e),
            None => e,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::builtin;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn minimal_grammar() {
        let g = parse_grammar("axiom S\nterminal a weight 2\nS -> a S | _").unwrap();
        assert_eq!(g.terminals().len(), 1);
        assert_eq!(g.nonterminals().len(), 1);
        assert_eq!(g.rules().len(), 2);
        assert_eq!(g.terminals()[0].weight, q(2, 1));
    }

    #[test]
    fn motzkin_file() {
        let text =
            "# Motzkin\naxiom S\nterminal (\nterminal )\nterminal .  # horizontal step\nS -> ( S ) S | . S | _\n";
        let g = parse_grammar(text).unwrap();
        assert_eq!(g.rules().len(), 3);
        assert_eq!(g.terminals().len(), 3);
        assert_eq!(g, builtin::motzkin_uniform());
    }

    #[test]
    fn unknown_symbol_reports_position() {
        let err = parse_grammar("axiom S\nterminal a\nS -> a T").unwrap_err();
        assert!(err.to_string().ends_with("unknown symbol T"), "{err}");
        match err {
            GrammarError::At { line, column, .. } => assert_eq!((line, column), (3, 8)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn diagnostics() {
        let cases = [
            ("terminal a\nS -> a", "missing axiom"),
            ("axiom S\naxiom S\nterminal a\nS -> a", "more than once"),
            ("axiom S\nterminal a weight -1\nS -> a", "positive"),
            ("axiom S\nterminal a weight 0\nS -> a", "positive"),
            ("axiom S\nterminal a weight x1\nS -> a", "malformed"),
            ("axiom S\nterminal a\nS -> a | ", "empty alternative"),
            ("axiom S\nterminal a\nS -> a _", "stand alone"),
            ("axiom S\nterminal a\nS a", "expected"),
            ("axiom S\nterminal a\nS -> a T\nT -> a T", "unproductive"),
            ("axiom S\nterminal a\nS -> a\nU -> a", "unreachable"),
            ("axiom S\nterminal a\nT -> a", "no rules"),
        ];
        for (text, needle) in cases {
            let err = parse_grammar(text).unwrap_err().to_string();
            assert!(err.contains(needle), "{text:?}: {err}");
        }
    }

    #[test]
    fn decimal_weights_are_rounded() {
        let g = parse_grammar_with(
            "axiom S\nterminal a weight 1.23456\nS -> a",
            ParseOptions { significant_digits: 3 },
        )
        .unwrap();
        assert_eq!(g.terminals()[0].weight, q(123, 100));
        let g = parse_grammar("axiom S\nterminal a weight 1/3\nS -> a").unwrap();
        assert_eq!(g.terminals()[0].weight, q(1, 3));
    }

    #[test]
    fn print_then_parse_round_trips() {
        let text = "axiom S\nterminal a weight 3/7\nterminal b weight 2.5\nT -> b | S S\nS -> a T | _ | T a\n";
        let g = parse_grammar(text).unwrap();
        let again = parse_grammar(&g.to_string()).unwrap();
        assert_eq!(g, again);
    }
}
