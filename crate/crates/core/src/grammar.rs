//! Plain context-free grammars with exactly one rule per nonterminal and an
//! acyclic reference order: rule k mentions only terminals and nonterminals
//! listed before it. The represented string is the expansion of the last
//! nonterminal, and the grammar size is the total right-hand-side length.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::format::{self, parse_err};
use crate::text::Text;

pub const LENGTH_CAP: u64 = (1 << 63) - 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrammarSymbol {
    Terminal(u8),
    /// Index into the nonterminal list.
    Nonterminal(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grammar {
    names: Vec<String>,
    rules: Vec<Vec<GrammarSymbol>>,
    terminals: BTreeSet<u8>,
}

impl Grammar {
    /// Builds a grammar, enforcing non-empty right-hand sides and the
    /// earlier-only reference order.
    pub fn new(names: Vec<String>, rules: Vec<Vec<GrammarSymbol>>) -> Result<Self> {
        if names.len() != rules.len() || names.is_empty() {
            return Err(Error::Invalid(
                "a grammar needs one rule per nonterminal and at least one rule".into(),
            ));
        }
        let mut terminals = BTreeSet::new();
        for (k, rule) in rules.iter().enumerate() {
            if rule.is_empty() {
                return Err(Error::Invalid(format!(
                    "rule for {} has an empty right-hand side",
                    names[k]
                )));
            }
            for sym in rule {
                match *sym {
                    GrammarSymbol::Terminal(b) => {
                        terminals.insert(b);
                    }
                    GrammarSymbol::Nonterminal(j) => {
                        if j >= k {
                            return Err(Error::Invalid(format!(
                                "rule for {} references {} which is not listed earlier",
                                names[k],
                                names.get(j).map(String::as_str).unwrap_or("?")
                            )));
                        }
                    }
                }
            }
        }
        Ok(Grammar { names, rules, terminals })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn rules(&self) -> &[Vec<GrammarSymbol>] {
        &self.rules
    }

    pub fn terminals(&self) -> &BTreeSet<u8> {
        &self.terminals
    }

    /// Index of the start nonterminal (the last listed).
    pub fn start(&self) -> usize {
        self.names.len() - 1
    }

    /// Sum of right-hand-side lengths.
    pub fn size(&self) -> usize {
        self.rules.iter().map(Vec::len).sum()
    }

    /// Longest root-to-terminal path in the derivation tree of any
    /// nonterminal: terminals count 0, so a rule of terminals has height 1.
    pub fn height(&self) -> usize {
        let mut h = vec![0usize; self.rules.len()];
        for k in 0..self.rules.len() {
            h[k] = 1 + self.rules[k]
                .iter()
                .map(|sym| match *sym {
                    GrammarSymbol::Terminal(_) => 0,
                    GrammarSymbol::Nonterminal(j) => h[j],
                })
                .max()
                .unwrap_or(0);
        }
        h[self.start()]
    }

    /// Expansion length of every nonterminal, with checked arithmetic
    /// against the 63-bit cap.
    pub fn expansion_lengths(&self) -> Result<Vec<u64>> {
        let mut lens = vec![0u64; self.rules.len()];
        for k in 0..self.rules.len() {
            let mut total: u64 = 0;
            for sym in &self.rules[k] {
                let add = match *sym {
                    GrammarSymbol::Terminal(_) => 1,
                    GrammarSymbol::Nonterminal(j) => lens[j],
                };
                total = total
                    .checked_add(add)
                    .filter(|&v| v <= LENGTH_CAP)
                    .ok_or_else(|| {
                        Error::Overflow(format!(
                            "expansion length of {} exceeds the 63-bit cap",
                            self.names[k]
                        ))
                    })?;
            }
            lens[k] = total;
        }
        Ok(lens)
    }

    /// The represented string, `exp` of the start nonterminal.
    pub fn expand(&self) -> Result<Text> {
        let lens = self.expansion_lengths()?;
        let total = lens[self.start()];
        let cap: u64 = usize::MAX as u64;
        if total > cap {
            return Err(Error::Overflow(format!(
                "expansion of length {total} cannot be materialized"
            )));
        }
        let mut out = Vec::with_capacity(total as usize);
        let mut stack = vec![GrammarSymbol::Nonterminal(self.start())];
        while let Some(sym) = stack.pop() {
            match sym {
                GrammarSymbol::Terminal(b) => out.push(b),
                GrammarSymbol::Nonterminal(k) => {
                    stack.extend(self.rules[k].iter().rev().copied());
                }
            }
        }
        Ok(Text::new(out))
    }

    pub fn name_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn parse(input: &str) -> Result<Self> {
        let lines = format::content_lines(input);
        let Some(&(first_no, first)) = lines.first() else {
            return Err(parse_err(1, 1, "empty input"));
        };
        let toks = format::tokens(first);
        if toks.is_empty() || toks[0].text != "grammar" {
            return Err(parse_err(first_no, 1, "expected header `grammar`"));
        }
        let mut terminals: BTreeSet<u8> = BTreeSet::new();
        let mut names: Vec<String> = Vec::new();
        let mut rules: Vec<Vec<GrammarSymbol>> = Vec::new();
        let mut terminal_tokens: BTreeSet<String> = BTreeSet::new();
        let mut rest = lines[1..].iter();
        let Some(&(term_no, term_line)) = rest.next() else {
            return Err(parse_err(first_no, 1, "missing `terminals:` line"));
        };
        let toks = format::tokens(term_line);
        if toks.is_empty() || toks[0].text != "terminals:" {
            return Err(parse_err(term_no, 1, "expected `terminals: <symbols>`"));
        }
        for t in &toks[1..] {
            let b = format::parse_symbol(t.text).map_err(|m| parse_err(term_no, t.col, m))?;
            terminals.insert(b);
            terminal_tokens.insert(t.text.to_string());
        }
        for &(line_no, line) in rest {
            let toks = format::tokens(line);
            if toks.len() < 2 || toks[1].text != "->" {
                return Err(parse_err(line_no, 1, "expected `<name> -> <symbols>`"));
            }
            let name = toks[0].text;
            if terminal_tokens.contains(name) {
                return Err(parse_err(
                    line_no,
                    toks[0].col,
                    format!("nonterminal name {name:?} collides with a terminal"),
                ));
            }
            if names.iter().any(|n| n == name) {
                return Err(parse_err(
                    line_no,
                    toks[0].col,
                    format!("nonterminal {name:?} is defined twice"),
                ));
            }
            let mut rhs = Vec::new();
            for t in &toks[2..] {
                if terminal_tokens.contains(t.text) {
                    rhs.push(GrammarSymbol::Terminal(
                        format::parse_symbol(t.text).expect("validated above"),
                    ));
                } else if let Some(j) = names.iter().position(|n| n == t.text) {
                    rhs.push(GrammarSymbol::Nonterminal(j));
                } else {
                    return Err(parse_err(
                        line_no,
                        t.col,
                        format!(
                            "symbol {:?} is neither a terminal nor a previously defined nonterminal",
                            t.text
                        ),
                    ));
                }
            }
            if rhs.is_empty() {
                return Err(parse_err(line_no, 1, "empty right-hand side"));
            }
            names.push(name.to_string());
            rules.push(rhs);
        }
        let mut g = Grammar::new(names, rules)?;
        // Keep declared-but-unused terminals for exact round trips.
        g.terminals.extend(terminals);
        Ok(g)
    }
}

impl fmt::Display for Grammar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "grammar")?;
        write!(f, "terminals:")?;
        for &b in &self.terminals {
            write!(f, " {}", format::fmt_symbol(b))?;
        }
        writeln!(f)?;
        for (k, rule) in self.rules.iter().enumerate() {
            write!(f, "{} ->", self.names[k])?;
            for sym in rule {
                match *sym {
                    GrammarSymbol::Terminal(b) => write!(f, " {}", format::fmt_symbol(b))?,
                    GrammarSymbol::Nonterminal(j) => write!(f, " {}", self.names[j])?,
                }
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ababab_grammar() -> Grammar {
        // X1 -> ab, X2 -> X1 X1 X1
        Grammar::new(
            vec!["X1".into(), "X2".into()],
            vec![
                vec![GrammarSymbol::Terminal(b'a'), GrammarSymbol::Terminal(b'b')],
                vec![
                    GrammarSymbol::Nonterminal(0),
                    GrammarSymbol::Nonterminal(0),
                    GrammarSymbol::Nonterminal(0),
                ],
            ],
        )
        .unwrap()
    }

    #[test]
    fn expand_examples() {
        assert_eq!(ababab_grammar().expand().unwrap(), Text::from("ababab"));
        let single = Grammar::new(vec!["X1".into()], vec![vec![GrammarSymbol::Terminal(b'a')]])
            .unwrap();
        assert_eq!(single.expand().unwrap(), Text::from("a"));
    }

    #[test]
    fn size_and_height_examples() {
        let g = ababab_grammar();
        assert_eq!(g.size(), 5);
        assert_eq!(g.height(), 2);
        let single = Grammar::new(vec!["X1".into()], vec![vec![GrammarSymbol::Terminal(b'a')]])
            .unwrap();
        assert_eq!(single.size(), 1);
        assert_eq!(single.height(), 1);
    }

    #[test]
    fn expansion_length_matches_expand() {
        let g = ababab_grammar();
        let lens = g.expansion_lengths().unwrap();
        assert_eq!(lens[g.start()] as usize, g.expand().unwrap().len());
    }

    #[test]
    fn forward_references_rejected() {
        let err = Grammar::new(
            vec!["X1".into(), "X2".into()],
            vec![vec![GrammarSymbol::Nonterminal(1)], vec![GrammarSymbol::Terminal(b'a')]],
        );
        assert!(matches!(err, Err(Error::Invalid(_))));
        let parsed = Grammar::parse("grammar\nterminals: a\nX1 -> X2\nX2 -> a\n");
        assert!(matches!(parsed, Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn empty_rhs_rejected() {
        assert!(matches!(
            Grammar::new(vec!["X1".into()], vec![vec![]]),
            Err(Error::Invalid(_))
        ));
    }

    #[test]
    fn overflow_detected() {
        // Doubling 70 times overflows the 63-bit cap.
        let mut names = vec!["X0".to_string()];
        let mut rules = vec![vec![GrammarSymbol::Terminal(b'a'), GrammarSymbol::Terminal(b'a')]];
        for k in 1..70 {
            names.push(format!("X{k}"));
            rules.push(vec![GrammarSymbol::Nonterminal(k - 1), GrammarSymbol::Nonterminal(k - 1)]);
        }
        let g = Grammar::new(names, rules).unwrap();
        assert!(matches!(g.expansion_lengths(), Err(Error::Overflow(_))));
        assert!(matches!(g.expand(), Err(Error::Overflow(_))));
    }

    #[test]
    fn serialization_round_trip() {
        let g = ababab_grammar();
        let text = g.to_string();
        let back = Grammar::parse(&text).unwrap();
        assert_eq!(back, g);
        assert_eq!(back.expand().unwrap(), Text::from("ababab"));
    }
}
