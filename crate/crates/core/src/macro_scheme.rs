//! Bidirectional macro schemes.
//!
//! A scheme factorizes `w[1,n]` into phrases, each either a literal symbol
//! or a copy `w[s, s+len-1]` of some other region; sources may lie left or
//! right of their phrase. The scheme induces a position map f: positions in
//! literal phrases map to bottom, positions in copy phrases map into their
//! source. The scheme is valid exactly when every f-chain reaches bottom,
//! which makes the represented string unique and decodable.

use std::fmt;

use crate::error::{Error, Result};
use crate::format::{self, parse_err};
use crate::measures::LzPhrase;
use crate::text::Text;

/// One phrase: a literal single symbol, or a copy of length >= 2 from a
/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phrase {
    Literal(u8),
    Copy { source: usize, len: usize },
}

impl Phrase {
    pub fn len(&self) -> usize {
        match self {
            Phrase::Literal(_) => 1,
            Phrase::Copy { len, .. } => *len,
        }
    }
}

/// Phrase sequence plus the declared total length, so structural checks and
/// validation can run without decoding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BidirectionalMacroScheme {
    phrases: Vec<Phrase>,
    n: usize,
    /// 1-based start position of each phrase.
    starts: Vec<usize>,
}

impl BidirectionalMacroScheme {
    pub fn new(phrases: Vec<Phrase>, n: usize) -> Result<Self> {
        let mut starts = Vec::with_capacity(phrases.len());
        let mut pos = 1usize;
        for (k, ph) in phrases.iter().enumerate() {
            starts.push(pos);
            match *ph {
                Phrase::Literal(_) => {}
                Phrase::Copy { source, len } => {
                    if len < 2 {
                        return Err(Error::Invalid(format!(
                            "phrase {} is a copy of length {len}; copies must have length >= 2",
                            k + 1
                        )));
                    }
                    if source < 1 || source + len - 1 > n {
                        return Err(Error::Range(format!(
                            "phrase {} copies [{source},{}] outside [1,{n}]",
                            k + 1,
                            source + len - 1
                        )));
                    }
                }
            }
            pos += ph.len();
        }
        if pos - 1 != n {
            return Err(Error::Invalid(format!(
                "phrase lengths sum to {} but n={n} was declared",
                pos - 1
            )));
        }
        Ok(BidirectionalMacroScheme { phrases, n, starts })
    }

    pub fn phrases(&self) -> &[Phrase] {
        &self.phrases
    }

    /// Number of phrases; the measure b is this count for the smallest
    /// valid scheme.
    pub fn size(&self) -> usize {
        self.phrases.len()
    }

    pub fn text_len(&self) -> usize {
        self.n
    }

    /// The induced position map: entry `i-1` holds f(i), with `None` for
    /// bottom. Inside phrase k starting at p with source s, f(i) = s + (i - p).
    pub fn position_map(&self) -> Vec<Option<usize>> {
        let mut f = vec![None; self.n];
        for (k, ph) in self.phrases.iter().enumerate() {
            let p = self.starts[k];
            if let Phrase::Copy { source, len } = *ph {
                for off in 0..len {
                    f[p + off - 1] = Some(source + off);
                }
            }
        }
        f
    }

    /// True iff iterating f from every position reaches bottom.
    pub fn validate(&self) -> bool {
        self.find_cycle_position().is_none()
    }

    /// Some position lying on an f-cycle, if one exists.
    pub fn find_cycle_position(&self) -> Option<usize> {
        let f = self.position_map();
        // 0 = unvisited, 1 = on current chain, 2 = resolved
        let mut color = vec![0u8; self.n];
        let mut chain = Vec::new();
        for start in 1..=self.n {
            if color[start - 1] != 0 {
                continue;
            }
            let mut cur = start;
            loop {
                if color[cur - 1] == 1 {
                    return Some(cur);
                }
                if color[cur - 1] == 2 {
                    break;
                }
                color[cur - 1] = 1;
                chain.push(cur);
                match f[cur - 1] {
                    Some(next) => cur = next,
                    None => break,
                }
            }
            for &p in &chain {
                color[p - 1] = 2;
            }
            chain.clear();
        }
        None
    }

    /// Recover the represented string by resolving f-chains, with
    /// memoization. Reports a position on the offending cycle if invalid.
    pub fn decode(&self) -> Result<Text> {
        let f = self.position_map();
        // Literal symbol per position, where the phrase is literal.
        let mut lit = vec![None; self.n];
        for (k, ph) in self.phrases.iter().enumerate() {
            if let Phrase::Literal(b) = *ph {
                lit[self.starts[k] - 1] = Some(b);
            }
        }
        let mut out = vec![0u8; self.n];
        let mut state = vec![0u8; self.n]; // 0 unresolved, 1 in progress, 2 done
        let mut chain = Vec::new();
        for start in 1..=self.n {
            if state[start - 1] == 2 {
                continue;
            }
            let mut cur = start;
            let sym = loop {
                if state[cur - 1] == 2 {
                    break out[cur - 1];
                }
                if state[cur - 1] == 1 {
                    return Err(Error::Cycle(format!(
                        "position {cur} depends on itself"
                    )));
                }
                state[cur - 1] = 1;
                chain.push(cur);
                match f[cur - 1] {
                    None => break lit[cur - 1].expect("literal positions carry a symbol"),
                    Some(next) => cur = next,
                }
            };
            for &p in chain.drain(..) {
                out[p - 1] = sym;
                state[p - 1] = 2;
            }
        }
        Ok(Text::new(out))
    }

    /// The LZ76 parse is a left-pointing scheme; phrase lengths and sources
    /// carry over directly (length-1 phrases are already literals there).
    pub fn from_lz(parse: &[LzPhrase]) -> Self {
        let mut phrases = Vec::with_capacity(parse.len());
        let mut n = 0usize;
        for ph in parse {
            n += ph.len();
            phrases.push(match *ph {
                LzPhrase::Literal(b) => Phrase::Literal(b),
                LzPhrase::Copy { source, len } => Phrase::Copy { source, len },
            });
        }
        BidirectionalMacroScheme::new(phrases, n)
            .expect("LZ76 parses always form structurally sound schemes")
    }

    pub fn parse(input: &str) -> Result<Self> {
        let lines = format::content_lines(input);
        let Some(&(first_no, first)) = lines.first() else {
            return Err(parse_err(1, 1, "empty input"));
        };
        let toks = format::tokens(first);
        if toks.is_empty() || toks[0].text != "bms" {
            return Err(parse_err(first_no, 1, "expected header `bms n=<N>`"));
        }
        if toks.len() != 2 || !toks[1].text.starts_with("n=") {
            return Err(parse_err(first_no, 1, "header must be `bms n=<N>`"));
        }
        let n = format::parse_count(first_no, toks[1].col, &toks[1].text[2..])? as usize;
        let mut phrases = Vec::new();
        for &(line_no, line) in &lines[1..] {
            let toks = format::tokens(line);
            match toks[0].text {
                "lit" => {
                    if toks.len() != 2 {
                        return Err(parse_err(line_no, toks[0].col, "expected `lit <symbol>`"));
                    }
                    let b = format::parse_symbol(toks[1].text)
                        .map_err(|m| parse_err(line_no, toks[1].col, m))?;
                    phrases.push(Phrase::Literal(b));
                }
                "copy" => {
                    if toks.len() != 3
                        || !toks[1].text.starts_with("s=")
                        || !toks[2].text.starts_with("len=")
                    {
                        return Err(parse_err(
                            line_no,
                            toks[0].col,
                            "expected `copy s=<pos> len=<L>`",
                        ));
                    }
                    let source = format::parse_count(line_no, toks[1].col, &toks[1].text[2..])?;
                    let len = format::parse_count(line_no, toks[2].col, &toks[2].text[4..])?;
                    phrases.push(Phrase::Copy { source: source as usize, len: len as usize });
                }
                other => {
                    return Err(parse_err(
                        line_no,
                        toks[0].col,
                        format!("expected `lit` or `copy`, got {other:?}"),
                    ))
                }
            }
        }
        BidirectionalMacroScheme::new(phrases, n)
    }
}

impl fmt::Display for BidirectionalMacroScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "bms n={}", self.n)?;
        for ph in &self.phrases {
            match *ph {
                Phrase::Literal(b) => writeln!(f, "lit {}", format::fmt_symbol(b))?,
                Phrase::Copy { source, len } => writeln!(f, "copy s={source} len={len}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::lz76_parse;

    fn aaaa_scheme() -> BidirectionalMacroScheme {
        BidirectionalMacroScheme::new(
            vec![Phrase::Literal(b'a'), Phrase::Copy { source: 1, len: 3 }],
            4,
        )
        .unwrap()
    }

    fn fib7_scheme() -> BidirectionalMacroScheme {
        BidirectionalMacroScheme::new(
            vec![
                Phrase::Copy { source: 6, len: 6 },
                Phrase::Literal(b'b'),
                Phrase::Literal(b'a'),
                Phrase::Copy { source: 6, len: 5 },
            ],
            13,
        )
        .unwrap()
    }

    #[test]
    fn position_map_examples() {
        assert_eq!(
            aaaa_scheme().position_map(),
            vec![None, Some(1), Some(2), Some(3)]
        );
        let all_lit = BidirectionalMacroScheme::new(
            vec![Phrase::Literal(b'a'), Phrase::Literal(b'b')],
            2,
        )
        .unwrap();
        assert_eq!(all_lit.position_map(), vec![None, None]);
        let f = fib7_scheme().position_map();
        assert_eq!(f[0], Some(6));
        assert_eq!(f[6], None);
        assert_eq!(f[8], Some(6));
    }

    #[test]
    fn validate_examples() {
        assert!(aaaa_scheme().validate());
        let self_copy =
            BidirectionalMacroScheme::new(vec![Phrase::Copy { source: 1, len: 2 }], 2).unwrap();
        assert!(!self_copy.validate());
        let all_lit = BidirectionalMacroScheme::new(
            vec![Phrase::Literal(b'a'), Phrase::Literal(b'b')],
            2,
        )
        .unwrap();
        assert!(all_lit.validate());
    }

    #[test]
    fn validate_agrees_with_bounded_iteration_oracle() {
        // Oracle: iterate f at most n+1 times from every position.
        let schemes = vec![
            aaaa_scheme(),
            fib7_scheme(),
            BidirectionalMacroScheme::new(vec![Phrase::Copy { source: 1, len: 2 }], 2).unwrap(),
            BidirectionalMacroScheme::new(
                vec![Phrase::Copy { source: 3, len: 2 }, Phrase::Copy { source: 1, len: 2 }],
                4,
            )
            .unwrap(),
            BidirectionalMacroScheme::new(
                vec![Phrase::Copy { source: 3, len: 2 }, Phrase::Literal(b'a'), Phrase::Literal(b'b')],
                4,
            )
            .unwrap(),
        ];
        for scheme in schemes {
            let f = scheme.position_map();
            let n = scheme.text_len();
            let oracle_valid = (1..=n).all(|start| {
                let mut cur = Some(start);
                for _ in 0..=n {
                    match cur {
                        None => return true,
                        Some(p) => cur = f[p - 1],
                    }
                }
                false
            });
            assert_eq!(scheme.validate(), oracle_valid);
        }
    }

    #[test]
    fn decode_examples() {
        assert_eq!(aaaa_scheme().decode().unwrap(), Text::from("aaaa"));
        assert_eq!(fib7_scheme().decode().unwrap(), Text::from("abaababaabaab"));
        let all_lit = BidirectionalMacroScheme::new(
            vec![Phrase::Literal(b'a'), Phrase::Literal(b'b')],
            2,
        )
        .unwrap();
        assert_eq!(all_lit.decode().unwrap(), Text::from("ab"));
        let self_copy =
            BidirectionalMacroScheme::new(vec![Phrase::Copy { source: 1, len: 2 }], 2).unwrap();
        assert!(matches!(self_copy.decode(), Err(Error::Cycle(_))));
    }

    #[test]
    fn from_lz_examples() {
        let scheme = BidirectionalMacroScheme::from_lz(&lz76_parse(&Text::from("aaaa")));
        assert_eq!(scheme, aaaa_scheme());
        let ab = BidirectionalMacroScheme::from_lz(&lz76_parse(&Text::from("ab")));
        assert_eq!(ab.phrases(), &[Phrase::Literal(b'a'), Phrase::Literal(b'b')]);
        let abab = BidirectionalMacroScheme::from_lz(&lz76_parse(&Text::from("abab")));
        assert_eq!(
            abab.phrases(),
            &[Phrase::Literal(b'a'), Phrase::Literal(b'b'), Phrase::Copy { source: 1, len: 2 }]
        );
    }

    #[test]
    fn lz_round_trip_decodes_to_input() {
        for s in ["abaababaabaab", "001001100100111", "aabbaabbab", "zzzzz"] {
            let w = Text::from(s);
            let scheme = BidirectionalMacroScheme::from_lz(&lz76_parse(&w));
            assert!(scheme.validate());
            assert_eq!(scheme.decode().unwrap(), w);
        }
    }

    #[test]
    fn structural_invariants_checked() {
        assert!(matches!(
            BidirectionalMacroScheme::new(vec![Phrase::Copy { source: 1, len: 1 }], 1),
            Err(Error::Invalid(_))
        ));
        assert!(matches!(
            BidirectionalMacroScheme::new(vec![Phrase::Copy { source: 3, len: 2 }], 2),
            Err(Error::Range(_))
        ));
        assert!(matches!(
            BidirectionalMacroScheme::new(vec![Phrase::Literal(b'a')], 2),
            Err(Error::Invalid(_))
        ));
    }

    #[test]
    fn serialization_round_trip_is_exact() {
        for scheme in [aaaa_scheme(), fib7_scheme()] {
            let text = scheme.to_string();
            assert_eq!(BidirectionalMacroScheme::parse(&text).unwrap(), scheme);
        }
        let weird = BidirectionalMacroScheme::new(
            vec![Phrase::Literal(0x00), Phrase::Literal(b' '), Phrase::Copy { source: 1, len: 2 }],
            4,
        )
        .unwrap();
        let text = weird.to_string();
        assert_eq!(BidirectionalMacroScheme::parse(&text).unwrap(), weird);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let bad = "bms n=2\nlit a\nfrobnicate b\n";
        match BidirectionalMacroScheme::parse(bad) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
