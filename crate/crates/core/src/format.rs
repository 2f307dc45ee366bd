//! Shared pieces of the text formats: header-based kind detection, symbol
//! escaping, and line-oriented token scanning with positions for error
//! reporting.
//!
//! All five formats are line based. The first non-empty line starts with a
//! keyword naming the kind. Alphabet symbols are single bytes, written
//! either as the byte itself (graphic, non-space ASCII) or as `0xHH`.

use crate::error::{Error, Result};

/// The five serialized system kinds, detected from the header keyword.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemKind {
    Bms,
    Grammar,
    MacroSystem,
    LSystem,
    NuSystem,
}

impl SystemKind {
    pub fn keyword(self) -> &'static str {
        match self {
            SystemKind::Bms => "bms",
            SystemKind::Grammar => "grammar",
            SystemKind::MacroSystem => "macrosystem",
            SystemKind::LSystem => "lsystem",
            SystemKind::NuSystem => "nusystem",
        }
    }
}

/// Detect the kind from the first non-empty line.
pub fn detect_kind(input: &str) -> Option<SystemKind> {
    let first = input.lines().find(|l| !l.trim().is_empty())?;
    let word = first.trim().split_whitespace().next()?;
    match word {
        "bms" => Some(SystemKind::Bms),
        "grammar" => Some(SystemKind::Grammar),
        "macrosystem" => Some(SystemKind::MacroSystem),
        "lsystem" => Some(SystemKind::LSystem),
        "nusystem" => Some(SystemKind::NuSystem),
        _ => None,
    }
}

/// Render a single alphabet byte.
pub fn fmt_symbol(b: u8) -> String {
    if b.is_ascii_graphic() {
        (b as char).to_string()
    } else {
        format!("0x{b:02X}")
    }
}

/// Parse a single alphabet byte token (either one character or `0xHH`).
pub fn parse_symbol(tok: &str) -> std::result::Result<u8, String> {
    let bytes = tok.as_bytes();
    if bytes.len() == 1 {
        return Ok(bytes[0]);
    }
    if (tok.starts_with("0x") || tok.starts_with("0X")) && tok.len() == 4 {
        if let Ok(v) = u8::from_str_radix(&tok[2..], 16) {
            return Ok(v);
        }
    }
    Err(format!("expected a single-byte symbol, got {tok:?}"))
}

pub(crate) fn parse_err(line: usize, col: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, col, msg: msg.into() }
}

/// One token plus its 1-based column.
pub(crate) struct Tok<'a> {
    pub col: usize,
    pub text: &'a str,
}

/// Whitespace-split tokens of a line with their columns.
pub(crate) fn tokens(line: &str) -> Vec<Tok<'_>> {
    let mut out = Vec::new();
    let mut offset = 0;
    for piece in line.split_whitespace() {
        let at = line[offset..].find(piece).unwrap() + offset;
        out.push(Tok { col: at + 1, text: piece });
        offset = at + piece.len();
    }
    out
}

/// Non-empty lines with their 1-based line numbers, comments (`#`) stripped.
pub(crate) fn content_lines(input: &str) -> Vec<(usize, &str)> {
    input
        .lines()
        .enumerate()
        .map(|(i, l)| {
            let l = match l.find('#') {
                Some(p) => &l[..p],
                None => l,
            };
            (i + 1, l)
        })
        .filter(|(_, l)| !l.trim().is_empty())
        .collect()
}

/// Parse an unsigned integer token.
pub(crate) fn parse_count(line: usize, col: usize, tok: &str) -> Result<u64> {
    tok.parse::<u64>()
        .map_err(|_| parse_err(line, col, format!("expected a number, got {tok:?}")))
}

/// Variable-name restrictions shared by the rule-based formats.
pub(crate) fn check_name(name: &[u8]) -> std::result::Result<(), String> {
    if name.is_empty() {
        return Err("empty variable name".into());
    }
    for &b in name {
        if b.is_ascii_whitespace() || matches!(b, b'(' | b')' | b'[' | b']' | b',' | b'#') {
            return Err(format!(
                "variable name {:?} contains a reserved character",
                String::from_utf8_lossy(name)
            ));
        }
    }
    if name.windows(2).any(|w| w == b"->") {
        return Err(format!(
            "variable name {:?} contains \"->\"",
            String::from_utf8_lossy(name)
        ));
    }
    Ok(())
}

/// Render a variable name (names are byte strings; single non-graphic bytes
/// fall back to the 0xHH form).
pub(crate) fn fmt_name(name: &[u8]) -> String {
    if name.len() == 1 && !name[0].is_ascii_graphic() {
        return fmt_symbol(name[0]);
    }
    String::from_utf8_lossy(name).into_owned()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detects_kinds() {
        assert_eq!(detect_kind("bms n=4\nlit a\n"), Some(SystemKind::Bms));
        assert_eq!(detect_kind("\n  lsystem\n"), Some(SystemKind::LSystem));
        assert_eq!(detect_kind("nonsense"), None);
        assert_eq!(detect_kind(""), None);
    }

    #[test]
    fn symbol_round_trip() {
        for b in [b'a', b'0', 0x00u8, 0xFF, b' ', b'\n'] {
            let s = fmt_symbol(b);
            assert_eq!(parse_symbol(&s).unwrap(), b, "{s}");
        }
        assert!(parse_symbol("ab").is_err());
        assert!(parse_symbol("").is_err());
    }

    #[test]
    fn token_columns() {
        let toks = tokens("  copy s=1  len=3");
        assert_eq!(toks[0].col, 3);
        assert_eq!(toks[1].text, "s=1");
        assert_eq!(toks[2].col, 13);
    }
}
