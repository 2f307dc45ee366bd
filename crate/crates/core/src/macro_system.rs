//! Macro systems: rule systems over variables and terminals whose right-hand
//! sides may contain extraction symbols `A[i,j]`, denoting the substring
//! `exp(A)[i,j]` of a variable's expansion. Unlike grammars, rules are not
//! ordered, so a variable may extract from any variable, including itself.
//!
//! Expansion works in two steps: expansion lengths are solved from the
//! plain-variable dependency graph (extractions contribute their fixed
//! width), then single positions `A[r]` are resolved by descending into the
//! child covering position r, with memoization. Revisiting an in-progress
//! `A[r]` means the system has no unique solution.
//!
//! A system is internal when every variable's expansion occurs in the
//! generated string; internal systems convert to bidirectional macro schemes
//! of no larger size, and every scheme converts back as a single rule.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};
use crate::format::{self, parse_err};
use crate::grammar::LENGTH_CAP;
use crate::macro_scheme::{BidirectionalMacroScheme, Phrase};
use crate::text::Text;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MsSymbol {
    Terminal(u8),
    Variable(usize),
    /// `A[lo,hi]`, 1-based inclusive positions in exp(A).
    Extraction { var: usize, lo: u64, hi: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MacroSystem {
    names: Vec<Vec<u8>>,
    rules: Vec<Vec<MsSymbol>>,
    terminals: BTreeSet<u8>,
    start: usize,
}

impl MacroSystem {
    pub fn new(
        names: Vec<Vec<u8>>,
        rules: Vec<Vec<MsSymbol>>,
        terminals: BTreeSet<u8>,
        start: usize,
    ) -> Result<Self> {
        if names.is_empty() || names.len() != rules.len() || start >= names.len() {
            return Err(Error::Invalid(
                "a macro system needs one rule per variable and a start variable".into(),
            ));
        }
        for name in &names {
            format::check_name(name).map_err(Error::Invalid)?;
            if name.len() == 1 && terminals.contains(&name[0]) {
                return Err(Error::Invalid(format!(
                    "variable {:?} collides with a terminal",
                    String::from_utf8_lossy(name)
                )));
            }
        }
        for (i, a) in names.iter().enumerate() {
            if names[..i].contains(a) {
                return Err(Error::Invalid(format!(
                    "variable {:?} is defined twice",
                    String::from_utf8_lossy(a)
                )));
            }
        }
        for (k, rule) in rules.iter().enumerate() {
            if rule.is_empty() && k != start {
                return Err(Error::Invalid(format!(
                    "empty right-hand side is only permitted for the start variable, not {}",
                    String::from_utf8_lossy(&names[k])
                )));
            }
            for sym in rule {
                match *sym {
                    MsSymbol::Terminal(_) => {}
                    MsSymbol::Variable(v) => {
                        if v >= names.len() {
                            return Err(Error::Invalid("variable index out of range".into()));
                        }
                    }
                    MsSymbol::Extraction { var, lo, hi } => {
                        if var >= names.len() {
                            return Err(Error::Invalid("variable index out of range".into()));
                        }
                        if lo < 1 || lo > hi {
                            return Err(Error::Range(format!(
                                "extraction [{lo},{hi}] must satisfy 1 <= i <= j"
                            )));
                        }
                    }
                }
            }
        }
        Ok(MacroSystem { names, rules, terminals, start })
    }

    pub fn names(&self) -> &[Vec<u8>] {
        &self.names
    }

    pub fn name(&self, var: usize) -> String {
        format::fmt_name(&self.names[var])
    }

    pub fn rules(&self) -> &[Vec<MsSymbol>] {
        &self.rules
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn terminals(&self) -> &BTreeSet<u8> {
        &self.terminals
    }

    /// Sum of right-hand-side lengths.
    pub fn size(&self) -> usize {
        self.rules.iter().map(Vec::len).sum()
    }

    pub fn var_index(&self, name: &[u8]) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Expansion length of every variable. The length equations depend only
    /// on plain variable references (extractions contribute `hi-lo+1`), so
    /// they are solved in topological order; a loop means the system is
    /// invalid. Extraction ranges are checked against the solved lengths.
    pub fn solve_lengths(&self) -> Result<Vec<u64>> {
        let nvars = self.names.len();
        let mut lens = vec![0u64; nvars];
        let mut color = vec![0u8; nvars]; // 0 white, 1 gray, 2 done
        // Iterative DFS over plain-variable dependencies.
        for root in 0..nvars {
            if color[root] != 0 {
                continue;
            }
            let mut stack = vec![(root, 0usize)];
            color[root] = 1;
            while let Some(&mut (v, ref mut child)) = stack.last_mut() {
                let mut descended = false;
                while *child < self.rules[v].len() {
                    let idx = *child;
                    *child += 1;
                    if let MsSymbol::Variable(b) = self.rules[v][idx] {
                        match color[b] {
                            0 => {
                                color[b] = 1;
                                stack.push((b, 0));
                                descended = true;
                                break;
                            }
                            1 => {
                                return Err(Error::Invalid(format!(
                                    "length equations loop through {}",
                                    self.name(b)
                                )));
                            }
                            _ => {}
                        }
                    }
                }
                if descended {
                    continue;
                }
                // All children resolved; compute the length.
                let mut total: u64 = 0;
                for sym in &self.rules[v] {
                    let add = match *sym {
                        MsSymbol::Terminal(_) => 1,
                        MsSymbol::Variable(b) => lens[b],
                        MsSymbol::Extraction { lo, hi, .. } => hi - lo + 1,
                    };
                    total = total
                        .checked_add(add)
                        .filter(|&t| t <= LENGTH_CAP)
                        .ok_or_else(|| {
                            Error::Overflow(format!(
                                "expansion length of {} exceeds the 63-bit cap",
                                self.name(v)
                            ))
                        })?;
                }
                lens[v] = total;
                color[v] = 2;
                stack.pop();
            }
        }
        for (k, rule) in self.rules.iter().enumerate() {
            for sym in rule {
                if let MsSymbol::Extraction { var, hi, .. } = *sym {
                    if hi > lens[var] {
                        return Err(Error::Range(format!(
                            "rule for {} extracts {}[..,{hi}] beyond |exp({})| = {}",
                            self.name(k),
                            self.name(var),
                            self.name(var),
                            lens[var]
                        )));
                    }
                }
            }
        }
        Ok(lens)
    }

    fn resolver(&self) -> Result<Resolver<'_>> {
        let lens = self.solve_lengths()?;
        Ok(Resolver::new(self, lens))
    }

    /// The generated string, `exp` of the start variable.
    pub fn expand(&self) -> Result<Text> {
        let mut r = self.resolver()?;
        r.expansion_of(self.start)
    }

    /// True iff every variable's expansion occurs as a substring of `w`.
    pub fn is_internal(&self, w: &Text) -> Result<bool> {
        let mut r = self.resolver()?;
        for var in 0..self.names.len() {
            let exp = r.expansion_of(var)?;
            if !w.contains(exp.as_bytes()) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// A scheme becomes a single rule: literal phrases become terminals and
    /// copy phrases become extractions of the start variable. Size equals
    /// the phrase count, and expansion equals the decoded string.
    pub fn from_bms(scheme: &BidirectionalMacroScheme) -> Self {
        let mut rule = Vec::with_capacity(scheme.size());
        let mut terminals = BTreeSet::new();
        for ph in scheme.phrases() {
            match *ph {
                Phrase::Literal(b) => {
                    terminals.insert(b);
                    rule.push(MsSymbol::Terminal(b));
                }
                Phrase::Copy { source, len } => rule.push(MsSymbol::Extraction {
                    var: 0,
                    lo: source as u64,
                    hi: (source + len - 1) as u64,
                }),
            }
        }
        MacroSystem::new(vec![b"S".to_vec()], vec![rule], terminals, 0)
            .expect("scheme conversion produces a structurally sound system")
    }

    /// Normalize an internal system into a single rule over terminals and
    /// start-extractions, then read it off as a scheme.
    ///
    /// Each variable's rule is inlined at its first (leftmost) occurrence in
    /// the flattening; later occurrences copy that region, which lies
    /// strictly to the left. Extractions of a not-yet-inlined variable fall
    /// back to the leftmost occurrence of its expansion in the string. The
    /// fallback can point rightwards and close f-cycles; such phrases are
    /// re-sourced to another occurrence of their content until the scheme
    /// validates (splitting a phrase is the last resort and does not arise
    /// for systems with a one-sided layout).
    pub fn to_bms(&self) -> Result<BidirectionalMacroScheme> {
        let lens = self.solve_lengths()?;
        let mut resolver = Resolver::new(self, lens.clone());
        let w = resolver.expansion_of(self.start)?;
        let n = w.len();
        // Leftmost occurrence of every expansion; absence means the system
        // is not internal and cannot be converted.
        let mut occ = vec![0usize; self.names.len()];
        for var in 0..self.names.len() {
            let exp = resolver.expansion_of(var)?;
            occ[var] = w.find(exp.as_bytes()).ok_or_else(|| {
                Error::Invalid(format!(
                    "macro system is not internal: exp({}) does not occur in the string",
                    self.name(var)
                ))
            })?;
        }

        let mut grounded: Vec<Option<usize>> = vec![None; self.names.len()];
        grounded[self.start] = Some(1);
        let mut phrases: Vec<Phrase> = Vec::new();
        self.flatten(self.start, &lens, &occ, &mut grounded, &mut phrases, &w);
        let mut scheme = BidirectionalMacroScheme::new(phrases, n)?;

        // Re-source offending phrases until every f-chain grounds.
        let mut tried: HashMap<usize, BTreeSet<usize>> = HashMap::new();
        let budget = 64 + 8 * (self.size() + n);
        for _ in 0..budget {
            let Some(cycle_pos) = scheme.find_cycle_position() else {
                let decoded = scheme.decode()?;
                if decoded != w {
                    return Err(Error::Invalid(
                        "internal error: converted scheme decodes to a different string".into(),
                    ));
                }
                return Ok(scheme);
            };
            scheme = self.repair_cycle(scheme, cycle_pos, &w, &mut tried)?;
        }
        Err(Error::Invalid(
            "internal error: scheme repair did not converge".into(),
        ))
    }

    fn flatten(
        &self,
        var: usize,
        lens: &[u64],
        occ: &[usize],
        grounded: &mut Vec<Option<usize>>,
        phrases: &mut Vec<Phrase>,
        w: &Text,
    ) {
        for sym in &self.rules[var] {
            let pos = 1 + phrases.iter().map(Phrase::len).sum::<usize>();
            match *sym {
                MsSymbol::Terminal(b) => phrases.push(Phrase::Literal(b)),
                MsSymbol::Variable(b) => match grounded[b] {
                    Some(src) => push_copy(phrases, w, src, lens[b] as usize, pos),
                    None => {
                        grounded[b] = Some(pos);
                        self.flatten(b, lens, occ, grounded, phrases, w);
                    }
                },
                MsSymbol::Extraction { var: b, lo, hi } => {
                    let base = grounded[b].unwrap_or(occ[b]);
                    let src = base + lo as usize - 1;
                    push_copy(phrases, w, src, (hi - lo + 1) as usize, pos);
                }
            }
        }
    }

    fn repair_cycle(
        &self,
        scheme: BidirectionalMacroScheme,
        cycle_pos: usize,
        w: &Text,
        tried: &mut HashMap<usize, BTreeSet<usize>>,
    ) -> Result<BidirectionalMacroScheme> {
        let f = scheme.position_map();
        let mut cycle = vec![cycle_pos];
        let mut cur = f[cycle_pos - 1].expect("cycle positions map somewhere");
        while cur != cycle_pos {
            cycle.push(cur);
            cur = f[cur - 1].expect("cycle positions map somewhere");
        }
        // Phrase starts, for locating the phrase of a position.
        let mut starts = Vec::with_capacity(scheme.size());
        let mut acc = 1usize;
        for ph in scheme.phrases() {
            starts.push(acc);
            acc += ph.len();
        }
        // A cycle of strictly-left pointers is impossible, so some phrase on
        // the cycle points at or right of itself; re-source it.
        for &pos in &cycle {
            let idx = starts.partition_point(|&s| s <= pos) - 1;
            let p = starts[idx];
            let Phrase::Copy { source, len } = scheme.phrases()[idx] else { continue };
            if source < p {
                continue;
            }
            let content = w.substring(p, p + len - 1).to_vec();
            let seen = tried.entry(idx).or_default();
            seen.insert(source);
            let occs = w.occurrences(&content);
            // Prefer strictly-left sources: they always ground.
            let pick = occs
                .iter()
                .copied()
                .find(|&s| s < p && !seen.contains(&s))
                .or_else(|| occs.iter().copied().find(|&s| s != p && !seen.contains(&s)));
            let mut phrases = scheme.phrases().to_vec();
            match pick {
                Some(s) => {
                    seen.insert(s);
                    phrases[idx] = Phrase::Copy { source: s, len };
                }
                None => {
                    // No alternative occurrence; split the phrase in half
                    // and source the halves independently.
                    let left_len = len / 2;
                    let right_len = len - left_len;
                    let mut replacement = Vec::new();
                    for (off, l) in [(0usize, left_len), (left_len, right_len)] {
                        let part = w.substring(p + off, p + off + l - 1).to_vec();
                        if l == 1 {
                            replacement.push(Phrase::Literal(part[0]));
                        } else {
                            let s = w
                                .occurrences(&part)
                                .into_iter()
                                .find(|&s| s != p + off)
                                .unwrap_or(p + off);
                            replacement.push(Phrase::Copy { source: s, len: l });
                        }
                    }
                    tried.remove(&idx);
                    phrases.splice(idx..=idx, replacement);
                }
            }
            return BidirectionalMacroScheme::new(phrases, w.len());
        }
        Err(Error::Invalid(
            "internal error: cycle without a re-sourceable phrase".into(),
        ))
    }

    pub fn parse(input: &str) -> Result<Self> {
        let lines = format::content_lines(input);
        let Some(&(first_no, first)) = lines.first() else {
            return Err(parse_err(1, 1, "empty input"));
        };
        let toks = format::tokens(first);
        if toks.is_empty() || toks[0].text != "macrosystem" {
            return Err(parse_err(first_no, 1, "expected header `macrosystem`"));
        }
        let mut terminals = BTreeSet::new();
        let mut terminal_tokens = BTreeSet::new();
        let mut start_name: Option<String> = None;
        let mut rule_lines = Vec::new();
        for &(line_no, line) in &lines[1..] {
            let toks = format::tokens(line);
            match toks[0].text {
                "terminals:" => {
                    for t in &toks[1..] {
                        let b = format::parse_symbol(t.text)
                            .map_err(|m| parse_err(line_no, t.col, m))?;
                        terminals.insert(b);
                        terminal_tokens.insert(t.text.to_string());
                    }
                }
                "start:" => {
                    if toks.len() != 2 {
                        return Err(parse_err(line_no, 1, "expected `start: <variable>`"));
                    }
                    start_name = Some(toks[1].text.to_string());
                }
                _ => rule_lines.push((line_no, line)),
            }
        }
        // First pass: collect variable names so rules may reference forward.
        let mut names: Vec<Vec<u8>> = Vec::new();
        for &(line_no, line) in &rule_lines {
            let toks = format::tokens(line);
            if toks.len() < 2 || toks[1].text != "->" {
                return Err(parse_err(line_no, 1, "expected `<variable> -> <symbols>`"));
            }
            let name = toks[0].text.as_bytes().to_vec();
            format::check_name(&name).map_err(|m| parse_err(line_no, toks[0].col, m))?;
            if terminal_tokens.contains(toks[0].text) {
                return Err(parse_err(
                    line_no,
                    toks[0].col,
                    format!("variable {:?} collides with a terminal", toks[0].text),
                ));
            }
            if names.contains(&name) {
                return Err(parse_err(
                    line_no,
                    toks[0].col,
                    format!("variable {:?} is defined twice", toks[0].text),
                ));
            }
            names.push(name);
        }
        let lookup = |tok: &str| names.iter().position(|n| n == tok.as_bytes());
        let mut rules = Vec::new();
        for &(line_no, line) in &rule_lines {
            let toks = format::tokens(line);
            let mut rhs = Vec::new();
            for t in &toks[2..] {
                if terminal_tokens.contains(t.text) {
                    rhs.push(MsSymbol::Terminal(
                        format::parse_symbol(t.text).expect("validated above"),
                    ));
                } else if let Some((name, lo, hi)) = split_extraction(t.text) {
                    let var = lookup(name).ok_or_else(|| {
                        parse_err(line_no, t.col, format!("unknown variable {name:?}"))
                    })?;
                    rhs.push(MsSymbol::Extraction { var, lo, hi });
                } else if let Some(v) = lookup(t.text) {
                    rhs.push(MsSymbol::Variable(v));
                } else {
                    return Err(parse_err(
                        line_no,
                        t.col,
                        format!("unknown symbol {:?}", t.text),
                    ));
                }
            }
            rules.push(rhs);
        }
        let start_name = start_name.ok_or_else(|| parse_err(first_no, 1, "missing `start:` line"))?;
        let start = names
            .iter()
            .position(|n| n == start_name.as_bytes())
            .ok_or_else(|| parse_err(first_no, 1, format!("start variable {start_name:?} has no rule")))?;
        MacroSystem::new(names, rules, terminals, start)
    }
}

fn push_copy(phrases: &mut Vec<Phrase>, w: &Text, src: usize, len: usize, pos: usize) {
    if len == 1 {
        phrases.push(Phrase::Literal(w.at(pos)));
    } else {
        phrases.push(Phrase::Copy { source: src, len });
    }
}

/// Parses `Name[i,j]`; returns the name part and the two positions.
fn split_extraction(tok: &str) -> Option<(&str, u64, u64)> {
    let open = tok.find('[')?;
    let rest = &tok[open + 1..];
    let close = rest.find(']')?;
    if close + 1 != rest.len() || open == 0 {
        return None;
    }
    let (i, j) = rest[..close].split_once(',')?;
    Some((&tok[..open], i.trim().parse().ok()?, j.trim().parse().ok()?))
}

impl fmt::Display for MacroSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "macrosystem")?;
        write!(f, "terminals:")?;
        for &b in &self.terminals {
            write!(f, " {}", format::fmt_symbol(b))?;
        }
        writeln!(f)?;
        writeln!(f, "start: {}", self.name(self.start))?;
        for (k, rule) in self.rules.iter().enumerate() {
            write!(f, "{} ->", self.name(k))?;
            for sym in rule {
                match *sym {
                    MsSymbol::Terminal(b) => write!(f, " {}", format::fmt_symbol(b))?,
                    MsSymbol::Variable(v) => write!(f, " {}", self.name(v))?,
                    MsSymbol::Extraction { var, lo, hi } => {
                        write!(f, " {}[{lo},{hi}]", self.name(var))?
                    }
                }
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Memoized single-position resolver. Every `(variable, position)` pair
/// resolves along a chain of covering children; all chain members share the
/// final terminal, so the whole chain is memoized at once.
struct Resolver<'a> {
    sys: &'a MacroSystem,
    lens: Vec<u64>,
    /// Child span prefix sums per variable; entry i is the total width of
    /// children before child i.
    prefix: Vec<Vec<u64>>,
    memo: HashMap<(u32, u64), Slot>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Slot {
    InProgress,
    Done(u8),
}

impl<'a> Resolver<'a> {
    fn new(sys: &'a MacroSystem, lens: Vec<u64>) -> Self {
        let prefix = sys
            .rules
            .iter()
            .map(|rule| {
                let mut acc = 0u64;
                let mut out = Vec::with_capacity(rule.len() + 1);
                out.push(0);
                for sym in rule {
                    acc += match *sym {
                        MsSymbol::Terminal(_) => 1,
                        MsSymbol::Variable(b) => lens[b],
                        MsSymbol::Extraction { lo, hi, .. } => hi - lo + 1,
                    };
                    out.push(acc);
                }
                out
            })
            .collect();
        Resolver { sys, lens, prefix, memo: HashMap::new() }
    }

    /// Symbol at 1-based position `pos` of exp(var).
    fn resolve(&mut self, var: usize, pos: u64) -> Result<u8> {
        let mut chain: Vec<(u32, u64)> = Vec::new();
        let mut cur = (var as u32, pos);
        let sym = loop {
            match self.memo.get(&cur) {
                Some(Slot::Done(b)) => break *b,
                Some(Slot::InProgress) => {
                    return Err(Error::Cycle(format!(
                        "{}[{}] depends on itself; the system has no unique solution",
                        self.sys.name(cur.0 as usize),
                        cur.1
                    )));
                }
                None => {}
            }
            self.memo.insert(cur, Slot::InProgress);
            chain.push(cur);
            let (v, r) = (cur.0 as usize, cur.1);
            let pre = &self.prefix[v];
            // Child s covers positions (pre[s], pre[s+1]].
            let child = pre.partition_point(|&p| p < r) - 1;
            let offset = r - pre[child];
            match self.sys.rules[v][child] {
                MsSymbol::Terminal(b) => break b,
                MsSymbol::Variable(b) => cur = (b as u32, offset),
                MsSymbol::Extraction { var, lo, .. } => cur = (var as u32, lo - 1 + offset),
            }
        };
        for key in chain {
            self.memo.insert(key, Slot::Done(sym));
        }
        Ok(sym)
    }

    fn expansion_of(&mut self, var: usize) -> Result<Text> {
        let len = self.lens[var];
        let len: usize = len
            .try_into()
            .map_err(|_| Error::Overflow(format!("expansion of length {len} cannot be materialized")))?;
        let mut out = Vec::with_capacity(len);
        for pos in 1..=len {
            out.push(self.resolve(var, pos as u64)?);
        }
        Ok(Text::new(out))
    }
}
