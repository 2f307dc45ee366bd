//! Repetitiveness measures of a string.
//!
//! - `delta`: maximum over k of `S_w(k)/k`, where `S_w(k)` counts distinct
//!   substrings of length k. Computed exactly, as a rational, from the
//!   suffix automaton's per-length substring counts.
//! - `lz76_parse` / z: greedy left-to-right parse where each phrase is the
//!   longest prefix of the remaining suffix occurring with a start strictly
//!   to the left (the occurrence may overlap the phrase), else one fresh
//!   symbol. Greedy is optimal for this parse family.
//! - `is_attractor` / `gamma_bruteforce`: string attractor check and
//!   exhaustive smallest-attractor search for tiny strings.
//! - `b_bruteforce`: exhaustive smallest bidirectional macro scheme for tiny
//!   strings, enumerating partitions and source assignments.
//!
//! The brute-force searches are exponential and refuse inputs above their
//! limits rather than truncating.

use std::collections::{BTreeSet, HashMap, HashSet};

use crate::error::{Error, Result};
use crate::macro_scheme::{BidirectionalMacroScheme, Phrase};
use crate::sam::{SuffixAutomaton, ROOT};
use crate::text::Text;
use crate::Rational;

/// Largest input accepted by `gamma_bruteforce` unless overridden.
pub const DEFAULT_GAMMA_LIMIT: usize = 16;
/// Largest input accepted by `b_bruteforce` unless overridden.
pub const DEFAULT_B_LIMIT: usize = 10;

/// Number of distinct substrings of length `k`, as a set cardinality over
/// all windows. This is the definitional route; `substring_complexities`
/// computes the whole table through the suffix automaton instead.
pub fn string_complexity(w: &Text, k: usize) -> Result<usize> {
    let n = w.len();
    if k < 1 || k > n {
        return Err(Error::Domain(format!(
            "substring length k={k} out of range [1,{n}]"
        )));
    }
    let set: HashSet<&[u8]> = w.as_bytes().windows(k).collect();
    Ok(set.len())
}

/// Full table `S_w(k)` for `k = 1..=n`, from the suffix automaton.
pub fn substring_complexities(w: &Text) -> Vec<usize> {
    if w.is_empty() {
        return Vec::new();
    }
    SuffixAutomaton::build(w.as_bytes()).complexity_table(w.len())
}

/// Exact value of `max { S_w(k)/k : 1 <= k <= n }` as a reduced rational.
pub fn delta(w: &Text) -> Result<Rational> {
    if w.is_empty() {
        return Err(Error::Domain("delta is undefined on the empty string".into()));
    }
    let table = substring_complexities(w);
    let mut best = Rational::new(table[0] as u64, 1);
    for (i, &s) in table.iter().enumerate().skip(1) {
        let cand = Rational::new(s as u64, (i + 1) as u64);
        if cand > best {
            best = cand;
        }
    }
    Ok(best)
}

/// One phrase of the LZ76 parse. Copies carry 1-based leftmost source
/// starts; length-1 phrases are always literals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LzPhrase {
    Literal(u8),
    Copy { source: usize, len: usize },
}

impl LzPhrase {
    pub fn len(&self) -> usize {
        match self {
            LzPhrase::Literal(_) => 1,
            LzPhrase::Copy { len, .. } => *len,
        }
    }
}

/// Greedy LZ76 parse of `w`. The number of phrases is the measure z.
pub fn lz76_parse(w: &Text) -> Vec<LzPhrase> {
    let text = w.as_bytes();
    let n = text.len();
    if n == 0 {
        return Vec::new();
    }
    let sa = SuffixAutomaton::build(text);
    let ends = sa.first_ends();
    let mut phrases = Vec::new();
    let mut i = 0usize;
    while i < n {
        let mut v = ROOT;
        let mut len = 0usize;
        let mut source = 0usize;
        while i + len < n {
            let Some(next) = sa.step(v, text[i + len]) else { break };
            // Leftmost start of the (len+1)-prefix; once it reaches i it
            // only grows, so the walk can stop.
            let start = ends[next as usize] as usize - len;
            if start >= i {
                break;
            }
            v = next;
            source = start;
            len += 1;
        }
        if len >= 2 {
            phrases.push(LzPhrase::Copy { source: source + 1, len });
            i += len;
        } else {
            phrases.push(LzPhrase::Literal(text[i]));
            i += 1;
        }
    }
    phrases
}

/// Phrase count of the LZ76 parse.
pub fn lz76_count(w: &Text) -> usize {
    lz76_parse(w).len()
}

/// True iff every distinct substring of `w` has an occurrence crossing a
/// position of `positions` (1-based).
pub fn is_attractor(w: &Text, positions: &BTreeSet<usize>) -> Result<bool> {
    let n = w.len();
    for &p in positions {
        if p < 1 || p > n {
            return Err(Error::Domain(format!(
                "attractor position {p} out of range [1,{n}]"
            )));
        }
    }
    if n == 0 {
        return Ok(true);
    }
    if positions.is_empty() {
        return Ok(false);
    }
    let pos: Vec<usize> = positions.iter().copied().collect();
    let mut attracted: HashMap<&[u8], bool> = HashMap::new();
    for i in 1..=n {
        for j in i..=n {
            let entry = attracted.entry(w.substring(i, j)).or_insert(false);
            if !*entry {
                let idx = pos.partition_point(|&a| a < i);
                if idx < pos.len() && pos[idx] <= j {
                    *entry = true;
                }
            }
        }
    }
    Ok(attracted.values().all(|&v| v))
}

/// Coverage masks for minimal-attractor search: one bit set per position
/// crossed by some occurrence, one mask per distinct substring, reduced to
/// the subset-minimal masks.
fn coverage_masks(w: &Text) -> Vec<u128> {
    let n = w.len();
    let mut masks: HashMap<&[u8], u128> = HashMap::new();
    for i in 1..=n {
        for j in i..=n {
            let span = ((1u128 << (j - i + 1)) - 1) << (i - 1);
            *masks.entry(w.substring(i, j)).or_insert(0) |= span;
        }
    }
    let mut list: Vec<u128> = masks.into_values().collect();
    list.sort_by_key(|m| m.count_ones());
    let mut minimal: Vec<u128> = Vec::new();
    for m in list {
        if !minimal.iter().any(|&k| m & k == k) {
            minimal.push(m);
        }
    }
    minimal
}

/// Smallest attractor size by increasing-cardinality subset enumeration.
/// Refuses strings longer than `limit`.
pub fn gamma_bruteforce(w: &Text, limit: usize) -> Result<usize> {
    let n = w.len();
    if n > limit {
        return Err(Error::TooLarge { n, limit });
    }
    if n == 0 {
        return Ok(0);
    }
    let masks = coverage_masks(w);
    let full: u128 = if n == 128 { u128::MAX } else { (1u128 << n) - 1 };
    for card in 1..=n {
        // Gosper's hack over n-bit subsets of cardinality card.
        let mut subset: u128 = (1u128 << card) - 1;
        loop {
            if masks.iter().all(|&m| m & subset != 0) {
                return Ok(card);
            }
            let c = subset & subset.wrapping_neg();
            let r = subset + c;
            let next = (((r ^ subset) >> 2) / c) | r;
            if next > full {
                break;
            }
            subset = next;
        }
    }
    unreachable!("the full position set is always an attractor");
}

/// All admissible copy sources for the length-`len` phrase starting at `p`:
/// starts `s != p` with matching content. Keyed by (p, len).
fn source_table(w: &Text) -> HashMap<(usize, usize), Vec<usize>> {
    let n = w.len();
    let mut table = HashMap::new();
    for len in 2..=n {
        for p in 1..=(n - len + 1) {
            let content = w.substring(p, p + len - 1);
            let sources: Vec<usize> = (1..=(n - len + 1))
                .filter(|&s| s != p && w.substring(s, s + len - 1) == content)
                .collect();
            table.insert((p, len), sources);
        }
    }
    table
}

/// Smallest valid bidirectional macro scheme size, by exhaustive search over
/// partitions and source assignments. Refuses strings longer than `limit`.
pub fn b_bruteforce(w: &Text, limit: usize) -> Result<usize> {
    let n = w.len();
    if n > limit {
        return Err(Error::TooLarge { n, limit });
    }
    if n == 0 {
        return Ok(0);
    }
    // The LZ76 parse is itself a valid scheme, so start from z.
    let mut best = lz76_count(w);
    let sources = source_table(w);

    fn dfs(
        w: &Text,
        sources: &HashMap<(usize, usize), Vec<usize>>,
        phrases: &mut Vec<Phrase>,
        pos: usize,
        best: &mut usize,
    ) {
        let n = w.len();
        if pos > n {
            let scheme = BidirectionalMacroScheme::new(phrases.clone(), n)
                .expect("search only builds structurally sound schemes");
            if scheme.validate() {
                *best = phrases.len();
            }
            return;
        }
        // One more phrase is unavoidable; only continue if that can improve.
        if phrases.len() + 1 >= *best {
            return;
        }
        let remaining = n - pos + 1;
        for len in (1..=remaining).rev() {
            if len == 1 {
                phrases.push(Phrase::Literal(w.at(pos)));
                dfs(w, sources, phrases, pos + 1, best);
                phrases.pop();
            } else {
                for &s in &sources[&(pos, len)] {
                    phrases.push(Phrase::Copy { source: s, len });
                    dfs(w, sources, phrases, pos + len, best);
                    phrases.pop();
                }
            }
        }
    }

    let mut phrases = Vec::new();
    dfs(w, &sources, &mut phrases, 1, &mut best);
    Ok(best)
}

/// Which measures to compute.
#[derive(Debug, Clone, Default)]
pub struct MeasureOptions {
    pub delta: bool,
    pub z: bool,
    /// Run the attractor brute force with this limit.
    pub gamma_limit: Option<usize>,
    /// Run the macro scheme brute force with this limit.
    pub b_limit: Option<usize>,
}

/// Computed measures of one string. Whenever the brute-forced fields are
/// present, `delta <= gamma <= b <= z` holds with exact comparisons.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasureReport {
    pub n: usize,
    pub delta: Option<Rational>,
    pub z: Option<usize>,
    pub gamma_bruteforce: Option<usize>,
    pub b_bruteforce: Option<usize>,
}

pub fn measure(w: &Text, opts: &MeasureOptions) -> Result<MeasureReport> {
    let delta = if opts.delta { Some(delta(w)?) } else { None };
    let z = if opts.z { Some(lz76_count(w)) } else { None };
    let gamma = match opts.gamma_limit {
        Some(limit) => Some(gamma_bruteforce(w, limit)?),
        None => None,
    };
    let b = match opts.b_limit {
        Some(limit) => Some(b_bruteforce(w, limit)?),
        None => None,
    };
    Ok(MeasureReport { n: w.len(), delta, z, gamma_bruteforce: gamma, b_bruteforce: b })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> Text {
        Text::from(s)
    }

    #[test]
    fn string_complexity_examples() {
        assert_eq!(string_complexity(&t("abab"), 2).unwrap(), 2);
        assert_eq!(string_complexity(&t("aaaa"), 3).unwrap(), 1);
        assert_eq!(string_complexity(&t("abab"), 4).unwrap(), 1);
        assert!(matches!(string_complexity(&t("abab"), 0), Err(Error::Domain(_))));
        assert!(matches!(string_complexity(&t("abab"), 5), Err(Error::Domain(_))));
    }

    #[test]
    fn automaton_table_matches_definitional_route() {
        for s in ["abab", "aaaa", "abaababaabaab", "001001100100111", "ab"] {
            let w = t(s);
            let table = substring_complexities(&w);
            for k in 1..=w.len() {
                assert_eq!(table[k - 1], string_complexity(&w, k).unwrap(), "{s} k={k}");
            }
        }
    }

    #[test]
    fn delta_examples() {
        assert_eq!(delta(&t("abab")).unwrap(), Rational::new(2, 1));
        assert_eq!(delta(&t("aaaa")).unwrap(), Rational::new(1, 1));
        assert!(matches!(delta(&t("")), Err(Error::Domain(_))));
    }

    #[test]
    fn lz76_examples() {
        assert_eq!(
            lz76_parse(&t("aaaa")),
            vec![LzPhrase::Literal(b'a'), LzPhrase::Copy { source: 1, len: 3 }]
        );
        assert_eq!(
            lz76_parse(&t("abab")),
            vec![
                LzPhrase::Literal(b'a'),
                LzPhrase::Literal(b'b'),
                LzPhrase::Copy { source: 1, len: 2 }
            ]
        );
        assert_eq!(lz76_parse(&t("a")), vec![LzPhrase::Literal(b'a')]);
        assert_eq!(lz76_parse(&t("")), vec![]);
    }

    #[test]
    fn lz76_phrases_reassemble_input() {
        for s in ["abaababaabaab", "001001100100111", "mississippi", "aabbaabb"] {
            let w = t(s);
            let mut out = Vec::new();
            for ph in lz76_parse(&w) {
                match ph {
                    LzPhrase::Literal(b) => out.push(b),
                    LzPhrase::Copy { source, len } => {
                        // Sources start strictly left and may overlap.
                        assert!(source <= out.len());
                        for k in 0..len {
                            out.push(out[source - 1 + k]);
                        }
                    }
                }
            }
            assert_eq!(out, w.as_bytes());
        }
    }

    #[test]
    fn attractor_examples() {
        let ab = t("abab");
        assert!(is_attractor(&ab, &BTreeSet::from([2, 3])).unwrap());
        assert!(!is_attractor(&ab, &BTreeSet::from([1])).unwrap());
        assert!(is_attractor(&t("a"), &BTreeSet::from([1])).unwrap());
        assert!(matches!(
            is_attractor(&ab, &BTreeSet::from([5])),
            Err(Error::Domain(_))
        ));
        // Full set always attracts; the empty set never does (n >= 1).
        assert!(is_attractor(&ab, &(1..=4).collect()).unwrap());
        assert!(!is_attractor(&ab, &BTreeSet::new()).unwrap());
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma_bruteforce(&t("abab"), DEFAULT_GAMMA_LIMIT).unwrap(), 2);
        assert_eq!(gamma_bruteforce(&t("aaaa"), DEFAULT_GAMMA_LIMIT).unwrap(), 1);
        assert_eq!(gamma_bruteforce(&t("ab"), DEFAULT_GAMMA_LIMIT).unwrap(), 2);
        assert!(matches!(
            gamma_bruteforce(&t("aaaaaaaaaaaaaaaaa"), 16),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn gamma_agrees_with_subset_check_oracle() {
        // Independent oracle: try every subset with is_attractor.
        for s in ["abab", "aabba", "abc", "aaaaaa", "abcabc"] {
            let w = t(s);
            let n = w.len();
            let mut oracle = n;
            for mask in 0u32..(1 << n) {
                let set: BTreeSet<usize> = (1..=n).filter(|&p| mask >> (p - 1) & 1 == 1).collect();
                if is_attractor(&w, &set).unwrap() {
                    oracle = oracle.min(set.len());
                }
            }
            assert_eq!(gamma_bruteforce(&w, 16).unwrap(), oracle, "{s}");
        }
    }

    #[test]
    fn b_examples() {
        assert_eq!(b_bruteforce(&t("aaaa"), DEFAULT_B_LIMIT).unwrap(), 2);
        assert_eq!(b_bruteforce(&t("a"), DEFAULT_B_LIMIT).unwrap(), 1);
        assert_eq!(b_bruteforce(&t("ab"), DEFAULT_B_LIMIT).unwrap(), 2);
        assert!(matches!(
            b_bruteforce(&t("aaaaaaaaaaa"), DEFAULT_B_LIMIT),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn measure_report_abab() {
        let report = measure(
            &t("abab"),
            &MeasureOptions {
                delta: true,
                z: true,
                gamma_limit: Some(DEFAULT_GAMMA_LIMIT),
                b_limit: Some(DEFAULT_B_LIMIT),
            },
        )
        .unwrap();
        assert_eq!(report.delta, Some(Rational::new(2, 1)));
        assert_eq!(report.z, Some(3));
        assert_eq!(report.gamma_bruteforce, Some(2));
        // No two-phrase scheme exists: every candidate either lacks a
        // matching source or closes an f-cycle, so the minimum is 3.
        assert_eq!(report.b_bruteforce, Some(3));
    }
}
