//! Suffix automaton over byte strings.
//!
//! Linear-size automaton recognizing every substring of the input. Each
//! state stores the substring-length interval it represents and, after
//! `first_ends`, the minimum end position over all occurrences, which gives
//! leftmost occurrence starts for any matched substring.

pub(crate) const ROOT: u32 = 0;

struct State {
    len: u32,
    link: i32,
    // Sparse transitions; realistic alphabets here are tiny.
    trans: Vec<(u8, u32)>,
    clone: bool,
    end: u32,
}

pub(crate) struct SuffixAutomaton {
    states: Vec<State>,
}

impl SuffixAutomaton {
    pub fn build(text: &[u8]) -> Self {
        let mut sa = SuffixAutomaton {
            states: vec![State { len: 0, link: -1, trans: Vec::new(), clone: false, end: u32::MAX }],
        };
        let mut last = ROOT;
        for (i, &c) in text.iter().enumerate() {
            last = sa.extend(last, c, i as u32);
        }
        sa
    }

    fn step_of(&self, v: u32, c: u8) -> Option<u32> {
        self.states[v as usize]
            .trans
            .iter()
            .find(|&&(tc, _)| tc == c)
            .map(|&(_, t)| t)
    }

    pub fn step(&self, v: u32, c: u8) -> Option<u32> {
        self.step_of(v, c)
    }

    fn set_trans(&mut self, v: u32, c: u8, to: u32) {
        let st = &mut self.states[v as usize];
        match st.trans.iter_mut().find(|(tc, _)| *tc == c) {
            Some(entry) => entry.1 = to,
            None => st.trans.push((c, to)),
        }
    }

    fn extend(&mut self, last: u32, c: u8, pos: u32) -> u32 {
        let cur = self.states.len() as u32;
        self.states.push(State {
            len: self.states[last as usize].len + 1,
            link: -1,
            trans: Vec::new(),
            clone: false,
            end: pos,
        });
        let mut p = last as i32;
        while p >= 0 && self.step_of(p as u32, c).is_none() {
            self.set_trans(p as u32, c, cur);
            p = self.states[p as usize].link;
        }
        if p < 0 {
            self.states[cur as usize].link = ROOT as i32;
            return cur;
        }
        let q = self.step_of(p as u32, c).unwrap();
        if self.states[p as usize].len + 1 == self.states[q as usize].len {
            self.states[cur as usize].link = q as i32;
            return cur;
        }
        let clone = self.states.len() as u32;
        let cloned = State {
            len: self.states[p as usize].len + 1,
            link: self.states[q as usize].link,
            trans: self.states[q as usize].trans.clone(),
            clone: true,
            end: u32::MAX,
        };
        self.states.push(cloned);
        while p >= 0 && self.step_of(p as u32, c) == Some(q) {
            self.set_trans(p as u32, c, clone);
            p = self.states[p as usize].link;
        }
        self.states[q as usize].link = clone as i32;
        self.states[cur as usize].link = clone as i32;
        cur
    }

    /// Distinct substring counts per length: entry `k-1` is the number of
    /// distinct substrings of length `k`, for `k = 1..=n`.
    pub fn complexity_table(&self, n: usize) -> Vec<usize> {
        let mut diff = vec![0i64; n + 2];
        for (i, st) in self.states.iter().enumerate() {
            if i == ROOT as usize {
                continue;
            }
            let lo = self.states[st.link as usize].len as usize + 1;
            let hi = st.len as usize;
            diff[lo] += 1;
            diff[hi + 1] -= 1;
        }
        let mut out = Vec::with_capacity(n);
        let mut acc = 0i64;
        for k in 1..=n {
            acc += diff[k];
            out.push(acc as usize);
        }
        out
    }

    /// Minimum occurrence end position (0-based) per state, computed by
    /// propagating ends up the suffix-link tree. For a substring of length
    /// `len` matched in state `v`, its leftmost occurrence starts at
    /// `first_ends[v] - len + 1`.
    pub fn first_ends(&self) -> Vec<u32> {
        let mut ends: Vec<u32> = self.states.iter().map(|s| if s.clone { u32::MAX } else { s.end }).collect();
        // Counting sort by len, longest first, then relax onto suffix links.
        let max_len = self.states.iter().map(|s| s.len).max().unwrap_or(0) as usize;
        let mut buckets = vec![0usize; max_len + 1];
        for s in &self.states {
            buckets[s.len as usize] += 1;
        }
        for i in 1..=max_len {
            buckets[i] += buckets[i - 1];
        }
        let mut order = vec![0u32; self.states.len()];
        for (i, s) in self.states.iter().enumerate() {
            buckets[s.len as usize] -= 1;
            order[buckets[s.len as usize]] = i as u32;
        }
        for &v in order.iter().rev() {
            let link = self.states[v as usize].link;
            if link >= 0 {
                let e = ends[v as usize];
                let parent = &mut ends[link as usize];
                if e < *parent {
                    *parent = e;
                }
            }
        }
        ends
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn naive_counts(text: &[u8]) -> Vec<usize> {
        (1..=text.len())
            .map(|k| text.windows(k).collect::<HashSet<_>>().len())
            .collect()
    }

    #[test]
    fn complexity_matches_window_enumeration() {
        for text in ["abab", "aaaa", "banana", "abracadabra", "a", "ab", "mississippi"] {
            let sa = SuffixAutomaton::build(text.as_bytes());
            assert_eq!(sa.complexity_table(text.len()), naive_counts(text.as_bytes()), "{text}");
        }
    }

    #[test]
    fn first_ends_give_leftmost_occurrences() {
        let text = b"abaababa";
        let sa = SuffixAutomaton::build(text);
        let ends = sa.first_ends();
        // Walk every substring and compare against a scan.
        for i in 0..text.len() {
            let mut v = ROOT;
            for j in i..text.len() {
                v = sa.step(v, text[j]).unwrap();
                let len = j - i + 1;
                let leftmost = (0..=text.len() - len)
                    .find(|&s| &text[s..s + len] == &text[i..=j])
                    .unwrap();
                assert_eq!(ends[v as usize] as usize + 1 - len, leftmost);
            }
        }
    }
}
