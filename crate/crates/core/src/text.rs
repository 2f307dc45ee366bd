use std::collections::BTreeSet;
use std::fmt;

/// The subject string `w[1,n]` over a byte alphabet.
///
/// Positions in the public API of this crate are 1-based, matching the
/// serialized formats; `at` and `substring` follow that convention.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Text(Vec<u8>);

impl Text {
    pub fn new(bytes: Vec<u8>) -> Self {
        Text(bytes)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.0
    }

    /// Symbol at 1-based position `pos`.
    pub fn at(&self, pos: usize) -> u8 {
        self.0[pos - 1]
    }

    /// Substring `w[i,j]`, 1-based inclusive. Empty when `j < i`.
    pub fn substring(&self, i: usize, j: usize) -> &[u8] {
        if j < i {
            &[]
        } else {
            &self.0[i - 1..j]
        }
    }

    /// Alphabet derived from the sequence itself.
    pub fn alphabet(&self) -> BTreeSet<u8> {
        self.0.iter().copied().collect()
    }

    /// Leftmost occurrence of `needle`, as a 1-based start position.
    /// The empty needle occurs at position 1.
    pub fn find(&self, needle: &[u8]) -> Option<usize> {
        if needle.is_empty() {
            return Some(1);
        }
        if needle.len() > self.0.len() {
            return None;
        }
        self.0
            .windows(needle.len())
            .position(|win| win == needle)
            .map(|p| p + 1)
    }

    /// All occurrence start positions of `needle` (1-based), leftmost first.
    pub fn occurrences(&self, needle: &[u8]) -> Vec<usize> {
        if needle.is_empty() || needle.len() > self.0.len() {
            return Vec::new();
        }
        self.0
            .windows(needle.len())
            .enumerate()
            .filter(|(_, win)| *win == needle)
            .map(|(p, _)| p + 1)
            .collect()
    }

    pub fn contains(&self, needle: &[u8]) -> bool {
        self.find(needle).is_some()
    }
}

impl From<&str> for Text {
    fn from(s: &str) -> Self {
        Text(s.as_bytes().to_vec())
    }
}

impl From<Vec<u8>> for Text {
    fn from(v: Vec<u8>) -> Self {
        Text(v)
    }
}

impl From<&[u8]> for Text {
    fn from(v: &[u8]) -> Self {
        Text(v.to_vec())
    }
}

impl fmt::Debug for Text {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Text({:?})", String::from_utf8_lossy(&self.0))
    }
}

impl fmt::Display for Text {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", String::from_utf8_lossy(&self.0))
    }
}
