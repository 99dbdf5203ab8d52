//! Reduced words in the free group `F_r = <a_1, ..., a_r>`.
//!
//! A letter is stored as a single byte `code = 2 * (index - 1) + inv`, where
//! `inv` is 1 for `a_i^{-1}`. Inversion of a letter is therefore `code ^ 1`
//! and the generator order used for every enumeration is
//! `a_1 < a_1^{-1} < a_2 < a_2^{-1} < ...`.
//!
//! The canonical byte encoding of a word is `[r, code_1, ..., code_n]`. It
//! keys the pseudorandom symbol field of the Bernoulli shift, so it is part
//! of the reproducibility contract and must not change.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported rank; keeps every letter code inside a byte.
pub const MAX_RANK: u32 = 127;

/// Validates a rank and narrows it to the stored width.
pub fn check_rank(rank: u32) -> Result<u8> {
    if (2..=MAX_RANK).contains(&rank) {
        Ok(rank as u8)
    } else {
        Err(Error::InvalidRank(rank))
    }
}

/// A free generator `a_i^{+1}` or `a_i^{-1}`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Generator(u8);

impl Generator {
    /// `a_index` (1-based) or its inverse.
    pub fn new(index: u8, inverse: bool) -> Self {
        assert!(index >= 1 && u32::from(index) <= MAX_RANK, "generator index out of range");
        Generator(2 * (index - 1) + u8::from(inverse))
    }

    pub fn from_code(code: u8) -> Self {
        Generator(code)
    }

    #[inline]
    pub fn code(self) -> u8 {
        self.0
    }

    /// 1-based generator index.
    #[inline]
    pub fn index(self) -> u8 {
        self.0 / 2 + 1
    }

    #[inline]
    pub fn is_inverse(self) -> bool {
        self.0 & 1 == 1
    }

    /// `+1` or `-1`.
    #[inline]
    pub fn sign(self) -> i8 {
        if self.is_inverse() {
            -1
        } else {
            1
        }
    }

    #[inline]
    pub fn inverse(self) -> Self {
        Generator(self.0 ^ 1)
    }

    /// All `2r` letters of rank `rank`, in generator order.
    pub fn all(rank: u8) -> impl Iterator<Item = Generator> {
        (0..2 * rank).map(Generator)
    }

    fn fits(self, rank: u8) -> bool {
        self.0 < 2 * rank
    }
}

impl fmt::Debug for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// `a3` for `a_3`, `A3` for `a_3^{-1}`.
impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = if self.is_inverse() { 'A' } else { 'a' };
        write!(f, "{}{}", c, self.index())
    }
}

/// Parses a run of letters such as `a1A2a1` (no separators). `e` is the
/// empty run. Used by both words and boundary prefixes.
pub(crate) fn parse_letters(s: &str) -> Result<Vec<Generator>> {
    let s = s.trim();
    if s == "e" || s.is_empty() {
        return Ok(Vec::new());
    }
    let bytes = s.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let inverse = match bytes[i] {
            b'a' => false,
            b'A' => true,
            other => {
                return Err(Error::Structural(format!(
                    "unexpected character {:?} in word {:?}",
                    other as char, s
                )))
            }
        };
        i += 1;
        let start = i;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        let index: u32 = s[start..i]
            .parse()
            .map_err(|_| Error::Structural(format!("missing generator index in {s:?}")))?;
        if index == 0 || index > MAX_RANK {
            return Err(Error::Structural(format!("generator index {index} out of range")));
        }
        out.push(Generator::new(index as u8, inverse));
    }
    Ok(out)
}

/// A freely reduced word: no letter is immediately followed by its inverse.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ReducedWord {
    rank: u8,
    letters: Vec<Generator>,
}

impl ReducedWord {
    pub fn identity(rank: u8) -> Self {
        ReducedWord { rank, letters: Vec::new() }
    }

    pub fn generator(rank: u8, g: Generator) -> Self {
        assert!(g.fits(rank), "generator {g} does not exist in rank {rank}");
        ReducedWord { rank, letters: vec![g] }
    }

    /// Accepts an already reduced letter sequence; rejects anything else.
    pub fn from_letters(rank: u8, letters: Vec<Generator>) -> Result<Self> {
        check_rank(u32::from(rank))?;
        if let Some(g) = letters.iter().find(|g| !g.fits(rank)) {
            return Err(Error::Structural(format!("letter {g} exceeds rank {rank}")));
        }
        if letters.windows(2).any(|w| w[1] == w[0].inverse()) {
            return Err(Error::Structural("letter sequence is not freely reduced".into()));
        }
        Ok(ReducedWord { rank, letters })
    }

    /// Freely reduces an arbitrary letter sequence.
    pub fn reduce(rank: u8, letters: impl IntoIterator<Item = Generator>) -> Result<Self> {
        check_rank(u32::from(rank))?;
        let mut out: Vec<Generator> = Vec::new();
        for g in letters {
            if !g.fits(rank) {
                return Err(Error::Structural(format!("letter {g} exceeds rank {rank}")));
            }
            if out.last() == Some(&g.inverse()) {
                out.pop();
            } else {
                out.push(g);
            }
        }
        Ok(ReducedWord { rank, letters: out })
    }

    /// Caller guarantees `letters` is reduced and fits `rank`.
    pub(crate) fn from_reduced_unchecked(rank: u8, letters: Vec<Generator>) -> Self {
        debug_assert!(letters.windows(2).all(|w| w[1] != w[0].inverse()));
        ReducedWord { rank, letters }
    }

    /// Parses `e`, `a1A2`, ... and reduces.
    pub fn parse(rank: u8, s: &str) -> Result<Self> {
        Self::reduce(rank, parse_letters(s)?)
    }

    #[inline]
    pub fn rank(&self) -> u8 {
        self.rank
    }

    #[inline]
    pub fn letters(&self) -> &[Generator] {
        &self.letters
    }

    /// Word length `|g|`.
    #[inline]
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.letters.len()
    }

    #[inline]
    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    #[inline]
    pub fn is_even(&self) -> bool {
        self.letters.len().is_multiple_of(2)
    }

    fn same_rank(&self, other: &ReducedWord) -> Result<()> {
        if self.rank == other.rank {
            Ok(())
        } else {
            Err(Error::RankMismatch(self.rank, other.rank))
        }
    }

    /// Group law: the reduced form of the concatenation `self * other`.
    pub fn multiply(&self, other: &ReducedWord) -> Result<ReducedWord> {
        self.same_rank(other)?;
        let mut cancel = 0;
        let (a, b) = (&self.letters, &other.letters);
        while cancel < a.len() && cancel < b.len() && b[cancel] == a[a.len() - 1 - cancel].inverse()
        {
            cancel += 1;
        }
        let mut letters = Vec::with_capacity(a.len() + b.len() - 2 * cancel);
        letters.extend_from_slice(&a[..a.len() - cancel]);
        letters.extend_from_slice(&b[cancel..]);
        Ok(ReducedWord { rank: self.rank, letters })
    }

    /// Letters reversed, each inverted.
    pub fn invert(&self) -> ReducedWord {
        ReducedWord {
            rank: self.rank,
            letters: self.letters.iter().rev().map(|g| g.inverse()).collect(),
        }
    }

    /// Word metric `d(u, v) = |u^{-1} v|`.
    pub fn distance(&self, other: &ReducedWord) -> Result<usize> {
        self.same_rank(other)?;
        let common = self
            .letters
            .iter()
            .zip(&other.letters)
            .take_while(|(x, y)| x == y)
            .count();
        Ok(self.len() + other.len() - 2 * common)
    }

    /// `[r, code_1, ..., code_n]`.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.letters.len() + 1);
        self.write_canonical_bytes(&mut out);
        out
    }

    pub(crate) fn write_canonical_bytes(&self, out: &mut Vec<u8>) {
        out.clear();
        out.push(self.rank);
        out.extend(self.letters.iter().map(|g| g.code()));
    }
}

impl fmt::Display for ReducedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return f.write_str("e");
        }
        for g in &self.letters {
            write!(f, "{g}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for ReducedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Parses at the rank implied by the largest index, floored at 2.
impl FromStr for ReducedWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let letters = parse_letters(s)?;
        let rank = letters.iter().map(|g| g.index()).max().unwrap_or(2).max(2);
        Self::reduce(rank, letters)
    }
}

/// `|S_n(e)| = 2r (2r-1)^{n-1}` for `n >= 1`, and 1 for `n = 0`.
pub fn sphere_size(n: u32, rank: u8) -> u128 {
    if n == 0 {
        return 1;
    }
    let r = u128::from(rank);
    (2 * r).saturating_mul((2 * r - 1).saturating_pow(n - 1))
}

/// `|B_n(e)|`.
pub fn ball_size(n: u32, rank: u8) -> u128 {
    (0..=n).fold(0u128, |acc, k| acc.saturating_add(sphere_size(k, rank)))
}

/// Upper bound on the number of words an enumeration may materialize.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumerationCap {
    pub max_elements: u128,
}

impl EnumerationCap {
    /// No limit at all; callers take responsibility.
    pub const UNLIMITED: EnumerationCap = EnumerationCap { max_elements: u128::MAX };
}

impl Default for EnumerationCap {
    /// The size of the radius-12 ball in rank 2 (1 062 881 words).
    fn default() -> Self {
        EnumerationCap { max_elements: ball_size(12, 2) }
    }
}

fn check_cap(count: u128, cap: EnumerationCap, what: &str) -> Result<()> {
    if count > cap.max_elements {
        Err(Error::ResourceLimit(format!(
            "{what} has {count} elements, above the enumeration cap {}",
            cap.max_elements
        )))
    } else {
        Ok(())
    }
}

fn extend_sphere(rank: u8, n: usize, prefix: &mut Vec<Generator>, out: &mut Vec<ReducedWord>) {
    if prefix.len() == n {
        out.push(ReducedWord { rank, letters: prefix.clone() });
        return;
    }
    for g in Generator::all(rank) {
        if prefix.last().is_some_and(|&last| g == last.inverse()) {
            continue;
        }
        prefix.push(g);
        extend_sphere(rank, n, prefix, out);
        prefix.pop();
    }
}

/// All reduced words of length exactly `n`, in lexicographic generator order.
pub fn enumerate_sphere(n: u32, rank: u32, cap: EnumerationCap) -> Result<Vec<ReducedWord>> {
    let rank = check_rank(rank)?;
    let size = sphere_size(n, rank);
    check_cap(size, cap, &format!("sphere of radius {n}"))?;
    let mut out = Vec::with_capacity(size as usize);
    extend_sphere(rank, n as usize, &mut Vec::with_capacity(n as usize), &mut out);
    Ok(out)
}

/// All reduced words of length at most `n`, sphere by sphere.
pub fn enumerate_ball(n: u32, rank: u32, cap: EnumerationCap) -> Result<Vec<ReducedWord>> {
    let r = check_rank(rank)?;
    check_cap(ball_size(n, r), cap, &format!("ball of radius {n}"))?;
    let mut out = Vec::with_capacity(ball_size(n, r) as usize);
    for k in 0..=n {
        out.extend(enumerate_sphere(k, rank, EnumerationCap::UNLIMITED)?);
    }
    Ok(out)
}
