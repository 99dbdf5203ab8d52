//! The boundary of the free group at finite precision.
//!
//! A boundary point is an infinite non-backtracking sequence of letters; the
//! workbench only ever holds a finite prefix of one. Every operation states
//! how many letters it consumes and returns [`Error::Precision`] when the
//! prefix is too short to determine the answer. Nothing is silently
//! truncated.

use std::fmt;

use num_rational::Ratio;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::stream_rng;
use crate::word::{check_rank, parse_letters, Generator, ReducedWord};

/// A finite admissible prefix `xi_1 ... xi_L` of a boundary point.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BoundaryPrefix {
    rank: u8,
    letters: Vec<Generator>,
}

impl BoundaryPrefix {
    pub fn new(rank: u8, letters: Vec<Generator>) -> Result<Self> {
        check_rank(u32::from(rank))?;
        if letters.is_empty() {
            return Err(Error::Domain("boundary prefix must have depth >= 1".into()));
        }
        if letters.iter().any(|g| g.index() > rank) {
            return Err(Error::Structural(format!("prefix uses a letter beyond rank {rank}")));
        }
        if letters.windows(2).any(|w| w[1] == w[0].inverse()) {
            return Err(Error::Structural("prefix is not admissible (backtracks)".into()));
        }
        Ok(BoundaryPrefix { rank, letters })
    }

    pub fn parse(rank: u8, s: &str) -> Result<Self> {
        Self::new(rank, parse_letters(s)?)
    }

    /// Draws a prefix from the uniform boundary measure: the first letter is
    /// uniform over all `2r` letters, each later one uniform over the `2r - 1`
    /// letters that do not backtrack.
    pub fn sample(depth: usize, rank: u32, seed: u64) -> Result<Self> {
        let rank = check_rank(rank)?;
        if depth == 0 {
            return Err(Error::Domain("boundary prefix must have depth >= 1".into()));
        }
        let mut rng = stream_rng(seed);
        Ok(Self::sample_with(&mut rng, depth, rank))
    }

    pub(crate) fn sample_with<R: Rng>(rng: &mut R, depth: usize, rank: u8) -> Self {
        let two_r = 2 * rank;
        let mut letters = Vec::with_capacity(depth);
        let first = Generator::from_code(rng.gen_range(0..two_r));
        letters.push(first);
        for _ in 1..depth {
            let forbidden = letters.last().unwrap().inverse().code();
            // uniform over 2r - 1 codes, skipping the forbidden one
            let mut c = rng.gen_range(0..two_r - 1);
            if c >= forbidden {
                c += 1;
            }
            letters.push(Generator::from_code(c));
        }
        BoundaryPrefix { rank, letters }
    }

    #[inline]
    pub fn rank(&self) -> u8 {
        self.rank
    }

    #[inline]
    pub fn depth(&self) -> usize {
        self.letters.len()
    }

    #[inline]
    pub fn letters(&self) -> &[Generator] {
        &self.letters
    }

    /// 1-based coordinate access, `None` past the available depth.
    pub fn letter(&self, i: usize) -> Option<Generator> {
        i.checked_sub(1).and_then(|j| self.letters.get(j).copied())
    }

    fn same_rank(&self, rank: u8) -> Result<()> {
        if self.rank == rank {
            Ok(())
        } else {
            Err(Error::RankMismatch(self.rank, rank))
        }
    }
}

impl fmt::Display for BoundaryPrefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for g in &self.letters {
            write!(f, "{g}")?;
        }
        f.write_str("...")
    }
}

impl fmt::Debug for BoundaryPrefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Mass of a depth-`n` cylinder under the uniform boundary measure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CylinderMeasure {
    pub depth: usize,
    /// Natural log of the mass.
    pub log_measure: f64,
    /// The mass is exactly `1 / denominator`.
    pub denominator: u128,
}

impl CylinderMeasure {
    pub fn measure(&self) -> f64 {
        self.log_measure.exp()
    }

    pub fn exact(&self) -> Ratio<u128> {
        Ratio::new(1, self.denominator)
    }
}

/// `(2r-1)^{-(n-1)} (2r)^{-1}`.
pub fn cylinder_measure(n: usize, rank: u32) -> Result<CylinderMeasure> {
    let r = check_rank(rank)?;
    if n < 1 {
        return Err(Error::Domain("cylinder depth must be >= 1".into()));
    }
    let two_r = 2 * u128::from(r);
    let denominator = (two_r - 1)
        .checked_pow((n - 1) as u32)
        .and_then(|p| p.checked_mul(two_r))
        .ok_or_else(|| Error::ResourceLimit(format!("cylinder denominator overflows at depth {n}")))?;
    let log_measure = -((n - 1) as f64) * ((two_r - 1) as f64).ln() - (two_r as f64).ln();
    Ok(CylinderMeasure { depth: n, log_measure, denominator })
}

/// Number of leading letters of `xi` cancelled by `g`: the largest `k <= |g|`
/// with `xi_i^{-1} = t_{|g|+1-i}` for all `i <= k`.
fn cancellation_count(g: &ReducedWord, xi: &BoundaryPrefix) -> Result<usize> {
    let t = g.letters();
    let n = t.len();
    for i in 0..n {
        let Some(&x) = xi.letters.get(i) else {
            return Err(Error::Precision(format!(
                "prefix of depth {} cannot resolve the action of a word of length {n}",
                xi.depth()
            )));
        };
        if x.inverse() != t[n - 1 - i] {
            return Ok(i);
        }
    }
    Ok(n)
}

/// The action `g xi`, together with the cancellation count `k`.
///
/// The output is `t_1 ... t_{n-k} xi_{k+1} ...`, truncated to at most the
/// input depth. Fails when the prefix is too short to find `k` or when every
/// known letter is cancelled.
pub fn act(g: &ReducedWord, xi: &BoundaryPrefix) -> Result<(BoundaryPrefix, usize)> {
    xi.same_rank(g.rank())?;
    let k = cancellation_count(g, xi)?;
    let n = g.len();
    if k >= xi.depth() {
        return Err(Error::Precision(format!(
            "all {} letters of the prefix are cancelled by a word of length {n}",
            xi.depth()
        )));
    }
    let mut letters = Vec::with_capacity(xi.depth());
    letters.extend_from_slice(&g.letters()[..n - k]);
    letters.extend_from_slice(&xi.letters[k..]);
    letters.truncate(xi.depth());
    Ok((BoundaryPrefix { rank: xi.rank, letters }, k))
}

/// Exponent `2k - n` of the Radon-Nikodym derivative `(2r-1)^{2k-n}`.
pub fn radon_nikodym_exponent(g: &ReducedWord, xi: &BoundaryPrefix) -> Result<i64> {
    let (_, k) = act(g, xi)?;
    Ok(2 * k as i64 - g.len() as i64)
}

/// `log d(nu o g)/d nu (xi) = (2k - n) log(2r - 1)`.
pub fn radon_nikodym_log(g: &ReducedWord, xi: &BoundaryPrefix) -> Result<f64> {
    let e = radon_nikodym_exponent(g, xi)?;
    Ok(e as f64 * f64::from(2 * u32::from(xi.rank) - 1).ln())
}

/// Visits the first `n` letters of every member of the `R_n` class of `xi`
/// (members agree with `xi` beyond coordinate `n`). Letters are chosen from
/// coordinate `n` backwards, each in generator order.
pub(crate) fn visit_tail_class<F: FnMut(&[Generator])>(xi: &BoundaryPrefix, n: usize, mut visit: F) {
    fn fill<F: FnMut(&[Generator])>(
        rank: u8,
        pos: usize,
        forbidden: Option<Generator>,
        buf: &mut [Generator],
        visit: &mut F,
    ) {
        if pos == 0 {
            visit(buf);
            return;
        }
        for g in Generator::all(rank) {
            if Some(g) == forbidden {
                continue;
            }
            buf[pos - 1] = g;
            fill(rank, pos - 1, Some(g.inverse()), buf, visit);
        }
    }
    let mut buf = vec![Generator::from_code(0); n];
    // eta_n must not be followed by its inverse: eta_n != xi_{n+1}^{-1}
    let forbidden = xi.letters.get(n).map(|g| g.inverse());
    fill(xi.rank, n, forbidden, &mut buf, &mut visit);
}

/// The `R_n` class of `xi`: all admissible prefixes of the same depth agreeing
/// with `xi` at every coordinate `> n`. Has exactly `(2r-1)^n` members.
pub fn tail_class(xi: &BoundaryPrefix, n: usize) -> Result<Vec<BoundaryPrefix>> {
    if n >= xi.depth() {
        return Err(Error::Precision(format!(
            "tail class at level {n} needs depth > {n}, prefix has depth {}",
            xi.depth()
        )));
    }
    let mut out = Vec::with_capacity(tail_class_size(n, xi.rank));
    visit_tail_class(xi, n, |head| {
        let mut letters = Vec::with_capacity(xi.depth());
        letters.extend_from_slice(head);
        letters.extend_from_slice(&xi.letters[n..]);
        out.push(BoundaryPrefix { rank: xi.rank, letters });
    });
    Ok(out)
}

/// `(2r-1)^n`.
pub fn tail_class_size(n: usize, rank: u8) -> usize {
    (2 * rank as usize - 1).pow(n as u32)
}

/// Builds `eta_1 ... eta_j xi_j^{-1} ... xi_1^{-1}` where `j` is the last
/// index `<= k` with `eta_j != xi_j`; this is the reduced form of the full
/// product up to `k`.
pub(crate) fn cocycle_from_heads(rank: u8, eta: &[Generator], xi: &[Generator]) -> ReducedWord {
    let j = eta.iter().zip(xi).rposition(|(a, b)| a != b).map_or(0, |p| p + 1);
    let mut letters = Vec::with_capacity(2 * j);
    letters.extend_from_slice(&eta[..j]);
    letters.extend(xi[..j].iter().rev().map(|g| g.inverse()));
    ReducedWord::from_reduced_unchecked(rank, letters)
}

/// The fundamental cocycle `alpha(eta, xi) = eta_1 ... eta_k xi_k^{-1} ... xi_1^{-1}`
/// for `(eta, xi)` in `R_k`; satisfies `alpha(eta, xi) xi = eta`.
pub fn fundamental_cocycle(eta: &BoundaryPrefix, xi: &BoundaryPrefix, k: usize) -> Result<ReducedWord> {
    eta.same_rank(xi.rank)?;
    let common = eta.depth().min(xi.depth());
    if k > common {
        return Err(Error::Precision(format!(
            "cocycle at level {k} needs depth >= {k}, prefixes have depths {} and {}",
            eta.depth(),
            xi.depth()
        )));
    }
    if eta.letters[k..common] != xi.letters[k..common] {
        return Err(Error::Domain(format!("points do not agree beyond coordinate {k}")));
    }
    Ok(cocycle_from_heads(xi.rank, &eta.letters[..k], &xi.letters[..k]))
}

/// The horospherical ball `{alpha(xi, eta) : eta in R_k(xi)}`, in tail class
/// order. Its size is exactly `(2r-1)^k`.
pub fn horospherical_ball(xi: &BoundaryPrefix, k: usize) -> Result<Vec<ReducedWord>> {
    if k >= xi.depth() {
        return Err(Error::Precision(format!(
            "horospherical ball of radius {k} needs depth > {k}, prefix has depth {}",
            xi.depth()
        )));
    }
    let mut out = Vec::with_capacity(tail_class_size(k, xi.rank));
    let head = &xi.letters[..k];
    visit_tail_class(xi, k, |eta| out.push(cocycle_from_heads(xi.rank, head, eta)));
    Ok(out)
}

/// The inverse set `{alpha(eta, xi) : eta in R_k(xi)}`, same order.
pub fn cocycle_keys(xi: &BoundaryPrefix, k: usize) -> Result<Vec<ReducedWord>> {
    if k >= xi.depth() {
        return Err(Error::Precision(format!(
            "cocycle keys at level {k} need depth > {k}, prefix has depth {}",
            xi.depth()
        )));
    }
    let mut out = Vec::with_capacity(tail_class_size(k, xi.rank));
    let head = &xi.letters[..k];
    visit_tail_class(xi, k, |eta| out.push(cocycle_from_heads(xi.rank, eta, head)));
    Ok(out)
}

/// Tree Busemann function `|g| - 2 * lcp(g, xi)`. Zero on the horosphere
/// through `e` based at `xi`, negative strictly inside the horoball.
pub fn busemann(xi: &BoundaryPrefix, g: &ReducedWord) -> Result<i64> {
    xi.same_rank(g.rank())?;
    let mut lcp = 0;
    for (i, &t) in g.letters().iter().enumerate() {
        match xi.letters.get(i) {
            Some(&x) if x == t => lcp += 1,
            Some(_) => break,
            None => {
                return Err(Error::Precision(format!(
                    "prefix of depth {} cannot resolve the Busemann value of a word of length {}",
                    xi.depth(),
                    g.len()
                )))
            }
        }
    }
    Ok(g.len() as i64 - 2 * lcp as i64)
}

/// Membership summary of a horospherical ball relative to the horoball
/// predicate `busemann <= 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HoroballProfile {
    pub size: usize,
    pub on_horosphere: usize,
    pub strictly_inside: usize,
    pub outside: usize,
}

pub fn horoball_profile(xi: &BoundaryPrefix, k: usize) -> Result<HoroballProfile> {
    let ball = horospherical_ball(xi, k)?;
    let mut p = HoroballProfile { size: ball.len(), on_horosphere: 0, strictly_inside: 0, outside: 0 };
    for g in &ball {
        match busemann(xi, g)?.cmp(&0) {
            std::cmp::Ordering::Less => p.strictly_inside += 1,
            std::cmp::Ordering::Equal => p.on_horosphere += 1,
            std::cmp::Ordering::Greater => p.outside += 1,
        }
    }
    Ok(p)
}
