//! The Bernoulli shift over `F_r`, realized lazily.
//!
//! A configuration `omega: F_r -> A` is never stored: the symbol at a group
//! element is a keyed hash of its canonical encoding pushed through the
//! inverse CDF of the probability vector. A [`LazyBernoulliPoint`] is such a
//! base configuration seen through a translation word `t`, so
//! `x(h) = omega(t h)` and shifting only ever touches `t`.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{keyed_hash, split_seed, unit_interval};
use crate::word::ReducedWord;

const PROBABILITY_TOLERANCE: f64 = 1e-12;
const MC_STREAM: u64 = 0xA70;

/// Weights `p_a` over a finite alphabet `{0, ..., |A|-1}`.
#[derive(Clone, PartialEq, Serialize)]
pub struct ProbabilityVector {
    weights: Vec<f64>,
    #[serde(skip)]
    cumulative: Vec<f64>,
}

impl ProbabilityVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidProbability("empty alphabet".into()));
        }
        if weights.len() > u32::MAX as usize {
            return Err(Error::InvalidProbability("alphabet too large".into()));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidProbability(format!("weight {w} is negative or not finite")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > PROBABILITY_TOLERANCE {
            return Err(Error::InvalidProbability(format!("weights sum to {total}, not 1")));
        }
        let cumulative = weights
            .iter()
            .scan(0.0, |acc, w| {
                *acc += w;
                Some(*acc)
            })
            .collect();
        Ok(ProbabilityVector { weights, cumulative })
    }

    pub fn uniform(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidProbability("empty alphabet".into()));
        }
        Self::new(vec![1.0 / size as f64; size])
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    #[inline]
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn weight(&self, symbol: usize) -> f64 {
        self.weights[symbol]
    }

    /// Inverse CDF: the first symbol whose cumulative weight exceeds `u`.
    /// Symbols of weight zero are never returned.
    pub fn symbol_for(&self, u: f64) -> usize {
        match self.cumulative.iter().position(|&c| u < c) {
            Some(i) => i,
            // rounding left u above the last partial sum
            None => self.weights.iter().rposition(|&w| w > 0.0).unwrap_or(0),
        }
    }
}

impl fmt::Debug for ProbabilityVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.weights)
    }
}

/// The canonical bytes of the reduced product `a b`, written into `buf`.
fn write_product_bytes(a: &ReducedWord, b: &ReducedWord, buf: &mut Vec<u8>) {
    let (x, y) = (a.letters(), b.letters());
    let mut cancel = 0;
    while cancel < x.len().min(y.len()) && x[x.len() - 1 - cancel] == y[cancel].inverse() {
        cancel += 1;
    }
    buf.clear();
    buf.push(a.rank());
    buf.extend(x[..x.len() - cancel].iter().map(|g| g.code()));
    buf.extend(y[cancel..].iter().map(|g| g.code()));
}

#[inline]
fn base_symbol(seed: u64, bytes: &[u8], alphabet: &ProbabilityVector) -> usize {
    alphabet.symbol_for(unit_interval(keyed_hash(seed, bytes)))
}

/// A point of `A^{F_r}`: the base configuration `omega_seed` translated by `t`.
#[derive(Clone)]
pub struct LazyBernoulliPoint {
    seed: u64,
    translation: ReducedWord,
    alphabet: Arc<ProbabilityVector>,
}

impl LazyBernoulliPoint {
    pub fn new(seed: u64, rank: u8, alphabet: Arc<ProbabilityVector>) -> Self {
        LazyBernoulliPoint { seed, translation: ReducedWord::identity(rank), alphabet }
    }

    pub fn with_translation(seed: u64, translation: ReducedWord, alphabet: Arc<ProbabilityVector>) -> Self {
        LazyBernoulliPoint { seed, translation, alphabet }
    }

    #[inline]
    pub fn seed(&self) -> u64 {
        self.seed
    }

    #[inline]
    pub fn translation(&self) -> &ReducedWord {
        &self.translation
    }

    #[inline]
    pub fn rank(&self) -> u8 {
        self.translation.rank()
    }

    #[inline]
    pub fn alphabet(&self) -> &Arc<ProbabilityVector> {
        &self.alphabet
    }

    /// `x(h) = omega_seed(t h)`.
    pub fn symbol_at(&self, h: &ReducedWord) -> Result<usize> {
        if h.rank() != self.rank() {
            return Err(Error::RankMismatch(self.rank(), h.rank()));
        }
        let mut buf = Vec::with_capacity(self.translation.len() + h.len() + 1);
        write_product_bytes(&self.translation, h, &mut buf);
        Ok(base_symbol(self.seed, &buf, &self.alphabet))
    }

    /// The shifted point `g x`, with `(g x)(h) = x(g^{-1} h)`.
    pub fn translate(&self, g: &ReducedWord) -> Result<LazyBernoulliPoint> {
        Ok(LazyBernoulliPoint {
            seed: self.seed,
            translation: self.translation.multiply(&g.invert())?,
            alphabet: Arc::clone(&self.alphabet),
        })
    }
}

impl PartialEq for LazyBernoulliPoint {
    fn eq(&self, other: &Self) -> bool {
        self.seed == other.seed && self.translation == other.translation && self.alphabet == other.alphabet
    }
}

impl fmt::Debug for LazyBernoulliPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LazyBernoulliPoint(seed={:#x}, t={})", self.seed, self.translation)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LabelerKind {
    SymbolAtIdentity,
    BlockCode,
}

/// Largest block-code table accepted (`|A|^{|W|}` entries).
pub const MAX_CODE_TABLE: usize = 1 << 20;

/// A finite partition of `A^{F_r}` given by a window `W` and a code on `A^W`.
///
/// The code table is indexed big-endian in window order: the symbols
/// `s_1 ... s_m` read at `w_1 ... w_m` select entry
/// `((s_1 |A| + s_2) |A| + ...) + s_m`.
#[derive(Clone, PartialEq, Serialize)]
pub struct PartitionLabeler {
    kind: LabelerKind,
    rank: u8,
    window: Vec<ReducedWord>,
    alphabet_size: usize,
    table: Vec<u32>,
    num_labels: usize,
}

impl PartitionLabeler {
    /// The generating partition `{[x_e = a] : a in A}`.
    pub fn symbol_at_identity(rank: u8, alphabet_size: usize) -> Self {
        PartitionLabeler {
            kind: LabelerKind::SymbolAtIdentity,
            rank,
            window: vec![ReducedWord::identity(rank)],
            alphabet_size,
            table: (0..alphabet_size as u32).collect(),
            num_labels: alphabet_size,
        }
    }

    pub fn block_code(window: Vec<ReducedWord>, alphabet_size: usize, table: Vec<u32>) -> Result<Self> {
        let Some(first) = window.first() else {
            return Err(Error::Domain("block-code window must be non-empty".into()));
        };
        let rank = first.rank();
        if let Some(w) = window.iter().find(|w| w.rank() != rank) {
            return Err(Error::RankMismatch(rank, w.rank()));
        }
        for (i, w) in window.iter().enumerate() {
            if window[..i].contains(w) {
                return Err(Error::Domain(format!("window element {w} repeated")));
            }
        }
        if alphabet_size == 0 {
            return Err(Error::Domain("alphabet must be non-empty".into()));
        }
        let expected = table_size(alphabet_size, window.len())?;
        if table.len() != expected {
            return Err(Error::Domain(format!(
                "code table has {} entries, window of size {} over {alphabet_size} symbols needs {expected}",
                table.len(),
                window.len()
            )));
        }
        // relabel to 0..K in order of first appearance
        let mut seen: HashMap<u32, u32> = HashMap::new();
        let table: Vec<u32> = table
            .into_iter()
            .map(|l| {
                let next = seen.len() as u32;
                *seen.entry(l).or_insert(next)
            })
            .collect();
        Ok(PartitionLabeler {
            kind: LabelerKind::BlockCode,
            rank,
            window,
            alphabet_size,
            num_labels: seen.len(),
            table,
        })
    }

    /// Block code from a function on window symbols.
    pub fn block_code_fn(
        window: Vec<ReducedWord>,
        alphabet_size: usize,
        code: impl Fn(&[usize]) -> u32,
    ) -> Result<Self> {
        let size = table_size(alphabet_size, window.len())?;
        let m = window.len();
        let mut symbols = vec![0usize; m];
        let table = (0..size)
            .map(|mut idx| {
                for j in (0..m).rev() {
                    symbols[j] = idx % alphabet_size;
                    idx /= alphabet_size;
                }
                code(&symbols)
            })
            .collect();
        Self::block_code(window, alphabet_size, table)
    }

    /// Parity of the binary symbols in the window.
    pub fn xor(window: Vec<ReducedWord>) -> Result<Self> {
        Self::block_code_fn(window, 2, |s| (s.iter().sum::<usize>() % 2) as u32)
    }

    /// Logical AND of the binary symbols in the window.
    pub fn and(window: Vec<ReducedWord>) -> Result<Self> {
        Self::block_code_fn(window, 2, |s| u32::from(s.iter().all(|&b| b == 1)))
    }

    /// The trivial partition `{X}`.
    pub fn one_atom(rank: u8, alphabet_size: usize) -> Result<Self> {
        Self::block_code(vec![ReducedWord::identity(rank)], alphabet_size, vec![0; alphabet_size])
    }

    #[inline]
    pub fn kind(&self) -> LabelerKind {
        self.kind
    }

    #[inline]
    pub fn rank(&self) -> u8 {
        self.rank
    }

    #[inline]
    pub fn window(&self) -> &[ReducedWord] {
        &self.window
    }

    #[inline]
    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    #[inline]
    pub fn num_labels(&self) -> usize {
        self.num_labels
    }

    pub fn is_trivial(&self) -> bool {
        self.num_labels == 1
    }

    /// Largest word length in the window.
    pub fn window_radius(&self) -> usize {
        self.window.iter().map(ReducedWord::len).max().unwrap_or(0)
    }

    /// The label of a tuple of window symbols.
    #[inline]
    pub fn code(&self, symbols: &[usize]) -> u32 {
        let idx = symbols.iter().fold(0usize, |acc, &s| acc * self.alphabet_size + s);
        self.table[idx]
    }

    fn check_point(&self, x: &LazyBernoulliPoint) -> Result<()> {
        if x.rank() != self.rank {
            return Err(Error::RankMismatch(self.rank, x.rank()));
        }
        if x.alphabet().len() != self.alphabet_size {
            return Err(Error::Domain(format!(
                "labeler expects {} symbols, point has {}",
                self.alphabet_size,
                x.alphabet().len()
            )));
        }
        Ok(())
    }

    /// `label(x)`, reading `x(w)` for `w in W`.
    pub fn label(&self, x: &LazyBernoulliPoint) -> Result<u32> {
        self.check_point(x)?;
        let symbols = self.window.iter().map(|w| x.symbol_at(w)).collect::<Result<Vec<_>>>()?;
        Ok(self.code(&symbols))
    }

    /// `label(g x)` without materializing the shifted point: reads `x` at
    /// `g^{-1} w`.
    pub fn label_of_translate(&self, x: &LazyBernoulliPoint, g: &ReducedWord) -> Result<u32> {
        self.check_point(x)?;
        let shift = x.translation().multiply(&g.invert())?;
        let mut buf = Vec::with_capacity(shift.len() + self.window_radius() + 1);
        let mut idx = 0usize;
        for w in &self.window {
            write_product_bytes(&shift, w, &mut buf);
            idx = idx * self.alphabet_size + base_symbol(x.seed(), &buf, x.alphabet());
        }
        Ok(self.table[idx])
    }

    /// The base coordinates `g^{-1} w`, `w in W`, read by the label at key `g`.
    pub fn coordinates_for_key(&self, g: &ReducedWord) -> Result<Vec<ReducedWord>> {
        let inv = g.invert();
        self.window.iter().map(|w| inv.multiply(w)).collect()
    }

    /// Marginal law of the label under the product measure.
    pub fn marginal(&self, p: &ProbabilityVector) -> Result<Vec<f64>> {
        if p.len() != self.alphabet_size {
            return Err(Error::Domain("probability vector does not match the labeler alphabet".into()));
        }
        let m = self.window.len();
        let mut out = vec![0.0; self.num_labels];
        for (idx, &label) in self.table.iter().enumerate() {
            let mut rest = idx;
            let mut mass = 1.0;
            for _ in 0..m {
                mass *= p.weight(rest % self.alphabet_size);
                rest /= self.alphabet_size;
            }
            out[label as usize] += mass;
        }
        Ok(out)
    }
}

impl fmt::Debug for PartitionLabeler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            LabelerKind::SymbolAtIdentity => write!(f, "symbol-at-identity({})", self.alphabet_size),
            LabelerKind::BlockCode => {
                write!(f, "block-code(W={:?}, labels={})", self.window, self.num_labels)
            }
        }
    }
}

fn table_size(alphabet_size: usize, window_len: usize) -> Result<usize> {
    alphabet_size
        .checked_pow(window_len as u32)
        .filter(|&n| n <= MAX_CODE_TABLE)
        .ok_or_else(|| Error::ResourceLimit(format!("code table {alphabet_size}^{window_len} exceeds {MAX_CODE_TABLE}")))
}

/// Caps for exhaustive evaluation over a coordinate union.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactCap {
    /// Most distinct coordinates an exact block-code computation may touch.
    pub max_coordinates: usize,
    /// Most alphabet assignments (`|A|^coordinates`) it may enumerate.
    pub max_assignments: u64,
}

impl Default for ExactCap {
    fn default() -> Self {
        ExactCap { max_coordinates: 24, max_assignments: 1 << 24 }
    }
}

/// Evaluation mode for atom masses and entropies.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum EstimationMode {
    Exact(ExactCap),
    MonteCarlo { samples: usize, seed: u64, miller_madow: bool },
}

impl EstimationMode {
    pub fn exact() -> Self {
        EstimationMode::Exact(ExactCap::default())
    }

    /// Monte Carlo with the Miller-Madow correction on.
    pub fn monte_carlo(samples: usize, seed: u64) -> Self {
        EstimationMode::MonteCarlo { samples, seed, miller_madow: true }
    }
}

/// `log lambda` of an atom, with its provenance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomMeasure {
    /// Natural log of the mass. For an unresolved atom this is the
    /// rule-of-three upper bound `log(3/M)`.
    pub log_measure: f64,
    pub stderr: Option<f64>,
    pub samples: usize,
    /// Monte Carlo saw no hits; `log_measure` is only a bound.
    pub unresolved: bool,
}

impl AtomMeasure {
    fn exact(log_measure: f64) -> Self {
        AtomMeasure { log_measure, stderr: None, samples: 0, unresolved: false }
    }
}

/// The shifted windows of a key set, flattened onto a deduplicated
/// coordinate list.
pub(crate) struct CoordinateUnion {
    pub coords: Vec<ReducedWord>,
    /// For each key, indices into `coords` in window order.
    pub reads: Vec<Vec<usize>>,
}

impl CoordinateUnion {
    pub fn build(keys: &[ReducedWord], labeler: &PartitionLabeler) -> Result<Self> {
        let mut index: HashMap<ReducedWord, usize> = HashMap::new();
        let mut coords = Vec::new();
        let mut reads = Vec::with_capacity(keys.len());
        for g in keys {
            let mut r = Vec::with_capacity(labeler.window.len());
            for c in labeler.coordinates_for_key(g)? {
                let next = coords.len();
                let i = *index.entry(c.clone()).or_insert(next);
                if i == next {
                    coords.push(c);
                }
                r.push(i);
            }
            reads.push(r);
        }
        Ok(CoordinateUnion { coords, reads })
    }

    pub(crate) fn check_cap(&self, alphabet_size: usize, cap: ExactCap) -> Result<()> {
        let n = self.coords.len();
        let assignments = (alphabet_size as u64).checked_pow(n as u32);
        if n > cap.max_coordinates || assignments.is_none_or(|a| a > cap.max_assignments) {
            return Err(Error::ResourceLimit(format!(
                "exact evaluation touches {n} coordinates (cap {}, {} assignments max); use monte-carlo mode",
                cap.max_coordinates, cap.max_assignments
            )));
        }
        Ok(())
    }
}

fn check_labels(labels: &[(ReducedWord, u32)], labeler: &PartitionLabeler) -> Result<()> {
    for (g, l) in labels {
        if g.rank() != labeler.rank {
            return Err(Error::RankMismatch(labeler.rank, g.rank()));
        }
        if *l as usize >= labeler.num_labels {
            return Err(Error::Domain(format!("label {l} at {g} is not a label of the partition")));
        }
    }
    Ok(())
}

/// `log lambda` of the atom `{x : label(g x) = labels(g) for every key g}`.
///
/// Exact mode multiplies symbol weights over distinct coordinates for the
/// symbol partition and otherwise enumerates assignments on the coordinate
/// union (subject to the cap). Monte Carlo mode counts hits among sampled
/// points; zero hits yield an unresolved result, never `-inf`.
pub fn atom_log_measure(
    labels: &[(ReducedWord, u32)],
    labeler: &PartitionLabeler,
    alphabet: &ProbabilityVector,
    mode: EstimationMode,
) -> Result<AtomMeasure> {
    check_labels(labels, labeler)?;
    if alphabet.len() != labeler.alphabet_size {
        return Err(Error::Domain("probability vector does not match the labeler alphabet".into()));
    }
    if labeler.is_trivial() {
        return Ok(AtomMeasure::exact(0.0));
    }
    match mode {
        EstimationMode::Exact(cap) => exact_atom(labels, labeler, alphabet, cap).map(AtomMeasure::exact),
        EstimationMode::MonteCarlo { samples, seed, .. } => {
            monte_carlo_atom(labels, labeler, alphabet, samples, seed)
        }
    }
}

fn exact_atom(
    labels: &[(ReducedWord, u32)],
    labeler: &PartitionLabeler,
    alphabet: &ProbabilityVector,
    cap: ExactCap,
) -> Result<f64> {
    if labeler.kind == LabelerKind::SymbolAtIdentity {
        let mut fixed: HashMap<ReducedWord, u32> = HashMap::with_capacity(labels.len());
        let mut log = 0.0;
        for (g, l) in labels {
            match fixed.insert(g.invert(), *l) {
                Some(prev) if prev != *l => {
                    return Err(Error::Domain(format!("conflicting labels at coordinate {}", g.invert())))
                }
                Some(_) => {}
                None => log += alphabet.weight(*l as usize).ln(),
            }
        }
        if log == f64::NEG_INFINITY {
            return Err(Error::Domain("atom has zero mass".into()));
        }
        return Ok(log);
    }
    let keys: Vec<ReducedWord> = labels.iter().map(|(g, _)| g.clone()).collect();
    let union = CoordinateUnion::build(&keys, labeler)?;
    union.check_cap(labeler.alphabet_size, cap)?;
    let targets: Vec<u32> = labels.iter().map(|(_, l)| *l).collect();
    let mass = constrained_mass(&union, &targets, labeler, alphabet);
    if mass <= 0.0 {
        return Err(Error::Domain("observed labels are inconsistent: atom has zero mass".into()));
    }
    Ok(mass.ln())
}

/// Backtracking sum of product weights over assignments of the coordinate
/// union satisfying every label constraint. A constraint is checked as soon
/// as its last coordinate is assigned.
fn constrained_mass(
    union: &CoordinateUnion,
    targets: &[u32],
    labeler: &PartitionLabeler,
    alphabet: &ProbabilityVector,
) -> f64 {
    let n = union.coords.len();
    let mut ready: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (c, read) in union.reads.iter().enumerate() {
        let last = *read.iter().max().expect("non-empty window");
        ready[last].push(c);
    }
    let mut assignment = vec![0usize; n];
    let mut symbols = vec![0usize; labeler.window.len()];

    struct Ctx<'a> {
        union: &'a CoordinateUnion,
        targets: &'a [u32],
        labeler: &'a PartitionLabeler,
        alphabet: &'a ProbabilityVector,
        ready: Vec<Vec<usize>>,
    }

    fn go(ctx: &Ctx, pos: usize, assignment: &mut [usize], symbols: &mut [usize]) -> f64 {
        if pos == assignment.len() {
            return 1.0;
        }
        let mut total = 0.0;
        for a in 0..ctx.alphabet.len() {
            let w = ctx.alphabet.weight(a);
            if w == 0.0 {
                continue;
            }
            assignment[pos] = a;
            let ok = ctx.ready[pos].iter().all(|&c| {
                for (s, &i) in symbols.iter_mut().zip(&ctx.union.reads[c]) {
                    *s = assignment[i];
                }
                ctx.labeler.code(symbols) == ctx.targets[c]
            });
            if ok {
                total += w * go(ctx, pos + 1, assignment, symbols);
            }
        }
        total
    }

    let ctx = Ctx { union, targets, labeler, alphabet, ready };
    go(&ctx, 0, &mut assignment, &mut symbols)
}

fn monte_carlo_atom(
    labels: &[(ReducedWord, u32)],
    labeler: &PartitionLabeler,
    alphabet: &ProbabilityVector,
    samples: usize,
    seed: u64,
) -> Result<AtomMeasure> {
    if samples == 0 {
        return Err(Error::Domain("monte-carlo mode needs at least one sample".into()));
    }
    let alphabet = Arc::new(alphabet.clone());
    let hits: Vec<bool> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let y = LazyBernoulliPoint::new(split_seed(seed, MC_STREAM, i), labeler.rank, Arc::clone(&alphabet));
            for (g, l) in labels {
                if labeler.label_of_translate(&y, g)? != *l {
                    return Ok(false);
                }
            }
            Ok(true)
        })
        .collect::<Result<_>>()?;
    let count = hits.iter().filter(|&&h| h).count();
    let m = samples as f64;
    if count == 0 {
        return Ok(AtomMeasure { log_measure: (3.0 / m).ln(), stderr: None, samples, unresolved: true });
    }
    let p = count as f64 / m;
    // delta method: sd(log p_hat) ~ sqrt((1 - p) / (M p))
    let stderr = ((1.0 - p) / count as f64).sqrt();
    Ok(AtomMeasure { log_measure: p.ln(), stderr: Some(stderr), samples, unresolved: false })
}
