//! Averages along the lifted exhaustion of `X x boundary`.
//!
//! The level-`n` class of `(x, xi)` is `{(alpha(z, xi) x, z) : z in R_n(xi)}`;
//! it has `(2r-1)^n` elements and projects bijectively onto the tail class.
//! Averages over such classes, and over the chain classes of the finite
//! models, are the objects of the pointwise ergodic theorem. Ergodicity
//! itself is never certified: [`ergodicity_diagnostic`] only measures how far
//! apart the class averages from independent starts are.

use std::sync::Arc;

use num_rational::Ratio;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::actions::{LazyBernoulliPoint, ProbabilityVector};
use crate::boundary::{fundamental_cocycle, tail_class, BoundaryPrefix};
use crate::error::{Error, Result};
use crate::hyperfinite::{FiniteRelationModel, PointId};
use crate::rng::{split_seed, stream_rng};
use crate::word::{Generator, ReducedWord};

const STREAM_X: u64 = 0xE6A1;
const STREAM_XI: u64 = 0xE6A2;

/// A point `(x, xi)` of the extended relation.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtendedClassElement {
    point: LazyBernoulliPoint,
    boundary: BoundaryPrefix,
}

impl ExtendedClassElement {
    pub fn new(point: LazyBernoulliPoint, boundary: BoundaryPrefix) -> Result<Self> {
        if point.rank() != boundary.rank() {
            return Err(Error::RankMismatch(point.rank(), boundary.rank()));
        }
        Ok(ExtendedClassElement { point, boundary })
    }

    /// Independent `x` and `xi` drawn from split streams of `seed`.
    pub fn sample(rank: u8, alphabet: Arc<ProbabilityVector>, depth: usize, seed: u64) -> Result<Self> {
        let point = LazyBernoulliPoint::new(split_seed(seed, STREAM_X, 0), rank, alphabet);
        let boundary = BoundaryPrefix::sample(depth, rank.into(), split_seed(seed, STREAM_XI, 0))?;
        Self::new(point, boundary)
    }

    pub fn point(&self) -> &LazyBernoulliPoint {
        &self.point
    }

    pub fn boundary(&self) -> &BoundaryPrefix {
        &self.boundary
    }

    /// The level-`n` class, in tail-class order.
    pub fn lifted_class(&self, n: usize) -> Result<Vec<ExtendedClassElement>> {
        tail_class(&self.boundary, n)?
            .into_par_iter()
            .map(|z| {
                let alpha = fundamental_cocycle(&z, &self.boundary, n)?;
                Ok(ExtendedClassElement { point: self.point.translate(&alpha)?, boundary: z })
            })
            .collect()
    }
}

/// What an observable reads: symbol coordinates (group elements) and a
/// number of leading boundary letters.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Footprint {
    pub coordinates: Vec<ReducedWord>,
    pub boundary_depth: usize,
}

pub trait Observable: Sync {
    fn footprint(&self) -> Footprint;
    fn evaluate(&self, element: &ExtendedClassElement) -> Result<f64>;
}

/// `f = c`.
#[derive(Clone, Copy, Debug)]
pub struct Constant(pub f64);

impl Observable for Constant {
    fn footprint(&self) -> Footprint {
        Footprint::default()
    }

    fn evaluate(&self, _: &ExtendedClassElement) -> Result<f64> {
        Ok(self.0)
    }
}

/// Indicator that the symbol at `at` equals `symbol`.
#[derive(Clone, Debug)]
pub struct SymbolIndicator {
    pub at: ReducedWord,
    pub symbol: usize,
}

impl Observable for SymbolIndicator {
    fn footprint(&self) -> Footprint {
        Footprint { coordinates: vec![self.at.clone()], boundary_depth: 0 }
    }

    fn evaluate(&self, e: &ExtendedClassElement) -> Result<f64> {
        Ok(f64::from(u8::from(e.point.symbol_at(&self.at)? == self.symbol)))
    }
}

/// Indicator that the boundary letter at 1-based `position` equals `letter`.
#[derive(Clone, Copy, Debug)]
pub struct BoundaryLetterIndicator {
    pub position: usize,
    pub letter: Generator,
}

impl Observable for BoundaryLetterIndicator {
    fn footprint(&self) -> Footprint {
        Footprint { coordinates: Vec::new(), boundary_depth: self.position }
    }

    fn evaluate(&self, e: &ExtendedClassElement) -> Result<f64> {
        let got = e.boundary.letter(self.position).ok_or_else(|| {
            Error::Precision(format!("boundary letter {} beyond depth {}", self.position, e.boundary.depth()))
        })?;
        Ok(f64::from(u8::from(got == self.letter)))
    }
}

/// Boundary depth needed to average `f` over level-`n` classes.
pub fn required_depth(f: &dyn Observable, n: usize) -> usize {
    f.footprint().boundary_depth.max(n + 1)
}

fn check_depth(f: &dyn Observable, e: &ExtendedClassElement, n: usize) -> Result<()> {
    let need = required_depth(f, n);
    if e.boundary.depth() < need {
        return Err(Error::Precision(format!(
            "averaging at level {n} needs boundary depth {need}, element has {}",
            e.boundary.depth()
        )));
    }
    Ok(())
}

/// Arithmetic mean of `f` over the level-`n` class of `e`, summed in class
/// order.
pub fn class_average(f: &dyn Observable, e: &ExtendedClassElement, n: usize) -> Result<f64> {
    check_depth(f, e, n)?;
    let values: Vec<f64> = e.lifted_class(n)?.par_iter().map(|w| f.evaluate(w)).collect::<Result<_>>()?;
    Ok(shifted_mean(&values))
}

/// Mean computed as `v_0 + sum (v_i - v_0) / len`: exact for constants and
/// less prone to cancellation than a plain sum.
fn shifted_mean(values: &[f64]) -> f64 {
    let anchor = values[0];
    anchor + values.iter().map(|v| v - anchor).sum::<f64>() / values.len() as f64
}

/// Class averages at every level `0..=n_max` from a single enumeration of the
/// top class: an element enters level `n` once its boundary coordinate agrees
/// with `xi` beyond `n`, and the cocycle does not depend on the level used to
/// compute it.
pub fn class_average_profile(f: &dyn Observable, e: &ExtendedClassElement, n_max: usize) -> Result<Vec<f64>> {
    check_depth(f, e, n_max)?;
    let xi = &e.boundary;
    let entries: Vec<(usize, f64)> = tail_class(xi, n_max)?
        .into_par_iter()
        .map(|z| {
            let enters = z.letters()[..n_max].iter().zip(xi.letters()).rposition(|(a, b)| a != b).map_or(0, |p| p + 1);
            let alpha = fundamental_cocycle(&z, xi, n_max)?;
            let w = ExtendedClassElement { point: e.point.translate(&alpha)?, boundary: z };
            Ok((enters, f.evaluate(&w)?))
        })
        .collect::<Result<_>>()?;
    // xi itself is the only element entering at level 0
    let anchor = entries.iter().find(|(enters, _)| *enters == 0).map_or(0.0, |&(_, v)| v);
    let mut sums = vec![0.0; n_max + 1];
    let mut counts = vec![0usize; n_max + 1];
    for (enters, v) in entries {
        sums[enters] += v - anchor;
        counts[enters] += 1;
    }
    let (mut s, mut c) = (0.0, 0usize);
    Ok((0..=n_max)
        .map(|n| {
            s += sums[n];
            c += counts[n];
            anchor + s / c as f64
        })
        .collect())
}

/// Mean over a chain class of a finite model, as `f64`.
pub fn model_class_average(model: &FiniteRelationModel, f: impl Fn(&[u8]) -> f64, y: PointId, n: usize) -> Result<f64> {
    model.check_point(y)?;
    model.check_level(n)?;
    let values: Vec<f64> = model.class(n, y).iter().map(|&z| f(model.point(z))).collect();
    Ok(shifted_mean(&values))
}

/// Exact mean over a chain class of a rational-valued function.
pub fn model_class_average_exact(
    model: &FiniteRelationModel,
    f: impl Fn(&[u8]) -> Ratio<i64>,
    y: PointId,
    n: usize,
) -> Result<Ratio<i64>> {
    model.check_point(y)?;
    model.check_level(n)?;
    let class = model.class(n, y);
    let total = class.iter().fold(Ratio::from_integer(0), |acc, &z| acc + f(model.point(z)));
    Ok(total / Ratio::from_integer(class.len() as i64))
}

/// Exact integral of `f` against the uniform measure of the model.
pub fn model_integral_exact(model: &FiniteRelationModel, f: impl Fn(&[u8]) -> Ratio<i64>) -> Ratio<i64> {
    let total = model.points().fold(Ratio::from_integer(0), |acc, z| acc + f(model.point(z)));
    total / Ratio::from_integer(model.len() as i64)
}

/// Indicator of the cylinder fixing the leading coordinates to `prefix`.
pub fn cylinder_indicator(prefix: Vec<u8>) -> impl Fn(&[u8]) -> Ratio<i64> {
    move |coords: &[u8]| Ratio::from_integer(i64::from(coords.starts_with(&prefix)))
}

/// `mean over z in Z_m(y) of (mean of f over Z_n(z))` for `n <= m`, which
/// equals the `Z_m` average exactly.
pub fn tower_average_exact(
    model: &FiniteRelationModel,
    f: impl Fn(&[u8]) -> Ratio<i64> + Copy,
    y: PointId,
    n: usize,
    m: usize,
) -> Result<Ratio<i64>> {
    if n > m {
        return Err(Error::Domain(format!("tower needs n <= m, got {n} > {m}")));
    }
    model.check_level(m)?;
    let outer = model.class(m, y);
    let mut total = Ratio::from_integer(0);
    for &z in outer {
        total += model_class_average_exact(model, f, z, n)?;
    }
    Ok(total / Ratio::from_integer(outer.len() as i64))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpreadRow {
    pub n: usize,
    pub class_size: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// `max - min`, the largest pairwise deviation.
    pub spread: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpreadReport {
    pub rows: Vec<SpreadRow>,
    pub starts: usize,
    /// Set when the spread at the last level is still at least half the
    /// largest spread seen, i.e. the averages are not coming together.
    pub non_decaying: bool,
}

impl SpreadReport {
    pub fn last(&self) -> Option<&SpreadRow> {
        self.rows.last()
    }
}

#[derive(Clone, Debug)]
pub struct DiagnosticSetup {
    pub rank: u8,
    pub alphabet: Arc<ProbabilityVector>,
    pub depth: usize,
}

/// Class averages of `f` at levels `1..=n_max` from `starts` independent
/// `(x, xi)`, with the spread across starts at each level.
pub fn ergodicity_diagnostic(
    f: &dyn Observable,
    setup: &DiagnosticSetup,
    starts: usize,
    n_max: usize,
    seed: u64,
) -> Result<SpreadReport> {
    if starts == 0 || n_max == 0 {
        return Err(Error::Domain("diagnostic needs at least one start and one level".into()));
    }
    let depth = setup.depth.max(required_depth(f, n_max));
    let mut seeds = stream_rng(seed);
    let start_seeds: Vec<u64> = (0..starts).map(|_| seeds.gen()).collect();
    let profiles: Vec<Vec<f64>> = start_seeds
        .iter()
        .map(|&s| {
            let e = ExtendedClassElement::sample(setup.rank, Arc::clone(&setup.alphabet), depth, s)?;
            class_average_profile(f, &e, n_max)
        })
        .collect::<Result<_>>()?;
    let rows: Vec<SpreadRow> = (1..=n_max)
        .map(|n| {
            let vals = profiles.iter().map(|p| p[n]);
            let min = vals.clone().fold(f64::INFINITY, f64::min);
            let max = vals.clone().fold(f64::NEG_INFINITY, f64::max);
            SpreadRow {
                n,
                class_size: crate::boundary::tail_class_size(n, setup.rank),
                min,
                max,
                mean: vals.sum::<f64>() / starts as f64,
                spread: max - min,
            }
        })
        .collect();
    let peak = rows.iter().map(|r| r.spread).fold(0.0, f64::max);
    let last = rows.last().map_or(0.0, |r| r.spread);
    Ok(SpreadReport { rows, starts, non_decaying: last > 0.0 && last >= 0.5 * peak })
}
