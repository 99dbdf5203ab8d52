//! Subadditive functionals on finite models and the limit harness.
//!
//! A functional assigns to a finite set `A(y)` and a base point `y` a
//! nonnegative number. The defining properties (boundedness by `C |A(y)|`,
//! invariance along subrelations, subadditivity over disjoint
//! decompositions) are checked on random instances by [`check_subadditive`].
//! [`subadditive_limit_harness`] evaluates the normalized chain averages
//! `s_n` and compares them against supplied candidate subrelations.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::actions::{EstimationMode, PartitionLabeler, ProbabilityVector};
use crate::boundary::fundamental_cocycle;
use crate::entropy::{refined_entropy, shannon_masses};
use crate::error::{Error, Result};
use crate::hyperfinite::{FiniteRelationModel, ModelKind, PointId, SubsetFunction};
use crate::rng::stream_rng;

/// Relative slack granted to floating-point comparisons.
const FLOAT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Evaluation {
    pub value: f64,
    /// Zero for exact evaluations.
    pub stderr: f64,
}

impl Evaluation {
    pub fn exact(value: f64) -> Self {
        Evaluation { value, stderr: 0.0 }
    }
}

pub trait SubadditiveFunctional: Sync {
    fn name(&self) -> String;
    /// The constant `C` of the boundedness property.
    fn bound_constant(&self) -> f64;
    /// Value on the finite set `set` (sorted, distinct) seen from `y`.
    fn evaluate(&self, model: &FiniteRelationModel, set: &[PointId], y: PointId) -> Result<Evaluation>;
}

/// `|A(y)|`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Cardinality;

impl SubadditiveFunctional for Cardinality {
    fn name(&self) -> String {
        "cardinality".into()
    }

    fn bound_constant(&self) -> f64 {
        1.0
    }

    fn evaluate(&self, _: &FiniteRelationModel, set: &[PointId], _: PointId) -> Result<Evaluation> {
        Ok(Evaluation::exact(set.len() as f64))
    }
}

/// `|A(y)|^2`, which is not bounded by any `C |A(y)|`.
#[derive(Clone, Copy, Debug, Default)]
pub struct SquaredCardinality;

impl SubadditiveFunctional for SquaredCardinality {
    fn name(&self) -> String {
        "squared-cardinality".into()
    }

    fn bound_constant(&self) -> f64 {
        1.0
    }

    fn evaluate(&self, _: &FiniteRelationModel, set: &[PointId], _: PointId) -> Result<Evaluation> {
        Ok(Evaluation::exact((set.len() * set.len()) as f64))
    }
}

/// `h^P(A)(y) = H(join over z in A(y) of alpha(z, y)^{-1} P)` on the tail
/// model, with the fundamental cocycle computed from length-`L` heads.
#[derive(Clone, Debug)]
pub struct HpFunctional {
    pub labeler: PartitionLabeler,
    pub alphabet: Arc<ProbabilityVector>,
    pub mode: EstimationMode,
}

impl HpFunctional {
    pub fn new(labeler: PartitionLabeler, alphabet: Arc<ProbabilityVector>, mode: EstimationMode) -> Result<Self> {
        if labeler.alphabet_size() != alphabet.len() {
            return Err(Error::Domain("labeler and probability vector disagree on the alphabet".into()));
        }
        Ok(HpFunctional { labeler, alphabet, mode })
    }
}

impl SubadditiveFunctional for HpFunctional {
    fn name(&self) -> String {
        format!("h^P[{:?}, window {}]", self.labeler.kind(), self.labeler.window().len())
    }

    /// `H(P)`: the refinement by `|A|` translates has entropy at most
    /// `|A| H(P)`.
    fn bound_constant(&self) -> f64 {
        self.labeler.marginal(&self.alphabet).map_or(f64::INFINITY, |m| shannon_masses(&m))
    }

    fn evaluate(&self, model: &FiniteRelationModel, set: &[PointId], y: PointId) -> Result<Evaluation> {
        let ModelKind::Tail { rank } = model.kind() else {
            return Err(Error::Domain("h^P is evaluated on the tail model".into()));
        };
        if rank != self.labeler.rank() {
            return Err(Error::RankMismatch(self.labeler.rank(), rank));
        }
        let base = model.boundary_prefix(y)?;
        let keys = set
            .iter()
            .map(|&z| fundamental_cocycle(&model.boundary_prefix(z)?, &base, model.length()))
            .collect::<Result<Vec<_>>>()?;
        let est = refined_entropy(&keys, &self.labeler, &self.alphabet, self.mode)?;
        Ok(Evaluation { value: est.value, stderr: est.stderr.unwrap_or(0.0) })
    }
}

fn exceeds(lhs: f64, rhs: f64, stderr: f64) -> bool {
    lhs > rhs + FLOAT_TOL * (1.0 + rhs.abs()) + 3.0 * stderr
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Property {
    Boundedness,
    Invariance,
    Subadditivity,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub trial: usize,
    pub property: Property,
    pub lhs: f64,
    pub rhs: f64,
    pub set: Vec<PointId>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubadditiveReport {
    pub functional: String,
    pub trials: usize,
    pub boundedness_violations: usize,
    pub invariance_violations: usize,
    pub subadditivity_violations: usize,
    pub first_violation: Option<Violation>,
    /// Smallest `sum of parts - whole` seen; zero means equality occurred.
    pub min_subadditivity_slack: f64,
    pub max_subadditivity_slack: f64,
}

impl SubadditiveReport {
    pub fn passed(&self) -> bool {
        self.first_violation.is_none()
    }
}

/// Random checks of boundedness, invariance and subadditivity.
///
/// Each trial draws a set of `1..=max_set` distinct points, a base point and
/// a random partition of the set into pieces with their own base points, and
/// a chain class no larger than `max_set` with two of its points.
pub fn check_subadditive(
    f: &dyn SubadditiveFunctional,
    model: &FiniteRelationModel,
    trials: usize,
    seed: u64,
    max_set: usize,
) -> Result<SubadditiveReport> {
    if max_set == 0 {
        return Err(Error::Domain("max_set must be positive".into()));
    }
    let c = f.bound_constant();
    let small_levels: Vec<usize> = (0..=model.length()).filter(|&n| model.class_size(n) <= max_set).collect();
    let mut rng = stream_rng(seed);
    let points: Vec<PointId> = model.points().collect();
    let mut report = SubadditiveReport {
        functional: f.name(),
        trials,
        boundedness_violations: 0,
        invariance_violations: 0,
        subadditivity_violations: 0,
        first_violation: None,
        min_subadditivity_slack: f64::INFINITY,
        max_subadditivity_slack: f64::NEG_INFINITY,
    };
    let record = |report: &mut SubadditiveReport, v: Violation| {
        match v.property {
            Property::Boundedness => report.boundedness_violations += 1,
            Property::Invariance => report.invariance_violations += 1,
            Property::Subadditivity => report.subadditivity_violations += 1,
        }
        report.first_violation.get_or_insert(v);
    };
    for trial in 0..trials {
        let size = rng.gen_range(1..=max_set.min(points.len()));
        let mut set: Vec<PointId> = points.choose_multiple(&mut rng, size).copied().collect();
        let y = *points.choose(&mut rng).expect("non-empty model");
        let pieces = rng.gen_range(1..=size);
        let assignment: Vec<usize> = (0..size).map(|i| if i < pieces { i } else { rng.gen_range(0..pieces) }).collect();
        let bases: Vec<PointId> = (0..pieces).map(|_| *points.choose(&mut rng).expect("non-empty model")).collect();
        let level = *small_levels.choose(&mut rng).expect("level 0 always qualifies");
        let inv_y = *points.choose(&mut rng).expect("non-empty model");
        let inv_z = *model.class(level, inv_y).choose(&mut rng).expect("classes are non-empty");

        let mut parts: Vec<Vec<PointId>> = vec![Vec::new(); pieces];
        for (&z, &p) in set.iter().zip(&assignment) {
            parts[p].push(z);
        }
        set.sort_unstable();
        for p in parts.iter_mut() {
            p.sort_unstable();
        }

        let whole = f.evaluate(model, &set, y)?;
        if exceeds(whole.value, c * set.len() as f64, whole.stderr) {
            let v = Violation { trial, property: Property::Boundedness, lhs: whole.value, rhs: c * set.len() as f64, set: set.clone() };
            record(&mut report, v);
        }

        let mut sum = 0.0;
        let mut var = whole.stderr * whole.stderr;
        for (part, &base) in parts.iter().zip(&bases) {
            let e = f.evaluate(model, part, base)?;
            sum += e.value;
            var += e.stderr * e.stderr;
        }
        let slack = sum - whole.value;
        report.min_subadditivity_slack = report.min_subadditivity_slack.min(slack);
        report.max_subadditivity_slack = report.max_subadditivity_slack.max(slack);
        if exceeds(whole.value, sum, var.sqrt()) {
            let v = Violation { trial, property: Property::Subadditivity, lhs: whole.value, rhs: sum, set: set.clone() };
            record(&mut report, v);
        }

        let class = model.class(level, inv_y);
        let a = f.evaluate(model, class, inv_y)?;
        let b = f.evaluate(model, class, inv_z)?;
        let se = (a.stderr * a.stderr + b.stderr * b.stderr).sqrt();
        if exceeds(a.value, b.value, se) || exceeds(b.value, a.value, se) {
            let v = Violation { trial, property: Property::Invariance, lhs: a.value, rhs: b.value, set: class.to_vec() };
            record(&mut report, v);
        }
    }
    Ok(report)
}

/// The equivalence relation "agree at the given 1-based coordinates". Level
/// `n` of the chain fixes positions `n+1..=L`.
pub fn coordinate_relation(model: &FiniteRelationModel, fixed: &[usize]) -> Result<SubsetFunction> {
    if let Some(&p) = fixed.iter().find(|&&p| p == 0 || p > model.length()) {
        return Err(Error::Domain(format!("coordinate {p} outside 1..={}", model.length())));
    }
    let key = |y: PointId| -> Vec<u8> { fixed.iter().map(|&p| model.point(y)[p - 1]).collect() };
    let mut groups: std::collections::HashMap<Vec<u8>, Vec<PointId>> = std::collections::HashMap::new();
    for y in model.points() {
        groups.entry(key(y)).or_default().push(y);
    }
    let sets = model.points().map(|y| groups[&key(y)].clone()).collect();
    SubsetFunction::from_sets(model, sets)
}

#[derive(Clone, Debug)]
pub enum Candidate {
    Level(usize),
    Relation { name: String, relation: SubsetFunction },
}

impl Candidate {
    pub fn name(&self) -> String {
        match self {
            Candidate::Level(n) => format!("Z_{n}"),
            Candidate::Relation { name, .. } => name.clone(),
        }
    }
}

/// `integral F(T)(y) / |T(y)| d nu(y)` under the uniform measure.
pub fn normalized_average(
    f: &dyn SubadditiveFunctional,
    model: &FiniteRelationModel,
    relation: &SubsetFunction,
) -> Result<Evaluation> {
    if relation.shape() != model.shape() {
        return Err(Error::Structural("relation belongs to a different model".into()));
    }
    let per_point: Vec<Evaluation> = model
        .points()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&y| {
            let set = relation.get(y);
            if set.is_empty() {
                return Err(Error::Structural(format!("relation has an empty class at {y}")));
            }
            let e = f.evaluate(model, set, y)?;
            Ok(Evaluation { value: e.value / set.len() as f64, stderr: e.stderr / set.len() as f64 })
        })
        .collect::<Result<_>>()?;
    let n = per_point.len() as f64;
    // estimates share their sample points, so standard errors add linearly
    Ok(Evaluation {
        value: per_point.iter().map(|e| e.value).sum::<f64>() / n,
        stderr: per_point.iter().map(|e| e.stderr).sum::<f64>() / n,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HarnessRow {
    pub n: usize,
    pub class_size: usize,
    pub s_n: f64,
    pub stderr: f64,
    /// `s_n - infimum`.
    pub gap: f64,
    /// `s_n <= s_{n-1} + 3 stderr(s_n)`; true for the first row.
    pub nonincreasing_ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CandidateValue {
    pub name: String,
    pub value: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HarnessReport {
    pub functional: String,
    pub rows: Vec<HarnessRow>,
    pub candidates: Vec<CandidateValue>,
    /// Infimum over the chain levels and every supplied candidate.
    pub infimum: f64,
    pub argmin: String,
    /// Infimum over the supplied candidates alone (`inf` when none).
    pub supplied_infimum: f64,
    pub lower_bound_holds: bool,
    pub nonincreasing_within_noise: bool,
}

/// Computes `s_n` along `chain`, the candidate values, their infimum and the
/// gap sequence. Chain levels always count as candidates. A chain value
/// falling below the infimum (beyond noise) is an invariant violation.
pub fn subadditive_limit_harness(
    f: &dyn SubadditiveFunctional,
    model: &FiniteRelationModel,
    chain: &[usize],
    candidates: &[Candidate],
) -> Result<HarnessReport> {
    if chain.is_empty() {
        return Err(Error::Domain("the chain needs at least one level".into()));
    }
    for &n in chain {
        model.check_level(n)?;
    }
    let mut values = Vec::new();
    for &n in chain {
        let e = normalized_average(f, model, &SubsetFunction::relation(model, n)?)?;
        values.push((n, e));
    }
    let mut cands: Vec<CandidateValue> = Vec::new();
    for c in candidates {
        let e = match c {
            Candidate::Level(n) => {
                model.check_level(*n)?;
                normalized_average(f, model, &SubsetFunction::relation(model, *n)?)?
            }
            Candidate::Relation { relation, .. } => {
                if !relation.is_equivalence_relation() {
                    return Err(Error::Structural(format!("candidate {} is not an equivalence relation", c.name())));
                }
                normalized_average(f, model, relation)?
            }
        };
        cands.push(CandidateValue { name: c.name(), value: e.value, stderr: e.stderr });
    }
    let supplied_infimum = cands.iter().map(|c| c.value).fold(f64::INFINITY, f64::min);
    let mut all = cands.clone();
    for &(n, e) in &values {
        all.push(CandidateValue { name: format!("Z_{n}"), value: e.value, stderr: e.stderr });
    }
    let best = all
        .iter()
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .expect("chain is non-empty")
        .clone();
    let mut rows = Vec::with_capacity(values.len());
    for (i, &(n, e)) in values.iter().enumerate() {
        let nonincreasing_ok = i == 0 || !exceeds(e.value, values[i - 1].1.value, e.stderr);
        rows.push(HarnessRow {
            n,
            class_size: model.class_size(n),
            s_n: e.value,
            stderr: e.stderr,
            gap: e.value - best.value,
            nonincreasing_ok,
        });
    }
    let lower_bound_holds = rows.iter().all(|r| !exceeds(best.value, r.s_n, r.stderr + best.stderr));
    if !lower_bound_holds {
        return Err(Error::InvariantViolation(format!("a chain value fell below the infimum {}", best.value)));
    }
    Ok(HarnessReport {
        functional: f.name(),
        nonincreasing_within_noise: rows.iter().all(|r| r.nonincreasing_ok),
        rows,
        candidates: cands,
        infimum: best.value,
        argmin: best.name,
        supplied_infimum,
        lower_bound_holds,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RingReport {
    pub n: usize,
    pub points_checked: usize,
    pub violations: usize,
    /// Largest `lhs - rhs` seen (nonpositive when the bound holds).
    pub max_excess: f64,
    /// Mean fraction of the class lying in the ring.
    pub mean_ring_fraction: f64,
}

/// Checks `F(Z_n)(y) <= sum over z in ring(y) of F(T)(z) / |T(z)| + C |Z_n(y) \ ring(y)|`
/// at every point, where `ring(y) = {z in Z_n(y) : T(z) subset Z_n(y)}`.
pub fn ring_decomposition_check(
    f: &dyn SubadditiveFunctional,
    model: &FiniteRelationModel,
    t: &SubsetFunction,
    n: usize,
) -> Result<RingReport> {
    model.check_level(n)?;
    if t.shape() != model.shape() || !t.is_equivalence_relation() {
        return Err(Error::Structural("ring decomposition needs an equivalence relation on the model".into()));
    }
    let c = f.bound_constant();
    let points: Vec<PointId> = model.points().collect();
    let per_t: Vec<Evaluation> = points
        .par_iter()
        .map(|&z| {
            let e = f.evaluate(model, t.get(z), z)?;
            let k = t.get(z).len() as f64;
            Ok(Evaluation { value: e.value / k, stderr: e.stderr / k })
        })
        .collect::<Result<_>>()?;
    let results: Vec<(f64, f64, f64)> = points
        .par_iter()
        .map(|&y| {
            let class = model.class(n, y);
            let lhs = f.evaluate(model, class, y)?;
            let (mut rhs, mut se, mut inside) = (0.0, lhs.stderr, 0usize);
            for &z in class {
                if t.get(z).iter().all(|&w| model.same_class(n, y, w)) {
                    rhs += per_t[z as usize].value;
                    se += per_t[z as usize].stderr;
                    inside += 1;
                } else {
                    rhs += c;
                }
            }
            let excess = lhs.value - rhs;
            let violated = if exceeds(lhs.value, rhs, se) { 1.0 } else { 0.0 };
            Ok((excess, violated, inside as f64 / class.len() as f64))
        })
        .collect::<Result<_>>()?;
    Ok(RingReport {
        n,
        points_checked: points.len(),
        violations: results.iter().filter(|r| r.1 > 0.0).count(),
        max_excess: results.iter().map(|r| r.0).fold(f64::NEG_INFINITY, f64::max),
        mean_ring_fraction: results.iter().map(|r| r.2).sum::<f64>() / points.len() as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::shannon;
    use crate::word::ReducedWord;

    fn symbol_hp(p: Vec<f64>) -> HpFunctional {
        let alphabet = Arc::new(ProbabilityVector::new(p).unwrap());
        let labeler = PartitionLabeler::symbol_at_identity(2, alphabet.len());
        HpFunctional::new(labeler, alphabet, EstimationMode::exact()).unwrap()
    }

    /// xor on the edge {e, a1}, or and on the neighbours {a1, a2}; only the
    /// latter windows overlap across horosphere keys.
    fn edge_hp(p: Vec<f64>, and: bool) -> HpFunctional {
        let alphabet = Arc::new(ProbabilityVector::new(p).unwrap());
        let window = if and {
            vec![ReducedWord::parse(2, "a1").unwrap(), ReducedWord::parse(2, "a2").unwrap()]
        } else {
            vec![ReducedWord::identity(2), ReducedWord::parse(2, "a1").unwrap()]
        };
        let labeler = if and { PartitionLabeler::and(window) } else { PartitionLabeler::xor(window) };
        HpFunctional::new(labeler.unwrap(), alphabet, EstimationMode::exact()).unwrap()
    }

    fn xor_hp(p: Vec<f64>) -> HpFunctional {
        edge_hp(p, false)
    }

    #[test]
    fn cardinality_passes_with_equality() {
        let m = FiniteRelationModel::tail(2, 4).unwrap();
        let r = check_subadditive(&Cardinality, &m, 300, 1, 8).unwrap();
        assert!(r.passed());
        assert_eq!(r.min_subadditivity_slack, 0.0);
        assert_eq!(r.max_subadditivity_slack, 0.0);
    }

    #[test]
    fn square_violates_boundedness() {
        let m = FiniteRelationModel::odometer(4).unwrap();
        let r = check_subadditive(&SquaredCardinality, &m, 50, 2, 6).unwrap();
        assert!(!r.passed());
        assert!(r.boundedness_violations > 0);
        assert_eq!(r.first_violation.unwrap().property, Property::Boundedness);
    }

    #[test]
    fn hp_symbol_and_block_pass() {
        let m = FiniteRelationModel::tail(2, 4).unwrap();
        let r = check_subadditive(&symbol_hp(vec![0.9, 0.1]), &m, 200, 3, 8).unwrap();
        assert!(r.passed(), "{:?}", r.first_violation);
        let r = check_subadditive(&xor_hp(vec![0.8, 0.2]), &m, 100, 4, 6).unwrap();
        assert!(r.passed(), "{:?}", r.first_violation);
    }

    #[test]
    fn hp_needs_the_tail_model() {
        let o = FiniteRelationModel::odometer(3).unwrap();
        assert!(symbol_hp(vec![0.5, 0.5]).evaluate(&o, &[0], 0).is_err());
    }

    #[test]
    fn hp_of_a_chain_class_matches_the_cocycle_sweep() {
        use crate::entropy::entropy_function_hp;
        let m = FiniteRelationModel::tail(2, 3).unwrap();
        let f = xor_hp(vec![0.7, 0.3]);
        for y in [0, 11, 30] {
            let xi = m.boundary_prefix(y).unwrap();
            for n in 0..=2 {
                let direct = entropy_function_hp(&xi, n, &f.labeler, &f.alphabet, EstimationMode::exact()).unwrap();
                let via = f.evaluate(&m, m.class(n, y), y).unwrap();
                assert!((direct.value - via.value).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn harness_trivial_and_symbol_cases() {
        let m = FiniteRelationModel::tail(2, 4).unwrap();
        let r = subadditive_limit_harness(&Cardinality, &m, &[0, 1, 2, 3, 4], &[]).unwrap();
        assert!(r.rows.iter().all(|row| row.s_n == 1.0 && row.gap == 0.0));
        assert_eq!(r.infimum, 1.0);

        let f = symbol_hp(vec![0.9, 0.1]);
        let h = shannon(&f.alphabet);
        let r = subadditive_limit_harness(&f, &m, &[0, 1, 2, 3, 4], &[]).unwrap();
        for row in &r.rows {
            assert!((row.s_n - h).abs() < 1e-12);
            assert!(row.gap.abs() < 1e-12);
        }
    }

    #[test]
    fn harness_xor_code_is_flat() {
        // xor labels on the edges of a tree are independent
        let m = FiniteRelationModel::tail(2, 3).unwrap();
        let f = xor_hp(vec![0.8, 0.2]);
        let h = shannon(&ProbabilityVector::new(vec![0.68, 0.32]).unwrap());
        let r = subadditive_limit_harness(&f, &m, &[0, 1, 2], &[]).unwrap();
        for row in &r.rows {
            assert!((row.s_n - h).abs() < 1e-12);
        }
    }

    #[test]
    fn harness_block_code_is_nonincreasing_and_bounded_below() {
        let m = FiniteRelationModel::tail(2, 3).unwrap();
        let f = edge_hp(vec![0.5, 0.5], true);
        let blocks = coordinate_relation(&m, &[2, 3]).unwrap();
        let candidates = vec![Candidate::Relation { name: "agree@2,3".into(), relation: blocks }];
        let r = subadditive_limit_harness(&f, &m, &[0, 1, 2], &candidates).unwrap();
        assert!(r.lower_bound_holds && r.nonincreasing_within_noise);
        assert!(r.rows[2].s_n < r.rows[0].s_n);
        for row in &r.rows {
            assert!(row.s_n >= r.infimum - 1e-12);
        }
    }

    #[test]
    fn coordinate_relation_reproduces_levels() {
        let m = FiniteRelationModel::tail(2, 4).unwrap();
        for n in 0..=4 {
            let fixed: Vec<usize> = (n + 1..=4).collect();
            assert_eq!(coordinate_relation(&m, &fixed).unwrap(), SubsetFunction::relation(&m, n).unwrap());
        }
        assert!(coordinate_relation(&m, &[5]).is_err());
    }

    #[test]
    fn ring_decomposition_bound() {
        let m = FiniteRelationModel::tail(2, 3).unwrap();
        let blocks = coordinate_relation(&m, &[1, 3]).unwrap();
        for n in 0..=3 {
            let r = ring_decomposition_check(&Cardinality, &m, &blocks, n).unwrap();
            assert_eq!(r.violations, 0);
            let r = ring_decomposition_check(&symbol_hp(vec![0.6, 0.4]), &m, &blocks, n).unwrap();
            assert_eq!(r.violations, 0);
        }
        let f = xor_hp(vec![0.8, 0.2]);
        let level1 = SubsetFunction::relation(&m, 1).unwrap();
        for n in 1..=2 {
            let r = ring_decomposition_check(&f, &m, &level1, n).unwrap();
            assert_eq!(r.violations, 0);
            assert_eq!(r.mean_ring_fraction, 1.0);
        }
    }
}
