//! Finite models of hyperfinite exhaustions.
//!
//! Two ground sets are supported: admissible strings of length `L` over the
//! `2r` free-group letters (the boundary at finite depth) and bit strings of
//! length `L` (the dyadic odometer). In both, `Z_n` relates points that agree
//! on every coordinate `> n`, so `Z_0` is trivial and `Z_L` is everything.
//! Points are numbered in lexicographic order and every class is stored
//! sorted, which fixes all enumeration orders.
//!
//! On top of the models: subset functions and their algebra, inner
//! automorphisms of finite order, Følner defects, the disjointification of
//! laminar class collections, the descending covering construction, and the
//! exact count of disjoint subcollections used by the counting bound.

use std::collections::HashMap;

use num_rational::Ratio;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary::BoundaryPrefix;
use crate::error::{Error, Result};
use crate::word::{check_rank, Generator};

/// Largest ground set a model may have.
pub const MAX_GROUND_SET: usize = 1 << 20;

pub type PointId = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    Tail { rank: u8 },
    Odometer,
}

/// Identifies a model for compatibility checks between derived objects.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModelShape {
    pub kind: ModelKind,
    pub length: usize,
}

#[derive(Clone, Debug)]
pub struct FiniteRelationModel {
    shape: ModelShape,
    points: Vec<Vec<u8>>,
    /// `class_ids[n][y]`: index of `Z_n(y)` among the level-`n` classes.
    class_ids: Vec<Vec<u32>>,
    /// `classes[n][c]`: sorted members of class `c` at level `n`.
    classes: Vec<Vec<Vec<PointId>>>,
}

impl FiniteRelationModel {
    /// Admissible strings of length `length` over the letters of `F_r`.
    pub fn tail(rank: u32, length: usize) -> Result<Self> {
        let rank = check_rank(rank)?;
        if length == 0 {
            return Err(Error::Domain("model length must be >= 1".into()));
        }
        let size = (2 * rank as u128) * (2 * rank as u128 - 1).pow(length as u32 - 1);
        if size > MAX_GROUND_SET as u128 {
            return Err(Error::ResourceLimit(format!("tail model has {size} points, cap is {MAX_GROUND_SET}")));
        }
        let mut points = Vec::with_capacity(size as usize);
        let mut buf = Vec::with_capacity(length);
        fn grow(rank: u8, length: usize, buf: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
            if buf.len() == length {
                out.push(buf.clone());
                return;
            }
            for c in 0..2 * rank {
                if buf.last().is_some_and(|&p| p ^ 1 == c) {
                    continue;
                }
                buf.push(c);
                grow(rank, length, buf, out);
                buf.pop();
            }
        }
        grow(rank, length, &mut buf, &mut points);
        Ok(Self::build(ModelShape { kind: ModelKind::Tail { rank }, length }, points))
    }

    /// Bit strings of length `length`.
    pub fn odometer(length: usize) -> Result<Self> {
        if length == 0 {
            return Err(Error::Domain("model length must be >= 1".into()));
        }
        if length > 20 {
            return Err(Error::ResourceLimit(format!("odometer of length {length} exceeds the ground-set cap")));
        }
        let points = (0..1usize << length)
            .map(|i| (0..length).map(|b| ((i >> (length - 1 - b)) & 1) as u8).collect())
            .collect();
        Ok(Self::build(ModelShape { kind: ModelKind::Odometer, length }, points))
    }

    fn build(shape: ModelShape, points: Vec<Vec<u8>>) -> Self {
        let mut class_ids = Vec::with_capacity(shape.length + 1);
        let mut classes = Vec::with_capacity(shape.length + 1);
        for n in 0..=shape.length {
            let mut index: HashMap<&[u8], u32> = HashMap::new();
            let mut members: Vec<Vec<PointId>> = Vec::new();
            let ids = points
                .iter()
                .enumerate()
                .map(|(y, p)| {
                    let next = members.len() as u32;
                    let c = *index.entry(&p[n..]).or_insert(next);
                    if c == next {
                        members.push(Vec::new());
                    }
                    members[c as usize].push(y as PointId);
                    c
                })
                .collect();
            class_ids.push(ids);
            classes.push(members);
        }
        FiniteRelationModel { shape, points, class_ids, classes }
    }

    #[inline]
    pub fn shape(&self) -> ModelShape {
        self.shape
    }

    #[inline]
    pub fn kind(&self) -> ModelKind {
        self.shape.kind
    }

    /// The string length `L`, which is also the top level of the chain.
    #[inline]
    pub fn length(&self) -> usize {
        self.shape.length
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, y: PointId) -> &[u8] {
        &self.points[y as usize]
    }

    pub fn index_of(&self, coords: &[u8]) -> Option<PointId> {
        self.points.binary_search_by(|p| p.as_slice().cmp(coords)).ok().map(|i| i as PointId)
    }

    pub fn point_label(&self, y: PointId) -> String {
        match self.shape.kind {
            ModelKind::Tail { .. } => self.point(y).iter().map(|&c| Generator::from_code(c).to_string()).collect(),
            ModelKind::Odometer => self.point(y).iter().map(|b| (b'0' + b) as char).collect(),
        }
    }

    /// The tail-model point as a boundary prefix.
    pub fn boundary_prefix(&self, y: PointId) -> Result<BoundaryPrefix> {
        match self.shape.kind {
            ModelKind::Tail { rank } => {
                BoundaryPrefix::new(rank, self.point(y).iter().map(|&c| Generator::from_code(c)).collect())
            }
            ModelKind::Odometer => Err(Error::Domain("odometer points are not boundary prefixes".into())),
        }
    }

    pub(crate) fn check_point(&self, y: PointId) -> Result<()> {
        if (y as usize) < self.len() {
            Ok(())
        } else {
            Err(Error::Domain(format!("point {y} outside a ground set of size {}", self.len())))
        }
    }

    pub(crate) fn check_level(&self, n: usize) -> Result<()> {
        if n <= self.length() {
            Ok(())
        } else {
            Err(Error::Domain(format!("level {n} exceeds model length {}", self.length())))
        }
    }

    /// `Z_n(y)`, sorted.
    #[inline]
    pub fn class(&self, n: usize, y: PointId) -> &[PointId] {
        &self.classes[n][self.class_ids[n][y as usize] as usize]
    }

    #[inline]
    pub fn class_id(&self, n: usize, y: PointId) -> u32 {
        self.class_ids[n][y as usize]
    }

    pub fn classes_at(&self, n: usize) -> &[Vec<PointId>] {
        &self.classes[n]
    }

    #[inline]
    pub fn same_class(&self, n: usize, y: PointId, z: PointId) -> bool {
        self.class_ids[n][y as usize] == self.class_ids[n][z as usize]
    }

    /// Size of every level-`n` class (all classes of a level have equal size).
    pub fn class_size(&self, n: usize) -> usize {
        self.classes[n][0].len()
    }

    /// The (uniform) weight of a single point.
    pub fn weight(&self) -> Ratio<u128> {
        Ratio::new(1, self.len() as u128)
    }

    pub fn points(&self) -> impl Iterator<Item = PointId> + '_ {
        0..self.len() as PointId
    }
}

/// A map `y -> T(y)` into finite subsets of the ground set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsetFunction {
    shape: ModelShape,
    sets: Vec<Vec<PointId>>,
}

impl SubsetFunction {
    /// Sets are sorted and deduplicated on construction.
    pub fn from_sets(model: &FiniteRelationModel, mut sets: Vec<Vec<PointId>>) -> Result<Self> {
        if sets.len() != model.len() {
            return Err(Error::Domain(format!("{} sets for a ground set of size {}", sets.len(), model.len())));
        }
        for s in &mut sets {
            s.sort_unstable();
            s.dedup();
            if let Some(&z) = s.last() {
                model.check_point(z)?;
            }
        }
        Ok(SubsetFunction { shape: model.shape(), sets })
    }

    pub fn identity(model: &FiniteRelationModel) -> Self {
        SubsetFunction { shape: model.shape(), sets: model.points().map(|y| vec![y]).collect() }
    }

    /// The chain relation `Z_n` as a subset function.
    pub fn relation(model: &FiniteRelationModel, n: usize) -> Result<Self> {
        model.check_level(n)?;
        Ok(SubsetFunction { shape: model.shape(), sets: model.points().map(|y| model.class(n, y).to_vec()).collect() })
    }

    /// `D(y) = {phi(y) : phi in D}`.
    pub fn from_automorphisms(model: &FiniteRelationModel, d: &[InnerAutomorphism]) -> Result<Self> {
        for phi in d {
            phi.check_shape(model.shape())?;
        }
        let sets = model.points().map(|y| d.iter().map(|phi| phi.apply(y)).collect()).collect();
        Self::from_sets(model, sets)
    }

    #[inline]
    pub fn shape(&self) -> ModelShape {
        self.shape
    }

    #[inline]
    pub fn get(&self, y: PointId) -> &[PointId] {
        &self.sets[y as usize]
    }

    pub fn sets(&self) -> &[Vec<PointId>] {
        &self.sets
    }

    fn same_model(&self, other: &SubsetFunction) -> Result<()> {
        if self.shape == other.shape {
            Ok(())
        } else {
            Err(Error::Structural(format!("subset functions live on different models: {:?} vs {:?}", self.shape, other.shape)))
        }
    }

    /// `(self o t)(y) = union over z in t(y) of self(z)`.
    pub fn compose(&self, t: &SubsetFunction) -> Result<SubsetFunction> {
        self.same_model(t)?;
        let sets = t
            .sets
            .par_iter()
            .map(|ty| {
                let mut out: Vec<PointId> = ty.iter().flat_map(|&z| self.sets[z as usize].iter().copied()).collect();
                out.sort_unstable();
                out.dedup();
                out
            })
            .collect();
        Ok(SubsetFunction { shape: self.shape, sets })
    }

    /// `T^{-1}(y) = {z : y in T(z)}`.
    pub fn invert(&self) -> SubsetFunction {
        let mut sets = vec![Vec::new(); self.sets.len()];
        for (z, tz) in self.sets.iter().enumerate() {
            for &y in tz {
                sets[y as usize].push(z as PointId);
            }
        }
        SubsetFunction { shape: self.shape, sets }
    }

    /// `(self \ t)(y) = self(y) \ t(y)`.
    pub fn difference(&self, t: &SubsetFunction) -> Result<SubsetFunction> {
        self.same_model(t)?;
        let sets = self
            .sets
            .iter()
            .zip(&t.sets)
            .map(|(a, b)| a.iter().copied().filter(|z| b.binary_search(z).is_err()).collect())
            .collect();
        Ok(SubsetFunction { shape: self.shape, sets })
    }

    /// `max_y max(|T(y)|, |T^{-1}(y)|)`.
    pub fn norm(&self) -> usize {
        let forward = self.sets.iter().map(Vec::len).max().unwrap_or(0);
        let backward = self.invert().sets.iter().map(Vec::len).max().unwrap_or(0);
        forward.max(backward)
    }

    /// Whether `T` is the class map of an equivalence relation: reflexive,
    /// and `T(z) = T(y)` for every `z in T(y)`.
    pub fn is_equivalence_relation(&self) -> bool {
        self.sets.iter().enumerate().all(|(y, ty)| {
            ty.binary_search(&(y as PointId)).is_ok() && ty.iter().all(|&z| self.sets[z as usize] == *ty)
        })
    }
}

/// A permutation of the ground set together with the smallest level `n`
/// whose relation contains its graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InnerAutomorphism {
    shape: ModelShape,
    perm: Vec<PointId>,
    certificate: usize,
}

impl InnerAutomorphism {
    pub fn from_permutation(model: &FiniteRelationModel, perm: Vec<PointId>) -> Result<Self> {
        if perm.len() != model.len() {
            return Err(Error::Structural("permutation length differs from the ground set".into()));
        }
        let mut seen = vec![false; perm.len()];
        for &z in &perm {
            model.check_point(z)?;
            if std::mem::replace(&mut seen[z as usize], true) {
                return Err(Error::Structural(format!("map is not injective: {z} hit twice")));
            }
        }
        let certificate = (0..=model.length())
            .find(|&n| model.points().all(|y| model.same_class(n, y, perm[y as usize])))
            .expect("the top level relates all points");
        Ok(InnerAutomorphism { shape: model.shape(), perm, certificate })
    }

    pub fn identity(model: &FiniteRelationModel) -> Self {
        InnerAutomorphism { shape: model.shape(), perm: model.points().collect(), certificate: 0 }
    }

    /// The adding machine `x -> x + 1` (first coordinate least significant),
    /// restricted to the odometer's finite ground set where it wraps around.
    pub fn adding_machine(model: &FiniteRelationModel) -> Result<Self> {
        if model.kind() != ModelKind::Odometer {
            return Err(Error::Domain("the adding machine acts on the odometer model".into()));
        }
        let perm = model
            .points()
            .map(|y| {
                let mut bits = model.point(y).to_vec();
                for b in bits.iter_mut() {
                    *b ^= 1;
                    if *b == 1 {
                        break;
                    }
                }
                model.index_of(&bits).expect("bit strings are closed under increment")
            })
            .collect();
        Self::from_permutation(model, perm)
    }

    #[inline]
    pub fn apply(&self, y: PointId) -> PointId {
        self.perm[y as usize]
    }

    pub fn permutation(&self) -> &[PointId] {
        &self.perm
    }

    /// Smallest `n` with `phi(y) Z_n y` for every `y`.
    #[inline]
    pub fn order_certificate(&self) -> usize {
        self.certificate
    }

    pub fn inverse(&self) -> Self {
        let mut perm = vec![0; self.perm.len()];
        for (y, &z) in self.perm.iter().enumerate() {
            perm[z as usize] = y as PointId;
        }
        InnerAutomorphism { shape: self.shape, perm, certificate: self.certificate }
    }

    fn check_shape(&self, shape: ModelShape) -> Result<()> {
        if self.shape == shape {
            Ok(())
        } else {
            Err(Error::Structural("automorphism belongs to a different model".into()))
        }
    }
}

/// Cyclic shift inside every `Z_n`-class, in the class's sorted order. The
/// generated cyclic group has exactly the `Z_n`-classes as orbits.
pub fn cyclic_automorphism(model: &FiniteRelationModel, n: usize) -> Result<InnerAutomorphism> {
    model.check_level(n)?;
    let mut perm = vec![0; model.len()];
    for class in model.classes_at(n) {
        for (i, &y) in class.iter().enumerate() {
            perm[y as usize] = class[(i + 1) % class.len()];
        }
    }
    InnerAutomorphism::from_permutation(model, perm)
}

/// Følner defect of `Z_n` under a set of automorphisms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FolnerDefect {
    pub n: usize,
    pub exact: Ratio<u128>,
    pub value: f64,
}

/// `integral |Z_n(y) sym-diff D o Z_n(y)| / |Z_n(y)| d nu(y)` with the
/// uniform measure, exactly.
///
/// The integrand is constant on `Z_n`-classes, so the integral reduces to
/// `sum over classes C of |C sym-diff D(C)|` divided by the ground-set size.
pub fn folner_defect(model: &FiniteRelationModel, d: &[InnerAutomorphism], n: usize) -> Result<FolnerDefect> {
    model.check_level(n)?;
    for phi in d {
        phi.check_shape(model.shape())?;
    }
    let per_class: Vec<u128> = model
        .classes_at(n)
        .par_iter()
        .map(|class| {
            let mut image: Vec<PointId> = class.iter().flat_map(|&z| d.iter().map(move |phi| phi.apply(z))).collect();
            image.sort_unstable();
            image.dedup();
            symmetric_difference_size(class, &image) as u128
        })
        .collect();
    let total: u128 = per_class.iter().sum();
    let exact = Ratio::new(total, model.len() as u128);
    Ok(FolnerDefect { n, exact, value: total as f64 / model.len() as f64 })
}

fn symmetric_difference_size(a: &[PointId], b: &[PointId]) -> usize {
    let (mut i, mut j, mut common) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                common += 1;
                i += 1;
                j += 1;
            }
        }
    }
    a.len() + b.len() - 2 * common
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InteriorReport {
    pub n: usize,
    /// `|{z in Z_n(y) : T(z) subset Z_n(y)}| / |Z_n(y)|` for every `y`.
    pub per_point: Vec<f64>,
    pub mean: Ratio<u128>,
}

/// Fraction of each `Z_n`-class whose `T`-classes stay inside it.
pub fn interior_fraction(model: &FiniteRelationModel, t: &SubsetFunction, n: usize) -> Result<InteriorReport> {
    model.check_level(n)?;
    if t.shape() != model.shape() {
        return Err(Error::Structural("subset function belongs to a different model".into()));
    }
    if !t.is_equivalence_relation() {
        return Err(Error::Structural("interior fraction needs an equivalence subrelation".into()));
    }
    let interior = |z: PointId| t.get(z).iter().all(|&w| model.same_class(n, z, w));
    let per_class: Vec<usize> = model
        .classes_at(n)
        .par_iter()
        .map(|class| class.iter().filter(|&&z| interior(z)).count())
        .collect();
    let size = model.class_size(n);
    let per_point = model
        .points()
        .map(|y| per_class[model.class_id(n, y) as usize] as f64 / size as f64)
        .collect();
    let inside: usize = per_class.iter().sum();
    Ok(InteriorReport { n, per_point, mean: Ratio::new(inside as u128, model.len() as u128) })
}

/// The chain class `Z_level(center)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ChainClass {
    pub center: PointId,
    pub level: usize,
}

impl ChainClass {
    pub fn members<'a>(&self, model: &'a FiniteRelationModel) -> &'a [PointId] {
        model.class(self.level, self.center)
    }
}

/// Extracts the maximal classes of a collection of chain classes: a
/// pairwise-disjoint subcollection covering every listed class and hence
/// every center.
///
/// Classes are checked from the largest level down, ties broken by the
/// lexicographic order of centers; a class is kept unless an already kept
/// class contains it. Duplicate classes keep their first representative.
pub fn disjointify(model: &FiniteRelationModel, classes: &[ChainClass]) -> Result<Vec<ChainClass>> {
    for c in classes {
        model.check_point(c.center).map_err(|e| Error::Structural(e.to_string()))?;
        model.check_level(c.level).map_err(|e| Error::Structural(e.to_string()))?;
    }
    let mut order: Vec<ChainClass> = classes.to_vec();
    order.sort_by(|a, b| b.level.cmp(&a.level).then(a.center.cmp(&b.center)));
    let mut covered = vec![false; model.len()];
    let mut kept = Vec::new();
    for c in order {
        // laminarity: an intersecting kept class has level >= c.level, so it
        // contains c; checking the center suffices
        if covered[c.center as usize] {
            continue;
        }
        for &z in c.members(model) {
            covered[z as usize] = true;
        }
        kept.push(c);
    }
    Ok(kept)
}

/// Maximal elements of an arbitrary finite family of point sets, which must
/// be laminar (every two sets disjoint or nested). Returns indices into
/// `sets`, largest sets first, ties by position.
pub fn disjointify_sets(sets: &[Vec<PointId>]) -> Result<Vec<usize>> {
    let sorted: Vec<Vec<PointId>> = sets
        .iter()
        .map(|s| {
            let mut s = s.clone();
            s.sort_unstable();
            s.dedup();
            s
        })
        .collect();
    for i in 0..sorted.len() {
        for j in i + 1..sorted.len() {
            let (a, b) = (&sorted[i], &sorted[j]);
            let common = a.len() + b.len() - symmetric_difference_size(a, b);
            let common = common / 2;
            if common != 0 && common != a.len() && common != b.len() {
                return Err(Error::Structural(format!("sets {i} and {j} overlap without nesting")));
            }
        }
    }
    let mut order: Vec<usize> = (0..sorted.len()).filter(|&i| !sorted[i].is_empty()).collect();
    order.sort_by(|&a, &b| sorted[b].len().cmp(&sorted[a].len()).then(a.cmp(&b)));
    let mut covered = std::collections::HashSet::new();
    let mut kept = Vec::new();
    for i in order {
        if covered.contains(&sorted[i][0]) {
            continue;
        }
        covered.extend(sorted[i].iter().copied());
        kept.push(i);
    }
    Ok(kept)
}

/// Input of the covering construction at one point `y`: a rectangular-ish
/// array of chain levels `n(i, j)` and center sets `B_{i,j}(y)`. Row `0`
/// is the lowest row; the construction runs from the last row down.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoveringInstance {
    pub levels: Vec<Vec<usize>>,
    pub centers: Vec<Vec<Vec<PointId>>>,
}

impl CoveringInstance {
    /// A random instance satisfying the covering hypothesis for any `D`
    /// whose automorphisms have order certificates `<= certificate`.
    ///
    /// Row 0 is unconstrained; from row 1 on, every level is at least the
    /// certificate and at least every level used in earlier rows, so the
    /// left-hand side of the hypothesis is exactly `|T_{i,j}(z)|`.
    pub fn generate(
        model: &FiniteRelationModel,
        certificate: usize,
        rows: usize,
        max_centers: usize,
        seed: u64,
    ) -> Result<Self> {
        model.check_level(certificate)?;
        if rows == 0 || max_centers == 0 {
            return Err(Error::Domain("an instance needs at least one row and one center".into()));
        }
        let mut rng = crate::rng::stream_rng(seed);
        let top = model.length();
        let mut floor = rng.gen_range(0..=top.min(2));
        let mut levels = Vec::with_capacity(rows);
        let mut centers = Vec::with_capacity(rows);
        for i in 0..rows {
            if i == 1 {
                floor = floor.max(certificate);
            }
            if rng.gen_bool(0.03) {
                floor = (floor + 1).min(top);
            }
            let cols = rng.gen_range(1..=3);
            let row: Vec<usize> = (0..cols).map(|_| (floor + usize::from(rng.gen_bool(0.2))).min(top)).collect();
            floor = *row.iter().max().expect("rows are non-empty");
            centers.push(
                (0..cols)
                    .map(|_| {
                        let k = rng.gen_range(1..=max_centers.min(model.len()));
                        rand::seq::index::sample(&mut rng, model.len(), k).into_iter().map(|z| z as PointId).collect()
                    })
                    .collect(),
            );
            levels.push(row);
        }
        Ok(CoveringInstance { levels, centers })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct HypothesisFailure {
    pub row: usize,
    pub column: usize,
    pub point: PointId,
    pub lhs: usize,
    pub class_size: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoveringReport {
    /// Selected classes with the row they were selected in.
    pub selected: Vec<(usize, ChainClass)>,
    /// `sum of |C|` over the selection.
    pub mass: usize,
    /// `min_i |D o union_j B_{i,j}(y)|`.
    pub base: usize,
    /// `(1 - delta) * base`.
    pub bound: f64,
    /// `mass / base` (1 when the base is empty).
    pub covered_fraction: f64,
    pub hypothesis_holds: bool,
    /// Number of `(row, column, point)` triples violating the hypothesis.
    pub hypothesis_failure_count: usize,
    /// The first few failures, for reporting.
    pub hypothesis_failures: Vec<HypothesisFailure>,
    pub rows_sufficient: bool,
    /// Hypothesis holds and there are enough rows, so the bound must hold.
    pub bound_applies: bool,
    pub conclusion_holds: bool,
}

const REPORTED_FAILURES: usize = 16;

/// `M >= 1 + (1 - delta) |D| / delta^2`.
pub fn rows_sufficient(rows: usize, delta: f64, d_size: usize) -> bool {
    (rows as f64 - 1.0) * delta * delta >= (1.0 - delta) * d_size as f64 - 1e-9
}

/// Smallest number of rows satisfying [`rows_sufficient`].
pub fn min_rows(delta: f64, d_size: usize) -> usize {
    (1..).find(|&m| rows_sufficient(m, delta, d_size)).expect("rows grow without bound")
}

fn d_image(d: &[InnerAutomorphism], set: impl Iterator<Item = PointId>) -> Vec<PointId> {
    let mut out: Vec<PointId> = set.flat_map(|z| d.iter().map(move |phi| phi.apply(z))).collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Checks, at every point of the model, that for every row `i >= 1` and
/// column `j`
/// `|union over k < i of D o (T_{k,*}^{-1} T_{i,j})(z)| <= (1 + delta) |T_{i,j}(z)|`,
/// where `T_{k,*}` is the union of row `k`. Because rows are chain classes,
/// `union over k < i of T_{k,*}^{-1} T_{i,j}(z)` is the class of `z` at level
/// `max(n(i,j), max over k < i, j' of n(k,j'))`.
pub fn check_covering_hypothesis(
    model: &FiniteRelationModel,
    levels: &[Vec<usize>],
    d: &[InnerAutomorphism],
    delta: f64,
) -> Result<(usize, Vec<HypothesisFailure>)> {
    for row in levels {
        for &n in row {
            model.check_level(n)?;
        }
    }
    let mut below = levels.first().and_then(|r| r.iter().copied().max()).unwrap_or(0);
    let mut count = 0;
    let mut failures = Vec::new();
    // |D o C| is shared by all points of a class; cache per (level, class)
    let mut cache: HashMap<(usize, u32), usize> = HashMap::new();
    for (i, row) in levels.iter().enumerate().skip(1) {
        for (j, &n) in row.iter().enumerate() {
            let m = n.max(below);
            let size = model.class_size(n);
            for c in 0..model.classes_at(m).len() as u32 {
                let lhs = *cache
                    .entry((m, c))
                    .or_insert_with(|| d_image(d, model.classes_at(m)[c as usize].iter().copied()).len());
                if lhs as f64 > (1.0 + delta) * size as f64 {
                    for &z in &model.classes_at(m)[c as usize] {
                        count += 1;
                        if failures.len() < REPORTED_FAILURES {
                            failures.push(HypothesisFailure { row: i, column: j, point: z, lhs, class_size: size });
                        }
                    }
                }
            }
        }
        below = below.max(row.iter().copied().max().unwrap_or(0));
    }
    Ok((count, failures))
}

/// The descending covering construction at one point.
///
/// The last row is disjointified directly. Each lower row first discards
/// centers whose class meets anything already selected, then disjointifies
/// what remains, so the final selection is pairwise disjoint. The hypothesis
/// is checked at every point and reported; when it holds and there are
/// enough rows, a violated conclusion is an invariant violation.
pub fn covering(
    model: &FiniteRelationModel,
    instance: &CoveringInstance,
    d: &[InnerAutomorphism],
    delta: f64,
) -> Result<CoveringReport> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain(format!("delta must lie in (0, 1), got {delta}")));
    }
    if d.is_empty() {
        return Err(Error::Domain("D must be non-empty".into()));
    }
    for phi in d {
        phi.check_shape(model.shape())?;
    }
    let rows = instance.levels.len();
    if rows == 0 || instance.centers.len() != rows {
        return Err(Error::Structural("levels and centers must have the same non-zero number of rows".into()));
    }
    for (lv, cs) in instance.levels.iter().zip(&instance.centers) {
        if lv.len() != cs.len() {
            return Err(Error::Structural("levels and centers rows differ in length".into()));
        }
        for &n in lv {
            model.check_level(n)?;
        }
        for &z in cs.iter().flatten() {
            model.check_point(z)?;
        }
    }

    let (failure_count, failures) = check_covering_hypothesis(model, &instance.levels, d, delta)?;

    let mut covered = vec![false; model.len()];
    let mut selected = Vec::new();
    for i in (0..rows).rev() {
        let mut candidates = Vec::new();
        for (&n, centers) in instance.levels[i].iter().zip(&instance.centers[i]) {
            for &w in centers {
                // T_{i,j}^{-1} = T_{i,j}: drop w when its class meets the selection
                if model.class(n, w).iter().all(|&z| !covered[z as usize]) {
                    candidates.push(ChainClass { center: w, level: n });
                }
            }
        }
        for c in disjointify(model, &candidates)? {
            for &z in c.members(model) {
                covered[z as usize] = true;
            }
            selected.push((i, c));
        }
    }
    let mass: usize = selected.iter().map(|(_, c)| c.members(model).len()).sum();
    let base = instance
        .centers
        .iter()
        .map(|row| d_image(d, row.iter().flatten().copied()).len())
        .min()
        .unwrap_or(0);
    let bound = (1.0 - delta) * base as f64;
    let rows_ok = rows_sufficient(rows, delta, d.len());
    let hypothesis_holds = failure_count == 0;
    let conclusion_holds = mass as f64 >= bound;
    let report = CoveringReport {
        selected,
        mass,
        base,
        bound,
        covered_fraction: if base == 0 { 1.0 } else { mass as f64 / base as f64 },
        hypothesis_holds,
        hypothesis_failure_count: failure_count,
        hypothesis_failures: failures,
        rows_sufficient: rows_ok,
        bound_applies: hypothesis_holds && rows_ok,
        conclusion_holds,
    };
    if report.bound_applies && !conclusion_holds {
        return Err(Error::InvariantViolation(format!(
            "covered mass {mass} below (1 - delta) * {base} = {bound}"
        )));
    }
    Ok(report)
}

/// `E(l) = (1/l) log l + (1 - 1/l) log (1 - 1/l)^{-1}`, natural logs.
pub fn stirling_bound_e(l: f64) -> Result<f64> {
    if l.is_nan() || l < 2.0 || !l.is_finite() {
        return Err(Error::Domain(format!("E(l) needs l >= 2, got {l}")));
    }
    let q = 1.0 / l;
    Ok(q * l.ln() - (1.0 - q) * (1.0 - q).ln())
}

/// Smallest `l >= 4` with `E(l/2) < eta / 5`.
pub fn choose_ell(eta: f64) -> Result<u64> {
    if eta.is_nan() || eta <= 0.0 {
        return Err(Error::Domain("eta must be positive".into()));
    }
    let mut l = 4u64;
    while stirling_bound_e(l as f64 / 2.0)? >= eta / 5.0 {
        l += 1;
        if l > 1 << 40 {
            return Err(Error::ResourceLimit("no admissible l below 2^40".into()));
        }
    }
    Ok(l)
}

/// Largest class an exhaustive subcollection count accepts.
pub const MAX_COUNT_CLASS: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SubcollectionCount {
    pub count: u128,
    pub class_size: usize,
    pub ell: usize,
    /// `5 E(l/2) |class|`: the bound is `2^exponent`.
    pub exponent: f64,
    pub bound_holds: bool,
}

/// Laminar forest of distinct classes, parents before children.
struct Forest {
    parent: Vec<Option<usize>>,
}

fn laminar_forest(sets: &[Vec<PointId>]) -> Forest {
    // sets sorted by decreasing size; parent = smallest earlier superset
    let parent = (0..sets.len())
        .map(|i| {
            (0..i)
                .rev()
                .find(|&p| sets[p].len() > sets[i].len() && sets[i].iter().all(|z| sets[p].binary_search(z).is_ok()))
        })
        .collect();
    Forest { parent }
}

/// Distinct classes `Z_k(c)`, `k` in `levels`, `c in Z_n(y)`, of size
/// `>= ell_min`, largest first.
pub fn candidate_classes(
    model: &FiniteRelationModel,
    y: PointId,
    n: usize,
    levels: &[usize],
    ell_min: usize,
) -> Result<Vec<Vec<PointId>>> {
    model.check_point(y)?;
    model.check_level(n)?;
    let mut sets: Vec<Vec<PointId>> = Vec::new();
    for &k in levels {
        model.check_level(k)?;
        if k > n {
            continue;
        }
        for &c in model.class(n, y) {
            let class = model.class(k, c);
            if class.len() >= ell_min && !sets.iter().any(|s| s.as_slice() == class) {
                sets.push(class.to_vec());
            }
        }
    }
    sets.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
    Ok(sets)
}

/// Exact number of disjoint subcollections (including the empty one) of the
/// classes from [`candidate_classes`], compared with `2^{5 E(l/2) |Z_n(y)|}`
/// for `l = ell_min`.
///
/// Disjoint subcollections of a laminar family are antichains of its
/// inclusion forest, counted by `f(node) = prod f(children) + 1`.
pub fn count_disjoint_subcollections(
    model: &FiniteRelationModel,
    y: PointId,
    n: usize,
    levels: &[usize],
    ell_min: usize,
) -> Result<SubcollectionCount> {
    model.check_point(y)?;
    model.check_level(n)?;
    let class_size = model.class(n, y).len();
    if class_size > MAX_COUNT_CLASS {
        return Err(Error::ResourceLimit(format!("class of size {class_size} exceeds the counting cap {MAX_COUNT_CLASS}")));
    }
    if ell_min < 4 {
        return Err(Error::Domain(format!("the counting bound needs l >= 4 so that E(l/2) is defined, got {ell_min}")));
    }
    let sets = candidate_classes(model, y, n, levels, ell_min)?;
    let forest = laminar_forest(&sets);
    // children come after parents, so a reverse sweep sees complete products
    let mut product = vec![1u128; sets.len()];
    let mut count = 1u128;
    for i in (0..sets.len()).rev() {
        let f = product[i] + 1;
        match forest.parent[i] {
            Some(p) => product[p] *= f,
            None => count *= f,
        }
    }
    let exponent = 5.0 * stirling_bound_e(ell_min as f64 / 2.0)? * class_size as f64;
    Ok(SubcollectionCount { count, class_size, ell: ell_min, exponent, bound_holds: (count as f64).log2() <= exponent })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::SliceRandom;
    use rand::Rng;

    fn tail(l: usize) -> FiniteRelationModel {
        FiniteRelationModel::tail(2, l).unwrap()
    }

    #[test]
    fn model_sizes_and_order() {
        let m = tail(3);
        assert_eq!(m.len(), 36);
        assert_eq!(m.point_label(0), "a1a1a1");
        assert_eq!(m.point_label(1), "a1a1a2");
        let o = FiniteRelationModel::odometer(4).unwrap();
        assert_eq!(o.len(), 16);
        assert_eq!(o.point_label(1), "0001");
        assert_eq!(o.index_of(&[1, 0, 0, 0]), Some(8));
        for y in m.points() {
            assert!(m.boundary_prefix(y).is_ok());
        }
    }

    #[test]
    fn class_sizes_follow_the_chain() {
        for l in 1..=5 {
            let m = tail(l);
            for n in 0..l {
                assert!(m.classes_at(n).iter().all(|c| c.len() == 3usize.pow(n as u32)));
            }
            assert_eq!(m.classes_at(l).len(), 1);
            let o = FiniteRelationModel::odometer(l).unwrap();
            for n in 0..=l {
                assert!(o.classes_at(n).iter().all(|c| c.len() == 1 << n));
            }
        }
    }

    #[test]
    fn chain_is_nested_and_laminar() {
        for m in [tail(4), FiniteRelationModel::odometer(5).unwrap(), tail(5)] {
            for y in m.points() {
                for n in 0..m.length() {
                    let (a, b) = (m.class(n, y), m.class(n + 1, y));
                    assert!(a.iter().all(|z| b.binary_search(z).is_ok()));
                }
            }
            let all: Vec<&Vec<PointId>> = (0..=m.length()).flat_map(|n| m.classes_at(n)).collect();
            let step = if m.len() > 200 { 7 } else { 1 };
            for a in all.iter().step_by(step) {
                for b in &all {
                    let common = a.iter().filter(|z| b.binary_search(z).is_ok()).count();
                    assert!(common == 0 || common == a.len() || common == b.len());
                }
            }
        }
    }

    fn random_sf(m: &FiniteRelationModel, max: usize, rng: &mut impl Rng) -> SubsetFunction {
        let sets = m
            .points()
            .map(|_| {
                let k = rng.gen_range(0..=max);
                (0..k).map(|_| rng.gen_range(0..m.len() as PointId)).collect()
            })
            .collect();
        SubsetFunction::from_sets(m, sets).unwrap()
    }

    #[test]
    fn subset_function_algebra() {
        let m = tail(3);
        let mut rng = crate::rng::stream_rng(1);
        let id = SubsetFunction::identity(&m);
        for _ in 0..20 {
            let s = random_sf(&m, 4, &mut rng);
            let t = random_sf(&m, 4, &mut rng);
            assert_eq!(id.compose(&t).unwrap(), t);
            assert_eq!(t.compose(&id).unwrap(), t);
            // naive double loop oracle
            let st = s.compose(&t).unwrap();
            for y in m.points() {
                let mut naive = Vec::new();
                for &z in t.get(y) {
                    for &w in s.get(z) {
                        if !naive.contains(&w) {
                            naive.push(w);
                        }
                    }
                }
                naive.sort();
                assert_eq!(st.get(y), naive.as_slice());
            }
            assert!(st.norm() <= s.norm() * t.norm());
            // membership-scan oracle for the inverse
            let inv = t.invert();
            for y in m.points() {
                let scan: Vec<PointId> = m.points().filter(|&z| t.get(z).contains(&y)).collect();
                assert_eq!(inv.get(y), scan.as_slice());
            }
            assert_eq!(inv.invert(), t);
            let diff = s.difference(&t).unwrap();
            for y in m.points() {
                assert!(diff.get(y).iter().all(|z| s.get(y).contains(z) && !t.get(y).contains(z)));
            }
        }
        let r2 = SubsetFunction::relation(&m, 2).unwrap();
        assert_eq!(r2.invert(), r2);
        assert!(r2.is_equivalence_relation());
        assert_eq!(id.invert(), id);
        let single = SubsetFunction::relation(&m, 0).unwrap();
        assert_eq!(single.compose(&single).unwrap(), single);
        assert!(id.compose(&SubsetFunction::identity(&tail(2))).is_err());
    }

    #[test]
    fn cyclic_automorphisms() {
        let o = FiniteRelationModel::odometer(3).unwrap();
        let id = cyclic_automorphism(&o, 0).unwrap();
        assert_eq!(id, InnerAutomorphism::identity(&o));
        let swap = cyclic_automorphism(&o, 1).unwrap();
        for y in o.points() {
            assert_eq!(swap.apply(y), y ^ 4);
        }
        assert_eq!(swap.order_certificate(), 1);
        for n in 0..=3 {
            let m = tail(4);
            let phi = cyclic_automorphism(&m, n).unwrap();
            assert_eq!(phi.order_certificate(), n);
            // orbits of the generated group are exactly the Z_n classes
            for y in m.points() {
                let mut orbit = vec![y];
                let mut z = phi.apply(y);
                while z != y {
                    orbit.push(z);
                    z = phi.apply(z);
                }
                orbit.sort();
                assert_eq!(orbit, m.class(n, y));
            }
        }
        let add = InnerAutomorphism::adding_machine(&o).unwrap();
        assert_eq!(add.apply(0), 4);
        assert_eq!(add.order_certificate(), 3);
        assert_eq!(add.inverse().apply(4), 0);
    }

    fn brute_force_defect(m: &FiniteRelationModel, d: &[InnerAutomorphism], n: usize) -> f64 {
        let mut total = 0.0;
        for y in m.points() {
            let c = m.class(n, y);
            let mut img: Vec<PointId> = Vec::new();
            for &z in c {
                for phi in d {
                    img.push(phi.apply(z));
                }
            }
            img.sort();
            img.dedup();
            let only_c = c.iter().filter(|z| !img.contains(z)).count();
            let only_img = img.iter().filter(|z| !c.contains(z)).count();
            total += (only_c + only_img) as f64 / c.len() as f64;
        }
        total / m.len() as f64
    }

    #[test]
    fn folner_defects() {
        for m in [tail(3), tail(4), FiniteRelationModel::odometer(4).unwrap()] {
            let id = InnerAutomorphism::identity(&m);
            assert_eq!(folner_defect(&m, std::slice::from_ref(&id), 0).unwrap().value, 0.0);
            for order in 1..=m.length() {
                let d = vec![id.clone(), cyclic_automorphism(&m, order).unwrap()];
                for n in 0..=m.length() {
                    let f = folner_defect(&m, &d, n).unwrap();
                    assert!((f.value - brute_force_defect(&m, &d, n)).abs() < 1e-12);
                    if n >= order {
                        assert_eq!(f.exact, Ratio::from_integer(0));
                    } else {
                        assert!(f.exact > Ratio::from_integer(0));
                    }
                }
            }
        }
    }

    #[test]
    fn interior_fractions() {
        let m = tail(4);
        let trivial = SubsetFunction::relation(&m, 0).unwrap();
        for n in 0..=4 {
            let r = interior_fraction(&m, &trivial, n).unwrap();
            assert!(r.per_point.iter().all(|&v| v == 1.0));
        }
        let z2 = SubsetFunction::relation(&m, 2).unwrap();
        for n in 2..=4 {
            assert_eq!(interior_fraction(&m, &z2, n).unwrap().mean, Ratio::from_integer(1));
        }
        assert!(interior_fraction(&m, &z2, 1).unwrap().mean < Ratio::from_integer(1));
        let mut rng = crate::rng::stream_rng(4);
        assert!(interior_fraction(&m, &random_sf(&m, 3, &mut rng), 1).is_err());
    }

    #[test]
    fn interior_fraction_of_random_partitions_matches_direct_count() {
        let m = tail(3);
        let mut rng = crate::rng::stream_rng(5);
        for _ in 0..10 {
            // random equivalence relation with blocks of size <= 3
            let mut pts: Vec<PointId> = m.points().collect();
            pts.shuffle(&mut rng);
            let mut sets = vec![Vec::new(); m.len()];
            for block in pts.chunks(3) {
                for &y in block {
                    sets[y as usize] = block.to_vec();
                }
            }
            let t = SubsetFunction::from_sets(&m, sets).unwrap();
            for n in 0..=3 {
                let r = interior_fraction(&m, &t, n).unwrap();
                for y in m.points() {
                    let c = m.class(n, y);
                    let inside = c.iter().filter(|&&z| t.get(z).iter().all(|w| c.contains(w))).count();
                    assert_eq!(r.per_point[y as usize], inside as f64 / c.len() as f64);
                    // the crossing count bounds the defect: each crossing block
                    // removes at most ||T|| points
                    let crossing = c.iter().filter(|&&z| t.get(z).iter().any(|w| !c.contains(w))).count();
                    assert!(r.per_point[y as usize] >= 1.0 - crossing as f64 / c.len() as f64 - 1e-15);
                }
            }
        }
    }

    fn maximal_oracle(m: &FiniteRelationModel, classes: &[ChainClass]) -> Vec<Vec<PointId>> {
        let sets: Vec<Vec<PointId>> = classes.iter().map(|c| c.members(m).to_vec()).collect();
        let mut out: Vec<Vec<PointId>> = sets
            .iter()
            .filter(|s| !sets.iter().any(|t| t.len() > s.len() && s.iter().all(|z| t.contains(z))))
            .cloned()
            .collect();
        out.sort();
        out.dedup();
        out
    }

    #[test]
    fn disjointify_examples() {
        let m = tail(5);
        let one = [ChainClass { center: 7, level: 2 }];
        assert_eq!(disjointify(&m, &one).unwrap(), one);
        let chain = [1, 2, 3].map(|level| ChainClass { center: 7, level });
        assert_eq!(disjointify(&m, &chain).unwrap(), vec![ChainClass { center: 7, level: 3 }]);
        assert!(disjointify(&m, &[ChainClass { center: 99_999, level: 1 }]).is_err());
        assert!(disjointify(&m, &[ChainClass { center: 0, level: 6 }]).is_err());
    }

    #[test]
    fn disjointify_matches_maximal_oracle() {
        let m = tail(5);
        let mut rng = crate::rng::stream_rng(6);
        for _ in 0..100 {
            let classes: Vec<ChainClass> = (0..50)
                .map(|_| ChainClass { center: rng.gen_range(0..m.len() as PointId), level: rng.gen_range(0..=4) })
                .collect();
            let out = disjointify(&m, &classes).unwrap();
            let mut got: Vec<Vec<PointId>> = out.iter().map(|c| c.members(&m).to_vec()).collect();
            got.sort();
            assert_eq!(got, maximal_oracle(&m, &classes));
            let mut seen = std::collections::HashSet::new();
            for c in &out {
                assert!(c.members(&m).iter().all(|z| seen.insert(*z)));
            }
            assert!(classes.iter().all(|c| seen.contains(&c.center)));
            assert_eq!(disjointify(&m, &out).unwrap(), out);
        }
    }

    #[test]
    fn disjointify_sets_rejects_crossing_families() {
        assert_eq!(disjointify_sets(&[vec![1, 2], vec![1, 2, 3], vec![4]]).unwrap(), vec![1, 2]);
        assert!(matches!(disjointify_sets(&[vec![1, 2], vec![2, 3]]), Err(Error::Structural(_))));
    }

    /// Hypothesis LHS straight from the subset-function algebra.
    fn hypothesis_oracle(
        m: &FiniteRelationModel,
        levels: &[Vec<usize>],
        d: &[InnerAutomorphism],
        delta: f64,
    ) -> usize {
        let dsf = SubsetFunction::from_automorphisms(m, d).unwrap();
        let mut failures = 0;
        for i in 1..levels.len() {
            for &n in &levels[i] {
                let t = SubsetFunction::relation(m, n).unwrap();
                let mut parts = Vec::new();
                for row in &levels[..i] {
                    let tk = row.iter().map(|&l| SubsetFunction::relation(m, l).unwrap()).fold(
                        SubsetFunction::from_sets(m, vec![vec![]; m.len()]).unwrap(),
                        |acc, r| {
                            let sets = acc.sets().iter().zip(r.sets()).map(|(a, b)| [a.clone(), b.clone()].concat()).collect();
                            SubsetFunction::from_sets(m, sets).unwrap()
                        },
                    );
                    parts.push(dsf.compose(&tk.invert().compose(&t).unwrap()).unwrap());
                }
                for y in m.points() {
                    let mut u: Vec<PointId> = parts.iter().flat_map(|p| p.get(y).to_vec()).collect();
                    u.sort();
                    u.dedup();
                    if u.len() as f64 > (1.0 + delta) * t.get(y).len() as f64 {
                        failures += 1;
                    }
                }
            }
        }
        failures
    }

    #[test]
    fn hypothesis_check_matches_algebraic_oracle() {
        let m = tail(3);
        let mut rng = crate::rng::stream_rng(8);
        for _ in 0..30 {
            let levels: Vec<Vec<usize>> = (0..3).map(|_| (0..2).map(|_| rng.gen_range(0..=3)).collect()).collect();
            let order = rng.gen_range(0..=3);
            let d = vec![InnerAutomorphism::identity(&m), cyclic_automorphism(&m, order).unwrap()];
            let (count, _) = check_covering_hypothesis(&m, &levels, &d, 0.1).unwrap();
            assert_eq!(count, hypothesis_oracle(&m, &levels, &d, 0.1));
        }
    }

    #[test]
    fn covering_trivial_instance() {
        let m = tail(4);
        let id = InnerAutomorphism::identity(&m);
        let top: Vec<PointId> = m.class(3, 0).to_vec();
        let inst = CoveringInstance { levels: vec![vec![1]], centers: vec![vec![top.clone()]] };
        let r = covering(&m, &inst, &[id], 0.1).unwrap();
        // one row never suffices, but a single row is covered outright
        assert!(!r.rows_sufficient && r.hypothesis_holds && !r.bound_applies);
        assert_eq!(r.mass, top.len());
        assert!(r.covered_fraction >= 0.9);
    }

    #[test]
    fn covering_two_level_instances_are_exhaustively_sound() {
        let m = tail(4);
        let id = InnerAutomorphism::identity(&m);
        let mut rng = crate::rng::stream_rng(9);
        let rows = min_rows(0.1, 1);
        assert_eq!(rows, 91);
        for y in [0, 17, 50] {
            let region: Vec<PointId> = m.class(3, y).to_vec();
            for _ in 0..20 {
                let levels: Vec<Vec<usize>> = (0..rows).map(|i| vec![if i < rows / 2 { 1 } else { 2 }]).collect();
                let centers = (0..rows)
                    .map(|_| vec![region.choose_multiple(&mut rng, 5).copied().collect()])
                    .collect();
                let inst = CoveringInstance { levels, centers };
                let r = covering(&m, &inst, std::slice::from_ref(&id), 0.1).unwrap();
                assert!(r.bound_applies && r.conclusion_holds);
                let mut seen = std::collections::HashSet::new();
                for (_, c) in &r.selected {
                    assert!(c.members(&m).iter().all(|z| seen.insert(*z)));
                }
            }
        }
    }

    #[test]
    fn covering_reports_hypothesis_failure() {
        let m = tail(4);
        let d = vec![InnerAutomorphism::identity(&m), cyclic_automorphism(&m, 3).unwrap()];
        let inst = CoveringInstance {
            levels: vec![vec![0], vec![1]],
            centers: vec![vec![vec![0, 1, 2]], vec![vec![3, 4]]],
        };
        let r = covering(&m, &inst, &d, 0.1).unwrap();
        assert!(!r.hypothesis_holds);
        assert!(r.hypothesis_failure_count > 0);
        assert!(!r.bound_applies);
        let mut seen = std::collections::HashSet::new();
        for (_, c) in &r.selected {
            assert!(c.members(&m).iter().all(|z| seen.insert(*z)));
        }
    }

    #[test]
    fn generated_instances_satisfy_the_hypothesis() {
        let m = tail(5);
        for seed in 0..10 {
            let order = (seed % 3 + 1) as usize;
            let d = vec![InnerAutomorphism::identity(&m), cyclic_automorphism(&m, order).unwrap()];
            let rows = min_rows(0.1, d.len());
            let inst = CoveringInstance::generate(&m, order, rows, 10, seed).unwrap();
            let r = covering(&m, &inst, &d, 0.1).unwrap();
            assert!(r.bound_applies && r.conclusion_holds);
        }
    }

    #[test]
    fn stirling_values() {
        assert!((stirling_bound_e(2.0).unwrap() - std::f64::consts::LN_2).abs() < 1e-15);
        assert!(stirling_bound_e(1.5).is_err());
        let mut prev = f64::INFINITY;
        for l in 2..=1024 {
            let e = stirling_bound_e(l as f64).unwrap();
            assert!(e < prev && e > 0.0);
            prev = e;
        }
        let l = choose_ell(0.1).unwrap();
        assert!(stirling_bound_e(l as f64 / 2.0).unwrap() < 0.02);
        assert!(stirling_bound_e((l - 1) as f64 / 2.0).unwrap() >= 0.02);
    }

    fn brute_force_count(sets: &[Vec<PointId>]) -> u128 {
        let k = sets.len();
        assert!(k <= 20);
        let mut count = 0;
        for mask in 0u32..(1 << k) {
            let chosen: Vec<&Vec<PointId>> = (0..k).filter(|i| mask >> i & 1 == 1).map(|i| &sets[i]).collect();
            let total: usize = chosen.iter().map(|s| s.len()).sum();
            let mut u: Vec<PointId> = chosen.iter().flat_map(|s| s.iter().copied()).collect();
            u.sort();
            u.dedup();
            if u.len() == total {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn subcollection_counts() {
        let o = FiniteRelationModel::odometer(4).unwrap();
        let single = count_disjoint_subcollections(&o, 3, 3, &[3], 8).unwrap();
        assert_eq!(single.count, 2);
        let r = count_disjoint_subcollections(&o, 0, 4, &[2], 4).unwrap();
        assert_eq!(r.count, 16);
        assert!(r.bound_holds);
        assert_eq!(r.count, brute_force_count(&candidate_classes(&o, 0, 4, &[2], 4).unwrap()));
        let r = count_disjoint_subcollections(&o, 5, 4, &[2, 3, 4], 4).unwrap();
        // 16-class -> two 8-classes -> four 4-blocks: f(8) = 2*2+1, total (5*5)+1
        assert_eq!(r.count, 26);
        assert_eq!(r.count, brute_force_count(&candidate_classes(&o, 5, 4, &[2, 3, 4], 4).unwrap()));
        assert!(count_disjoint_subcollections(&o, 0, 4, &[2], 2).is_err());
        let big = FiniteRelationModel::odometer(6).unwrap();
        assert!(matches!(count_disjoint_subcollections(&big, 0, 5, &[2], 4), Err(Error::ResourceLimit(_))));
    }
}
