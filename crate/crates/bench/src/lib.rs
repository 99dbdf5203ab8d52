//! Fixtures for the kernel benchmarks.

use std::sync::Arc;

use workbench_core::hyperfinite::{ChainClass, FiniteRelationModel};
use workbench_core::rng::{split_seed, stream_rng};
use workbench_core::{BoundaryPrefix, EnumerationCap, LazyBernoulliPoint, ProbabilityVector, ReducedWord};

/// Two reduced words of length `len` drawn from the sphere in `F_rank`.
pub fn word_pair(rank: u8, len: u32, seed: u64) -> (ReducedWord, ReducedWord) {
    let sphere = workbench_core::word::enumerate_sphere(len, rank.into(), EnumerationCap::default())
        .expect("benchmark spheres fit the cap");
    let pick = |i| sphere[(split_seed(seed, 0xB0, i) % sphere.len() as u64) as usize].clone();
    (pick(0), pick(1))
}

pub fn boundary(rank: u8, depth: usize, seed: u64) -> BoundaryPrefix {
    BoundaryPrefix::sample(depth, rank.into(), seed).expect("valid rank")
}

pub fn uniform_point(rank: u8, seed: u64) -> LazyBernoulliPoint {
    LazyBernoulliPoint::new(seed, rank, Arc::new(ProbabilityVector::uniform(2).expect("two symbols")))
}

/// `count` random chain classes on `model`.
pub fn chain_classes(model: &FiniteRelationModel, count: usize, seed: u64) -> Vec<ChainClass> {
    use rand::Rng;
    let mut rng = stream_rng(seed);
    (0..count)
        .map(|_| ChainClass { center: rng.gen_range(0..model.len() as u32), level: rng.gen_range(0..model.length()) })
        .collect()
}
