//! Entropy of Bernoulli actions of free groups along the horospherical
//! relation on the boundary, and the hyperfinite machinery behind it.
//!
//! - [`word`]: reduced words in `F_r`.
//! - [`boundary`]: boundary prefixes, the action, tail classes, the
//!   fundamental cocycle and horospherical balls.
//! - [`actions`]: lazily sampled Bernoulli points, partitions and atom masses.
//! - [`entropy`]: refined entropies, information functions and the SMB
//!   experiment drivers.
//! - [`hyperfinite`]: finite chain models, Følner defects, disjointification,
//!   covering and counting.
//! - [`ergodic_avg`]: class averages and the ergodicity diagnostic.
//! - [`subadditive`]: subadditive functionals and the limit harness.

pub mod actions;
pub mod boundary;
pub mod entropy;
pub mod ergodic_avg;
pub mod error;
pub mod hyperfinite;
pub mod rng;
pub mod subadditive;
pub mod word;

pub use actions::{
    atom_log_measure, AtomMeasure, EstimationMode, ExactCap, LabelerKind, LazyBernoulliPoint, PartitionLabeler,
    ProbabilityVector,
};
pub use boundary::{
    act, busemann, cocycle_keys, cylinder_measure, fundamental_cocycle, horospherical_ball, radon_nikodym_exponent,
    tail_class, tail_class_size, BoundaryPrefix, CylinderMeasure,
};
pub use entropy::{
    cocycle_entropy_sweep, entropy_function_hp, information_function, refined_entropy, shannon, smb_trajectory,
    BernoulliSetup, EntropyEstimate, Estimator, Information, SmbRow, SmbTrajectory, SweepRow,
};
pub use ergodic_avg::{class_average, ergodicity_diagnostic, ExtendedClassElement, Observable, SpreadReport};
pub use error::{Error, Result};
pub use hyperfinite::{
    covering, cyclic_automorphism, disjointify, folner_defect, ChainClass, CoveringInstance, CoveringReport,
    FiniteRelationModel, InnerAutomorphism, ModelKind, PointId, SubsetFunction,
};
pub use subadditive::{check_subadditive, subadditive_limit_harness, HpFunctional, SubadditiveFunctional};
pub use word::{EnumerationCap, Generator, ReducedWord};
