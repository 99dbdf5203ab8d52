//! Shannon entropy of refined partitions, the entropy function `h^P` along
//! horospherical classes, information functions, and the two experiment
//! drivers built on them: cocycle-entropy sweeps and SMB trajectories.
//!
//! All values are in nats. The refinement over a key set `F` is
//! `P^F = join over g in F of g^{-1} P`; the keys used along the boundary are
//! `{alpha(z, xi) : z in R_n(xi)}`.

use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::actions::{
    atom_log_measure, CoordinateUnion, EstimationMode, LabelerKind, LazyBernoulliPoint, PartitionLabeler,
    ProbabilityVector,
};
use crate::boundary::{cocycle_keys, tail_class_size, BoundaryPrefix};
use crate::error::{Error, Result};
use crate::rng::split_seed;
use crate::word::ReducedWord;

const X_STREAM: u64 = 0xE01;
const XI_STREAM: u64 = 0xE02;
const ROW_STREAM: u64 = 0xE03;

/// `-sum p log p` in nats over a list of masses; zero masses are skipped.
/// Terms are summed in ascending order so the result does not depend on
/// the order masses were collected in.
pub fn shannon_masses(masses: &[f64]) -> f64 {
    let mut m: Vec<f64> = masses.iter().copied().filter(|&p| p > 0.0).collect();
    m.sort_by(f64::total_cmp);
    let h: f64 = m.iter().map(|&p| -p * p.ln()).sum();
    h.max(0.0)
}

/// `H(p)`.
pub fn shannon(p: &ProbabilityVector) -> f64 {
    shannon_masses(p.weights())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Estimator {
    Exact,
    PlugIn,
    PlugInMillerMadow,
}

impl Estimator {
    pub fn as_str(self) -> &'static str {
        match self {
            Estimator::Exact => "exact",
            Estimator::PlugIn => "plug-in",
            Estimator::PlugInMillerMadow => "plug-in-miller-madow",
        }
    }
}

/// An entropy value with its provenance. Exact estimates carry no standard
/// error and no unresolved atoms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyEstimate {
    pub value: f64,
    pub stderr: Option<f64>,
    pub n_samples: usize,
    pub estimator: Estimator,
    pub unresolved_atoms: usize,
}

impl EntropyEstimate {
    pub fn exact(value: f64) -> Self {
        EntropyEstimate { value, stderr: None, n_samples: 0, estimator: Estimator::Exact, unresolved_atoms: 0 }
    }
}

/// Plug-in entropy of a count table, optionally with the Miller-Madow
/// correction `(K - 1) / (2M)`.
pub fn plug_in_entropy(counts: &[usize], miller_madow: bool) -> EntropyEstimate {
    let m: usize = counts.iter().sum();
    if m == 0 {
        return EntropyEstimate {
            value: 0.0,
            stderr: None,
            n_samples: 0,
            estimator: Estimator::PlugIn,
            unresolved_atoms: 0,
        };
    }
    let mf = m as f64;
    let mut freqs: Vec<f64> = counts.iter().filter(|&&c| c > 0).map(|&c| c as f64 / mf).collect();
    freqs.sort_by(f64::total_cmp);
    let k = freqs.len();
    let h: f64 = freqs.iter().map(|&p| -p * p.ln()).sum();
    let second: f64 = freqs.iter().map(|&p| p * p.ln() * p.ln()).sum();
    let stderr = ((second - h * h).max(0.0) / mf).sqrt();
    let (value, estimator) = if miller_madow {
        (h + (k as f64 - 1.0) / (2.0 * mf), Estimator::PlugInMillerMadow)
    } else {
        (h, Estimator::PlugIn)
    };
    EntropyEstimate { value: value.max(0.0), stderr: Some(stderr), n_samples: m, estimator, unresolved_atoms: 0 }
}

fn check_alphabet(labeler: &PartitionLabeler, alphabet: &ProbabilityVector) -> Result<()> {
    if labeler.alphabet_size() != alphabet.len() {
        return Err(Error::Domain(format!(
            "labeler expects {} symbols, probability vector has {}",
            labeler.alphabet_size(),
            alphabet.len()
        )));
    }
    Ok(())
}

/// `H(join over g in keys of g^{-1} P)`.
pub fn refined_entropy(
    keys: &[ReducedWord],
    labeler: &PartitionLabeler,
    alphabet: &ProbabilityVector,
    mode: EstimationMode,
) -> Result<EntropyEstimate> {
    check_alphabet(labeler, alphabet)?;
    if labeler.is_trivial() || keys.is_empty() {
        return Ok(EntropyEstimate::exact(0.0));
    }
    match mode {
        EstimationMode::Exact(cap) => {
            if labeler.kind() == LabelerKind::SymbolAtIdentity {
                // the coordinates g^{-1} are independent
                let mut coords: Vec<ReducedWord> = keys.iter().map(ReducedWord::invert).collect();
                coords.sort();
                coords.dedup();
                return Ok(EntropyEstimate::exact(coords.len() as f64 * shannon(alphabet)));
            }
            let union = CoordinateUnion::build(keys, labeler)?;
            union.check_cap(labeler.alphabet_size(), cap)?;
            Ok(EntropyEstimate::exact(shannon_masses(&pattern_masses(&union, labeler, alphabet))))
        }
        EstimationMode::MonteCarlo { samples, seed, miller_madow } => {
            if samples == 0 {
                return Err(Error::Domain("monte-carlo mode needs at least one sample".into()));
            }
            let alphabet = Arc::new(alphabet.clone());
            let patterns: Vec<Vec<u32>> = (0..samples as u64)
                .into_par_iter()
                .map(|i| {
                    let y = LazyBernoulliPoint::new(split_seed(seed, X_STREAM, i), labeler.rank(), Arc::clone(&alphabet));
                    keys.iter().map(|g| labeler.label_of_translate(&y, g)).collect::<Result<Vec<u32>>>()
                })
                .collect::<Result<_>>()?;
            let mut table: HashMap<Vec<u32>, usize> = HashMap::new();
            for p in patterns {
                *table.entry(p).or_insert(0) += 1;
            }
            let counts: Vec<usize> = table.into_values().collect();
            Ok(plug_in_entropy(&counts, miller_madow))
        }
    }
}

/// Masses of every label pattern, by enumerating all assignments of the
/// coordinate union.
fn pattern_masses(union: &CoordinateUnion, labeler: &PartitionLabeler, alphabet: &ProbabilityVector) -> Vec<f64> {
    let n = union.coords.len();
    let a = alphabet.len();
    let mut table: HashMap<Vec<u32>, f64> = HashMap::new();
    let mut assignment = vec![0usize; n];
    let mut symbols = vec![0usize; labeler.window().len()];
    let total = a.pow(n as u32);
    for idx in 0..total {
        let mut rest = idx;
        let mut mass = 1.0;
        for s in assignment.iter_mut() {
            *s = rest % a;
            rest /= a;
            mass *= alphabet.weight(*s);
        }
        if mass == 0.0 {
            continue;
        }
        let pattern: Vec<u32> = union
            .reads
            .iter()
            .map(|read| {
                for (s, &i) in symbols.iter_mut().zip(read) {
                    *s = assignment[i];
                }
                labeler.code(&symbols)
            })
            .collect();
        *table.entry(pattern).or_insert(0.0) += mass;
    }
    table.into_values().collect()
}

/// `-log lambda` of a point's atom in a refined partition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Information {
    pub nats: f64,
    pub stderr: Option<f64>,
    /// Monte Carlo saw no hits; `nats` is a lower confidence bound.
    pub unresolved: bool,
    pub keys: usize,
}

/// `J(P^F)(x)` for an explicit key set `F`.
pub fn information_with_keys(
    x: &LazyBernoulliPoint,
    keys: &[ReducedWord],
    labeler: &PartitionLabeler,
    mode: EstimationMode,
) -> Result<Information> {
    let labels = keys
        .iter()
        .map(|g| Ok((g.clone(), labeler.label_of_translate(x, g)?)))
        .collect::<Result<Vec<_>>>()?;
    let atom = atom_log_measure(&labels, labeler, x.alphabet(), mode)?;
    Ok(Information { nats: -atom.log_measure, stderr: atom.stderr, unresolved: atom.unresolved, keys: keys.len() })
}

/// `J(P^{R_n(xi)})(x)`: the information of `x`'s atom in the refinement along
/// the level-`n` class of `xi`.
pub fn information_function(
    x: &LazyBernoulliPoint,
    xi: &BoundaryPrefix,
    n: usize,
    labeler: &PartitionLabeler,
    mode: EstimationMode,
) -> Result<Information> {
    if xi.rank() != x.rank() {
        return Err(Error::RankMismatch(x.rank(), xi.rank()));
    }
    information_with_keys(x, &cocycle_keys(xi, n)?, labeler, mode)
}

/// `h^P(R_n)(xi)`.
pub fn entropy_function_hp(
    xi: &BoundaryPrefix,
    n: usize,
    labeler: &PartitionLabeler,
    alphabet: &ProbabilityVector,
    mode: EstimationMode,
) -> Result<EntropyEstimate> {
    if xi.rank() != labeler.rank() {
        return Err(Error::RankMismatch(labeler.rank(), xi.rank()));
    }
    refined_entropy(&cocycle_keys(xi, n)?, labeler, alphabet, mode)
}

/// The cocycle entropy when it is known in closed form: `H(p)` for the
/// symbol partition of a Bernoulli shift, 0 for the trivial partition.
pub fn closed_form_target(labeler: &PartitionLabeler, alphabet: &ProbabilityVector) -> Option<f64> {
    if labeler.is_trivial() {
        Some(0.0)
    } else if labeler.kind() == LabelerKind::SymbolAtIdentity {
        Some(shannon(alphabet))
    } else {
        None
    }
}

fn class_size_checked(n: usize, rank: u8) -> Result<usize> {
    (2 * rank as usize - 1)
        .checked_pow(n as u32)
        .ok_or_else(|| Error::ResourceLimit(format!("class size (2r-1)^{n} overflows")))
}

fn row_mode(mode: EstimationMode, n: usize, index: u64) -> EstimationMode {
    match mode {
        EstimationMode::MonteCarlo { samples, seed, miller_madow } => EstimationMode::MonteCarlo {
            samples,
            seed: split_seed(seed, ROW_STREAM + n as u64, index),
            miller_madow,
        },
        exact => exact,
    }
}

/// Parameters shared by the boundary-driven experiments.
#[derive(Clone, Debug)]
pub struct BernoulliSetup {
    pub rank: u8,
    pub alphabet: Arc<ProbabilityVector>,
    pub labeler: PartitionLabeler,
    /// Depth of sampled boundary prefixes.
    pub depth: usize,
    pub mode: EstimationMode,
}

impl BernoulliSetup {
    pub fn new(
        rank: u8,
        alphabet: Arc<ProbabilityVector>,
        labeler: PartitionLabeler,
        depth: usize,
        mode: EstimationMode,
    ) -> Result<Self> {
        if labeler.rank() != rank {
            return Err(Error::RankMismatch(rank, labeler.rank()));
        }
        check_alphabet(&labeler, &alphabet)?;
        Ok(BernoulliSetup { rank, alphabet, labeler, depth, mode })
    }

    fn check_level(&self, n: usize) -> Result<()> {
        if n >= self.depth {
            return Err(Error::Precision(format!("level {n} needs boundary depth > {n}, configured depth is {}", self.depth)));
        }
        Ok(())
    }

    pub fn target(&self) -> Option<f64> {
        closed_form_target(&self.labeler, &self.alphabet)
    }
}

/// One level of a cocycle-entropy sweep: the average of
/// `h^P(R_n)(xi) / |R_n(xi)|` over sampled `xi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub class_size: usize,
    pub value: f64,
    /// Standard error across sampled `xi`; `None` for a single exact evaluation.
    pub stderr: Option<f64>,
    pub estimator: Estimator,
    pub xi_samples: usize,
    pub unresolved_atoms: usize,
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, (var / m).sqrt())
}

/// Estimates the cocycle entropy level by level. The last row is the
/// workbench's estimate of the limit.
pub fn cocycle_entropy_sweep(
    setup: &BernoulliSetup,
    levels: &[usize],
    xi_samples: usize,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    if xi_samples == 0 {
        return Err(Error::Domain("a sweep needs at least one boundary sample".into()));
    }
    levels
        .iter()
        .map(|&n| {
            setup.check_level(n)?;
            let class = class_size_checked(n, setup.rank)?;
            let evals: Vec<EntropyEstimate> = (0..xi_samples as u64)
                .into_par_iter()
                .map(|i| {
                    let xi = BoundaryPrefix::sample(setup.depth, u32::from(setup.rank), split_seed(seed, XI_STREAM, i))?;
                    entropy_function_hp(&xi, n, &setup.labeler, &setup.alphabet, row_mode(setup.mode, n, i))
                })
                .collect::<Result<_>>()?;
            let values: Vec<f64> = evals.iter().map(|e| e.value / class as f64).collect();
            let (value, se) = mean_and_stderr(&values);
            let estimator = evals[0].estimator;
            let stderr = if xi_samples == 1 {
                evals[0].stderr.map(|s| s / class as f64)
            } else {
                Some(se)
            };
            Ok(SweepRow {
                n,
                class_size: class,
                value,
                stderr,
                estimator,
                xi_samples,
                unresolved_atoms: evals.iter().map(|e| e.unresolved_atoms).sum(),
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmbRow {
    pub n: usize,
    pub class_size: usize,
    pub info_nats: f64,
    /// `info_nats / class_size`.
    pub info_norm: f64,
    pub stderr: Option<f64>,
    pub unresolved: bool,
}

/// Normalized information along the horospherical exhaustion at one
/// `(x, xi)` start.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SmbTrajectory {
    pub rows: Vec<SmbRow>,
    pub seed_x: u64,
    pub seed_xi: u64,
    pub partition: String,
    pub target: Option<f64>,
}

impl SmbTrajectory {
    pub fn unresolved_count(&self) -> usize {
        self.rows.iter().filter(|r| r.unresolved).count()
    }

    pub fn endpoint(&self) -> Option<&SmbRow> {
        self.rows.last()
    }
}

/// Rows `n = 0..=n_max` of `J(P^{R_n(xi)})(x) / |R_n(xi)|`.
pub fn smb_trajectory(setup: &BernoulliSetup, seed_x: u64, seed_xi: u64, n_max: usize) -> Result<SmbTrajectory> {
    setup.check_level(n_max)?;
    let x = LazyBernoulliPoint::new(seed_x, setup.rank, Arc::clone(&setup.alphabet));
    let xi = BoundaryPrefix::sample(setup.depth, u32::from(setup.rank), seed_xi)?;
    let rows = (0..=n_max)
        .map(|n| {
            let info = information_function(&x, &xi, n, &setup.labeler, row_mode(setup.mode, n, 0))?;
            let class = tail_class_size(n, setup.rank);
            Ok(SmbRow {
                n,
                class_size: class,
                info_nats: info.nats,
                info_norm: info.nats / class as f64,
                stderr: info.stderr.map(|s| s / class as f64),
                unresolved: info.unresolved,
            })
        })
        .collect::<Result<_>>()?;
    Ok(SmbTrajectory { rows, seed_x, seed_xi, partition: format!("{:?}", setup.labeler), target: setup.target() })
}

/// Mean absolute deviation of the normalized information from a target, at
/// one level and a fixed boundary point, over sampled `x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct L1Row {
    pub n: usize,
    pub mean_abs_deviation: f64,
    pub stderr: f64,
    pub x_samples: usize,
    pub unresolved: usize,
}

pub fn l1_convergence_report(
    setup: &BernoulliSetup,
    xi: &BoundaryPrefix,
    levels: &[usize],
    x_samples: usize,
    target: f64,
    seed: u64,
) -> Result<Vec<L1Row>> {
    if x_samples == 0 {
        return Err(Error::Domain("need at least one x sample".into()));
    }
    levels
        .iter()
        .map(|&n| {
            let keys = cocycle_keys(xi, n)?;
            let class = keys.len() as f64;
            let infos: Vec<Information> = (0..x_samples as u64)
                .into_par_iter()
                .map(|i| {
                    let x = LazyBernoulliPoint::new(split_seed(seed, X_STREAM, i), setup.rank, Arc::clone(&setup.alphabet));
                    information_with_keys(&x, &keys, &setup.labeler, row_mode(setup.mode, n, i))
                })
                .collect::<Result<_>>()?;
            let devs: Vec<f64> = infos.iter().map(|j| (j.nats / class - target).abs()).collect();
            let (mean, se) = mean_and_stderr(&devs);
            Ok(L1Row {
                n,
                mean_abs_deviation: mean,
                stderr: se,
                x_samples,
                unresolved: infos.iter().filter(|j| j.unresolved).count(),
            })
        })
        .collect()
}

/// The computable bracket `inf_T H(P^T)/|T| <= h^P(R_n)(xi)/|R_n(xi)| <= H(P)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sandwich {
    pub lower: f64,
    /// Index of the minimizing candidate; `None` when the class key set
    /// itself is the minimizer.
    pub argmin: Option<usize>,
    pub middle: f64,
    pub upper: f64,
}

impl Sandwich {
    pub fn holds(&self, tol: f64) -> bool {
        self.lower <= self.middle + tol && self.middle <= self.upper + tol
    }
}

/// Evaluates the bracket with the infimum taken over the supplied finite
/// sets together with the class key set itself. Requires exact mode.
pub fn sandwich_bounds(
    xi: &BoundaryPrefix,
    n: usize,
    labeler: &PartitionLabeler,
    alphabet: &ProbabilityVector,
    candidates: &[Vec<ReducedWord>],
    cap: crate::actions::ExactCap,
) -> Result<Sandwich> {
    let mode = EstimationMode::Exact(cap);
    let keys = cocycle_keys(xi, n)?;
    let middle = refined_entropy(&keys, labeler, alphabet, mode)?.value / keys.len() as f64;
    let upper = shannon_masses(&labeler.marginal(alphabet)?);
    let mut lower = middle;
    let mut argmin = None;
    for (i, t) in candidates.iter().enumerate() {
        if t.is_empty() {
            continue;
        }
        let v = refined_entropy(t, labeler, alphabet, mode)?.value / t.len() as f64;
        if v < lower {
            lower = v;
            argmin = Some(i);
        }
    }
    Ok(Sandwich { lower, argmin, middle, upper })
}
