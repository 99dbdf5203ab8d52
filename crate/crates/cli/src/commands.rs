//! Subcommand implementations. Each reads its keys from the [`Config`],
//! runs the experiment and returns its [`Artifacts`].

use std::sync::Arc;

use serde_json::{json, Value};

use workbench_core::boundary::{cylinder_measure, tail_class};
use workbench_core::entropy::{cocycle_entropy_sweep, shannon, smb_trajectory, BernoulliSetup};
use workbench_core::ergodic_avg::{
    ergodicity_diagnostic, BoundaryLetterIndicator, Constant, DiagnosticSetup, Observable, SymbolIndicator,
};
use workbench_core::hyperfinite::{
    count_disjoint_subcollections, covering, cyclic_automorphism, disjointify, folner_defect, min_rows,
    stirling_bound_e, ChainClass, CoveringInstance, FiniteRelationModel, InnerAutomorphism,
};
use workbench_core::rng::split_seed;
use workbench_core::subadditive::{
    check_subadditive, coordinate_relation, subadditive_limit_harness, Candidate, Cardinality, HpFunctional,
    SquaredCardinality, SubadditiveFunctional,
};
use workbench_core::{
    fundamental_cocycle, act, EstimationMode, Generator, PartitionLabeler, ProbabilityVector, ReducedWord,
};

use crate::config::Config;
use crate::error::CliError;
use crate::output::{num, opt_num, Artifacts, Table};

const DEFAULT_SEED: u64 = 0x5EED;
const STREAM_X: u64 = 0xC11;
const STREAM_XI: u64 = 0xC12;
const STREAM_MC: u64 = 0xC13;

/// Shared experiment parameters: rank, alphabet, partition, levels, mode.
struct Experiment {
    rank: u8,
    alphabet: Arc<ProbabilityVector>,
    labeler: PartitionLabeler,
    n_max: usize,
    depth: usize,
    mode: EstimationMode,
    mode_name: &'static str,
    seed: u64,
}

const EXPERIMENT_KEYS: &[&str] =
    &["rank", "p", "partition", "window", "table", "n_max", "depth", "mode", "samples", "miller_madow"];

fn rank(cfg: &Config) -> Result<u8, CliError> {
    let r: u32 = cfg.get("rank", 2)?;
    if r < 2 {
        return Err(CliError::usage("rank", format!("rank must be >= 2, got {r}")));
    }
    workbench_core::word::check_rank(r).map_err(CliError::at("rank"))
}

fn alphabet(cfg: &Config) -> Result<Arc<ProbabilityVector>, CliError> {
    let p: Vec<f64> = cfg.list("p", "0.5,0.5")?;
    Ok(Arc::new(ProbabilityVector::new(p).map_err(CliError::at("p"))?))
}

fn labeler(cfg: &Config, rank: u8, alphabet: &ProbabilityVector) -> Result<PartitionLabeler, CliError> {
    let kind = cfg.string("partition", "symbol");
    let window = || -> Result<Vec<ReducedWord>, CliError> {
        cfg.string("window", "e,a1")
            .split(',')
            .map(|s| ReducedWord::parse(rank, s.trim()).map_err(CliError::at("window")))
            .collect()
    };
    let binary = || {
        if alphabet.len() == 2 {
            Ok(())
        } else {
            Err(CliError::usage("p", format!("partition {kind} needs a binary alphabet")))
        }
    };
    match kind.as_str() {
        "symbol" => Ok(PartitionLabeler::symbol_at_identity(rank, alphabet.len())),
        "trivial" => PartitionLabeler::one_atom(rank, alphabet.len()).map_err(CliError::at("partition")),
        "xor" => {
            binary()?;
            PartitionLabeler::xor(window()?).map_err(CliError::at("window"))
        }
        "and" => {
            binary()?;
            PartitionLabeler::and(window()?).map_err(CliError::at("window"))
        }
        "table" => {
            let table: Vec<u32> = cfg.list("table", "")?;
            PartitionLabeler::block_code(window()?, alphabet.len(), table).map_err(CliError::at("table"))
        }
        other => Err(CliError::usage("partition", format!("unknown partition {other:?} (symbol, xor, and, table, trivial)"))),
    }
}

fn mode(cfg: &Config, seed: u64) -> Result<(EstimationMode, &'static str), CliError> {
    match cfg.string("mode", "exact").as_str() {
        "exact" => Ok((EstimationMode::exact(), "exact")),
        "monte-carlo" | "mc" => {
            let samples: usize = cfg.get("samples", 10_000)?;
            if samples == 0 {
                return Err(CliError::usage("samples", "need at least one sample"));
            }
            let miller_madow = cfg.get("miller_madow", true)?;
            let mode = EstimationMode::MonteCarlo { samples, seed: split_seed(seed, STREAM_MC, 0), miller_madow };
            Ok((mode, "monte-carlo"))
        }
        other => Err(CliError::usage("mode", format!("unknown mode {other:?} (exact, monte-carlo)"))),
    }
}

impl Experiment {
    fn read(cfg: &Config, default_n_max: usize) -> Result<Self, CliError> {
        let rank = rank(cfg)?;
        let alphabet = alphabet(cfg)?;
        let labeler = labeler(cfg, rank, &alphabet)?;
        let n_max: usize = cfg.get("n_max", default_n_max)?;
        let needed = n_max + labeler.window_radius() + 1;
        let depth: usize = cfg.get("depth", needed)?;
        if depth < needed {
            return Err(CliError::usage(
                "depth",
                format!("depth {depth} is below n_max + window radius + 1 = {needed}"),
            ));
        }
        let seed = cfg.seed("seed", DEFAULT_SEED)?;
        let (mode, mode_name) = mode(cfg, seed)?;
        Ok(Experiment { rank, alphabet, labeler, n_max, depth, mode, mode_name, seed })
    }

    fn setup(&self) -> Result<BernoulliSetup, CliError> {
        Ok(BernoulliSetup::new(self.rank, Arc::clone(&self.alphabet), self.labeler.clone(), self.depth, self.mode)?)
    }
}

fn show(target: Option<f64>) -> String {
    target.map_or_else(|| "unknown".into(), num)
}

/// Display scale: nats, or bits with `--bits`.
struct Scale(f64);

impl Scale {
    fn read(cfg: &Config) -> Result<Self, CliError> {
        Ok(Scale(if cfg.flag("bits")? { std::f64::consts::LN_2 } else { 1.0 }))
    }

    fn apply(&self, x: f64) -> f64 {
        x / self.0
    }

    fn unit(&self) -> &'static str {
        if self.0 == 1.0 {
            "nats"
        } else {
            "bits"
        }
    }
}

pub fn smb_run(cfg: &Config) -> Result<Artifacts, CliError> {
    cfg.check_keys(&[EXPERIMENT_KEYS, &["starts"]].concat())?;
    let ex = Experiment::read(cfg, 6)?;
    let scale = Scale::read(cfg)?;
    let starts: usize = cfg.get("starts", 1)?;
    if starts == 0 {
        return Err(CliError::usage("starts", "need at least one start"));
    }
    let setup = ex.setup()?;
    let mut table =
        Table::new(&["n", "class_size", "info_nats", "info_norm", "stderr", "unresolved", "seed_x", "seed_xi"]);
    let mut trajectories = Vec::new();
    for s in 0..starts as u64 {
        let (sx, sxi) = (split_seed(ex.seed, STREAM_X, s), split_seed(ex.seed, STREAM_XI, s));
        let t = smb_trajectory(&setup, sx, sxi, ex.n_max)?;
        for r in &t.rows {
            table.push(vec![
                r.n.to_string(),
                r.class_size.to_string(),
                num(scale.apply(r.info_nats)),
                num(scale.apply(r.info_norm)),
                opt_num(r.stderr.map(|x| scale.apply(x))),
                u8::from(r.unresolved).to_string(),
                sx.to_string(),
                sxi.to_string(),
            ]);
        }
        let end = t.endpoint().expect("levels 0..=n_max");
        trajectories.push(json!({
            "seed_x": sx,
            "seed_xi": sxi,
            "endpoint": scale.apply(end.info_norm),
            "unresolved_atoms": t.unresolved_count(),
        }));
    }
    let target = setup.target().map(|t| scale.apply(t));
    let summary = json!({
        "command": "smb-run",
        "config": cfg.echo(),
        "unit": scale.unit(),
        "mode": ex.mode_name,
        "estimator": if ex.mode_name == "exact" { "exact" } else { "atom-frequency" },
        "target": target,
        "trajectories": trajectories,
    });
    let notes = vec![format!("smb-run: {starts} trajectories to n = {}, target {} {}", ex.n_max, show(target), scale.unit())];
    Ok(Artifacts { table: Some(table), summary, notes, violation: None })
}

pub fn entropy_sweep(cfg: &Config) -> Result<Artifacts, CliError> {
    cfg.check_keys(&[EXPERIMENT_KEYS, &["xi_samples"]].concat())?;
    let ex = Experiment::read(cfg, 4)?;
    let scale = Scale::read(cfg)?;
    let xi_samples: usize = cfg.get("xi_samples", 4)?;
    if xi_samples == 0 {
        return Err(CliError::usage("xi_samples", "need at least one boundary sample"));
    }
    let setup = ex.setup()?;
    let levels: Vec<usize> = (0..=ex.n_max).collect();
    let rows = cocycle_entropy_sweep(&setup, &levels, xi_samples, split_seed(ex.seed, STREAM_XI, 0))?;
    let mut table = Table::new(&[
        "n",
        "class_size",
        "value",
        "stderr",
        "estimator",
        "xi_samples",
        "unresolved_atoms",
        "seed",
        "mode",
    ]);
    for r in &rows {
        table.push(vec![
            r.n.to_string(),
            r.class_size.to_string(),
            num(scale.apply(r.value)),
            opt_num(r.stderr.map(|x| scale.apply(x))),
            r.estimator.as_str().into(),
            r.xi_samples.to_string(),
            r.unresolved_atoms.to_string(),
            ex.seed.to_string(),
            ex.mode_name.into(),
        ]);
    }
    let last = rows.last().expect("levels are non-empty");
    let target = setup.target().map(|t| scale.apply(t));
    let summary = json!({
        "command": "entropy-sweep",
        "config": cfg.echo(),
        "unit": scale.unit(),
        "mode": ex.mode_name,
        "estimate": scale.apply(last.value),
        "target": target,
        "unresolved_atoms": rows.iter().map(|r| r.unresolved_atoms).sum::<usize>(),
    });
    let notes = vec![format!(
        "entropy-sweep: estimate {} at n = {}, target {} {}",
        num(scale.apply(last.value)),
        last.n,
        show(target),
        scale.unit()
    )];
    Ok(Artifacts { table: Some(table), summary, notes, violation: None })
}

const MODEL_KEYS: &[&str] = &["model", "rank", "length"];

fn model(cfg: &Config, default_length: usize) -> Result<FiniteRelationModel, CliError> {
    let length: usize = cfg.get("length", default_length)?;
    match cfg.string("model", "tail").as_str() {
        "tail" => FiniteRelationModel::tail(rank(cfg)?.into(), length).map_err(CliError::at("length")),
        "odometer" => FiniteRelationModel::odometer(length).map_err(CliError::at("length")),
        other => Err(CliError::usage("model", format!("unknown model {other:?} (tail, odometer)"))),
    }
}

fn automorphisms(cfg: &Config, m: &FiniteRelationModel, default: &str) -> Result<Vec<InnerAutomorphism>, CliError> {
    let orders: Vec<usize> = cfg.list("orders", default)?;
    let mut d = vec![InnerAutomorphism::identity(m)];
    for k in orders {
        d.push(cyclic_automorphism(m, k).map_err(CliError::at("orders"))?);
    }
    Ok(d)
}

pub fn covering_demo(cfg: &Config) -> Result<Artifacts, CliError> {
    cfg.check_keys(&[MODEL_KEYS, &["delta", "orders", "rows", "max_centers"]].concat())?;
    let m = model(cfg, 5)?;
    let delta: f64 = cfg.get("delta", 0.1)?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(CliError::usage("delta", "delta must lie in (0, 1)"));
    }
    let d = automorphisms(cfg, &m, "1")?;
    let certificate = d.iter().map(InnerAutomorphism::order_certificate).max().unwrap_or(0);
    let rows: usize = cfg.get("rows", min_rows(delta, d.len()))?;
    let max_centers: usize = cfg.get("max_centers", 12)?;
    let seed = cfg.seed("seed", DEFAULT_SEED)?;
    let instance = CoveringInstance::generate(&m, certificate, rows, max_centers, seed).map_err(CliError::at("rows"))?;
    let report = covering(&m, &instance, &d, delta)?;
    let mut table = Table::new(&["row", "center", "center_label", "level", "size"]);
    for (row, c) in &report.selected {
        table.push(vec![
            row.to_string(),
            c.center.to_string(),
            m.point_label(c.center),
            c.level.to_string(),
            c.members(&m).len().to_string(),
        ]);
    }
    let summary = json!({
        "command": "covering-demo",
        "config": cfg.echo(),
        "model_size": m.len(),
        "d_size": d.len(),
        "rows": rows,
        "mass": report.mass,
        "base": report.base,
        "bound": report.bound,
        "covered_fraction": report.covered_fraction,
        "model_fraction": report.mass as f64 / m.len() as f64,
        "hypothesis_holds": report.hypothesis_holds,
        "hypothesis_failure_count": report.hypothesis_failure_count,
        "rows_sufficient": report.rows_sufficient,
        "bound_applies": report.bound_applies,
        "conclusion_holds": report.conclusion_holds,
        "selected": report.selected.len(),
    });
    let notes = vec![
        format!("covered_fraction = {} (mass over the bound's base)", num(report.covered_fraction)),
        format!("model_fraction = {}", num(report.mass as f64 / m.len() as f64)),
        format!("mass = {}, (1 - delta) * base = {}", report.mass, num(report.bound)),
        format!("hypothesis_holds = {}, rows_sufficient = {}", report.hypothesis_holds, report.rows_sufficient),
    ];
    Ok(Artifacts { table: Some(table), summary, notes, violation: None })
}

pub fn folner_report(cfg: &Config) -> Result<Artifacts, CliError> {
    cfg.check_keys(&[MODEL_KEYS, &["orders", "adding"]].concat())?;
    let m = model(cfg, 4)?;
    let all: Vec<String> = (0..=m.length()).map(|k| k.to_string()).collect();
    let orders: Vec<usize> = cfg.list("orders", &all.join(","))?;
    let mut families: Vec<(String, Vec<InnerAutomorphism>)> = Vec::new();
    for k in orders {
        let phi = cyclic_automorphism(&m, k).map_err(CliError::at("orders"))?;
        families.push((format!("cyclic-{k}"), vec![InnerAutomorphism::identity(&m), phi]));
    }
    if cfg.get("adding", true)? {
        if let Ok(add) = InnerAutomorphism::adding_machine(&m) {
            families.push(("adding-machine".into(), vec![add.inverse(), add]));
        }
    }
    let mut table = Table::new(&["family", "certificate", "n", "class_size", "defect_num", "defect_den", "defect"]);
    let mut violation = None;
    let mut summaries = Vec::new();
    for (name, d) in &families {
        let certificate = d.iter().map(InnerAutomorphism::order_certificate).max().unwrap_or(0);
        let mut zero_from = None;
        for n in 0..=m.length() {
            let f = folner_defect(&m, d, n)?;
            let zero = *f.exact.numer() == 0;
            if zero && zero_from.is_none() {
                zero_from = Some(n);
            }
            if zero != (n >= certificate) {
                violation.get_or_insert(format!("{name}: defect at n = {n} is {} with certificate {certificate}", f.exact));
            }
            table.push(vec![
                name.clone(),
                certificate.to_string(),
                n.to_string(),
                m.class_size(n).to_string(),
                f.exact.numer().to_string(),
                f.exact.denom().to_string(),
                num(f.value),
            ]);
        }
        summaries.push(json!({ "family": name, "certificate": certificate, "zero_from": zero_from }));
    }
    let summary = json!({
        "command": "folner-report",
        "config": cfg.echo(),
        "families": summaries,
        "consistent": violation.is_none(),
    });
    let notes = vec![format!("folner-report: {} families on a model of {} points", families.len(), m.len())];
    Ok(Artifacts { table: Some(table), summary, notes, violation })
}

pub fn ergodic_avg(cfg: &Config) -> Result<Artifacts, CliError> {
    cfg.check_keys(&["rank", "p", "observable", "symbol", "at", "position", "letter", "value", "starts", "n_max", "depth"])?;
    let rank = rank(cfg)?;
    let alphabet = alphabet(cfg)?;
    let n_max: usize = cfg.get("n_max", 6)?;
    let starts: usize = cfg.get("starts", 16)?;
    if starts == 0 || n_max == 0 {
        return Err(CliError::usage(if starts == 0 { "starts" } else { "n_max" }, "must be positive"));
    }
    let seed = cfg.seed("seed", DEFAULT_SEED)?;
    let kind = cfg.string("observable", "symbol");
    let (f, sigma): (Box<dyn Observable>, Option<f64>) = match kind.as_str() {
        "symbol" => {
            let symbol: usize = cfg.get("symbol", 0)?;
            if symbol >= alphabet.len() {
                return Err(CliError::usage("symbol", "symbol outside the alphabet"));
            }
            let at = ReducedWord::parse(rank, &cfg.string("at", "e")).map_err(CliError::at("at"))?;
            let p = alphabet.weight(symbol);
            let class = workbench_core::tail_class_size(n_max, rank) as f64;
            (Box::new(SymbolIndicator { at, symbol }), Some((p * (1.0 - p) / class).sqrt()))
        }
        "boundary-letter" => {
            let position: usize = cfg.get("position", n_max + 1)?;
            let letter = ReducedWord::parse(rank, &cfg.string("letter", "a1")).map_err(CliError::at("letter"))?;
            let [g] = letter.letters() else {
                return Err(CliError::usage("letter", "expected a single generator"));
            };
            if position == 0 {
                return Err(CliError::usage("position", "positions are 1-based"));
            }
            (Box::new(BoundaryLetterIndicator { position, letter: *g }), None)
        }
        "constant" => (Box::new(Constant(cfg.get("value", 1.0)?)), Some(0.0)),
        other => {
            return Err(CliError::usage("observable", format!("unknown observable {other:?} (symbol, boundary-letter, constant)")))
        }
    };
    let depth: usize = cfg.get("depth", workbench_core::ergodic_avg::required_depth(f.as_ref(), n_max))?;
    let setup = DiagnosticSetup { rank, alphabet, depth };
    let report = ergodicity_diagnostic(f.as_ref(), &setup, starts, n_max, seed)?;
    let mut table =
        Table::new(&["n", "class_size", "min", "max", "mean", "spread", "seed", "mode", "estimator", "unresolved_atoms"]);
    for r in &report.rows {
        table.push(vec![
            r.n.to_string(),
            r.class_size.to_string(),
            num(r.min),
            num(r.max),
            num(r.mean),
            num(r.spread),
            seed.to_string(),
            "exact".into(),
            "class-mean".into(),
            "0".into(),
        ]);
    }
    let last = report.last().expect("n_max >= 1");
    let summary = json!({
        "command": "ergodic-avg",
        "config": cfg.echo(),
        "starts": starts,
        "final_spread": last.spread,
        "sigma": sigma,
        "non_decaying": report.non_decaying,
    });
    let mut notes = vec![format!("ergodic-avg: spread {} at n = {}", num(last.spread), last.n)];
    if report.non_decaying {
        notes.push("spread is not decaying: the averages disagree across starts".into());
    }
    Ok(Artifacts { table: Some(table), summary, notes, violation: None })
}

pub fn subadditive_sweep(cfg: &Config) -> Result<Artifacts, CliError> {
    cfg.check_keys(
        &[EXPERIMENT_KEYS, &["functional", "length", "chain", "candidates", "trials", "max_set"]].concat(),
    )?;
    let scale = Scale::read(cfg)?;
    let seed = cfg.seed("seed", DEFAULT_SEED)?;
    let r = rank(cfg)?;
    let length: usize = cfg.get("length", 3)?;
    let m = FiniteRelationModel::tail(r.into(), length).map_err(CliError::at("length"))?;
    let kind = cfg.string("functional", "hp");
    let (f, mode_name): (Box<dyn SubadditiveFunctional>, &str) = match kind.as_str() {
        "hp" => {
            let alphabet = alphabet(cfg)?;
            let labeler = labeler(cfg, r, &alphabet)?;
            let (mode, mode_name) = mode(cfg, seed)?;
            (Box::new(HpFunctional::new(labeler, alphabet, mode).map_err(CliError::at("p"))?), mode_name)
        }
        "cardinality" => (Box::new(Cardinality), "exact"),
        "square" => (Box::new(SquaredCardinality), "exact"),
        other => return Err(CliError::usage("functional", format!("unknown functional {other:?} (hp, cardinality, square)"))),
    };
    let default_chain: Vec<String> = (0..=length.min(2)).map(|n| n.to_string()).collect();
    let chain: Vec<usize> = cfg.list("chain", &default_chain.join(","))?;
    if let Some(&n) = chain.iter().find(|&&n| n > length) {
        return Err(CliError::usage("chain", format!("level {n} exceeds the model length {length}")));
    }
    let mut candidates = Vec::new();
    for positions in cfg.string("candidates", "").split(';').map(str::trim).filter(|s| !s.is_empty()) {
        let fixed = positions
            .split(',')
            .map(|p| p.trim().parse::<usize>().map_err(|e| CliError::usage("candidates", format!("{p:?}: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        let relation = coordinate_relation(&m, &fixed).map_err(CliError::at("candidates"))?;
        candidates.push(Candidate::Relation { name: format!("agree@{positions}"), relation });
    }
    let trials: usize = cfg.get("trials", 200)?;
    let max_set: usize = cfg.get("max_set", 6)?;
    let check = check_subadditive(f.as_ref(), &m, trials, seed, max_set).map_err(CliError::at("max_set"))?;
    let harness = subadditive_limit_harness(f.as_ref(), &m, &chain, &candidates)?;
    let mut table = Table::new(&[
        "n",
        "class_size",
        "s_n",
        "stderr",
        "gap",
        "nonincreasing_ok",
        "seed",
        "mode",
        "estimator",
        "unresolved_atoms",
    ]);
    for row in &harness.rows {
        table.push(vec![
            row.n.to_string(),
            row.class_size.to_string(),
            num(scale.apply(row.s_n)),
            num(scale.apply(row.stderr)),
            num(scale.apply(row.gap)),
            u8::from(row.nonincreasing_ok).to_string(),
            seed.to_string(),
            mode_name.into(),
            if mode_name == "exact" { "exact" } else { "plug-in-miller-madow" }.into(),
            "0".into(),
        ]);
    }
    let summary = json!({
        "command": "subadditive-sweep",
        "config": cfg.echo(),
        "unit": scale.unit(),
        "functional": f.name(),
        "infimum": scale.apply(harness.infimum),
        "argmin": harness.argmin,
        "candidates": harness.candidates.iter().map(|c| json!({"name": c.name, "value": scale.apply(c.value)})).collect::<Vec<Value>>(),
        "nonincreasing_within_noise": harness.nonincreasing_within_noise,
        "checker": {
            "trials": check.trials,
            "passed": check.passed(),
            "boundedness_violations": check.boundedness_violations,
            "invariance_violations": check.invariance_violations,
            "subadditivity_violations": check.subadditivity_violations,
        },
    });
    let violation = check.first_violation.as_ref().map(|v| format!("{:?} fails at trial {}: {} > {}", v.property, v.trial, v.lhs, v.rhs));
    let notes = vec![format!("subadditive-sweep: {} checker {}", f.name(), if check.passed() { "passed" } else { "failed" })];
    Ok(Artifacts { table: Some(table), summary, notes, violation })
}

type Check = (&'static str, Box<dyn Fn() -> Result<bool, workbench_core::Error>>);

/// Identities that hold exactly; any failure is an invariant violation.
pub fn selftest(cfg: &Config) -> Result<Artifacts, CliError> {
    cfg.check_keys(&[])?;
    let checks: Vec<Check> = vec![
        ("product identity J/|R_n| = log 2", Box::new(|| {
            let setup = BernoulliSetup::new(
                2,
                Arc::new(ProbabilityVector::uniform(2)?),
                PartitionLabeler::symbol_at_identity(2, 2),
                8,
                EstimationMode::exact(),
            )?;
            let t = smb_trajectory(&setup, 1, 2, 6)?;
            Ok(t.rows.iter().all(|r| (r.info_norm - std::f64::consts::LN_2).abs() <= 1e-12))
        })),
        ("tail class sizes (2r-1)^n", Box::new(|| {
            for r in [2u32, 3] {
                for n in 0..=4 {
                    let xi = workbench_core::BoundaryPrefix::sample(n + 1, r, 7)?;
                    if tail_class(&xi, n)?.len() != (2 * r as usize - 1).pow(n as u32) {
                        return Ok(false);
                    }
                }
            }
            Ok(true)
        })),
        ("cylinder masses sum to 1", Box::new(|| {
            for depth in 1..=4 {
                let m = FiniteRelationModel::tail(2, depth)?;
                if cylinder_measure(depth, 2)?.denominator != m.len() as u128 {
                    return Ok(false);
                }
            }
            Ok(true)
        })),
        ("cocycle moves xi onto its class", Box::new(|| {
            let xi = workbench_core::BoundaryPrefix::sample(5, 2, 3)?;
            for eta in tail_class(&xi, 3)? {
                let a = fundamental_cocycle(&eta, &xi, 3)?;
                if act(&a, &xi)?.0 != eta || !a.is_even() {
                    return Ok(false);
                }
            }
            Ok(true)
        })),
        ("Folner defect vanishes from the order on", Box::new(|| {
            let m = FiniteRelationModel::tail(2, 4)?;
            for k in 0..=4 {
                let d = vec![InnerAutomorphism::identity(&m), cyclic_automorphism(&m, k)?];
                for n in 0..=4 {
                    if (*folner_defect(&m, &d, n)?.exact.numer() == 0) != (n >= k) {
                        return Ok(false);
                    }
                }
            }
            Ok(true)
        })),
        ("disjointify keeps the largest class", Box::new(|| {
            let m = FiniteRelationModel::tail(2, 4)?;
            let chain: Vec<ChainClass> = (0..=3).map(|level| ChainClass { center: 5, level }).collect();
            Ok(disjointify(&m, &chain)? == vec![ChainClass { center: 5, level: 3 }])
        })),
        ("subcollection count 16", Box::new(|| {
            let o = FiniteRelationModel::odometer(4)?;
            Ok(count_disjoint_subcollections(&o, 0, 4, &[2], 4)?.count == 16)
        })),
        ("E(2) = log 2", Box::new(|| Ok((stirling_bound_e(2.0)? - std::f64::consts::LN_2).abs() < 1e-15))),
        ("h^P chain averages equal H(p)", Box::new(|| {
            let m = FiniteRelationModel::tail(2, 4)?;
            let alphabet = Arc::new(ProbabilityVector::new(vec![0.9, 0.1])?);
            let h = shannon(&alphabet);
            let f = HpFunctional::new(PartitionLabeler::symbol_at_identity(2, 2), alphabet, EstimationMode::exact())?;
            let r = subadditive_limit_harness(&f, &m, &[0, 1, 2, 3, 4], &[])?;
            Ok(r.rows.iter().all(|row| (row.s_n - h).abs() <= 1e-12))
        })),
        ("boundary letters read 1-based", Box::new(|| {
            let xi = workbench_core::BoundaryPrefix::parse(2, "a2A1")?;
            Ok(xi.letter(1) == Some(Generator::new(2, false)) && xi.letter(2) == Some(Generator::new(1, true)))
        })),
    ];
    let mut notes = Vec::new();
    let mut results = Vec::new();
    let mut failed = Vec::new();
    for (name, check) in &checks {
        let ok = match check() {
            Ok(ok) => ok,
            Err(e) => {
                notes.push(format!("error in {name}: {e}"));
                false
            }
        };
        notes.push(format!("{} {name}", if ok { "PASS" } else { "FAIL" }));
        results.push(json!({ "check": name, "passed": ok }));
        if !ok {
            failed.push(*name);
        }
    }
    let summary = json!({ "command": "selftest", "checks": results, "passed": failed.is_empty() });
    let violation = (!failed.is_empty()).then(|| format!("selftest failures: {}", failed.join("; ")));
    Ok(Artifacts { table: None, summary, notes, violation })
}
