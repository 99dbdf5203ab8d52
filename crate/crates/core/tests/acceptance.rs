//! The ten acceptance criteria. Runs as a plain binary so that every
//! criterion prints one PASS/FAIL line; exits non-zero if any fails.

use std::collections::HashSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use workbench_core::boundary::{act, busemann, cylinder_measure, radon_nikodym_log, tail_class, tail_class_size};
use workbench_core::ergodic_avg::{
    cylinder_indicator, ergodicity_diagnostic, model_class_average_exact, model_integral_exact, DiagnosticSetup,
    SymbolIndicator,
};
use workbench_core::hyperfinite::{
    count_disjoint_subcollections, covering, cyclic_automorphism, disjointify, folner_defect, ChainClass,
    CoveringInstance, FiniteRelationModel, InnerAutomorphism, PointId,
};
use workbench_core::subadditive::{
    check_subadditive, coordinate_relation, subadditive_limit_harness, Candidate, HpFunctional,
};
use workbench_core::{
    entropy::shannon, fundamental_cocycle, smb_trajectory, BernoulliSetup, BoundaryPrefix, EnumerationCap,
    EstimationMode, PartitionLabeler, ProbabilityVector, ReducedWord,
};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn w(s: &str) -> ReducedWord {
    ReducedWord::parse(2, s).unwrap()
}

/// All admissible prefixes of a given depth, by direct recursion.
fn all_prefixes(depth: usize, rank: u8) -> Vec<BoundaryPrefix> {
    let mut out = Vec::new();
    let mut stack = vec![String::new()];
    let letters: Vec<String> = (1..=rank).flat_map(|i| [format!("a{i}"), format!("A{i}")]).collect();
    while let Some(p) = stack.pop() {
        if p.len() == 2 * depth {
            out.push(BoundaryPrefix::parse(rank, &p).unwrap());
            continue;
        }
        for l in &letters {
            let last = &p[p.len().saturating_sub(2)..];
            let cancels = !last.is_empty() && last[1..] == l[1..] && last[..1] != l[..1];
            if !cancels {
                stack.push(format!("{p}{l}"));
            }
        }
    }
    out
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let alphabet = Arc::new(ProbabilityVector::uniform(2).unwrap());
    let labeler = PartitionLabeler::symbol_at_identity(2, 2);
    let setup = BernoulliSetup::new(2, alphabet, labeler, 10, EstimationMode::exact()).unwrap();
    let mut worst: f64 = 0.0;
    let starts = 20;
    for s in 0..starts {
        let t = smb_trajectory(&setup, 1000 + s, 2000 + s, 8).map_err(|e| e.to_string())?;
        for row in &t.rows {
            worst = worst.max((row.info_norm - std::f64::consts::LN_2).abs());
        }
    }
    let elapsed = start.elapsed();
    ensure(worst <= 1e-12, || format!("max |J/|R_n| - log 2| = {worst:e}"))?;
    ensure(elapsed < Duration::from_secs(5), || format!("took {elapsed:?}"))?;
    Ok(format!("{starts} starts, n <= 8, max deviation {worst:e}, {elapsed:.2?}"))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let alphabet = Arc::new(ProbabilityVector::new(vec![0.9, 0.1]).unwrap());
    let h = shannon(&alphabet);
    ensure((h - 0.325083).abs() < 1e-6, || format!("H(p) = {h}"))?;
    let labeler = PartitionLabeler::symbol_at_identity(2, 2);
    let setup = BernoulliSetup::new(2, alphabet, labeler, 12, EstimationMode::exact()).unwrap();
    let mut worst: f64 = 0.0;
    for s in 0..50 {
        let t = smb_trajectory(&setup, 0x5EED_0000 + s, 0xB0B0_0000 + s, 9).map_err(|e| e.to_string())?;
        let end = t.endpoint().unwrap();
        ensure(end.class_size == 19683, || format!("class size {}", end.class_size))?;
        worst = worst.max((end.info_norm - h).abs());
    }
    let elapsed = start.elapsed();
    ensure(worst <= 0.02, || format!("endpoint deviation {worst}"))?;
    ensure(elapsed < Duration::from_secs(120), || format!("took {elapsed:?}"))?;
    Ok(format!("50 starts at n = 9, max |endpoint - H(p)| = {worst:.5}, {elapsed:.2?}"))
}

fn criterion_3() -> Outcome {
    for rank in [2u8, 3] {
        for n in 0..=5 {
            let xi = BoundaryPrefix::sample(n + 2, rank.into(), 77 + n as u64).unwrap();
            let class = tail_class(&xi, n).map_err(|e| e.to_string())?;
            let distinct: HashSet<&BoundaryPrefix> = class.iter().collect();
            let expected = (2 * rank as usize - 1).pow(n as u32);
            ensure(distinct.len() == expected && class.len() == expected, || {
                format!("r={rank} n={n}: {} members, expected {expected}", class.len())
            })?;
        }
    }
    for rank in [2u8, 3] {
        for depth in 1..=5 {
            let cyl = cylinder_measure(depth, rank.into()).map_err(|e| e.to_string())?;
            let count = all_prefixes(depth, rank).len() as u128;
            let total = cyl.exact() * Ratio::from_integer(count);
            ensure(total == Ratio::from_integer(1), || format!("r={rank} depth {depth}: total mass {total}"))?;
        }
    }
    let ball = workbench_core::word::enumerate_ball(4, 2, EnumerationCap::default()).unwrap();
    let mut r = rng(3);
    let mut worst: f64 = 0.0;
    for t in 0..10_000 {
        let g = ball.choose(&mut r).unwrap();
        let h = ball.choose(&mut r).unwrap();
        let xi = BoundaryPrefix::sample(16, 2, t).unwrap();
        let gh = g.multiply(h).unwrap();
        let (hxi, _) = act(h, &xi).map_err(|e| e.to_string())?;
        let lhs = radon_nikodym_log(&gh, &xi).map_err(|e| e.to_string())?;
        let rhs = radon_nikodym_log(g, &hxi).map_err(|e| e.to_string())? + radon_nikodym_log(h, &xi).unwrap();
        worst = worst.max((lhs - rhs).abs());
    }
    ensure(worst <= 1e-12, || format!("RN cocycle defect {worst:e}"))?;
    Ok(format!("class sizes r in {{2,3}}, n <= 5; masses sum to 1 at depth <= 5; RN defect {worst:e} on 1e4 triples"))
}

fn criterion_4() -> Outcome {
    let mut pairs = 0usize;
    for n in 0..=3 {
        for xi in all_prefixes(n + 1, 2) {
            for eta in tail_class(&xi, n).unwrap() {
                let a = fundamental_cocycle(&eta, &xi, n).map_err(|e| e.to_string())?;
                let (moved, _) = act(&a, &xi).map_err(|e| e.to_string())?;
                ensure(moved == eta, || format!("alpha({eta}, {xi}) {xi} = {moved}"))?;
                ensure(a.len() % 2 == 0, || format!("odd cocycle value {a}"))?;
                let beta = busemann(&eta, &a).map_err(|e| e.to_string())?;
                ensure(beta <= 0, || format!("beta({eta}, {a}) = {beta}"))?;
                let back = fundamental_cocycle(&xi, &eta, n).unwrap();
                let beta = busemann(&xi, &back).map_err(|e| e.to_string())?;
                ensure(beta <= 0, || format!("beta({xi}, {back}) = {beta}"))?;
                pairs += 1;
            }
        }
    }
    let mut triples = 0usize;
    for xi in all_prefixes(3, 2) {
        let class = tail_class(&xi, 2).unwrap();
        for z in &class {
            for u in &class {
                let zu = fundamental_cocycle(z, u, 2).unwrap();
                for v in &class {
                    let zv = fundamental_cocycle(z, v, 2).unwrap();
                    let vu = fundamental_cocycle(v, u, 2).unwrap();
                    ensure(zu == zv.multiply(&vu).unwrap(), || format!("cocycle identity fails at {z}, {v}, {u}"))?;
                    triples += 1;
                }
            }
        }
    }
    Ok(format!("{pairs} pairs moved correctly, {triples} triples satisfy the cocycle identity"))
}

/// Classes not strictly contained in another listed class.
fn maximal_classes(m: &FiniteRelationModel, classes: &[ChainClass]) -> Vec<Vec<PointId>> {
    let sets: Vec<HashSet<PointId>> = classes.iter().map(|c| m.class(c.level, c.center).iter().copied().collect()).collect();
    let mut out: Vec<Vec<PointId>> = sets
        .iter()
        .filter(|s| !sets.iter().any(|t| t.len() > s.len() && s.is_subset(t)))
        .map(|s| {
            let mut v: Vec<PointId> = s.iter().copied().collect();
            v.sort();
            v
        })
        .collect();
    out.sort();
    out.dedup();
    out
}

fn criterion_5() -> Outcome {
    let m = FiniteRelationModel::tail(2, 5).unwrap();
    let mut r = rng(5);
    for trial in 0..1000 {
        let k = r.gen_range(1..=60);
        let classes: Vec<ChainClass> = (0..k)
            .map(|_| ChainClass { center: r.gen_range(0..m.len() as PointId), level: r.gen_range(0..=5) })
            .collect();
        let out = disjointify(&m, &classes).map_err(|e| e.to_string())?;
        let mut seen = HashSet::new();
        for c in &out {
            for &z in m.class(c.level, c.center) {
                ensure(seen.insert(z), || format!("trial {trial}: output overlaps at {z}"))?;
            }
        }
        ensure(classes.iter().all(|c| seen.contains(&c.center)), || format!("trial {trial}: a center is uncovered"))?;
        let mut got: Vec<Vec<PointId>> = out.iter().map(|c| m.class(c.level, c.center).to_vec()).collect();
        got.sort();
        ensure(got == maximal_classes(&m, &classes), || format!("trial {trial}: differs from the maximal-class oracle"))?;
    }
    Ok("1000 random inputs: disjoint, covering, equal to the oracle".into())
}

fn generate_covering_instance(
    m: &FiniteRelationModel,
    order: usize,
    rows: usize,
    r: &mut ChaCha8Rng,
) -> CoveringInstance {
    let points: Vec<PointId> = m.points().collect();
    let mut levels = Vec::with_capacity(rows);
    let mut centers = Vec::with_capacity(rows);
    let mut floor = r.gen_range(0..=2);
    for i in 0..rows {
        if i == 1 {
            floor = floor.max(order);
        }
        if r.gen_bool(0.03) {
            floor = (floor + 1).min(m.length());
        }
        let cols = r.gen_range(1..=3);
        let row: Vec<usize> = (0..cols).map(|_| (floor + usize::from(r.gen_bool(0.2))).min(m.length())).collect();
        // later rows must not drop below anything used here
        floor = *row.iter().max().unwrap();
        centers.push(
            (0..cols)
                .map(|_| {
                    let k = r.gen_range(1..=12);
                    points.choose_multiple(r, k).copied().collect()
                })
                .collect(),
        );
        levels.push(row);
    }
    CoveringInstance { levels, centers }
}

fn criterion_6() -> Outcome {
    let m = FiniteRelationModel::tail(2, 5).unwrap();
    let delta = 0.1;
    let mut r = rng(6);
    let mut min_fraction = f64::INFINITY;
    for trial in 0..100 {
        let order = r.gen_range(1..=3);
        let mut d = vec![InnerAutomorphism::identity(&m), cyclic_automorphism(&m, order).unwrap()];
        if r.gen_bool(0.5) {
            d.push(cyclic_automorphism(&m, r.gen_range(0..=order)).unwrap());
        }
        let rows = (1.0 + 0.9 * d.len() as f64 / 0.01).ceil() as usize;
        let inst = generate_covering_instance(&m, order, rows, &mut r);
        let report = covering(&m, &inst, &d, delta).map_err(|e| format!("trial {trial}: {e}"))?;
        ensure(report.hypothesis_holds, || format!("trial {trial}: generated instance fails the hypothesis"))?;
        ensure(report.rows_sufficient, || format!("trial {trial}: too few rows"))?;
        ensure(report.mass as f64 >= (1.0 - delta) * report.base as f64, || {
            format!("trial {trial}: mass {} < 0.9 * {}", report.mass, report.base)
        })?;
        min_fraction = min_fraction.min(report.covered_fraction);
    }
    Ok(format!("100/100 instances covered, min covered fraction {min_fraction:.3}"))
}

fn brute_force_defect(m: &FiniteRelationModel, d: &[InnerAutomorphism], n: usize) -> Ratio<u128> {
    let mut total = Ratio::from_integer(0u128);
    for y in m.points() {
        let class: HashSet<PointId> = m.class(n, y).iter().copied().collect();
        let image: HashSet<PointId> = class.iter().flat_map(|&z| d.iter().map(move |phi| phi.apply(z))).collect();
        let sym = class.symmetric_difference(&image).count() as u128;
        total += Ratio::new(sym, class.len() as u128);
    }
    total / Ratio::from_integer(m.len() as u128)
}

fn criterion_7() -> Outcome {
    let mut models = Vec::new();
    for l in 1..=4 {
        models.push(FiniteRelationModel::tail(2, l).unwrap());
        models.push(FiniteRelationModel::odometer(l).unwrap());
    }
    for l in 1..=3 {
        models.push(FiniteRelationModel::tail(3, l).unwrap());
    }
    let mut checks = 0;
    for m in &models {
        let mut families: Vec<Vec<InnerAutomorphism>> = (0..=m.length())
            .map(|k| vec![InnerAutomorphism::identity(m), cyclic_automorphism(m, k).unwrap()])
            .collect();
        families.push((1..=m.length()).map(|k| cyclic_automorphism(m, k).unwrap()).collect());
        if let Ok(add) = InnerAutomorphism::adding_machine(m) {
            families.push(vec![add.clone(), add.inverse()]);
        }
        for d in &families {
            let order = d.iter().map(InnerAutomorphism::order_certificate).max().unwrap();
            for n in 0..=m.length() {
                let f = folner_defect(m, d, n).map_err(|e| e.to_string())?;
                ensure(f.exact == brute_force_defect(m, d, n), || format!("{:?} n={n}: differs from brute force", m.shape()))?;
                if n >= order {
                    ensure(f.exact == Ratio::from_integer(0), || format!("{:?} n={n}: nonzero defect", m.shape()))?;
                } else {
                    ensure(f.exact > Ratio::from_integer(0), || format!("{:?} n={n}: zero defect below order", m.shape()))?;
                }
                checks += 1;
            }
        }
    }
    Ok(format!("{checks} (model, D, n) cases exact and matching brute force"))
}

fn criterion_8() -> Outcome {
    let mut r = rng(8);
    for l in 1..=8 {
        let o = FiniteRelationModel::odometer(l).unwrap();
        for k in 0..=l.min(4) {
            let table: Vec<i64> = (0..1 << k).map(|_| r.gen_range(-5..=5)).collect();
            let f = |c: &[u8]| {
                let idx = c[..k].iter().fold(0usize, |acc, &b| acc * 2 + b as usize);
                Ratio::from_integer(table[idx])
            };
            let prefix: Vec<u8> = (0..k).map(|_| r.gen_range(0..=1)).collect();
            let indicator = cylinder_indicator(prefix);
            let (int_f, int_ind) = (model_integral_exact(&o, f), model_integral_exact(&o, &indicator));
            ensure(int_ind == Ratio::new(1, 1 << k), || format!("cylinder integral {int_ind}"))?;
            for y in o.points() {
                for n in k..=l {
                    ensure(model_class_average_exact(&o, f, y, n).unwrap() == int_f, || format!("L={l} k={k} n={n}"))?;
                    ensure(model_class_average_exact(&o, &indicator, y, n).unwrap() == int_ind, || {
                        format!("indicator L={l} k={k} n={n}")
                    })?;
                }
            }
        }
    }
    let setup = DiagnosticSetup { rank: 2, alphabet: Arc::new(ProbabilityVector::uniform(2).unwrap()), depth: 10 };
    let f = SymbolIndicator { at: ReducedWord::identity(2), symbol: 1 };
    let sigma = (0.25f64 / tail_class_size(8, 2) as f64).sqrt();
    let mut within = 0;
    for run in 0..100 {
        let report = ergodicity_diagnostic(&f, &setup, 10, 8, 0xD1A6 + run).map_err(|e| e.to_string())?;
        let last = report.last().unwrap();
        if last.spread < 8.0 * sigma && (last.min - 0.5).abs() <= 4.0 * sigma && (last.max - 0.5).abs() <= 4.0 * sigma {
            within += 1;
        }
    }
    ensure(within >= 95, || format!("only {within}/100 runs within the concentration bound"))?;
    Ok(format!("odometer averages exact for n >= k; {within}/100 extended-relation runs within 4 sigma"))
}

fn hp(labeler: PartitionLabeler, p: Vec<f64>) -> HpFunctional {
    HpFunctional::new(labeler, Arc::new(ProbabilityVector::new(p).unwrap()), EstimationMode::exact()).unwrap()
}

fn criterion_9() -> Outcome {
    let m4 = FiniteRelationModel::tail(2, 4).unwrap();
    let symbol = hp(PartitionLabeler::symbol_at_identity(2, 2), vec![0.9, 0.1]);
    let report = check_subadditive(&symbol, &m4, 1000, 9, 8).map_err(|e| e.to_string())?;
    ensure(report.passed(), || format!("symbol partition: {:?}", report.first_violation))?;
    let and = hp(PartitionLabeler::and(vec![w("a1"), w("a2")]).unwrap(), vec![0.5, 0.5]);
    let report = check_subadditive(&and, &m4, 1000, 10, 6).map_err(|e| e.to_string())?;
    ensure(report.passed(), || format!("and partition: {:?}", report.first_violation))?;

    let m5 = FiniteRelationModel::tail(2, 5).unwrap();
    for p in [vec![0.5, 0.5], vec![0.9, 0.1], vec![0.2, 0.3, 0.5]] {
        let f = hp(PartitionLabeler::symbol_at_identity(2, p.len()), p);
        let h = shannon(&f.alphabet);
        let harness = subadditive_limit_harness(&f, &m5, &[0, 1, 2, 3, 4, 5], &[]).map_err(|e| e.to_string())?;
        for row in &harness.rows {
            ensure((row.s_n - h).abs() <= 1e-12, || format!("s_{} = {} vs H = {h}", row.n, row.s_n))?;
        }
    }

    let m3 = FiniteRelationModel::tail(2, 3).unwrap();
    let codes = vec![
        ("and(a1,a2)", PartitionLabeler::and(vec![w("a1"), w("a2")]).unwrap(), vec![0.5, 0.5]),
        ("and(e,a1)", PartitionLabeler::and(vec![w(""), w("a1")]).unwrap(), vec![0.6, 0.4]),
        ("xor(a1,A2)", PartitionLabeler::xor(vec![w("a1"), w("A2")]).unwrap(), vec![0.7, 0.3]),
        (
            "table(a2,A1)",
            PartitionLabeler::block_code(vec![w("a2"), w("A1")], 2, vec![0, 1, 1, 0]).unwrap(),
            vec![0.8, 0.2],
        ),
    ];
    let mut worst_gap = f64::INFINITY;
    for (name, labeler, p) in codes {
        let f = hp(labeler, p);
        let candidates = vec![
            Candidate::Relation { name: "agree@2,3".into(), relation: coordinate_relation(&m3, &[2, 3]).unwrap() },
            Candidate::Relation { name: "agree@1,3".into(), relation: coordinate_relation(&m3, &[1, 3]).unwrap() },
            Candidate::Relation { name: "agree@3".into(), relation: coordinate_relation(&m3, &[3]).unwrap() },
        ];
        let harness = subadditive_limit_harness(&f, &m3, &[0, 1, 2], &candidates).map_err(|e| format!("{name}: {e}"))?;
        for row in &harness.rows {
            ensure(row.s_n >= harness.infimum, || format!("{name}: s_{} = {} below {}", row.n, row.s_n, harness.infimum))?;
            worst_gap = worst_gap.min(row.gap);
        }
        ensure(harness.nonincreasing_within_noise, || format!("{name}: s_n increases"))?;
    }
    Ok(format!("checker passed 2 x 1000 trials; symbol s_n = H(p); block codes min gap {worst_gap:e}"))
}

fn criterion_10() -> Outcome {
    let mut instances = 0;
    let mut models = vec![FiniteRelationModel::odometer(4).unwrap(), FiniteRelationModel::odometer(5).unwrap()];
    models.push(FiniteRelationModel::tail(2, 3).unwrap());
    models.push(FiniteRelationModel::tail(3, 2).unwrap());
    for m in &models {
        for n in 0..=m.length() {
            if m.class_size(n) > 20 {
                continue;
            }
            for mask in 0u32..1 << (n + 1) {
                let levels: Vec<usize> = (0..=n).filter(|k| mask >> k & 1 == 1).collect();
                for ell in 4..=m.class_size(n).max(4) {
                    for y in m.points().step_by(3) {
                        let c = count_disjoint_subcollections(m, y, n, &levels, ell).map_err(|e| e.to_string())?;
                        ensure(c.bound_holds && (c.count as f64).log2() <= c.exponent, || {
                            format!("{:?} y={y} n={n} levels={levels:?} l={ell}: count {} > 2^{}", m.shape(), c.count, c.exponent)
                        })?;
                        instances += 1;
                    }
                }
            }
        }
    }
    Ok(format!("{instances} instances within 2^(5 E(l/2) |class|)"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("Bernoulli exact identity", criterion_1),
        ("SMB convergence", criterion_2),
        ("class sizes and measures", criterion_3),
        ("cocycle correctness", criterion_4),
        ("disjointification", criterion_5),
        ("covering bound", criterion_6),
        ("Folner defect", criterion_7),
        ("pointwise averages", criterion_8),
        ("subadditive harness", criterion_9),
        ("counting bound", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS criterion {}: {name} ({detail})", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {}: {name} ({why})", i + 1);
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
