//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use modqd::genome::Module;
use modqd::runner::{self, io, ExperimentConfig};
use modqd::search::{nondominated_sort, AlgorithmKind, Archive, Individual};
use modqd::sim::{build_phenotype, joint_angle, simulate, Evaluation, SimConfig, Simulation};
use modqd::variation::bounce_back;
use modqd::{random_genome, ControllerGenes, Descriptor, Genome, MorphLimits, MorphNode};

const ANGLE_LIMIT: f64 = 1.57;
const RIGID_TOL: f64 = 1e-9;
const PADDLER_TOL: f64 = 1e-9;
const KS_ALPHA: f64 = 0.01;
const KS_SAMPLES: usize = 100_000;
const SORT_POPULATIONS: usize = 200;
const SORT_MAX_SIZE: usize = 100;
const ARCHIVE_INSERTIONS: usize = 10_000;
const DESK_SEEDS: usize = 5;
const DESK_GENERATIONS: usize = 100;
const DESK_BATCH: usize = 50;
const MIN_ME_COVERAGE: f64 = 0.9;

type Check = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Check + 'a>);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn desk_config(algorithm: AlgorithmKind, out: &Path) -> ExperimentConfig {
    ExperimentConfig {
        algorithm,
        seed: 0,
        repetitions: DESK_SEEDS,
        generations: DESK_GENERATIONS,
        batch_size: DESK_BATCH,
        out: out.to_path_buf(),
        ..Default::default()
    }
}

struct DeskRun {
    algorithm: AlgorithmKind,
    init_size: usize,
    dir: PathBuf,
    stats: Vec<io::StatsRow>,
}

fn desk_runs(out: &Path) -> Result<Vec<DeskRun>, String> {
    let mut runs = Vec::new();
    for algorithm in AlgorithmKind::ALL {
        let cfg = desk_config(algorithm, out);
        for s in runner::run(&cfg).map_err(|e| e.to_string())? {
            let stats = io::read_stats(&s.dir.join("stats.csv")).map_err(|e| e.to_string())?;
            runs.push(DeskRun { algorithm, init_size: cfg.init_size(), dir: s.dir, stats });
        }
    }
    Ok(runs)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

// ---------------------------------------------------------------- determinism

fn cli_run(out: &Path, algorithm: AlgorithmKind, seed: u64) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_modqd"))
        .args(["run", "--algorithm", algorithm.as_str(), "--repetitions", "1"])
        .args(["--seed", &seed.to_string()])
        .args(["--generations", &DESK_GENERATIONS.to_string()])
        .args(["--batch-size", &DESK_BATCH.to_string()])
        .arg("--out")
        .arg(out)
        .output()
        .map_err(|e| format!("spawning the CLI: {e}"))?;
    ensure(status.status.success(), || format!("CLI failed: {}", String::from_utf8_lossy(&status.stderr)))
}

fn determinism() -> Check {
    let root = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut compared = 0;
    for algorithm in AlgorithmKind::ALL {
        for seed in [11u64, 12] {
            let a = root.path().join(format!("{algorithm}_{seed}_a"));
            let b = root.path().join(format!("{algorithm}_{seed}_b"));
            cli_run(&a, algorithm, seed)?;
            cli_run(&b, algorithm, seed)?;
            for file in ["stats.csv", "archive.csv", "histogram.csv"] {
                let pa = runner::repetition_dir(&a, algorithm, 0).join(file);
                let pb = runner::repetition_dir(&b, algorithm, 0).join(file);
                let ba = std::fs::read(&pa).map_err(|e| format!("{}: {e}", pa.display()))?;
                let bb = std::fs::read(&pb).map_err(|e| format!("{}: {e}", pb.display()))?;
                ensure(!ba.is_empty() && ba == bb, || format!("{algorithm} seed {seed}: {file} differs"))?;
                compared += 1;
            }
        }
    }
    Ok(format!("{compared} file pairs byte-identical (3 algorithms x 2 seeds)"))
}

// --------------------------------------------------------------------- budget

fn budget(runs: &[DeskRun]) -> Check {
    for r in runs {
        for row in &r.stats {
            let expected = r.init_size + DESK_BATCH * row.generation;
            ensure(row.evaluations == expected, || {
                format!("{} {}: generation {} has {} evaluations, expected {expected}", r.algorithm, r.dir.display(), row.generation, row.evaluations)
            })?;
        }
        ensure(r.stats.len() == DESK_GENERATIONS + 1, || format!("{}: {} rows", r.dir.display(), r.stats.len()))?;
    }

    let cfg = ExperimentConfig::for_algorithm(AlgorithmKind::MapElites);
    let out = runner::run_single(&cfg, 0);
    for s in &out.stats {
        ensure(s.evaluations == 1000 + 200 * s.generation, || {
            format!("default MAP-Elites generation {}: {} evaluations", s.generation, s.evaluations)
        })?;
    }
    let last = out.final_stats();
    ensure(last.generation == 500 && last.evaluations == 101_000, || {
        format!("default MAP-Elites ended at generation {} with {} evaluations", last.generation, last.evaluations)
    })?;
    Ok(format!("{} desk runs consistent; default MAP-Elites run totals {}", runs.len(), last.evaluations))
}

// -------------------------------------------------------------------- oracles

/// Fronts by repeated peeling with an explicit dominance matrix.
fn brute_force_fronts(points: &[[f64; 3]]) -> Vec<Vec<usize>> {
    let n = points.len();
    let dom = |a: &[f64; 3], b: &[f64; 3]| a.iter().zip(b).all(|(x, y)| x >= y) && a.iter().zip(b).any(|(x, y)| x > y);
    let matrix: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| dom(&points[i], &points[j])).collect()).collect();
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut fronts = Vec::new();
    while !remaining.is_empty() {
        let front: Vec<usize> =
            remaining.iter().copied().filter(|&j| !remaining.iter().any(|&i| matrix[i][j])).collect();
        remaining.retain(|i| !front.contains(i));
        fronts.push(front);
    }
    fronts
}

fn sort_oracle() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..SORT_POPULATIONS {
        let n = rng.random_range(1..=SORT_MAX_SIZE);
        // Every other population uses a coarse grid to force ties and duplicates.
        let coarse = case % 2 == 0;
        let points: Vec<[f64; 3]> = (0..n)
            .map(|_| {
                std::array::from_fn(|_| {
                    if coarse {
                        rng.random_range(0..4) as f64
                    } else {
                        rng.random::<f64>()
                    }
                })
            })
            .collect();
        let mut got = nondominated_sort(&points);
        for f in &mut got {
            f.sort_unstable();
        }
        let expected = brute_force_fronts(&points);
        ensure(got == expected, || format!("population {case} (size {n}) sorted differently"))?;
    }
    Ok(())
}

fn archive_oracle() -> Result<(), String> {
    let eta = 20;
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut archive = Archive::new(eta);
    let mut reference: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for _ in 0..ARCHIVE_INSERTIONS {
        let m = rng.random_range(1..=eta);
        let j = rng.random_range(0..=eta - m);
        // Quantized fitness makes equal-fitness challenges common.
        let fitness = (rng.random::<f64>() * 50.0).round() / 10.0;
        let d = Descriptor::new(m, j);
        archive
            .insert(Individual::new(Genome::root_only(), Evaluation { fitness, descriptor: d }))
            .map_err(|e| e.to_string())?;
        let slot = reference.entry((m, j)).or_insert(f64::NEG_INFINITY);
        *slot = slot.max(fitness);
    }
    let got: BTreeMap<(usize, usize), f64> = archive.iter().map(|i| ((i.descriptor.m, i.descriptor.j), i.fitness)).collect();
    ensure(got == reference, || "archive differs from the max-keeping map".into())?;
    let lookups_ok = archive.iter().all(|i| archive.get(i.descriptor).is_some());
    ensure(lookups_ok, || "cell lookup broken".into())
}

/// Reflects off the nearest bound one bounce at a time.
fn reflect_until_in_range(mut v: f64, lo: f64, hi: f64) -> f64 {
    loop {
        if v < lo {
            v = 2.0 * lo - v;
        } else if v > hi {
            v = 2.0 * hi - v;
        } else {
            return v;
        }
    }
}

/// Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value.
fn ks_two_sample(mut a: Vec<f64>, mut b: Vec<f64>) -> (f64, f64) {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < n && j < m {
        let x = a[i].min(b[j]);
        while i < n && a[i] <= x {
            i += 1;
        }
        while j < m && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n * m) as f64 / (n + m) as f64;
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    let mut p = 0.0;
    for k in 1..=200 {
        let k = k as f64;
        p += 2.0 * (-1f64).powf(k - 1.0) * (-2.0 * k * k * lambda * lambda).exp();
    }
    (d, p.clamp(0.0, 1.0))
}

fn bounce_oracle() -> Result<(f64, f64), String> {
    let (lo, hi) = (-1.57, 1.57);
    // Mid-range start with a spread wide enough that most draws overshoot.
    let normal = Normal::new(0.0, hi - lo).map_err(|e| e.to_string())?;
    let mut rng_a = ChaCha8Rng::seed_from_u64(5);
    let mut rng_b = ChaCha8Rng::seed_from_u64(6);
    let ours: Vec<f64> = (0..KS_SAMPLES).map(|_| bounce_back(normal.sample(&mut rng_a), lo, hi)).collect();
    let reference: Vec<f64> = (0..KS_SAMPLES).map(|_| reflect_until_in_range(normal.sample(&mut rng_b), lo, hi)).collect();
    ensure(ours.iter().all(|v| (lo..=hi).contains(v)), || "bounce_back left the range".into())?;
    let (d, p) = ks_two_sample(ours, reference);
    ensure(p > KS_ALPHA, || format!("KS D = {d:.5}, p = {p:.4}"))?;
    Ok((d, p))
}

fn oracles() -> Check {
    sort_oracle()?;
    archive_oracle()?;
    let (d, p) = bounce_oracle()?;
    Ok(format!(
        "sort {SORT_POPULATIONS}/{SORT_POPULATIONS} exact; archive exact after {ARCHIVE_INSERTIONS} inserts; bounce-back KS D={d:.5} p={p:.3}"
    ))
}

// ------------------------------------------------------------------ simulator

fn with_amplitude(node: &MorphNode, alpha: f64) -> MorphNode {
    let module = match &node.module {
        Module::Brick => Module::Brick,
        Module::Servo(g) => Module::Servo(ControllerGenes { alpha, ..*g }),
    };
    let mut out = MorphNode::new(module, node.orientation);
    for (slot, child) in node.children().iter().enumerate() {
        if let Some(c) = child {
            out = out.with_child(slot, with_amplitude(c, alpha));
        }
    }
    out
}

/// Root brick with one servo on its +X face, written out step by step.
fn paddler_oracle(genes: &ControllerGenes, cfg: &SimConfig) -> f64 {
    let warmup = (cfg.warmup / cfg.dt).round() as usize;
    let total = ((cfg.warmup + cfg.eval_time) / cfg.dt).round() as usize;
    let pose = |step: usize| {
        let t = step as f64 * cfg.dt;
        let theta = (genes.alpha * (genes.omega * t + genes.phi).sin() + genes.offset).clamp(-1.57, 1.57);
        // Hinge at x = 0.5; the servo center swings half a unit about the Y axis.
        let servo = [0.5 + 0.5 * theta.cos(), 0.0, -0.5 * theta.sin()];
        let root = [0.0f64; 3];
        let low = root[2].min(servo[2]);
        let contact = [root[2] - low <= cfg.contact_epsilon, servo[2] - low <= cfg.contact_epsilon];
        ([root, servo], contact)
    };
    let (mut prev, mut prev_contact) = pose(0);
    let mut x = 0.0;
    let mut y = 0.0;
    let mut at_warmup = (0.0, 0.0);
    for step in 1..=total {
        let (cur, contact) = pose(step);
        let mut dx = 0.0;
        let mut dy = 0.0;
        let mut k = 0.0;
        for i in 0..2 {
            if contact[i] && prev_contact[i] {
                dx += cur[i][0] - prev[i][0];
                dy += cur[i][1] - prev[i][1];
                k += 1.0;
            }
        }
        if k > 0.0 {
            x -= dx / k;
            y -= dy / k;
        }
        if step == warmup {
            at_warmup = (x, y);
        }
        prev = cur;
        prev_contact = contact;
    }
    (x - at_warmup.0).hypot(y - at_warmup.1)
}

fn simulator() -> Check {
    let limits = MorphLimits::default();
    let cfg = SimConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(31);

    let root = simulate(&build_phenotype(&Genome::root_only(), &limits), &cfg).fitness;
    ensure(root == 0.0, || format!("descriptor (1,0) robot scored {root}"))?;

    let mut zero_checked = 0;
    let mut genomes = Vec::new();
    for _ in 0..300 {
        let g = random_genome(&mut rng, &limits);
        let still = Genome::new(with_amplitude(g.root(), 0.0)).map_err(|e| e.to_string())?;
        let f = simulate(&build_phenotype(&still, &limits), &cfg).fitness;
        ensure(f == 0.0, || format!("zero-amplitude robot scored {f}: {}", still.to_text()))?;
        zero_checked += 1;
        genomes.push(g);
    }

    let mut angles = 0;
    for _ in 0..100_000 {
        let mut genes = ControllerGenes::random(&mut rng);
        if rng.random_bool(0.5) {
            genes.alpha = 1.57 * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            genes.offset = 1.57 * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        }
        let t = rng.random_range(0.0..cfg.warmup + cfg.eval_time);
        let a = joint_angle(&genes, t);
        ensure(a.abs() <= ANGLE_LIMIT, || format!("joint angle {a} for {genes:?} at t={t}"))?;
        angles += 1;
    }

    let mut worst = 0.0f64;
    for g in genomes.iter().take(100) {
        let p = build_phenotype(g, &limits);
        let mut sim = Simulation::new(&p, cfg);
        let rest = sim.local_positions().to_vec();
        let pairs: Vec<(usize, usize, f64)> = (0..p.len())
            .flat_map(|a| (a + 1..p.len()).map(move |b| (a, b)))
            .filter(|&(a, b)| p.modules[a].segment == p.modules[b].segment)
            .map(|(a, b)| (a, b, dist(rest[a], rest[b])))
            .collect();
        while sim.advance() {
            let now = sim.local_positions();
            for &(a, b, d0) in &pairs {
                worst = worst.max((dist(now[a], now[b]) - d0).abs());
            }
        }
    }
    ensure(worst <= RIGID_TOL, || format!("rigid segment distance drifted by {worst:e}"))?;

    for (k, g) in genomes.iter().take(100).enumerate() {
        let p = build_phenotype(g, &limits);
        let clean = simulate(&p, &cfg).fitness;
        let mut sim = Simulation::new(&p, cfg);
        let scale = 10f64.powi(k as i32 % 7);
        sim.nudge(scale, -2.0 * scale);
        while sim.step_index() < cfg.warmup_steps() {
            sim.nudge(rng.random_range(-scale..scale), rng.random_range(-scale..scale));
            sim.advance();
        }
        while sim.advance() {}
        let injected = sim.travelled();
        ensure(injected.to_bits() == clean.to_bits(), || {
            format!("pre-warm-up injection changed fitness {clean} -> {injected}")
        })?;
    }

    let genes = ControllerGenes { alpha: 1.0, omega: 1.0, phi: 0.0, offset: 0.0 };
    let paddler = Genome::new(MorphNode::brick().with_child(0, MorphNode::servo(genes))).map_err(|e| e.to_string())?;
    let got = simulate(&build_phenotype(&paddler, &limits), &cfg).fitness;
    let expected = paddler_oracle(&genes, &cfg);
    ensure(expected > 0.0 && (got - expected).abs() <= PADDLER_TOL, || format!("paddler {got} vs oracle {expected}"))?;

    Ok(format!(
        "(1,0) -> 0; {zero_checked} zero-amplitude robots -> 0; {angles} angles within limit; max segment drift {worst:.1e}; warm-up injection exact; paddler {got:.9} = oracle {expected:.9}"
    ))
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

// --------------------------------------------------------------- monotonicity

fn monotonicity(runs: &[DeskRun]) -> Check {
    for r in runs {
        for w in r.stats.windows(2) {
            ensure(w[1].qd_score >= w[0].qd_score && w[1].coverage >= w[0].coverage, || {
                format!("{} decreases at generation {}", r.dir.display(), w[1].generation)
            })?;
        }
    }
    Ok(format!("{} runs non-decreasing in QD-score and coverage", runs.len()))
}

// ---------------------------------------------------------------------- trend

fn trend(runs: &[DeskRun]) -> Check {
    let finals = |algorithm: AlgorithmKind, f: fn(&io::StatsRow) -> f64| {
        median(runs.iter().filter(|r| r.algorithm == algorithm).map(|r| f(r.stats.last().unwrap())).collect())
    };
    let cov = |a| finals(a, |s| s.coverage);
    let qd = |a| finals(a, |s| s.qd_score);
    let (ce, cn, cm) = (cov(AlgorithmKind::Ea), cov(AlgorithmKind::Nsga2), cov(AlgorithmKind::MapElites));
    let (qe, qn, qm) = (qd(AlgorithmKind::Ea), qd(AlgorithmKind::Nsga2), qd(AlgorithmKind::MapElites));
    let detail = format!(
        "median coverage ME {cm:.4} NSGA-II {cn:.4} EA {ce:.4}; median QD-score ME {qm:.1} NSGA-II {qn:.1} EA {qe:.1}"
    );
    let mut failed = Vec::new();
    if !(cm > cn && cn > ce) {
        failed.push("coverage order");
    }
    if cm < MIN_ME_COVERAGE {
        failed.push("ME coverage below 0.9");
    }
    if !(qm > qn && qm > qe) {
        failed.push("ME QD-score not highest");
    }
    if failed.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{} ({detail})", failed.join(", ")))
    }
}

// --------------------------------------------------------------------- replay

fn replay(runs: &[DeskRun]) -> Check {
    let limits = MorphLimits::default();
    let cfg = SimConfig::default();
    let mut elites = 0;
    for r in runs {
        let path = r.dir.join("archive.csv");
        let checks = runner::verify_archive(&path, &limits, &cfg).map_err(|e| e.to_string())?;
        ensure(!checks.is_empty(), || format!("{} is empty", path.display()))?;
        if let Some(bad) = checks.iter().find(|c| !c.matches()) {
            return Err(format!("{} cell {}: recorded {} replayed {}", path.display(), bad.descriptor, bad.recorded, bad.replayed));
        }
        elites += checks.len();
    }
    Ok(format!("{elites} elites across {} archive dumps reproduce bit-exactly", runs.len()))
}

fn main() {
    // Libtest flags (e.g. --nocapture) are accepted and ignored.
    let started = Instant::now();
    let out = tempfile::tempdir().expect("temp dir");
    let desk = desk_runs(out.path());
    let desk_time = started.elapsed();

    let with_desk = |f: fn(&[DeskRun]) -> Check| -> Check { desk.as_ref().map_err(|e| format!("desk runs failed: {e}")).and_then(|r| f(r)) };
    let criteria: Vec<Criterion> = vec![
        ("determinism", Box::new(determinism)),
        ("budget accounting", Box::new(move || with_desk(budget))),
        ("oracle equivalence", Box::new(oracles)),
        ("simulator invariants", Box::new(simulator)),
        ("monotonicity", Box::new(move || with_desk(monotonicity))),
        ("trend reproduction", Box::new(move || with_desk(trend))),
        ("replay", Box::new(move || with_desk(replay))),
    ];

    println!("\nacceptance (desk-scale runs took {:.1}s)", desk_time.as_secs_f64());
    let mut failures = 0;
    for (name, check) in &criteria {
        let t = Instant::now();
        match check() {
            Ok(detail) => println!("PASS {name}: {detail} [{:.1}s]", t.elapsed().as_secs_f64()),
            Err(detail) => {
                failures += 1;
                println!("FAIL {name}: {detail} [{:.1}s]", t.elapsed().as_secs_f64());
            }
        }
    }
    println!("{} of {} criteria passed\n", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
