// Copyright 2026 The Ergonet Contributors
// SPDX-License-Identifier: Apache-2.0

//! Acceptance suite. Runs without the libtest harness so that every
//! criterion prints exactly one PASS/FAIL line; exits non-zero if any fails.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ergonet::experiments::{
    dirichlet_sup, loglog_slope, square_map_cauchy_defect, square_map_separation, ww_abel_sweep, ww_cesaro_sup,
    ww_cesaro_sweep, SkewProductModel, DEFAULT_SUP_SLACK,
};
use ergonet::mean_ergodic::{default_paths, equivalence_battery, mean_ergodic_projection, BatteryOptions};
use ergonet::nets::{cesaro, cesaro_operator, ChainRule, FolnerSet, NetScheme};
use ergonet::operators::{Formula, GroupElement, Matrix, SemigroupRep};
use ergonet::random::{bounded_abelian, peripheral_contraction, random_contraction, random_vector};
use ergonet::space::{p_norm, PNorm, SampleGrid, Vector, C64};
use ergonet::uniform::{build_family, FamilyBase, FamilyKind, IndexGrid, Probe};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn spectral(m: &Matrix) -> f64 {
    m.clone().svd(false, false).singular_values[0]
}

/// 1. `A_N x - A_N S x = (x - S^N x) / N` in all three norms.
fn telescoping() -> Outcome {
    let norms = [PNorm::One, PNorm::Two, PNorm::Inf];
    let mut worst = 0.0f64;
    for i in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + i);
        let d = rng.random_range(1..=16);
        let p = norms[i as usize % 3];
        let t = random_contraction(&mut rng, d, p);
        let rep = SemigroupRep::powers(t.clone());
        let x = random_vector(&mut rng, d);
        let sx = t.matrix() * &x;
        for n in [10u64, 1000] {
            // S^N x by N plain matrix-vector products
            let mut snx = x.clone();
            for _ in 0..n {
                snx = t.matrix() * snx;
            }
            let lhs = cesaro(&rep, n, &x).unwrap() - cesaro(&rep, n, &sx).unwrap();
            let rhs = (&x - snx) / C64::new(n as f64, 0.0);
            worst = worst.max(p_norm(&(lhs - rhs), p));
        }
    }
    outcome(worst <= 1e-12, format!("max residual {worst:.3e} over 200 contractions x N in {{10, 1000}}"))
}

/// 2. Cesàro operators converge to the mean ergodic projection at rate 1/N.
fn projection_rate() -> Outcome {
    let ns: Vec<u64> = (4..=20).map(|j| 1u64 << j).collect();
    let (mut worst_gap, mut worst_oracle) = (0.0f64, 0.0f64);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(2000 + i);
        let d = rng.random_range(2..=8);
        let m = peripheral_contraction(&mut rng, d);
        let rep = SemigroupRep::powers(m.op.clone());
        let p = mean_ergodic_projection(&rep, 1e-8).unwrap();
        // the construction W E W* is the eigendecomposition oracle
        worst_oracle = worst_oracle.max(spectral(&(p.matrix() - &m.projection)));
        let gaps: Vec<f64> = ns.iter().map(|&n| spectral(&(cesaro_operator(m.op.matrix(), n) - &m.projection))).collect();
        worst_gap = worst_gap.max(*gaps.last().unwrap());
        let xs: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
        let s = loglog_slope(&xs, &gaps);
        lo = lo.min(s);
        hi = hi.max(s);
    }
    let ok = worst_gap <= 1e-3 && worst_oracle <= 1e-8 && lo >= -1.15 && hi <= -0.85;
    outcome(
        ok,
        format!(
            "max ||A_N - P|| at N=2^20 {worst_gap:.3e}; slopes in [{lo:.4}, {hi:.4}]; projection vs oracle {worst_oracle:.3e}"
        ),
    )
}

/// 3. Every evaluated condition holds on random bounded commuting semigroups.
fn battery() -> Outcome {
    let opts = BatteryOptions::default();
    let (mut flags, mut failures) = (0usize, vec![]);
    for i in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(3000 + i);
        let d = rng.random_range(1..=6);
        let k = rng.random_range(1..=3);
        let m = bounded_abelian(&mut rng, d, k);
        let rep = if k == 1 {
            SemigroupRep::powers(m.generators[0].clone()).with_bound(m.bound).unwrap()
        } else {
            SemigroupRep::abelian(m.generators.clone()).unwrap().with_bound(m.bound).unwrap()
        };
        let x = random_vector(&mut rng, d);
        match equivalence_battery(&rep, Some(&x), &default_paths(&rep), &opts) {
            Ok(r) => {
                let mut all = r.conditions.clone();
                all.extend(r.per_vector.map(|v| v.conditions).unwrap_or_default());
                for c in all {
                    if let Some(h) = c.holds {
                        flags += 1;
                        if !h {
                            failures.push(format!("#{i} ({}) {}", c.id, c.name));
                        }
                    }
                }
            }
            Err(e) => failures.push(format!("#{i}: {e}")),
        }
    }
    let detail = if failures.is_empty() {
        format!("{flags} condition flags over 100 semigroups, all true")
    } else {
        format!("{} failures: {}", failures.len(), failures.join("; "))
    };
    outcome(failures.is_empty(), detail)
}

/// 4. The squaring map on [0,1] is not mean ergodic.
fn square_map() -> Outcome {
    let grid = SampleGrid::interval_accumulating_at_one(10_001, 52).unwrap();
    let sep = square_map_separation(&grid, 1e-10).unwrap();
    let pairing = sep.separation.witness_pairing.unwrap_or(f64::INFINITY);
    let w = sep.separation.witness_coefficients.clone();
    // the witness is delta_0 - delta_1 up to scale
    let shape = w.is_some_and(|w| w.len() == 2 && (w[0] + w[1]).norm() < 1e-12);
    let x = Formula::Polynomial { coeffs: vec![0.0, 1.0] };
    let defect = square_map_cauchy_defect(&x, &grid, 1 << 5, 1 << 10).unwrap();
    outcome(
        !sep.separation.separates && shape && pairing <= 1e-12 && defect >= 0.2,
        format!("separates = {}, witness pairing {pairing:.1e}, cauchy defect {defect:.5} (threshold 0.2)", sep.separation.separates),
    )
}

/// 5. Dirichlet means stay large near lambda = 1.
fn dirichlet() -> Outcome {
    let mut ok = true;
    let mut parts = vec![];
    for n in [100u64, 1000, 10_000] {
        let r = dirichlet_sup(n, 8 * n as usize).unwrap();
        // independent closed form of the lobe value at theta = pi/N
        let closed = 1.0 / (n as f64 * (PI / (2.0 * n as f64)).sin());
        let err = (r.lobe_direct - closed).abs();
        ok &= r.sup >= 0.5 && err <= 1e-6;
        parts.push(format!("N={n}: sup {:.4}, lobe error {err:.1e}", r.sup));
    }
    outcome(ok, parts.join("; "))
}

fn skew_cesaro_ns() -> Vec<u64> {
    (6..=12).map(|j| 1u64 << j).collect()
}

/// 6. Cesàro Wiener-Wintner sups decay like N^{-1/2}.
fn ww_cesaro() -> Outcome {
    let r = ww_cesaro_sweep(&SkewProductModel::default(), &skew_cesaro_ns(), DEFAULT_SUP_SLACK).unwrap();
    let last = r.rows.last().unwrap().sup_upper;
    outcome(
        (-0.6..=-0.4).contains(&r.slope) && last < 0.05,
        format!("slope {:.4} in [-0.6, -0.4]; sup_upper(2^12) {last:.4} < 0.05", r.slope),
    )
}

/// 7. Abel sups decrease and track the Cesàro sups at N = 2^j.
fn ww_abel() -> Outcome {
    let model = SkewProductModel::default();
    let js: Vec<u32> = (4..=10).collect();
    let a = ww_abel_sweep(&model, &js, 1e-9, DEFAULT_SUP_SLACK).unwrap();
    let ups: Vec<f64> = a.rows.iter().map(|r| r.sup_upper).collect();
    let monotone = ups.windows(2).all(|w| w[1] < w[0]);
    let mut worst = 0.0f64;
    for (j, up) in js.iter().zip(&ups) {
        let c = ww_cesaro_sup(&model, 1u64 << j, DEFAULT_SUP_SLACK).unwrap();
        worst = worst.max((up / c.upper).max(c.upper / up));
    }
    outcome(monotone && worst <= 3.0, format!("monotone = {monotone}; worst Abel/Cesàro ratio {worst:.3} (limit 3)"))
}

/// Points of `F` not in `h + F`, plus the reverse, over `|F|`, by enumeration.
fn box_symmetric_difference(lens: &[u64], h: &[u64]) -> f64 {
    let mut pts = vec![vec![]];
    for &l in lens {
        pts = pts.into_iter().flat_map(|p: Vec<u64>| (0..l).map(move |v| [p.clone(), vec![v]].concat())).collect();
    }
    let f: BTreeSet<Vec<u64>> = pts.into_iter().collect();
    let shifted: BTreeSet<Vec<u64>> = f.iter().map(|p| p.iter().zip(h).map(|(a, b)| a + b).collect()).collect();
    f.symmetric_difference(&shifted).count() as f64 / f.len() as f64
}

/// 8. Sampled defects of kinds a, b, e, f never exceed their explicit bounds.
fn family_bounds() -> Outcome {
    let mut viol = vec![];
    let tol = |b: f64| b * (1.0 + 1e-9) + 1e-13;
    for i in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(8000 + i);
        let d = rng.random_range(1..=5);

        // (a) Cesàro of lambda S: 2k ||x|| / N
        let t = random_contraction(&mut rng, d, PNorm::Two);
        let x = random_vector(&mut rng, d);
        let (n, k) = (rng.random_range(1..=400u64), rng.random_range(1..=6u64));
        let fam = build_family(FamilyKind::A, FamilyBase::Rep(SemigroupRep::powers(t.clone())), IndexGrid::circle(32).unwrap()).unwrap();
        let r = fam.uniform_invariance_defect(&GroupElement::Step(k), &Probe::Vector(x.clone()), &NetScheme::Cesaro { n }).unwrap();
        let b = 2.0 * k as f64 * x.norm() / n as f64;
        if r.sup > tol(b) {
            viol.push(format!("a#{i}: {} > {b}", r.sup));
        }

        // (b) Abel of lambda S against its normalized truncation: r^N + r^N
        let rr = rng.random_range(0.3..0.97);
        let eps = rng.random_range(1e-3..0.2);
        let fam = build_family(FamilyKind::B, FamilyBase::Rep(SemigroupRep::powers(t)), IndexGrid::circle(32).unwrap()).unwrap();
        let ap = fam.approximation_defect(&NetScheme::Abel { r: rr, tail_eps: 1e-13 }, eps, &[Probe::Vector(x.clone())]).unwrap();
        let cut = ap.abel_terms.unwrap() as i32;
        let b = (rr.powi(cut) + rr.powi(cut)) * x.norm();
        if ap.defect > tol(b) {
            viol.push(format!("b#{i}: {} > {b}", ap.defect));
        }

        // (e) doubling chains of torus-twisted commuting generators: 2 M^2 ||x|| / N
        let kk = rng.random_range(1..=2usize);
        let m = bounded_abelian(&mut rng, d, kk);
        let rep = SemigroupRep::abelian(m.generators.clone()).unwrap().with_bound(m.bound).unwrap();
        let x = random_vector(&mut rng, d);
        let length = rng.random_range(kk..=6);
        let axis = rng.random_range(0..kk);
        // longest Cesàro factor acting along `axis`
        let n_axis = (0..length).filter(|j| j % kk == axis).map(|j| 1u64 << (j.div_ceil(kk) + 1)).max().unwrap();
        let mut g = vec![0u64; kk];
        g[axis] = 1;
        let fam = build_family(FamilyKind::E, FamilyBase::Rep(rep.clone()), IndexGrid::torus(kk, if kk == 1 { 24 } else { 6 }).unwrap()).unwrap();
        let r = fam
            .uniform_invariance_defect(&GroupElement::Multi(g), &Probe::Vector(x.clone()), &NetScheme::ConvexChain { rule: ChainRule::Doubling, length })
            .unwrap();
        let b = 2.0 * m.bound * m.bound * x.norm() / n_axis as f64;
        if r.sup > tol(b) {
            viol.push(format!("e#{i}: {} > {b}", r.sup));
        }

        // (f) Følner boxes twisted by torus characters: |F ^ hF| / |F| M ||x||
        let lens: Vec<u64> = (0..kk).map(|_| rng.random_range(1..=24)).collect();
        let h: Vec<u64> = (0..kk).map(|_| rng.random_range(0..=4)).collect();
        let fam = build_family(FamilyKind::F, FamilyBase::Rep(rep), IndexGrid::torus(kk, if kk == 1 { 24 } else { 6 }).unwrap()).unwrap();
        let set = FolnerSet::Box { start: vec![0; kk], lens: lens.clone() };
        let r = fam.uniform_invariance_defect(&GroupElement::Multi(h.clone()), &Probe::Vector(x.clone()), &NetScheme::Folner { set }).unwrap();
        let b = box_symmetric_difference(&lens, &h) * m.bound * x.norm();
        if r.sup > tol(b) {
            viol.push(format!("f#{i}: {} > {b}", r.sup));
        }
    }
    outcome(viol.is_empty(), if viol.is_empty() { "200 instances within bounds".into() } else { viol.join("; ") })
}

/// 9. Chain defect of the swap family with a length-2 Cesàro beta.
fn chain_defect_decay() -> Outcome {
    let swap = SemigroupRep::powers(
        ergonet::operators::DenseOperator::from_real_rows(2, &[0.0, 1.0, 1.0, 0.0]).unwrap(),
    );
    let fam = build_family(FamilyKind::A, FamilyBase::Rep(swap), IndexGrid::circle(64).unwrap()).unwrap();
    let x = Probe::Vector(Vector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]));
    let beta = NetScheme::Cesaro { n: 2 };
    let d: Vec<f64> =
        [100u64, 1000, 10_000].iter().map(|&n| fam.chain_defect(&NetScheme::Cesaro { n }, &beta, &x).unwrap()).collect();
    outcome(
        d[2] < 1e-3 && d[0] > d[1] && d[1] > d[2],
        format!("defects {:.3e}, {:.3e}, {:.3e} at N = 1e2, 1e3, 1e4", d[0], d[1], d[2]),
    )
}

/// 10. Shipped configs give byte-identical report.csv with 1 and 8 workers.
fn determinism() -> Outcome {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut configs: Vec<PathBuf> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    configs.sort();
    let tmp = tempfile::tempdir().unwrap();
    let mut bad = vec![];
    for c in &configs {
        let name = c.file_stem().unwrap().to_str().unwrap();
        let sub = ergonet::cli::RunConfig::parse(&std::fs::read_to_string(c).unwrap()).unwrap().subcommand.name();
        let mut csvs = vec![];
        for jobs in ["1", "8"] {
            let out = tmp.path().join(format!("{name}-{jobs}"));
            let o = Command::new(env!("CARGO_BIN_EXE_ergonet"))
                .args([sub, "--config"])
                .arg(c)
                .arg("--out")
                .arg(&out)
                .args(["--jobs", jobs, "--no-cache"])
                .output()
                .unwrap();
            if !matches!(o.status.code(), Some(0 | 1)) {
                bad.push(format!("{name} (jobs {jobs}): {}", String::from_utf8_lossy(&o.stderr).trim()));
            }
            csvs.push(std::fs::read(out.join("report.csv")).unwrap_or_default());
        }
        if csvs[0].is_empty() || csvs[0] != csvs[1] {
            bad.push(format!("{name}: report.csv differs"));
        }
    }
    outcome(bad.is_empty(), if bad.is_empty() { format!("{} configs identical", configs.len()) } else { bad.join("; ") })
}

/// Name, check and runtime budget in seconds.
type Criterion = (&'static str, fn() -> Outcome, Option<u64>);

fn main() {
    let criteria: [Criterion; 10] = [
        ("telescoping exactness", telescoping, Some(10)),
        ("projection-net agreement", projection_rate, Some(60)),
        ("equivalence battery consistency", battery, Some(60)),
        ("non-mean-ergodic witness", square_map, Some(30)),
        ("Dirichlet non-uniformity", dirichlet, Some(10)),
        ("Cesàro Wiener-Wintner rate", ww_cesaro, Some(120)),
        ("Abel Wiener-Wintner rate", ww_abel, Some(120)),
        ("uniform-family bounds", family_bounds, Some(60)),
        ("chain defect decay", chain_defect_decay, None),
        ("determinism across workers", determinism, None),
    ];
    let mut failed = 0;
    for (i, (name, f, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = f();
        let took = start.elapsed();
        let in_time = budget.is_none_or(|b| took < Duration::from_secs(b));
        let passed = o.passed && in_time;
        failed += usize::from(!passed);
        let limit = budget.map_or(String::new(), |b| format!(" / {b}s"));
        println!(
            "criterion {:>2} {} {name}: {} [{:.2}s{limit}]",
            i + 1,
            if passed { "PASS" } else { "FAIL" },
            o.detail,
            took.as_secs_f64()
        );
    }
    println!("acceptance: {} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
