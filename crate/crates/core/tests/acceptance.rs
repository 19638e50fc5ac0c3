//! Acceptance criteria 1-13. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::time::Instant;

use fixedbitset::FixedBitSet;
use rand::Rng;

use stochmatch::algorithms::derive_params;
use stochmatch::bench::{omniscient_matching, Estimation};
use stochmatch::exact::{check_all_splits, exact_expectation};
use stochmatch::generators::{gen_named, NAMED_FAMILIES};
use stochmatch::graph::*;
use stochmatch::kset::*;
use stochmatch::model::{rng_for, ProbModel, Stream};
use stochmatch::suites::{run_suite, BudgetCheck, SuiteConfig, SuiteOutput};

const SEED: u64 = 20_240_601;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn random_graph<R: Rng>(rng: &mut R, max_n: usize, max_m: usize) -> Graph {
    let n = rng.random_range(1..=max_n);
    let q: f64 = rng.random();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if edges.len() < max_m && rng.random::<f64>() < q {
                edges.push((u, v));
            }
        }
    }
    Graph::new(n, edges).unwrap()
}

fn random_instance<R: Rng>(rng: &mut R, k: usize, max_sets: usize) -> KSetInstance {
    let u = rng.random_range(k..=2 * k + 4);
    let want = rng.random_range(1..=max_sets);
    let mut sets: Vec<Vec<usize>> = Vec::new();
    for _ in 0..4 * want {
        if sets.len() == want {
            break;
        }
        let size = rng.random_range(1..=k);
        let mut s: Vec<usize> = Vec::new();
        while s.len() < size {
            let x = rng.random_range(0..u);
            if !s.contains(&x) {
                s.push(x);
            }
        }
        s.sort_unstable();
        if !sets.contains(&s) {
            sets.push(s);
        }
    }
    KSetInstance::new(u, k, sets).unwrap()
}

fn c1() -> Outcome {
    let mut rng = rng_for(SEED, Stream::Generator);
    let mut bad = 0;
    for _ in 0..1000 {
        let g = random_graph(&mut rng, 10, ORACLE_EDGE_LIMIT);
        if max_matching(&g).len() != max_matching_oracle(&g).unwrap().len() {
            bad += 1;
        }
    }
    outcome(bad == 0, format!("1000 graphs with n <= 10 and m <= {ORACLE_EDGE_LIMIT}, {bad} mismatches"))
}

fn c2() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut notes = Vec::new();
    for name in NAMED_FAMILIES {
        let g = gen_named(name).unwrap().graph;
        for p in [0.3, 0.5, 0.8] {
            let exact = exact_expectation(&g, &vec![p; g.m()]).unwrap();
            let mc = omniscient_matching(&g, &ProbModel::uniform(p).unwrap(), Estimation::MonteCarlo { trials: 10_000, seed: SEED })
                .unwrap();
            let z = (mc.mean - exact).abs() / mc.se.max(1e-12);
            worst = worst.max(if mc.se == 0.0 && mc.mean == exact { 0.0 } else { z });
            if p == 0.5 && (name == "triangle" || name == "k22") {
                notes.push(format!("{name}={exact}"));
            }
        }
    }
    let tri = exact_expectation(&gen_named("triangle").unwrap().graph, &[0.5; 3]).unwrap();
    let k22 = exact_expectation(&gen_named("k22").unwrap().graph, &[0.5; 4]).unwrap();
    let pass = worst <= 4.0 && (tri - 0.875).abs() < 1e-12 && (k22 - 1.375).abs() < 1e-12;
    outcome(pass, format!("max |z| = {worst:.2}; exact {}", notes.join(" ")))
}

fn c3() -> Outcome {
    let mut rng = rng_for(SEED, Stream::Extra);
    let (mut checked, mut bad) = (0, 0);
    while checked < 10_000 {
        let g = random_graph(&mut rng, 12, usize::MAX);
        let keep1: Vec<bool> = (0..g.m()).map(|_| rng.random::<f64>() < 0.5).collect();
        let keep2: Vec<bool> = (0..g.m()).map(|_| rng.random::<f64>() < 0.8).collect();
        let m1 = max_matching_with(&g, |e| keep1[e], None);
        let m2 = max_matching_with(&g, |e| keep2[e], None);
        let l = 2 * rng.random_range(0..5) + 1;
        if m2.len() > m1.len() {
            checked += 1;
            let count = short_augmenting_paths(&m1, &m2, &g, l).unwrap().len();
            if (count as f64) < short_path_bound(m1.len(), m2.len(), l) - 1e-9 {
                bad += 1;
            }
        }
    }
    outcome(bad == 0, format!("{checked} tuples with |M2| > |M1|, n <= 12, {bad} violations"))
}

fn theorem_rows(out: &SuiteOutput, bound: f64) -> (bool, String) {
    let mut pass = true;
    let mut parts = Vec::new();
    for row in &out.rows {
        let r = &row.record;
        let ok = r.ratio >= bound - 2.0 * r.ci;
        pass &= ok;
        parts.push(format!("{} ratio {:.4} ± {:.4}", r.family, r.ratio, r.ci));
    }
    (pass, parts.join("; "))
}

fn c4(out: &SuiteOutput) -> Outcome {
    let params = derive_params(0.5, 0.5).unwrap();
    let mut pass = params.path_len == 7 && params.rounds == 23;
    for eps in [0.3, 0.5, 0.8] {
        for p in [0.3, 0.5, 0.9] {
            pass &= derive_params(eps, p).unwrap().guarantee() >= 1.0 - eps;
        }
    }
    let (ok, text) = theorem_rows(out, 0.5);
    outcome(pass && ok, format!("L={} R={}; analytic grid ok={pass}; {text} (need >= 0.5 - 2ci)", params.path_len, params.rounds))
}

fn c5(out: &SuiteOutput) -> Outcome {
    let (ok, text) = theorem_rows(out, 0.25);
    outcome(ok, format!("{text} (need >= 0.25 - 2ci)"))
}

fn c6(out: &SuiteOutput) -> Outcome {
    let r = &out.rows[0].record;
    let bound = 5.0 / 6.0 + 0.05;
    outcome(
        r.ratio <= bound,
        format!(
            "R={} ratio {:.4} ± {:.4}, alg {:.2} vs omni {:.2} (need <= {bound:.4}); \
             on this schedule A and D still match into B1 and C1, so the union \
             supports about 11t/8 and the ratio tends to 11/12",
            r.rounds, r.ratio, r.ci, r.alg_mean, r.omni_mean
        ),
    )
}

fn c7(out: &SuiteOutput) -> Outcome {
    let sched = &out.rows.iter().find(|r| r.record.algorithm == "naive-scheduled").unwrap().record;
    let adapt = &out.find("adaptive", 10).next().unwrap().record;
    let bound = 5.0 / 6.0 + 0.05;
    outcome(
        sched.ratio <= bound && adapt.ratio >= 0.95,
        format!(
            "naive-scheduled R={} ratio {:.4} (need <= {bound:.4}); adaptive R=10 ratio {:.4} (need >= 0.95)",
            sched.rounds, sched.ratio, adapt.ratio
        ),
    )
}

fn c8(out: &SuiteOutput) -> Outcome {
    let at = |t: usize| {
        out.rows
            .iter()
            .find(|r| r.extra[0] == t.to_string())
            .map(|r| r.record.ratio)
            .unwrap()
    };
    let (small, large) = (at(256), at(4096));
    outcome(
        large < small && large <= 0.5,
        format!("ratio t=256 {small:.4}, t=4096 {large:.4} (need decrease and <= 0.5)"),
    )
}

fn c9(out: &SuiteOutput) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for row in &out.rows {
        let bound: f64 = row.extra[1].parse().unwrap();
        pass &= row.record.alg_mean >= bound;
        parts.push(format!("n={} p={} E={:.2} >= {:.2}", row.extra[0], row.record.p_or_f, row.record.alg_mean, bound));
    }
    outcome(pass, parts.join("; "))
}

fn c10() -> Outcome {
    let mut rng = rng_for(SEED, Stream::Algorithm);
    let mut violations = 0;
    for _ in 0..200 {
        let g = random_graph(&mut rng, 8, 12);
        let probs: Vec<f64> = (0..g.m()).map(|_| rng.random_range(0.05..1.0)).collect();
        violations += check_all_splits(&g, &probs).unwrap();
    }
    for i in 0..200 {
        let inst = random_instance(&mut rng, 2 + i % 2, 10);
        let probs: Vec<f64> = (0..inst.len()).map(|_| rng.random_range(0.05..1.0)).collect();
        violations += check_all_splits(&inst, &probs).unwrap();
    }
    outcome(violations == 0, format!("200 graphs + 200 set instances, all splits, {violations} violations"))
}

fn c11() -> Outcome {
    let mut rng = rng_for(SEED, Stream::Realization);
    let s = 3;
    let (mut ratio_bad, mut count_bad) = (0, 0);
    let mut worst = f64::INFINITY;
    for i in 0..500 {
        let k = 2 + i % 2;
        let inst = random_instance(&mut rng, k, 14);
        let opt = packing_oracle(&inst).unwrap().len();
        let ls = local_search_packing(&inst, s).unwrap().len();
        if opt > 0 {
            worst = worst.min(ls as f64 / opt as f64 - (2.0 / k as f64 - 0.1));
        }
        if (ls as f64) < (2.0 / k as f64 - 0.1) * opt as f64 - 1e-9 {
            ratio_bad += 1;
        }
        let mut allowed = FixedBitSet::with_capacity(inst.len());
        allowed.insert_range(..);
        for b in [Packing::empty(), greedy_packing(&inst, &allowed)] {
            let found = find_aug_structures(&inst, &b, s).unwrap().len();
            if (found as f64) < structure_count_bound(k, s, opt, b.len()).floor() {
                count_bad += 1;
            }
        }
    }
    outcome(
        ratio_bad == 0 && count_bad == 0,
        format!("500 instances: {ratio_bad} below (2/k - 0.1) opt (min slack {worst:.3}), {count_bad} structure-count violations"),
    )
}

fn c12(budgets: &[BudgetCheck]) -> Outcome {
    let bad: Vec<String> = budgets
        .iter()
        .filter(|b| !b.ok())
        .map(|b| format!("{}: {} > {}", b.label, b.observed, b.cap))
        .collect();
    outcome(bad.is_empty(), format!("{} runs checked; {}", budgets.len(), if bad.is_empty() { "none over budget".into() } else { bad.join(", ") }))
}

fn c13(out: &SuiteOutput) -> Outcome {
    let ratio = |f: f64, r: usize| {
        out.rows
            .iter()
            .find(|x| (x.record.rounds == r) && x.extra[0] == f.to_string())
            .map(|x| (x.record.ratio, x.record.ci))
            .unwrap()
    };
    let (r0, _) = ratio(0.5, 0);
    let (r1, _) = ratio(0.5, 1);
    let (r5, _) = ratio(0.5, 5);
    let mut mono_bad = Vec::new();
    for i in 1..10 {
        let f = i as f64 / 10.0;
        for r in 0..5 {
            let (a, ca) = ratio(f, r);
            let (b, cb) = ratio(f, r + 1);
            if b < a - 2.0 * ca.max(cb) {
                mono_bad.push(format!("f={f} R={r}->{}", r + 1));
            }
        }
    }
    let pass = r1 >= r0 + 0.10 && r5 >= r1 + 0.10 && mono_bad.is_empty();
    outcome(
        pass,
        format!(
            "f=0.5: R=0 {r0:.3} (ref 0.298), R=1 {r1:.3} (ref 0.506), R=5 {r5:.3} (ref 0.840); monotonicity breaks: {}",
            if mono_bad.is_empty() { "none".into() } else { mono_bad.join(", ") }
        ),
    )
}

fn suite(name: &str) -> SuiteOutput {
    let cfg = SuiteConfig {
        seed: SEED,
        ..SuiteConfig::default()
    };
    run_suite(name, &cfg).unwrap()
}

fn main() {
    let mut results: Vec<(usize, Outcome, f64)> = Vec::new();
    let mut record = |id: usize, f: &mut dyn FnMut() -> Outcome| {
        let t0 = Instant::now();
        let o = f();
        let secs = t0.elapsed().as_secs_f64();
        println!("criterion {id:>2}: {} [{secs:.1}s] {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((id, o, secs));
    };

    let mut budgets = Vec::new();
    record(1, &mut c1);
    record(2, &mut c2);
    record(3, &mut c3);
    let checks: [(usize, &str, fn(&SuiteOutput) -> Outcome); 5] =
        [(4, "theorem1", c4), (5, "theorem2", c5), (6, "figure3", c6), (7, "example31", c7), (8, "appendixA", c8)];
    for (id, name, check) in checks {
        record(id, &mut || {
            let out = suite(name);
            budgets.extend(out.budgets.clone());
            check(&out)
        });
    }
    record(9, &mut || c9(&suite("lemmaB1")));
    record(10, &mut c10);
    record(11, &mut c11);
    record(12, &mut || c12(&budgets));
    record(13, &mut || c13(&suite("kidney-2cycle")));
    drop(record);

    let failed: Vec<usize> = results.iter().filter(|(_, o, _)| !o.pass).map(|(i, _, _)| *i).collect();
    println!(
        "acceptance: {} passed, {} failed{}",
        results.len() - failed.len(),
        failed.len(),
        if failed.is_empty() { String::new() } else { format!(" ({failed:?})") }
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
