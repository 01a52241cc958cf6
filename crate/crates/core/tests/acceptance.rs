//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines always reach the output.
//! The process fails if any criterion fails, except a clause listed in
//! `UNATTAINABLE`, which must still be observed failing.

mod common;

use std::process::Command;

use pfa_core::analysis::{dirac_fixed_points, feller_defect, gamma, uniformity_sup, weak_star_gap};
use pfa_core::certify::{
    adversarial_set_family, candidate_witnesses, check_doeblin, theorem1_hypotheses,
    verify_z_witness, DoeblinCertificate, ZWitness,
};
use pfa_core::cli::{doeblin_grid, INV_E, INV_PI};
use pfa_core::kernel::{
    apply_dual, apply_markov, iterate, kernel_measure, nstep_mass, Builtin, TwoJumpChain,
};
use pfa_core::measure::{
    default_test_family, dirac, grid, integrate, tv_distance, AtomicMeasure, MeasurableSet, Point,
    TestFunction,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Clauses that cannot hold mathematically. The value is the reason.
const UNATTAINABLE: &[(&str, &str)] = &[(
    "3b",
    "γ(0.9) = Π(1 − 0.9^(2^k)) ≈ 2.92e-3 < 0.01, confirmed by the partial-product oracle",
)];

struct Outcome {
    id: &'static str,
    title: &'static str,
    ok: bool,
    detail: String,
}

fn pt(x: f64) -> Point {
    Point::new(x).unwrap()
}

fn chain(b: Builtin) -> TwoJumpChain {
    TwoJumpChain::builtin(b)
}

fn tv(mu: &AtomicMeasure, nu: &AtomicMeasure) -> f64 {
    tv_distance(mu, nu).unwrap().value()
}

fn c1() -> Outcome {
    let d0 = dirac(Point::ZERO);
    let mut worst: f64 = 0.0;
    let mut worst_deep: f64 = 0.0;
    for x0 in [0.3, 0.5, 0.9] {
        let path = iterate(&chain(Builtin::Mc1), &dirac(pt(x0)), 40).unwrap();
        for (n, mu) in path.iter().enumerate().take(7).skip(1) {
            let want = x0.powi((1 << n) - 1);
            worst = worst.max((tv(mu, &d0) - want).abs() / want);
        }
        for (n, mu) in path.iter().enumerate().skip(20) {
            let want = (2f64.powi(n as i32) - 1.0) * x0.log10();
            let got = tv_distance(mu, &d0).unwrap().log10();
            worst_deep = worst_deep.max(((got - want) / want).abs());
        }
    }
    Outcome {
        id: "1",
        title: "MC1 exact rate x0^(2^n-1)",
        ok: worst <= 1e-12 && worst_deep <= 1e-9,
        detail: format!("max rel err n<=6: {worst:e}; log10 n=20..40: {worst_deep:e}"),
    }
}

fn c2() -> Outcome {
    let mc1 = chain(Builtin::Mc1);
    let d0 = dirac(Point::ZERO);
    let mut ok = true;
    let mut min_top: f64 = 1.0;
    for n in 1..=6 {
        let mut prev = 0.0;
        for j in 1..=12 {
            let s = uniformity_sup(&mc1, &grid::near_one_grid(j), &d0, n).unwrap();
            ok &= s >= prev;
            prev = s;
        }
        min_top = min_top.min(prev);
    }
    Outcome {
        id: "2",
        title: "MC1 non-uniformity near 1",
        ok: ok && min_top >= 0.99,
        detail: format!("monotone in j_max: {ok}; min sup at j_max=12: {min_top}"),
    }
}

fn c3a() -> Outcome {
    let mc2 = chain(Builtin::Mc2);
    let d0 = dirac(Point::ZERO);
    let mut worst: f64 = 0.0;
    let mut monotone = true;
    for x0 in [0.3, 0.5, 0.9] {
        let x = pt(x0);
        let path = iterate(&mc2, &dirac(x), 40).unwrap();
        for n in 0..=8u32 {
            let moving = path[n as usize].mass_at(x.pow2n(n)).value();
            let oracle = common::path_enumeration(common::mc2, x0, n);
            let z = x0.powi(1 << n);
            let enumerated = oracle.get(&z.to_bits()).copied().unwrap_or(0.0);
            worst = worst
                .max((moving - common::product(x0, n)).abs())
                .max((moving - enumerated).abs());
        }
        let tvs: Vec<f64> = path.iter().map(|mu| tv(mu, &d0)).collect();
        monotone &= tvs.windows(2).all(|w| w[1] <= w[0]);
        let g = gamma(x).unwrap();
        monotone &= (tvs[40] - g).abs() <= 1e-12;
    }
    // Eight factors already fix γ(0.5) far beyond six digits.
    let g5 = gamma(pt(0.5)).unwrap();
    let oracle = common::product(0.5, 8);
    let six = (g5 - 0.350184).abs() < 5e-7 && (oracle - 0.350184).abs() < 5e-7;
    Outcome {
        id: "3a",
        title: "MC2 product law, path enumeration, tv decreasing to gamma",
        ok: worst <= 1e-12 && monotone && six,
        detail: format!("max diff {worst:e}; monotone {monotone}; gamma(0.5) = {g5}"),
    }
}

fn c3b() -> Outcome {
    let mut worst = (0.0, f64::INFINITY);
    for i in 1..=9 {
        let x0 = i as f64 / 10.0;
        let g = gamma(pt(x0)).unwrap();
        // Independent check of the value itself.
        assert!((g - common::product(x0, 12)).abs() < 1e-12);
        if g < worst.1 {
            worst = (x0, g);
        }
    }
    Outcome {
        id: "3b",
        title: "MC2 gamma(x0) > 0.01 for x0 <= 0.9",
        ok: worst.1 > 0.01,
        detail: format!("smallest gamma at x0 = {}: {:e}", worst.0, worst.1),
    }
}

fn c4() -> Outcome {
    let mc2 = chain(Builtin::Mc2);
    let d0 = dirac(Point::ZERO);
    let x0 = pt(0.5);
    let g = gamma(x0).unwrap();
    let tests = default_test_family();
    let path = iterate(&mc2, &dirac(x0), 40).unwrap();
    let mut max_gap: f64 = 0.0;
    for n in 10..=40 {
        max_gap = max_gap.max(weak_star_gap(&mc2, x0, n, &tests, &d0).unwrap());
    }
    let min_tv = path
        .iter()
        .map(|mu| tv(mu, &d0))
        .fold(f64::INFINITY, f64::min);
    Outcome {
        id: "4",
        title: "MC2 weak-* convergence without TV convergence",
        ok: max_gap <= 1e-3 && min_tv >= g - 1e-6,
        detail: format!("max weak gap n>=10: {max_gap:e}; min tv n<=40: {min_tv} (gamma {g})"),
    }
}

fn c5() -> Outcome {
    let mc3 = chain(Builtin::Mc3);
    let interior = MeasurableSet::interior();
    let mut worst_ratio: f64 = 0.0;
    for x in grid::geometric_grid(12) {
        for n in 1..=20 {
            let m = nstep_mass(&mc3, x, &interior, n).unwrap();
            worst_ratio = worst_ratio.max(m / 0.75f64.powi(n as i32));
        }
    }
    Outcome {
        id: "5",
        title: "MC3 uniform geometric absorption (3/4)^n",
        ok: worst_ratio <= 1.0,
        detail: format!("max mass / (3/4)^n = {worst_ratio}"),
    }
}

fn c6() -> Outcome {
    let seeds = [pt(0.5), pt(INV_PI), pt(INV_E)];
    let family = adversarial_set_family(&seeds, 40).unwrap();
    let xg = doeblin_grid(12);
    let mut ok = true;
    let mut notes = Vec::new();
    let mc3_cert = DoeblinCertificate::two_point(0.5).unwrap();
    let r = check_doeblin(&chain(Builtin::Mc3), &mc3_cert, &family, &xg).unwrap();
    ok &= r.passed;
    notes.push(format!("mc3 pass={}", r.passed));
    for p in [0.3, 0.5] {
        let cert = DoeblinCertificate::two_point(p).unwrap();
        let r = check_doeblin(&TwoJumpChain::mc5(p).unwrap(), &cert, &family, &xg).unwrap();
        ok &= r.passed;
        notes.push(format!("mc5({p}) pass={}", r.passed));
    }
    for b in [Builtin::Mc1, Builtin::Mc2, Builtin::Mc4] {
        let k = chain(b);
        let r = check_doeblin(&k, &mc3_cert, &family, &xg).unwrap();
        match r.counterexample {
            Some(c) => {
                // Recompute the counterexample from scratch.
                let v = kernel_measure(&k, c.x).unwrap().mass(&c.set);
                let explicit = !r.passed
                    && (v - c.value).abs() <= 1e-15
                    && v > 0.75
                    && mc3_cert.phi.mass(&c.set) <= 0.25;
                ok &= explicit;
                notes.push(format!("{} fails on {} at x={}", b.label(), c.set, c.x));
            }
            None => {
                ok = false;
                notes.push(format!("{} unexpectedly passes", b.label()));
            }
        }
    }
    Outcome {
        id: "6",
        title: "Doeblin certificates",
        ok,
        detail: notes.join("; "),
    }
}

fn c7() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    let pass = |k: &TwoJumpChain, w: &ZWitness| verify_z_witness(k, w, 16).unwrap().passed();
    for eps in [0.3, 0.5, 0.7] {
        ok &= pass(&chain(Builtin::Mc1), &ZWitness::near_one(eps, 20).unwrap());
    }
    ok &= pass(&chain(Builtin::Mc2), &ZWitness::near_zero(0.5, 20).unwrap());
    let mc4 = chain(Builtin::Mc4);
    ok &= pass(&mc4, &ZWitness::near_zero(0.5, 20).unwrap());
    ok &= pass(&mc4, &ZWitness::near_one(0.7, 20).unwrap());
    notes.push(format!("reference witnesses pass: {ok}"));
    let mut rejected = 0;
    let mut total = 0;
    for k in [
        chain(Builtin::Mc3),
        TwoJumpChain::mc5(0.3).unwrap(),
        TwoJumpChain::mc5(0.5).unwrap(),
    ] {
        for w in candidate_witnesses(20) {
            total += 1;
            let r = verify_z_witness(&k, &w, 16).unwrap();
            if let Some(c) = &r.counterexample {
                // p(x, Kₙ) recomputed directly must fall below 1 − εₙ.
                let x = Point::from_log(c.log_x).unwrap();
                let mass = kernel_measure(&k, x).unwrap().mass(&w.set(c.n));
                if !r.passed() && w.set(c.n + 1).contains(x) && mass < 1.0 - w.eps(c.n) {
                    rejected += 1;
                }
            }
        }
    }
    ok &= rejected == total;
    notes.push(format!(
        "{rejected}/{total} candidates rejected on mc3/mc5 with counterexamples"
    ));
    Outcome {
        id: "7",
        title: "Z witnesses",
        ok,
        detail: notes.join("; "),
    }
}

fn c8() -> Outcome {
    let basis = vec![dirac(Point::ZERO), dirac(Point::ONE)];
    let carriers = vec![
        MeasurableSet::singleton(Point::ZERO),
        MeasurableSet::singleton(Point::ONE),
    ];
    let probes = grid::audit_grid(100);
    let mut ok = true;
    for k in [
        chain(Builtin::Mc3),
        TwoJumpChain::mc5(0.3).unwrap(),
        TwoJumpChain::mc5(0.5).unwrap(),
    ] {
        ok &= theorem1_hypotheses(&k, &basis, &carriers, &probes)
            .unwrap()
            .passed;
    }
    let g = grid::with_endpoints(&(1..1000).map(|i| pt(i as f64 / 1000.0)).collect::<Vec<_>>());
    let mut fixed_ok = true;
    for b in Builtin::all_default() {
        fixed_ok &= dirac_fixed_points(&chain(b), &g).unwrap() == vec![Point::ZERO, Point::ONE];
    }
    Outcome {
        id: "8",
        title: "finite-basis hypotheses and Dirac fixed points",
        ok: ok && fixed_ok,
        detail: format!("mc3/mc5 hypotheses: {ok}; fixed points {{0,1}} for all five: {fixed_ok}"),
    }
}

fn c9() -> Outcome {
    let approach = grid::near_one_grid(12);
    let mc1 = chain(Builtin::Mc1);
    let worst = default_test_family()
        .iter()
        .map(|f| feller_defect(&mc1, f, Point::ONE, &approach).unwrap())
        .fold(0.0, f64::max);
    let id = TestFunction::linear("y", 1.0, |y| y).unwrap();
    let d2 = feller_defect(&chain(Builtin::Mc2), &id, Point::ONE, &approach).unwrap();
    Outcome {
        id: "9",
        title: "Feller defect at 1",
        ok: worst <= 1e-6 && (d2 - 1.0).abs() <= 1e-6,
        detail: format!("mc1 max defect {worst:e}; mc2 defect of y {d2}"),
    }
}

fn random_measure(rng: &mut StdRng, atoms: usize) -> AtomicMeasure {
    let mut w: Vec<f64> = (0..atoms).map(|_| rng.gen_range(0.01..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= s);
    let pairs: Vec<(f64, f64)> = w
        .into_iter()
        .map(|m| {
            let x = match rng.gen_range(0..10) {
                0 => 0.0,
                1 => 1.0,
                _ => rng.gen_range(0.0..1.0),
            };
            (x, m)
        })
        .collect();
    AtomicMeasure::from_linear(&pairs).unwrap()
}

fn random_chain(rng: &mut StdRng) -> TwoJumpChain {
    match rng.gen_range(0..5) {
        0 => chain(Builtin::Mc1),
        1 => chain(Builtin::Mc2),
        2 => chain(Builtin::Mc3),
        3 => chain(Builtin::Mc4),
        _ => TwoJumpChain::mc5(rng.gen_range(0.0..=1.0)).unwrap(),
    }
}

fn linear(m: &AtomicMeasure) -> Vec<(f64, f64)> {
    m.atoms()
        .iter()
        .map(|a| (a.point.value(), a.mass.value()))
        .collect()
}

fn run_reproduce(name: &str) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_pfa"))
        .args(["reproduce", name, "--no-timestamp"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "reproduce {name}");
    out.stdout
}

fn c10() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let tests = default_test_family();
    let mut notes = Vec::new();

    let mut conservation: f64 = 0.0;
    let mut duality: f64 = 0.0;
    for _ in 0..1000 {
        let k = random_chain(&mut rng);
        let mu = {
            let k = rng.gen_range(1..8);
            random_measure(&mut rng, k)
        };
        let f = &tests[rng.gen_range(0..tests.len())];
        let next = apply_markov(&k, &mu).unwrap();
        conservation = conservation.max(next.total().ln().abs());
        let lhs = integrate(f, &next);
        let rhs: f64 = mu
            .atoms()
            .iter()
            .map(|a| a.mass.value() * apply_dual(&k, f, a.point).unwrap())
            .sum();
        duality = duality.max((lhs - rhs).abs());
    }
    let mass_ok = conservation <= 1e-12;
    let dual_ok = duality <= 1e-12;
    notes.push(format!(
        "mass drift {conservation:e}; duality err {duality:e}"
    ));

    let mut metric_ok = true;
    let mut brute: f64 = 0.0;
    for _ in 0..300 {
        let a = {
            let k = rng.gen_range(1..5);
            random_measure(&mut rng, k)
        };
        let b = {
            let k = rng.gen_range(1..5);
            random_measure(&mut rng, k)
        };
        let c = {
            let k = rng.gen_range(1..5);
            random_measure(&mut rng, k)
        };
        let (ab, ba, bc, ac) = (tv(&a, &b), tv(&b, &a), tv(&b, &c), tv(&a, &c));
        metric_ok &= tv(&a, &a) == 0.0 && (ab - ba).abs() <= 1e-15 && ac <= ab + bc + 1e-15;
        metric_ok &= (0.0..=1.0).contains(&ab);
        // Joint support stays within 12 atoms.
        let (x, y) = (
            {
                let k = rng.gen_range(1..7);
                random_measure(&mut rng, k)
            },
            {
                let k = rng.gen_range(1..7);
                random_measure(&mut rng, k)
            },
        );
        brute = brute.max((tv(&x, &y) - common::brute_tv(&linear(&x), &linear(&y))).abs());
    }
    let brute_ok = brute <= 1e-12;
    notes.push(format!(
        "metric axioms {metric_ok}; brute-force tv err {brute:e}"
    ));

    let mut identical = true;
    for name in ["mc1", "mc2", "mc3", "mc4", "mc5"] {
        identical &= run_reproduce(name) == run_reproduce(name);
    }
    notes.push(format!("reproduce byte-identical: {identical}"));
    Outcome {
        id: "10",
        title: "property suites",
        ok: mass_ok && dual_ok && metric_ok && brute_ok && identical,
        detail: notes.join("; "),
    }
}

fn main() {
    let criteria: [fn() -> Outcome; 11] = [c1, c2, c3a, c3b, c4, c5, c6, c7, c8, c9, c10];
    let mut unexpected = 0;
    for run in criteria {
        let o = run();
        let known = UNATTAINABLE.iter().find(|(id, _)| *id == o.id);
        let tag = if o.ok { "PASS" } else { "FAIL" };
        println!("[{tag}] criterion {:<3} {}: {}", o.id, o.title, o.detail);
        match (o.ok, known) {
            (false, Some((_, why))) => println!("       unattainable: {why}"),
            (false, None) => unexpected += 1,
            (true, Some(_)) => {
                println!("       listed as unattainable but passed; update the list");
                unexpected += 1;
            }
            (true, None) => {}
        }
    }
    if unexpected > 0 {
        println!("{unexpected} criterion line(s) failed");
        std::process::exit(1);
    }
}
