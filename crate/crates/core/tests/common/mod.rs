//! Independent oracles: plain `f64` arithmetic, no library code.
#![allow(dead_code)]

use std::collections::BTreeMap;

/// Distribution after `n` steps of the two-jump chain with jump probability
/// `pi`, by enumerating all `2ⁿ` paths. States are keyed by their bit
/// pattern so equal states merge exactly.
pub fn path_enumeration(pi: fn(f64) -> f64, x0: f64, n: u32) -> BTreeMap<u64, f64> {
    let mut out = BTreeMap::new();
    for path in 0..(1u64 << n) {
        let (mut x, mut w) = (x0, 1.0);
        for step in 0..n {
            let stay = path >> step & 1 == 1;
            if x == 0.0 || x == 1.0 {
                if stay {
                    w = 0.0;
                }
                continue;
            }
            let p = pi(x);
            if stay {
                w *= p;
                x *= x;
            } else {
                w *= 1.0 - p;
                x = 0.0;
            }
        }
        if w > 0.0 {
            *out.entry(x.to_bits()).or_insert(0.0) += w;
        }
    }
    out
}

/// `sup_E |μ(E) − ν(E)|` over all subsets of the joint support.
pub fn brute_tv(mu: &[(f64, f64)], nu: &[(f64, f64)]) -> f64 {
    let mut support: Vec<f64> = mu.iter().chain(nu).map(|a| a.0).collect();
    support.sort_by(f64::total_cmp);
    support.dedup();
    assert!(support.len() <= 20, "brute force needs a small support");
    let mass = |m: &[(f64, f64)], x: f64| m.iter().filter(|a| a.0 == x).map(|a| a.1).sum::<f64>();
    let diffs: Vec<f64> = support.iter().map(|&x| mass(mu, x) - mass(nu, x)).collect();
    let mut best: f64 = 0.0;
    for subset in 0..(1u32 << support.len()) {
        let s: f64 = (0..support.len())
            .filter(|i| subset >> i & 1 == 1)
            .map(|i| diffs[i])
            .sum();
        best = best.max(s.abs());
    }
    best
}

/// `Π_{k<n} (1 − x^{2^k})` by repeated squaring.
pub fn product(x0: f64, n: u32) -> f64 {
    let (mut x, mut p) = (x0, 1.0);
    for _ in 0..n {
        p *= 1.0 - x;
        x *= x;
    }
    p
}

pub fn mc1(x: f64) -> f64 {
    x
}

pub fn mc2(x: f64) -> f64 {
    1.0 - x
}
