use serde::Serialize;

use crate::kernel::{iterate, TransitionKernel};
use crate::measure::{dirac, tv_distance, AtomicMeasure, Point, TestFunction};

use super::{gap_between, AnalysisError};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProfileRow {
    pub n: usize,
    pub tv: f64,
    /// `log₁₀ tv`, kept separately so tiny distances stay readable.
    pub log10_tv: f64,
    pub weak_gap: f64,
}

/// `‖μₙ − target‖` and the weak-* gap for `n = 0..=n_max`, `μₙ = Aⁿδ_{x₀}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceProfile {
    pub chain: String,
    pub x0: Point,
    pub target: AtomicMeasure,
    pub rows: Vec<ProfileRow>,
}

pub fn convergence_profile<K: TransitionKernel + ?Sized>(
    k: &K,
    x0: Point,
    target: &AtomicMeasure,
    n_max: usize,
    tests: &[TestFunction],
) -> Result<ConvergenceProfile, AnalysisError> {
    target.require_probability()?;
    let mut rows = Vec::with_capacity(n_max + 1);
    let path = if n_max == 0 {
        vec![dirac(x0)]
    } else {
        iterate(k, &dirac(x0), n_max)?
    };
    for (n, mu) in path.iter().enumerate() {
        let tv = tv_distance(mu, target)?;
        rows.push(ProfileRow {
            n,
            tv: tv.value(),
            log10_tv: tv.log10(),
            weak_gap: if tests.is_empty() {
                0.0
            } else {
                gap_between(mu, target, tests)
            },
        });
    }
    Ok(ConvergenceProfile {
        chain: k.label().to_string(),
        x0,
        target: target.clone(),
        rows,
    })
}

/// Shortest round-trip scientific form; `inf`, `-inf`, `nan` spelled out.
pub fn fmt_real(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v:e}")
    }
}

pub const PROFILE_HEADER: &str = "chain,x0,n,tv,log10_tv,weak_gap";

/// CSV with a single header; rows ordered by `n`, then by `x₀` in input order.
pub fn profiles_csv(profiles: &[ConvergenceProfile]) -> String {
    let mut out = String::from(PROFILE_HEADER);
    out.push('\n');
    let n_max = profiles.iter().map(|p| p.rows.len()).max().unwrap_or(0);
    for n in 0..n_max {
        for p in profiles {
            if let Some(r) = p.rows.get(n) {
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    p.chain,
                    p.x0,
                    r.n,
                    fmt_real(r.tv),
                    fmt_real(r.log10_tv),
                    fmt_real(r.weak_gap)
                ));
            }
        }
    }
    out
}

#[derive(Serialize)]
struct JsonRow<'a> {
    chain: &'a str,
    x0: f64,
    log_x0: String,
    n: usize,
    tv: f64,
    log10_tv: String,
    weak_gap: f64,
}

/// JSON array of row objects with the CSV column names, same ordering.
/// `log10_tv` is a string because it may be `-inf`.
pub fn profiles_json(profiles: &[ConvergenceProfile]) -> String {
    let mut rows = Vec::new();
    let n_max = profiles.iter().map(|p| p.rows.len()).max().unwrap_or(0);
    for n in 0..n_max {
        for p in profiles {
            if let Some(r) = p.rows.get(n) {
                rows.push(JsonRow {
                    chain: &p.chain,
                    x0: p.x0.value(),
                    log_x0: fmt_real(p.x0.log_value()),
                    n: r.n,
                    tv: r.tv,
                    log10_tv: fmt_real(r.log10_tv),
                    weak_gap: r.weak_gap,
                });
            }
        }
    }
    serde_json::to_string_pretty(&rows).expect("rows serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{Builtin, TwoJumpChain};
    use crate::measure::default_test_family;

    #[test]
    fn mc1_tv_matches_closed_form() {
        let mc1 = TwoJumpChain::builtin(Builtin::Mc1);
        let prof = convergence_profile(
            &mc1,
            Point::new(0.5).unwrap(),
            &dirac(Point::ZERO),
            6,
            &default_test_family(),
        )
        .unwrap();
        assert_eq!(prof.rows.len(), 7);
        assert!((prof.rows[2].tv - 0.125).abs() < 1e-15);
        for r in &prof.rows {
            let want = 0.5f64.powi((1 << r.n) - 1);
            assert!(
                (r.tv - want).abs() <= 1e-12 * want,
                "n={} tv={} want={}",
                r.n,
                r.tv,
                want
            );
        }
    }

    #[test]
    fn invariant_start_gives_zero_rows() {
        let mc2 = TwoJumpChain::builtin(Builtin::Mc2);
        let prof = convergence_profile(
            &mc2,
            Point::ONE,
            &dirac(Point::ONE),
            4,
            &default_test_family(),
        )
        .unwrap();
        assert!(prof.rows.iter().all(|r| r.tv == 0.0 && r.weak_gap == 0.0));
        assert!(prof.rows.iter().all(|r| r.log10_tv == f64::NEG_INFINITY));
    }

    #[test]
    fn csv_has_fixed_header_and_ordering() {
        let mc1 = TwoJumpChain::builtin(Builtin::Mc1);
        let t = dirac(Point::ZERO);
        let a = convergence_profile(&mc1, Point::new(0.3).unwrap(), &t, 2, &[]).unwrap();
        let b = convergence_profile(&mc1, Point::new(0.9).unwrap(), &t, 2, &[]).unwrap();
        let csv = profiles_csv(&[a.clone(), b.clone()]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], PROFILE_HEADER);
        assert_eq!(lines.len(), 7);
        assert!(lines[1].starts_with("mc1,0.3,0,"));
        assert!(lines[2].starts_with("mc1,0.9,0,"));
        assert!(lines[3].starts_with("mc1,0.3,1,"));
        let json: serde_json::Value = serde_json::from_str(&profiles_json(&[a, b])).unwrap();
        assert_eq!(json.as_array().unwrap().len(), 6);
    }
}
