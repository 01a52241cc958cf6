use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::trajectory_set;
use crate::kernel::{cesaro_mass, nstep_mass, TransitionKernel};
use crate::measure::{AtomicMeasure, MeasurableSet, MeasureJson, Point, SetJson};

use super::CertifyError;

/// Shells `(0, 10⁻ʲ)` and `(1 − 10⁻ʲ, 1)` use `j = 1..=SHELL_DEPTH`.
pub const SHELL_DEPTH: i32 = 12;

const BOUND_TOLERANCE: f64 = 1e-12;

/// `(φ, ε, k)` for condition (D), or `(φ, ε, m)` for its Cesàro form when
/// `cesaro_m` is set.
#[derive(Clone, Debug, PartialEq)]
pub struct DoeblinCertificate {
    pub phi: AtomicMeasure,
    pub eps: f64,
    pub k: usize,
    pub cesaro_m: Option<usize>,
}

/// Wire form: `{"phi": <measure>, "eps": e, "k": k, "cesaro_m": m | null}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DoeblinCertificateJson {
    pub phi: MeasureJson,
    pub eps: f64,
    pub k: usize,
    #[serde(default)]
    pub cesaro_m: Option<usize>,
}

impl DoeblinCertificate {
    pub fn new(
        phi: AtomicMeasure,
        eps: f64,
        k: usize,
        cesaro_m: Option<usize>,
    ) -> Result<DoeblinCertificate, CertifyError> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(CertifyError::BadParameter(format!(
                "certificate eps must lie in (0,1), got {eps}"
            )));
        }
        if k == 0 || cesaro_m == Some(0) {
            return Err(CertifyError::BadParameter(
                "certificate step counts must be at least 1".into(),
            ));
        }
        Ok(DoeblinCertificate {
            phi,
            eps,
            k,
            cesaro_m,
        })
    }

    /// `φ = pδ₀ + (1−p)δ₁`, `ε = ½ min(p, 1−p)`, `k = 1`.
    pub fn two_point(p: f64) -> Result<DoeblinCertificate, CertifyError> {
        let phi = AtomicMeasure::from_linear(&[(0.0, p), (1.0, 1.0 - p)])?;
        DoeblinCertificate::new(phi, 0.5 * p.min(1.0 - p), 1, None)
    }

    pub fn from_json(text: &str) -> Result<DoeblinCertificate, CertifyError> {
        let json: DoeblinCertificateJson =
            serde_json::from_str(text).map_err(|e| CertifyError::Json(e.to_string()))?;
        let phi = AtomicMeasure::try_from(json.phi)?;
        DoeblinCertificate::new(phi, json.eps, json.k, json.cesaro_m)
    }

    pub fn to_json(&self) -> String {
        let json = DoeblinCertificateJson {
            phi: self.phi.to_json(),
            eps: self.eps,
            k: self.k,
            cesaro_m: self.cesaro_m,
        };
        serde_json::to_string_pretty(&json).expect("certificate serializes")
    }

    /// Sets the certificate constrains: `φ(E) ≤ ε`, or `φ(E) < ε` for the
    /// Cesàro form.
    pub fn constrains(&self, set: &MeasurableSet) -> bool {
        let m = self.phi.mass(set);
        if self.cesaro_m.is_some() {
            m < self.eps
        } else {
            m <= self.eps
        }
    }

    fn value<K: TransitionKernel + ?Sized>(
        &self,
        k: &K,
        x: Point,
        set: &MeasurableSet,
    ) -> Result<f64, CertifyError> {
        Ok(match self.cesaro_m {
            Some(m) => cesaro_mass(k, x, set, m)?,
            None => nstep_mass(k, x, set, self.k)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DoeblinCounterexample {
    pub set_index: usize,
    pub set: MeasurableSet,
    pub x: Point,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DoeblinReport {
    pub chain: String,
    pub passed: bool,
    pub cesaro: bool,
    pub bound: f64,
    pub family_size: usize,
    pub constrained_sets: usize,
    pub grid_size: usize,
    /// Largest `pᵏ(x, E)` (or `q_m`) over constrained sets and the grid.
    pub worst_value: f64,
    pub counterexample: Option<DoeblinCounterexample>,
}

#[derive(Serialize)]
struct CounterexampleJson {
    set_index: usize,
    set: SetJson,
    x: f64,
    log_x: f64,
    value: f64,
}

#[derive(Serialize)]
struct ReportJson<'a> {
    chain: &'a str,
    pass: bool,
    condition: &'static str,
    bound: f64,
    family_size: usize,
    constrained_sets: usize,
    grid_size: usize,
    worst_value: f64,
    counterexample: Option<CounterexampleJson>,
    qualifier: &'static str,
}

impl DoeblinReport {
    pub fn to_json(&self) -> String {
        let json = ReportJson {
            chain: &self.chain,
            pass: self.passed,
            condition: if self.cesaro { "D~" } else { "D" },
            bound: self.bound,
            family_size: self.family_size,
            constrained_sets: self.constrained_sets,
            grid_size: self.grid_size,
            worst_value: self.worst_value,
            counterexample: self.counterexample.as_ref().map(|c| CounterexampleJson {
                set_index: c.set_index,
                set: SetJson::from(&c.set),
                x: c.x.value(),
                log_x: c.x.log_value(),
                value: c.value,
            }),
            qualifier: "grid-relative: checked on the listed set family and x grid only",
        };
        serde_json::to_string_pretty(&json).expect("report serializes")
    }
}

/// For every set `E` in `family` with `φ(E) ≤ ε`, checks
/// `max_{x ∈ grid} pᵏ(x, E) ≤ 1 − ε`. The counterexample is the first
/// failing set in family order, at its maximizing grid point.
pub fn check_doeblin<K: TransitionKernel + ?Sized>(
    k: &K,
    cert: &DoeblinCertificate,
    family: &[MeasurableSet],
    x_grid: &[Point],
) -> Result<DoeblinReport, CertifyError> {
    if family.is_empty() {
        return Err(CertifyError::EmptyFamily);
    }
    if x_grid.is_empty() {
        return Err(CertifyError::EmptyGrid);
    }
    let bound = 1.0 - cert.eps;
    let constrained: Vec<(usize, &MeasurableSet)> = family
        .iter()
        .enumerate()
        .filter(|(_, s)| cert.constrains(s))
        .collect();
    let worst: Vec<Result<(Point, f64), CertifyError>> = constrained
        .par_iter()
        .map(|&(_, set)| {
            let mut best = (x_grid[0], f64::NEG_INFINITY);
            for &x in x_grid {
                let v = cert.value(k, x, set)?;
                if v > best.1 {
                    best = (x, v);
                }
            }
            Ok(best)
        })
        .collect();
    let mut worst_value = 0.0f64;
    let mut counterexample = None;
    for (&(set_index, set), w) in constrained.iter().zip(worst) {
        let (x, value) = w?;
        worst_value = worst_value.max(value);
        if counterexample.is_none() && value > bound + BOUND_TOLERANCE {
            counterexample = Some(DoeblinCounterexample {
                set_index,
                set: set.clone(),
                x,
                value,
            });
        }
    }
    Ok(DoeblinReport {
        chain: k.label().to_string(),
        passed: counterexample.is_none(),
        cesaro: cert.cesaro_m.is_some(),
        bound,
        family_size: family.len(),
        constrained_sets: constrained.len(),
        grid_size: x_grid.len(),
        worst_value,
        counterexample,
    })
}

/// A fixed family of test sets, in this order:
/// `{0}`, `{1}`, `(0,1)`, `[0,1]`; the shells `(0,10⁻ʲ)` then
/// `(1−10⁻ʲ,1)` for each `j = 1..=12`; the complements of those shells in
/// `(0,1)`, same order; one trajectory point set `V_{x₀} ∩ (0,1)` of depth
/// `traj_depth` per seed. Size `4 + 48 + seeds.len()`.
pub fn adversarial_set_family(
    seeds: &[Point],
    traj_depth: u32,
) -> Result<Vec<MeasurableSet>, CertifyError> {
    let interior = MeasurableSet::interior();
    let mut out = vec![
        MeasurableSet::singleton(Point::ZERO),
        MeasurableSet::singleton(Point::ONE),
        interior.clone(),
        MeasurableSet::unit(),
    ];
    let mut shells = Vec::with_capacity(2 * SHELL_DEPTH as usize);
    for j in 1..=SHELL_DEPTH {
        let d = 10f64.powi(-j);
        shells.push(MeasurableSet::open(0.0, d)?);
        let lo = Point::one_minus(d)?;
        shells.push(MeasurableSet::interval(lo, Point::ONE, false, false));
    }
    let complements: Vec<MeasurableSet> = shells.iter().map(|s| interior.difference(s)).collect();
    out.extend(shells);
    out.extend(complements);
    for &seed in seeds {
        let v = trajectory_set(seed, traj_depth)?;
        out.push(v.as_set().intersection(&interior));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{Builtin, TwoJumpChain};
    use crate::measure::grid;

    fn family() -> Vec<MeasurableSet> {
        let seeds = [Point::new(0.5).unwrap(), Point::new(0.9).unwrap()];
        adversarial_set_family(&seeds, 20).unwrap()
    }

    fn x_grid() -> Vec<Point> {
        grid::audit_grid(1000)
    }

    fn mc3_cert() -> DoeblinCertificate {
        DoeblinCertificate::two_point(0.5).unwrap()
    }

    #[test]
    fn family_layout() {
        let f = family();
        assert_eq!(f.len(), 4 + 48 + 2);
        assert_eq!(f[2], MeasurableSet::interior());
        let shell =
            MeasurableSet::interval(Point::one_minus(1e-3).unwrap(), Point::ONE, false, false);
        assert!(f.contains(&shell));
    }

    #[test]
    fn mc3_passes_and_mc1_fails() {
        let r = check_doeblin(
            &TwoJumpChain::builtin(Builtin::Mc3),
            &mc3_cert(),
            &family(),
            &x_grid(),
        )
        .unwrap();
        assert!(r.passed);
        assert!(r.worst_value <= 0.5);
        let r = check_doeblin(
            &TwoJumpChain::builtin(Builtin::Mc1),
            &mc3_cert(),
            &family(),
            &x_grid(),
        )
        .unwrap();
        let c = r.counterexample.unwrap();
        assert_eq!(c.set, MeasurableSet::interior());
        assert!(c.value > 0.75);
    }

    #[test]
    fn mc5_certificates() {
        for p in [0.3, 0.5] {
            let cert = DoeblinCertificate::two_point(p).unwrap();
            let r =
                check_doeblin(&TwoJumpChain::mc5(p).unwrap(), &cert, &family(), &x_grid()).unwrap();
            assert!(r.passed);
        }
    }

    #[test]
    fn cesaro_form_uses_strict_inequality() {
        // φ({0}) = ε exactly: constrained under (D), not under the Cesàro form.
        let phi = AtomicMeasure::from_linear(&[(0.0, 0.25), (1.0, 0.75)]).unwrap();
        let d = DoeblinCertificate::new(phi.clone(), 0.25, 1, None).unwrap();
        let dt = DoeblinCertificate::new(phi, 0.25, 1, Some(3)).unwrap();
        let zero = MeasurableSet::singleton(Point::ZERO);
        assert!(d.constrains(&zero));
        assert!(!dt.constrains(&zero));
    }

    #[test]
    fn errors_and_json() {
        let mc3 = TwoJumpChain::builtin(Builtin::Mc3);
        assert_eq!(
            check_doeblin(&mc3, &mc3_cert(), &[], &x_grid()),
            Err(CertifyError::EmptyFamily)
        );
        assert!(DoeblinCertificate::new(AtomicMeasure::dirac(Point::ZERO), 1.0, 1, None).is_err());
        let cert = mc3_cert();
        assert_eq!(
            DoeblinCertificate::from_json(&cert.to_json()).unwrap(),
            cert
        );
        let parsed = DoeblinCertificate::from_json(
            r#"{"phi":{"atoms":[{"log_x":"-inf","mass":0.5,"log_mass":-0.6931471805599453},
                               {"log_x":0,"mass":0.5,"log_mass":-0.6931471805599453}]},
                "eps":0.25,"k":1,"cesaro_m":null}"#,
        )
        .unwrap();
        assert_eq!(parsed.phi.len(), 2);
    }
}
