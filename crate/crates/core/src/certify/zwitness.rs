use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cli::expr::{Expr, MIN_AUDIT_DIVISOR};
use crate::kernel::{kernel_measure, TransitionKernel};
use crate::measure::{Interval, LogNum, MeasurableSet, Point};

use super::CertifyError;

/// Margins down to `−1e−12` count as satisfied.
pub const MARGIN_TOLERANCE: f64 = 1e-12;

type EpsFn = Arc<dyn Fn(u32) -> f64 + Send + Sync>;
type SetsFn = Arc<dyn Fn(u32) -> MeasurableSet + Send + Sync>;

/// The two set families used for witnesses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    /// `Kₙ = (ε^{1/2^{n−1}}, 1)`, `εₙ = 1 − ε^{1/2ⁿ}`.
    NearOne,
    /// `Kₙ = (0, ε^{2^{n−1}})`, `εₙ = ε^{2ⁿ}`.
    NearZero,
}

impl Shape {
    pub fn name(self) -> &'static str {
        match self {
            Shape::NearOne => "near_one",
            Shape::NearZero => "near_zero",
        }
    }
}

impl FromStr for Shape {
    type Err = CertifyError;

    fn from_str(s: &str) -> Result<Shape, CertifyError> {
        match s {
            "near_one" => Ok(Shape::NearOne),
            "near_zero" => Ok(Shape::NearZero),
            other => Err(CertifyError::BadParameter(format!(
                "unknown shape {other:?}, expected near_one or near_zero"
            ))),
        }
    }
}

/// A candidate `(εₙ, Kₙ)` for `n = 1..=depth`.
#[derive(Clone)]
pub struct ZWitness {
    eps: EpsFn,
    sets: SetsFn,
    pub depth: u32,
    pub description: String,
}

impl fmt::Debug for ZWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ZWitness")
            .field("depth", &self.depth)
            .field("description", &self.description)
            .finish()
    }
}

fn check_param(eps: f64) -> Result<f64, CertifyError> {
    if eps > 0.0 && eps < 1.0 {
        Ok(eps.ln())
    } else {
        Err(CertifyError::BadParameter(format!(
            "witness parameter must lie in (0,1), got {eps}"
        )))
    }
}

fn pow2(n: u32) -> f64 {
    2f64.powi(n as i32)
}

impl ZWitness {
    pub fn new<E, S>(description: impl Into<String>, depth: u32, eps: E, sets: S) -> ZWitness
    where
        E: Fn(u32) -> f64 + Send + Sync + 'static,
        S: Fn(u32) -> MeasurableSet + Send + Sync + 'static,
    {
        ZWitness {
            eps: Arc::new(eps),
            sets: Arc::new(sets),
            depth,
            description: description.into(),
        }
    }

    pub fn near_one(eps: f64, depth: u32) -> Result<ZWitness, CertifyError> {
        let l = check_param(eps)?;
        Ok(ZWitness {
            eps: Arc::new(move |n| -(l / pow2(n)).exp_m1()),
            sets: near_one_sets(l),
            depth,
            description: format!("near_one eps={eps}"),
        })
    }

    pub fn near_zero(eps: f64, depth: u32) -> Result<ZWitness, CertifyError> {
        let l = check_param(eps)?;
        Ok(ZWitness {
            eps: Arc::new(move |n| (l * pow2(n)).exp()),
            sets: near_zero_sets(l),
            depth,
            description: format!("near_zero eps={eps}"),
        })
    }

    pub fn of_shape(shape: Shape, eps: f64, depth: u32) -> Result<ZWitness, CertifyError> {
        match shape {
            Shape::NearOne => ZWitness::near_one(eps, depth),
            Shape::NearZero => ZWitness::near_zero(eps, depth),
        }
    }

    pub fn eps(&self, n: u32) -> f64 {
        (self.eps)(n)
    }

    pub fn set(&self, n: u32) -> MeasurableSet {
        (self.sets)(n)
    }
}

fn near_one_sets(l: f64) -> SetsFn {
    Arc::new(move |n| {
        let lo = Point::from_log(l / pow2(n - 1)).expect("negative log");
        MeasurableSet::interval(lo, Point::ONE, false, false)
    })
}

fn near_zero_sets(l: f64) -> SetsFn {
    Arc::new(move |n| {
        let hi = Point::from_log(l * pow2(n - 1)).expect("negative log");
        MeasurableSet::interval(Point::ZERO, hi, false, false)
    })
}

/// `{"shape": "near_one"|"near_zero", "param": ε}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeSpec {
    pub shape: Shape,
    pub param: f64,
}

/// Wire form of a witness: `{"eps": "<expr in n>", "set": {...}, "depth": N}`.
///
/// `eps` is either an expression in `n` (same grammar as jump
/// probabilities) or `"default"`, which selects the shape's own sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZWitnessSpec {
    #[serde(default = "default_eps")]
    pub eps: String,
    pub set: ShapeSpec,
    pub depth: u32,
}

fn default_eps() -> String {
    "default".into()
}

impl ZWitnessSpec {
    pub fn from_json(text: &str) -> Result<ZWitnessSpec, CertifyError> {
        serde_json::from_str(text).map_err(|e| CertifyError::Json(e.to_string()))
    }

    pub fn build(&self) -> Result<ZWitness, CertifyError> {
        let base = ZWitness::of_shape(self.set.shape, self.set.param, self.depth)?;
        if self.eps.trim() == "default" {
            return Ok(base);
        }
        let expr = Expr::parse(&self.eps, "n")?;
        // Evaluate once up front so syntax-valid but undefined sequences
        // fail here rather than mid-verification.
        let mut values = Vec::with_capacity(self.depth as usize);
        for n in 1..=self.depth {
            let v = expr
                .eval(LogNum::from_f64(n as f64), MIN_AUDIT_DIVISOR)?
                .value();
            values.push(v);
        }
        Ok(ZWitness {
            eps: Arc::new(move |n| {
                values
                    .get((n as usize).wrapping_sub(1))
                    .copied()
                    .unwrap_or(f64::NAN)
            }),
            sets: base.sets,
            depth: self.depth,
            description: format!(
                "{} eps={} with eps_n = {}",
                self.set.shape.name(),
                self.set.param,
                self.eps
            ),
        })
    }
}

/// Worst kernel-bound margin at one level.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelMargin {
    pub n: u32,
    pub eps: f64,
    /// `min_x p(x, Kₙ) − (1 − εₙ)` over probes in `K_{n+1}`.
    pub worst_margin: f64,
    pub worst_x: f64,
    pub worst_log_x: f64,
    pub probes: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZCounterexample {
    pub n: u32,
    pub x: f64,
    pub log_x: f64,
    /// `p(x, Kₙ)`.
    pub mass: f64,
    /// `1 − εₙ`.
    pub required: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZReport {
    pub chain: String,
    pub witness: String,
    pub depth: u32,
    pub probes_per_level: usize,
    pub eps_nonneg_vanishing: bool,
    pub nested: bool,
    pub empty_intersection: bool,
    pub kernel_bound: bool,
    pub notes: Vec<String>,
    pub levels: Vec<LevelMargin>,
    pub counterexample: Option<ZCounterexample>,
    pub qualifier: String,
}

impl ZReport {
    pub fn passed(&self) -> bool {
        self.eps_nonneg_vanishing
            && self.nested
            && self.empty_intersection
            && self.kernel_bound
            && self
                .levels
                .iter()
                .all(|l| l.worst_margin >= -MARGIN_TOLERANCE)
    }

    pub fn to_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        v["pass"] = serde_json::Value::Bool(self.passed());
        serde_json::to_string_pretty(&v).expect("report serializes")
    }
}

/// Nonincreasing over the second half of the sequence and at least halved
/// across it (or exactly zero at the end). A finite-depth stand-in for
/// convergence to 0.
fn tail_vanishes(seq: &[f64]) -> bool {
    let start = seq.len() / 2;
    let tail = &seq[start..];
    let last = *tail.last().expect("nonempty");
    tail.windows(2).all(|w| w[1] <= w[0]) && (last == 0.0 || last <= 0.5 * tail[0])
}

/// Probes in an interval component, placed by interpolating in log space so
/// they cluster at both ends.
fn component_probes(c: &Interval, count: usize) -> Vec<Point> {
    if c.is_point() {
        return vec![c.lo];
    }
    let half = count.div_ceil(2) as i32;
    let mut logs = Vec::with_capacity(2 * half as usize);
    if c.lo.is_zero() {
        let top = c.hi.log_value();
        for k in 1..=half {
            logs.push(top * (1.0 + 2f64.powi(-k)));
            logs.push(top * 2f64.powi(k));
        }
    } else {
        let (a, b) = (c.lo.log_value(), c.hi.log_value());
        for k in 1..=half {
            let u = 2f64.powi(-k);
            logs.push(a + (b - a) * (1.0 - u));
            logs.push(a + (b - a) * u);
        }
    }
    logs.truncate(count);
    logs.into_iter()
        .filter_map(|l| Point::from_log(l).ok())
        .filter(|&p| c.contains(p))
        .collect()
}

fn probes_in(set: &MeasurableSet, count: usize) -> Vec<Point> {
    let mut out: Vec<Point> = set
        .components()
        .iter()
        .flat_map(|c| component_probes(c, count))
        .collect();
    out.sort();
    out.dedup();
    out
}

/// Symbolic check that a single-interval family shrinks to nothing: either
/// `(aₙ, 1)` with `aₙ → 1` or `(0, bₙ)` with `bₙ → 0`, both open at the limit.
fn shrinks_to_empty(sets: &[MeasurableSet]) -> Result<bool, String> {
    let mut near_one = Vec::new();
    let mut near_zero = Vec::new();
    for s in sets {
        let c = s
            .as_single_interval()
            .ok_or_else(|| format!("unsupported witness shape: {s} is not one interval"))?;
        if c.hi.is_one() && !c.hi_closed && !c.lo.is_zero() {
            near_one.push(-c.lo.log_value());
        } else if c.lo.is_zero() && !c.lo_closed && !c.hi.is_one() {
            near_zero.push(-1.0 / c.hi.log_value());
        } else {
            return Err(format!("unsupported witness shape: {s}"));
        }
    }
    if !near_one.is_empty() && !near_zero.is_empty() {
        return Err("unsupported witness shape: mixed interval families".into());
    }
    let d = if near_one.is_empty() {
        near_zero
    } else {
        near_one
    };
    Ok(d.iter().all(|v| *v > 0.0) && tail_vanishes(&d))
}

/// Checks a witness at every level `1..depth`, with `probes_per_level`
/// probes placed inside each `K_{n+1}`.
pub fn verify_z_witness<K: TransitionKernel + ?Sized>(
    k: &K,
    w: &ZWitness,
    probes_per_level: usize,
) -> Result<ZReport, CertifyError> {
    if w.depth < 2 {
        return Err(CertifyError::Depth(w.depth));
    }
    if probes_per_level == 0 {
        return Err(CertifyError::NoProbes);
    }
    let mut eps = Vec::with_capacity(w.depth as usize);
    let mut sets = Vec::with_capacity(w.depth as usize);
    for n in 1..=w.depth {
        let e = w.eps(n);
        if e.is_nan() {
            return Err(CertifyError::Generator {
                n,
                what: "eps is NaN".into(),
            });
        }
        let s = w.set(n);
        if s.is_empty() {
            return Err(CertifyError::Generator {
                n,
                what: "set is empty".into(),
            });
        }
        eps.push(e);
        sets.push(s);
    }

    let mut notes = Vec::new();
    let eps_nonneg_vanishing =
        eps.iter().all(|e| *e >= 0.0 && e.is_finite()) && tail_vanishes(&eps);
    let nested = sets.windows(2).all(|p| p[1].is_subset(&p[0]));
    let empty_intersection = match shrinks_to_empty(&sets) {
        Ok(b) => b,
        Err(note) => {
            notes.push(note);
            false
        }
    };

    let levels: Vec<Result<(LevelMargin, Option<ZCounterexample>), CertifyError>> = (1..w.depth)
        .into_par_iter()
        .map(|n| {
            let i = (n - 1) as usize;
            let (kn, next, en) = (&sets[i], &sets[i + 1], eps[i]);
            let outside = kn.complement();
            let probes = probes_in(next, probes_per_level);
            let mut worst = LevelMargin {
                n,
                eps: en,
                worst_margin: f64::INFINITY,
                worst_x: f64::NAN,
                worst_log_x: f64::NAN,
                probes: probes.len(),
            };
            let mut first = None;
            for &x in &probes {
                let leak = kernel_measure(k, x)?.log_mass(&outside).value();
                let margin = en - leak;
                if margin < worst.worst_margin {
                    worst.worst_margin = margin;
                    worst.worst_x = x.value();
                    worst.worst_log_x = x.log_value();
                }
                if first.is_none() && margin < -MARGIN_TOLERANCE {
                    first = Some(ZCounterexample {
                        n,
                        x: x.value(),
                        log_x: x.log_value(),
                        mass: 1.0 - leak,
                        required: 1.0 - en,
                    });
                }
            }
            Ok((worst, first))
        })
        .collect();
    let mut margins = Vec::with_capacity(levels.len());
    let mut counterexample = None;
    for l in levels {
        let (m, c) = l?;
        if counterexample.is_none() {
            counterexample = c;
        }
        margins.push(m);
    }
    if margins.iter().any(|m| m.probes == 0) {
        notes.push("some level had no probe inside K_{n+1}".into());
    }
    let kernel_bound = counterexample.is_none() && margins.iter().all(|m| m.probes > 0);
    Ok(ZReport {
        chain: k.label().to_string(),
        witness: w.description.clone(),
        depth: w.depth,
        probes_per_level,
        eps_nonneg_vanishing,
        nested,
        empty_intersection,
        kernel_bound,
        notes,
        levels: margins,
        counterexample,
        qualifier: format!(
            "grid-relative: up to {probes_per_level} probes per level, levels 1..{}",
            w.depth - 1
        ),
    })
}

/// Both shapes for `ε ∈ {0.3, 0.5, 0.7}`.
pub fn candidate_witnesses(depth: u32) -> Vec<ZWitness> {
    let mut out = Vec::new();
    for shape in [Shape::NearZero, Shape::NearOne] {
        for eps in [0.3, 0.5, 0.7] {
            out.push(ZWitness::of_shape(shape, eps, depth).expect("valid parameter"));
        }
    }
    out
}
