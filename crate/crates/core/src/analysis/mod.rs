//! Convergence diagnostics and structural checks for a chain.
//!
//! Strong convergence is measured by total variation, uniformity by the sup
//! over a grid of starting points, weak-* convergence by the worst gap over a
//! finite family of continuous test functions. Grids are always explicit:
//! nothing here claims a true supremum over `(0,1)`.

mod profile;
mod trajectory;

use rayon::prelude::*;
use thiserror::Error;

use crate::kernel::{
    apply_dual, apply_markov, iterate_last, kernel_measure, KernelError, TransitionKernel,
};
use crate::measure::{
    dirac, integrate, ln_1m_exp, tv_distance, AtomicMeasure, MeasurableSet, MeasureError, Point,
    TestFunction, PROBABILITY_TOLERANCE,
};

pub use profile::{
    convergence_profile, fmt_real, profiles_csv, profiles_json, ConvergenceProfile, ProfileRow,
    PROFILE_HEADER,
};
pub use trajectory::{min_log_separation, trajectory_set, TrajectorySet};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error("grid is empty")]
    EmptyGrid,
    #[error("test family is empty")]
    EmptyTests,
    #[error("approach sequence is empty")]
    EmptyApproach,
    #[error("approach sequence contains the limit point {0}")]
    ApproachHitsLimit(f64),
    #[error("probe {0} lies outside the set")]
    ProbeOutsideSet(f64),
    #[error("{0} needs a starting point in (0,1)")]
    NotInterior(&'static str),
    #[error("region must lie inside (0,1)")]
    RegionNotInterior,
    #[error("no grid point lies in the region")]
    EmptyRegionGrid,
}

/// `max_{x₀ ∈ grid} ‖Aⁿδ_{x₀} − target‖`.
pub fn uniformity_sup<K: TransitionKernel + ?Sized>(
    k: &K,
    grid: &[Point],
    target: &AtomicMeasure,
    n: usize,
) -> Result<f64, AnalysisError> {
    Ok(uniformity_argmax(k, grid, target, n)?.1)
}

/// [`uniformity_sup`] with the maximizing grid point (the first on ties).
pub fn uniformity_argmax<K: TransitionKernel + ?Sized>(
    k: &K,
    grid: &[Point],
    target: &AtomicMeasure,
    n: usize,
) -> Result<(Point, f64), AnalysisError> {
    if grid.is_empty() {
        return Err(AnalysisError::EmptyGrid);
    }
    target.require_probability()?;
    let values: Vec<Result<f64, AnalysisError>> = grid
        .par_iter()
        .map(|&x0| {
            let mu = iterate_last(k, &dirac(x0), n)?;
            Ok(tv_distance(&mu, target)?.value())
        })
        .collect();
    let mut best = (grid[0], f64::NEG_INFINITY);
    for (&x0, v) in grid.iter().zip(values) {
        let v = v?;
        if v > best.1 {
            best = (x0, v);
        }
    }
    Ok(best)
}

/// `max_f |⟨f, Aⁿδ_{x₀}⟩ − ⟨f, target⟩|`.
pub fn weak_star_gap<K: TransitionKernel + ?Sized>(
    k: &K,
    x0: Point,
    n: usize,
    tests: &[TestFunction],
    target: &AtomicMeasure,
) -> Result<f64, AnalysisError> {
    if tests.is_empty() {
        return Err(AnalysisError::EmptyTests);
    }
    let mu = iterate_last(k, &dirac(x0), n)?;
    Ok(gap_between(&mu, target, tests))
}

pub(crate) fn gap_between(
    mu: &AtomicMeasure,
    target: &AtomicMeasure,
    tests: &[TestFunction],
) -> f64 {
    tests
        .iter()
        .map(|f| (integrate(f, mu) - integrate(f, target)).abs())
        .fold(0.0, f64::max)
}

/// `(Tⁿf)(x)` by recursion through the kernel rows.
pub fn iterated_dual<K: TransitionKernel + ?Sized>(
    k: &K,
    f: &TestFunction,
    x: Point,
    n: usize,
) -> Result<f64, AnalysisError> {
    if n == 0 {
        return Ok(f.eval(x));
    }
    let row = kernel_measure(k, x)?;
    if row.len() == 1 && row.atoms()[0].point == x {
        // Absorbing: Tⁿf(x) = f(x).
        return Ok(f.eval(x));
    }
    let mut acc = 0.0;
    for a in row.atoms() {
        acc += a.mass.value() * iterated_dual(k, f, a.point, n - 1)?;
    }
    Ok(acc)
}

/// [`weak_star_gap`] computed through the dual operator: `⟨f, μₙ⟩ = (Tⁿf)(x₀)`.
pub fn weak_star_gap_dual<K: TransitionKernel + ?Sized>(
    k: &K,
    x0: Point,
    n: usize,
    tests: &[TestFunction],
    target: &AtomicMeasure,
) -> Result<f64, AnalysisError> {
    if tests.is_empty() {
        return Err(AnalysisError::EmptyTests);
    }
    let mut gap = 0.0f64;
    for f in tests {
        let lhs = iterated_dual(k, f, x0, n)?;
        gap = gap.max((lhs - integrate(f, target)).abs());
    }
    Ok(gap)
}

/// Result of a stochastic-closedness check.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosureReport {
    pub closed: bool,
    /// `max_x (1 − p(x, S))` over the probes.
    pub max_leak: f64,
    pub worst_probe: Option<Point>,
}

/// Checks `p(x, S) = 1` at every probe.
pub fn is_stochastically_closed<K: TransitionKernel + ?Sized>(
    k: &K,
    set: &MeasurableSet,
    probes: &[Point],
) -> Result<ClosureReport, AnalysisError> {
    let mut max_leak = 0.0f64;
    let mut worst_probe = None;
    for &x in probes {
        if !set.contains(x) {
            return Err(AnalysisError::ProbeOutsideSet(x.value()));
        }
        let leak = kernel_measure(k, x)?.log_mass(set).complement().value();
        if leak > max_leak || worst_probe.is_none() {
            max_leak = max_leak.max(leak);
            worst_probe = Some(x);
        }
    }
    Ok(ClosureReport {
        closed: max_leak <= PROBABILITY_TOLERANCE,
        max_leak,
        worst_probe,
    })
}

/// `‖Aμ − μ‖`; zero iff `μ` is invariant.
pub fn invariance_residual<K: TransitionKernel + ?Sized>(
    k: &K,
    mu: &AtomicMeasure,
) -> Result<f64, AnalysisError> {
    mu.require_probability()?;
    let next = apply_markov(k, mu)?;
    Ok(tv_distance(&next, mu)?.value())
}

/// `∫_{(0,1)} p(x, {0}) μ(dx)`: the one-step flux from the interior into 0.
pub fn absorption_functional<K: TransitionKernel + ?Sized>(
    k: &K,
    mu: &AtomicMeasure,
) -> Result<f64, AnalysisError> {
    mu.require_probability()?;
    let zero = MeasurableSet::singleton(Point::ZERO);
    let mut flux = 0.0;
    for a in mu.atoms().iter().filter(|a| a.point.is_interior()) {
        flux += a.mass.value() * kernel_measure(k, a.point)?.mass(&zero);
    }
    Ok(flux)
}

/// `|Tf(x*) − Tf(x_last)|` where `x_last` is the final approach point.
pub fn feller_defect<K: TransitionKernel + ?Sized>(
    k: &K,
    f: &TestFunction,
    x_star: Point,
    approach: &[Point],
) -> Result<f64, AnalysisError> {
    let last = *approach.last().ok_or(AnalysisError::EmptyApproach)?;
    if approach.contains(&x_star) {
        return Err(AnalysisError::ApproachHitsLimit(x_star.value()));
    }
    Ok((apply_dual(k, f, x_star)? - apply_dual(k, f, last)?).abs())
}

/// Grid points `x` with `p(x, {x}) = 1`.
pub fn dirac_fixed_points<K: TransitionKernel + ?Sized>(
    k: &K,
    grid: &[Point],
) -> Result<Vec<Point>, AnalysisError> {
    let flags: Vec<Result<bool, AnalysisError>> = grid
        .par_iter()
        .map(|&x| {
            let stay = kernel_measure(k, x)?.log_mass(&MeasurableSet::singleton(x));
            Ok(stay.ln() >= -PROBABILITY_TOLERANCE)
        })
        .collect();
    let mut out = Vec::new();
    for (&x, flag) in grid.iter().zip(flags) {
        if flag? {
            out.push(x);
        }
    }
    Ok(out)
}

/// `γ(x₀) = Π_{k≥0} (1 − x₀^{2^k})`, summed in log space until the
/// increment drops below `1e−16`.
pub fn gamma(x0: Point) -> Result<f64, AnalysisError> {
    if !x0.is_interior() {
        return Err(AnalysisError::NotInterior("gamma"));
    }
    let mut ln = 0.0;
    let mut k = 0;
    loop {
        let term = ln_1m_exp(x0.pow2n(k).log_value());
        ln += term;
        if term.abs() < 1e-16 {
            break;
        }
        k += 1;
    }
    Ok(ln.exp())
}

/// `inf_{x ∈ grid ∩ region} p(x, {0})`. A positive value rules out invariant
/// measures charging the region: their one-step flux into 0 would be at
/// least that value times the region's mass, yet must vanish.
pub fn invariant_flux_bound<K: TransitionKernel + ?Sized>(
    k: &K,
    region: &MeasurableSet,
    atom_grid: &[Point],
) -> Result<f64, AnalysisError> {
    if !region.is_subset(&MeasurableSet::interior()) {
        return Err(AnalysisError::RegionNotInterior);
    }
    let zero = MeasurableSet::singleton(Point::ZERO);
    let mut inf = f64::INFINITY;
    for &x in atom_grid.iter().filter(|&&x| region.contains(x)) {
        inf = inf.min(kernel_measure(k, x)?.mass(&zero));
    }
    if inf.is_infinite() {
        return Err(AnalysisError::EmptyRegionGrid);
    }
    Ok(inf)
}
