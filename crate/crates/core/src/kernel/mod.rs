//! Transition kernels and the Markov operators they induce.
//!
//! A kernel maps each state to a probability [`AtomicMeasure`] `p(x, ·)`.
//! On measures it acts by pushforward, `Aμ(E) = ∫ p(x,E) μ(dx)`
//! ([`apply_markov`]); on functions by averaging,
//! `Tf(x) = ∫ f(y) p(x,dy)` ([`apply_dual`]).

mod spec;
mod two_jump;

use std::sync::Arc;

use thiserror::Error;

use crate::cli::expr::{ExprError, PiError};
use crate::measure::{
    grid, integrate, AtomicMeasure, Mass, MeasurableSet, MeasureError, Point, TestFunction,
    PROBABILITY_TOLERANCE,
};

pub use spec::{KernelSpec, PieceSpec};
pub use two_jump::{Builtin, PiPiece, TwoJumpChain};

/// Audit grid size for kernel rows.
pub const KERNEL_AUDIT_POINTS: usize = 1_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("kernel {label}: p({x}, X) = {total}, not 1")]
    NotStochastic { label: String, x: f64, total: f64 },
    #[error("no piece of {label} covers x = {x}")]
    Uncovered { label: String, x: f64 },
    #[error("pieces do not partition (0,1): {0}")]
    BadPartition(String),
    #[error("jump probability of piece {piece}: {source}")]
    Pi { piece: usize, source: PiError },
    #[error("evaluating jump probability at x = {x}: {source}")]
    Eval { x: f64, source: ExprError },
    #[error("step count must be at least 1")]
    ZeroSteps,
    #[error("mc5 needs p in [0,1], got {0}")]
    BadParameter(f64),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error("kernel spec: {0}")]
    Spec(String),
}

/// `x ↦ p(x, ·)`.
pub trait TransitionKernel: Send + Sync {
    fn label(&self) -> &str;

    /// The raw row; [`kernel_measure`] adds the stochasticity check.
    fn transition(&self, x: Point) -> Result<AtomicMeasure, KernelError>;
}

/// A kernel given by a closure. Rows are audited on construction.
#[derive(Clone)]
pub struct FnKernel {
    label: String,
    row: Arc<dyn Fn(Point) -> AtomicMeasure + Send + Sync>,
}

impl FnKernel {
    pub fn new<F>(label: impl Into<String>, row: F) -> Result<FnKernel, KernelError>
    where
        F: Fn(Point) -> AtomicMeasure + Send + Sync + 'static,
    {
        let k = FnKernel {
            label: label.into(),
            row: Arc::new(row),
        };
        audit(&k)?;
        Ok(k)
    }
}

impl TransitionKernel for FnKernel {
    fn label(&self) -> &str {
        &self.label
    }

    fn transition(&self, x: Point) -> Result<AtomicMeasure, KernelError> {
        Ok((self.row)(x))
    }
}

/// `p(x, ·) = δₓ`.
pub fn identity_kernel() -> FnKernel {
    FnKernel::new("identity", AtomicMeasure::dirac).expect("identity rows are stochastic")
}

/// Checks every row on the kernel audit grid.
pub fn audit<K: TransitionKernel + ?Sized>(k: &K) -> Result<(), KernelError> {
    for x in grid::audit_grid(KERNEL_AUDIT_POINTS) {
        kernel_measure(k, x)?;
    }
    Ok(())
}

/// `p(x, ·)`, rejected unless it is a probability measure.
pub fn kernel_measure<K: TransitionKernel + ?Sized>(
    k: &K,
    x: Point,
) -> Result<AtomicMeasure, KernelError> {
    let row = k.transition(x)?;
    if !row.is_probability() {
        return Err(KernelError::NotStochastic {
            label: k.label().to_string(),
            x: x.value(),
            total: row.total().value(),
        });
    }
    Ok(row)
}

/// `Aμ = Σᵢ mᵢ p(xᵢ, ·)`. Total mass is preserved; a violation is an error.
pub fn apply_markov<K: TransitionKernel + ?Sized>(
    k: &K,
    mu: &AtomicMeasure,
) -> Result<AtomicMeasure, KernelError> {
    let mut atoms = Vec::with_capacity(2 * mu.len());
    for a in mu.atoms() {
        let row = kernel_measure(k, a.point)?;
        atoms.extend(row.atoms().iter().map(|b| (b.point, b.mass * a.mass)));
    }
    let out = AtomicMeasure::new(atoms);
    let drift = (out.total().ln() - mu.total().ln()).abs();
    if !mu.is_empty() && drift > PROBABILITY_TOLERANCE {
        return Err(KernelError::NotStochastic {
            label: k.label().to_string(),
            x: f64::NAN,
            total: out.total().value(),
        });
    }
    Ok(out)
}

/// `Tf(x) = ∫ f(y) p(x, dy)`.
pub fn apply_dual<K: TransitionKernel + ?Sized>(
    k: &K,
    f: &TestFunction,
    x: Point,
) -> Result<f64, KernelError> {
    Ok(integrate(f, &kernel_measure(k, x)?))
}

/// `[μ₀, Aμ₀, …, Aⁿμ₀]`.
pub fn iterate<K: TransitionKernel + ?Sized>(
    k: &K,
    mu0: &AtomicMeasure,
    n: usize,
) -> Result<Vec<AtomicMeasure>, KernelError> {
    mu0.require_probability()?;
    let mut out = Vec::with_capacity(n + 1);
    out.push(mu0.clone());
    for i in 0..n {
        let next = apply_markov(k, &out[i])?;
        out.push(next);
    }
    Ok(out)
}

/// `Aⁿμ₀` without keeping the intermediate measures.
pub fn iterate_last<K: TransitionKernel + ?Sized>(
    k: &K,
    mu0: &AtomicMeasure,
    n: usize,
) -> Result<AtomicMeasure, KernelError> {
    mu0.require_probability()?;
    let mut mu = mu0.clone();
    for _ in 0..n {
        mu = apply_markov(k, &mu)?;
    }
    Ok(mu)
}

/// `pᵏ(x, E)` in the log domain.
pub fn nstep_log_mass<K: TransitionKernel + ?Sized>(
    k: &K,
    x: Point,
    set: &MeasurableSet,
    steps: usize,
) -> Result<Mass, KernelError> {
    if steps == 0 {
        return Err(KernelError::ZeroSteps);
    }
    Ok(iterate_last(k, &AtomicMeasure::dirac(x), steps)?.log_mass(set))
}

/// `pᵏ(x, E)`.
pub fn nstep_mass<K: TransitionKernel + ?Sized>(
    k: &K,
    x: Point,
    set: &MeasurableSet,
    steps: usize,
) -> Result<f64, KernelError> {
    if steps == 0 {
        return Err(KernelError::ZeroSteps);
    }
    Ok(iterate_last(k, &AtomicMeasure::dirac(x), steps)?.mass(set))
}

/// `q_m(x, E) = (1/m) Σ_{k=1..m} pᵏ(x, E)`.
pub fn cesaro_mass<K: TransitionKernel + ?Sized>(
    k: &K,
    x: Point,
    set: &MeasurableSet,
    m: usize,
) -> Result<f64, KernelError> {
    if m == 0 {
        return Err(KernelError::ZeroSteps);
    }
    let path = iterate(k, &AtomicMeasure::dirac(x), m)?;
    let sum: f64 = path[1..].iter().map(|mu| mu.mass(set)).sum();
    Ok((sum / m as f64).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::dirac;

    fn p(x: f64) -> Point {
        Point::new(x).unwrap()
    }

    fn lin(pairs: &[(f64, f64)]) -> AtomicMeasure {
        AtomicMeasure::from_linear(pairs).unwrap()
    }

    fn assert_close(a: &AtomicMeasure, b: &AtomicMeasure) {
        assert_eq!(a.len(), b.len(), "{a} vs {b}");
        for (x, y) in a.atoms().iter().zip(b.atoms()) {
            assert!(x.point.same_atom(y.point), "{a} vs {b}");
            assert!(
                (x.mass.value() - y.mass.value()).abs() < 1e-15,
                "{a} vs {b}"
            );
        }
    }

    #[test]
    fn kernel_measure_examples() {
        let mc1 = TwoJumpChain::builtin(Builtin::Mc1);
        assert_close(
            &kernel_measure(&mc1, p(0.5)).unwrap(),
            &lin(&[(0.25, 0.5), (0.0, 0.5)]),
        );
        assert_eq!(
            kernel_measure(&mc1, Point::ZERO).unwrap(),
            dirac(Point::ZERO)
        );
        let mc5 = TwoJumpChain::builtin(Builtin::Mc5(0.3));
        assert_close(
            &kernel_measure(&mc5, p(0.9)).unwrap(),
            &lin(&[(0.81, 0.3), (0.0, 0.7)]),
        );
    }

    #[test]
    fn apply_markov_examples() {
        let mc1 = TwoJumpChain::builtin(Builtin::Mc1);
        let d0 = dirac(Point::ZERO);
        assert_eq!(apply_markov(&mc1, &d0).unwrap(), d0);
        assert_close(
            &apply_markov(&mc1, &dirac(p(0.5))).unwrap(),
            &kernel_measure(&mc1, p(0.5)).unwrap(),
        );
        let mc2 = TwoJumpChain::builtin(Builtin::Mc2);
        let mu = lin(&[(0.5, 0.5), (1.0, 0.5)]);
        assert_close(
            &apply_markov(&mc2, &mu).unwrap(),
            &lin(&[(0.25, 0.25), (0.0, 0.25), (1.0, 0.5)]),
        );
    }

    #[test]
    fn apply_dual_examples() {
        let mc1 = TwoJumpChain::builtin(Builtin::Mc1);
        let f = TestFunction::linear("cos", 1.0, |y: f64| (3.0 * y).cos()).unwrap();
        for &x in &[0.1, 0.5, 0.9] {
            let want = f.eval(Point::ZERO) * (1.0 - x) + f.eval(p(x * x)) * x;
            assert!((apply_dual(&mc1, &f, p(x)).unwrap() - want).abs() < 1e-15);
        }
        let one = TestFunction::constant(1.0);
        assert!((apply_dual(&mc1, &one, p(0.37)).unwrap() - 1.0).abs() < 1e-15);
        let mc2 = TwoJumpChain::builtin(Builtin::Mc2);
        let id = TestFunction::linear("x", 1.0, |y| y).unwrap();
        assert!((apply_dual(&mc2, &id, p(0.5)).unwrap() - 0.125).abs() < 1e-15);
    }

    #[test]
    fn iterate_examples() {
        let mc1 = TwoJumpChain::builtin(Builtin::Mc1);
        let path = iterate(&mc1, &dirac(p(0.5)), 5).unwrap();
        assert_eq!(path.len(), 6);
        for (n, mu) in path.iter().enumerate().skip(1) {
            let atom = p(0.5).pow2n(n as u32);
            let want = 0.5f64.powi((1 << n) - 1);
            assert!((mu.mass_at(atom).value() - want).abs() <= 1e-12 * want);
        }
        let mc2 = TwoJumpChain::builtin(Builtin::Mc2);
        let x0 = 0.4f64;
        let path = iterate(&mc2, &dirac(p(x0)), 6).unwrap();
        let mut prod = 1.0;
        for (n, mu) in path.iter().enumerate().skip(1) {
            prod *= 1.0 - x0.powi(1 << (n - 1));
            let moving = mu.mass_at(p(x0).pow2n(n as u32)).value();
            assert!((moving - prod).abs() < 1e-12);
        }
        for b in Builtin::all_default() {
            let k = TwoJumpChain::builtin(b);
            let path = iterate(&k, &dirac(Point::ZERO), 4).unwrap();
            assert!(path.iter().all(|mu| *mu == dirac(Point::ZERO)));
        }
    }

    #[test]
    fn nstep_and_cesaro_examples() {
        let interior = MeasurableSet::interior();
        let mc3 = TwoJumpChain::builtin(Builtin::Mc3);
        for n in 1..=8 {
            let v = nstep_mass(&mc3, p(0.6), &interior, n).unwrap();
            assert!(v < 0.75f64.powi(n as i32));
        }
        let mc5 = TwoJumpChain::builtin(Builtin::Mc5(0.5));
        assert!((nstep_mass(&mc5, p(0.5), &interior, 3).unwrap() - 0.125).abs() < 1e-15);
        let one = MeasurableSet::singleton(Point::ONE);
        for k in [1, 3, 7] {
            assert_eq!(nstep_mass(&mc3, Point::ONE, &one, k).unwrap(), 1.0);
        }
        assert_eq!(
            cesaro_mass(&mc3, p(0.3), &interior, 1).unwrap(),
            nstep_mass(&mc3, p(0.3), &interior, 1).unwrap()
        );
        assert!((cesaro_mass(&mc5, p(0.5), &interior, 2).unwrap() - 0.375).abs() < 1e-15);
        assert_eq!(
            cesaro_mass(&mc3, p(0.3), &MeasurableSet::unit(), 5).unwrap(),
            1.0
        );
        assert_eq!(
            nstep_mass(&mc5, p(0.5), &interior, 0),
            Err(KernelError::ZeroSteps)
        );
    }

    #[test]
    fn non_stochastic_rows_are_rejected() {
        let leaky = FnKernel::new("leaky", |x| {
            AtomicMeasure::new([(x, Mass::new(0.9).unwrap())])
        });
        assert!(matches!(leaky, Err(KernelError::NotStochastic { .. })));
    }

    #[test]
    fn identity_kernel_fixes_everything() {
        let id = identity_kernel();
        let mu = lin(&[(0.2, 0.5), (0.7, 0.5)]);
        assert_eq!(apply_markov(&id, &mu).unwrap(), mu);
    }
}
