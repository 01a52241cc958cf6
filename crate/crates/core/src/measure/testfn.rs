use std::fmt;
use std::sync::Arc;

use super::{grid, MeasureError, Point};

/// Grid size used to check a test function's declared bound.
pub const BOUND_CHECK_POINTS: usize = 10_000;

/// A bounded function on `[0,1]` used to probe measures.
#[derive(Clone)]
pub struct TestFunction {
    label: String,
    bound: f64,
    eval: Arc<dyn Fn(Point) -> f64 + Send + Sync>,
}

impl TestFunction {
    /// Registers `f`, rejecting it if `|f| > bound` anywhere on the check grid.
    pub fn new<F>(label: impl Into<String>, bound: f64, f: F) -> Result<TestFunction, MeasureError>
    where
        F: Fn(Point) -> f64 + Send + Sync + 'static,
    {
        let label = label.into();
        for x in grid::audit_grid(BOUND_CHECK_POINTS) {
            let v = f(x);
            if !v.is_finite() || v.abs() > bound {
                return Err(MeasureError::Unbounded {
                    label,
                    x: x.value(),
                    value: v,
                    bound,
                });
            }
        }
        Ok(TestFunction {
            label,
            bound,
            eval: Arc::new(f),
        })
    }

    /// Registers a function of the linear value `x`.
    pub fn linear<F>(
        label: impl Into<String>,
        bound: f64,
        f: F,
    ) -> Result<TestFunction, MeasureError>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        TestFunction::new(label, bound, move |p: Point| f(p.value()))
    }

    pub fn constant(c: f64) -> TestFunction {
        TestFunction {
            label: format!("{c}"),
            bound: c.abs(),
            eval: Arc::new(move |_| c),
        }
    }

    pub fn eval(&self, x: Point) -> f64 {
        (self.eval)(x)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("label", &self.label)
            .field("bound", &self.bound)
            .finish()
    }
}

/// The pinned continuous family used for weak-* diagnostics:
/// `1, x, x², 1−x, |x−½|, min(1, 4x(1−x))`.
pub fn default_test_family() -> Vec<TestFunction> {
    type Entry = (&'static str, fn(f64) -> f64);
    let fam: [Entry; 6] = [
        ("1", |_| 1.0),
        ("x", |x| x),
        ("x^2", |x| x * x),
        ("1-x", |x| 1.0 - x),
        ("|x-1/2|", |x| (x - 0.5).abs()),
        ("min(1,4x(1-x))", |x| (4.0 * x * (1.0 - x)).min(1.0)),
    ];
    fam.into_iter()
        .map(|(label, f)| {
            TestFunction::linear(label, 1.0, f).expect("default family is bounded by 1")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_family_is_pinned() {
        let labels: Vec<_> = default_test_family()
            .iter()
            .map(|f| f.label().to_string())
            .collect();
        assert_eq!(
            labels,
            ["1", "x", "x^2", "1-x", "|x-1/2|", "min(1,4x(1-x))"]
        );
    }

    #[test]
    fn unbounded_function_is_rejected() {
        let err = TestFunction::linear("1/x", 1e6, |x| 1.0 / x).unwrap_err();
        assert!(matches!(err, MeasureError::Unbounded { .. }));
        assert!(TestFunction::linear("2x", 1.0, |x| 2.0 * x).is_err());
    }
}
