use std::cmp::Ordering;
use std::fmt;

use super::MeasureError;

/// Atoms closer than this in log-value are the same atom.
pub const ATOM_TOLERANCE: f64 = 1e-12;

/// A state `x ∈ [0,1]`, stored as `ln x`.
///
/// `ln 0 = -inf` and `ln 1 = 0` are exact sentinels. Squaring doubles the
/// stored log, which is exact in binary floating point, so trajectories of
/// `x ↦ x²` never round and never underflow to zero.
#[derive(Clone, Copy, Debug)]
pub struct Point {
    log_value: f64,
}

impl Point {
    pub const ZERO: Point = Point {
        log_value: f64::NEG_INFINITY,
    };
    pub const ONE: Point = Point { log_value: 0.0 };

    /// A point from its linear value.
    pub fn new(x: f64) -> Result<Point, MeasureError> {
        if !(0.0..=1.0).contains(&x) {
            return Err(MeasureError::PointOutOfRange(x));
        }
        Ok(Point { log_value: x.ln() })
    }

    /// A point from `ln x`, which must be in `[-inf, 0]`.
    pub fn from_log(log_value: f64) -> Result<Point, MeasureError> {
        if log_value.is_nan() || log_value > 0.0 {
            return Err(MeasureError::InvalidLog(log_value));
        }
        Ok(Point { log_value })
    }

    /// The point `1 - d`, accurate for tiny `d`.
    pub fn one_minus(d: f64) -> Result<Point, MeasureError> {
        if !(0.0..=1.0).contains(&d) {
            return Err(MeasureError::PointOutOfRange(1.0 - d));
        }
        Ok(Point {
            log_value: (-d).ln_1p(),
        })
    }

    pub fn log_value(self) -> f64 {
        self.log_value
    }

    /// Linear value; underflows to `0.0` for very deep trajectory points.
    pub fn value(self) -> f64 {
        self.log_value.exp()
    }

    pub fn is_zero(self) -> bool {
        self.log_value == f64::NEG_INFINITY
    }

    pub fn is_one(self) -> bool {
        self.log_value == 0.0
    }

    pub fn is_interior(self) -> bool {
        !self.is_zero() && !self.is_one()
    }

    pub fn square(self) -> Point {
        Point {
            log_value: self.log_value * 2.0,
        }
    }

    /// `x^(2^n)` in one multiply.
    pub fn pow2n(self, n: u32) -> Point {
        Point {
            log_value: self.log_value * 2f64.powi(n as i32),
        }
    }

    /// Atom identity: exact for the sentinels 0 and 1, within
    /// [`ATOM_TOLERANCE`] on log-value otherwise.
    pub fn same_atom(self, other: Point) -> bool {
        if !self.is_interior() || !other.is_interior() {
            return self.log_value == other.log_value;
        }
        (self.log_value - other.log_value).abs() <= ATOM_TOLERANCE
    }
}

impl PartialEq for Point {
    fn eq(&self, other: &Point) -> bool {
        self.log_value == other.log_value
    }
}

impl Eq for Point {}

impl PartialOrd for Point {
    fn partial_cmp(&self, other: &Point) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Point {
    fn cmp(&self, other: &Point) -> Ordering {
        self.log_value.total_cmp(&other.log_value)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.value();
        if v == 0.0 && !self.is_zero() {
            write!(f, "exp({})", self.log_value)
        } else {
            write!(f, "{v}")
        }
    }
}
