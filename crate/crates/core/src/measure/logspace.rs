//! Log-domain arithmetic for nonnegative masses and signed quantities.
//!
//! Iterating the squaring map drives both states and masses far below the
//! smallest positive `f64` within a dozen steps, so everything that can
//! shrink geometrically is carried as a natural logarithm.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul};

use serde::{Deserialize, Serialize};

/// `ln(e^a + e^b)` without overflow or underflow.
pub fn ln_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// `ln(1 - e^x)` for `x <= 0`, accurate at both ends of the range.
pub fn ln_1m_exp(x: f64) -> f64 {
    debug_assert!(x <= 0.0 || x.is_nan());
    if x == 0.0 {
        f64::NEG_INFINITY
    } else if x > -std::f64::consts::LN_2 {
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

/// `ln(Σ e^xᵢ)` over an iterator of log values.
pub fn ln_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let values: Vec<f64> = values.into_iter().collect();
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let scaled: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + scaled.ln()
}

/// A nonnegative mass stored as its natural logarithm.
///
/// The linear mirror [`Mass::value`] saturates at zero once the mass drops
/// below the `f64` range; [`Mass::log10`] keeps reporting it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Mass {
    ln: f64,
}

impl Mass {
    pub const ZERO: Mass = Mass {
        ln: f64::NEG_INFINITY,
    };
    pub const ONE: Mass = Mass { ln: 0.0 };

    /// Returns `None` for negative or non-finite linear values.
    pub fn new(value: f64) -> Option<Mass> {
        if value.is_nan() || value < 0.0 || value.is_infinite() {
            None
        } else {
            Some(Mass { ln: value.ln() })
        }
    }

    /// Builds a mass from its natural log. `NaN` and `+inf` are rejected.
    pub fn from_ln(ln: f64) -> Option<Mass> {
        if ln.is_nan() || ln == f64::INFINITY {
            None
        } else {
            Some(Mass { ln })
        }
    }

    pub fn ln(self) -> f64 {
        self.ln
    }

    pub fn value(self) -> f64 {
        self.ln.exp()
    }

    pub fn log10(self) -> f64 {
        self.ln / std::f64::consts::LN_10
    }

    pub fn is_zero(self) -> bool {
        self.ln == f64::NEG_INFINITY
    }

    /// `max(self - other, 0)`.
    pub fn saturating_sub(self, other: Mass) -> Mass {
        if self.ln <= other.ln {
            Mass::ZERO
        } else if other.is_zero() {
            self
        } else {
            Mass {
                ln: self.ln + ln_1m_exp(other.ln - self.ln),
            }
        }
    }

    /// `1 - self`, clamped at zero.
    pub fn complement(self) -> Mass {
        if self.ln >= 0.0 {
            Mass::ZERO
        } else {
            Mass {
                ln: ln_1m_exp(self.ln),
            }
        }
    }

    pub fn min(self, other: Mass) -> Mass {
        if self.ln <= other.ln {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Mass) -> Mass {
        if self.ln >= other.ln {
            self
        } else {
            other
        }
    }
}

impl Add for Mass {
    type Output = Mass;
    fn add(self, rhs: Mass) -> Mass {
        Mass {
            ln: ln_add_exp(self.ln, rhs.ln),
        }
    }
}

impl Mul for Mass {
    type Output = Mass;
    fn mul(self, rhs: Mass) -> Mass {
        if self.is_zero() || rhs.is_zero() {
            Mass::ZERO
        } else {
            Mass {
                ln: self.ln + rhs.ln,
            }
        }
    }
}

impl std::iter::Sum for Mass {
    fn sum<I: Iterator<Item = Mass>>(iter: I) -> Mass {
        Mass {
            ln: ln_sum(iter.map(Mass::ln)),
        }
    }
}

impl PartialOrd for Mass {
    fn partial_cmp(&self, other: &Mass) -> Option<Ordering> {
        self.ln.partial_cmp(&other.ln)
    }
}

impl fmt::Display for Mass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.value();
        if v == 0.0 && !self.is_zero() {
            write!(f, "10^{}", self.log10())
        } else {
            write!(f, "{v}")
        }
    }
}

/// A signed real stored as sign and `ln|v|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogNum {
    negative: bool,
    ln: f64,
}

// Named methods rather than operator traits: `div` and `powi` are fallible.
#[allow(clippy::should_implement_trait)]
impl LogNum {
    pub const ZERO: LogNum = LogNum {
        negative: false,
        ln: f64::NEG_INFINITY,
    };
    pub const ONE: LogNum = LogNum {
        negative: false,
        ln: 0.0,
    };

    pub fn from_f64(v: f64) -> LogNum {
        LogNum {
            negative: v < 0.0,
            ln: v.abs().ln(),
        }
    }

    /// Positive number `e^ln`.
    pub fn from_ln(ln: f64) -> LogNum {
        LogNum {
            negative: false,
            ln,
        }
    }

    pub fn is_zero(self) -> bool {
        self.ln == f64::NEG_INFINITY
    }

    pub fn is_negative(self) -> bool {
        self.negative && !self.is_zero()
    }

    pub fn is_finite(self) -> bool {
        !self.ln.is_nan() && self.ln != f64::INFINITY
    }

    /// `ln|v|`.
    pub fn ln_abs(self) -> f64 {
        self.ln
    }

    pub fn value(self) -> f64 {
        let m = self.ln.exp();
        if self.negative {
            -m
        } else {
            m
        }
    }

    pub fn neg(self) -> LogNum {
        LogNum {
            negative: !self.negative,
            ln: self.ln,
        }
    }

    pub fn add(self, rhs: LogNum) -> LogNum {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        if self.negative == rhs.negative {
            return LogNum {
                negative: self.negative,
                ln: ln_add_exp(self.ln, rhs.ln),
            };
        }
        let (big, small) = if self.ln >= rhs.ln {
            (self, rhs)
        } else {
            (rhs, self)
        };
        if big.ln == small.ln {
            return LogNum::ZERO;
        }
        LogNum {
            negative: big.negative,
            ln: big.ln + ln_1m_exp(small.ln - big.ln),
        }
    }

    pub fn sub(self, rhs: LogNum) -> LogNum {
        self.add(rhs.neg())
    }

    pub fn mul(self, rhs: LogNum) -> LogNum {
        if self.is_zero() || rhs.is_zero() {
            return LogNum::ZERO;
        }
        LogNum {
            negative: self.negative != rhs.negative,
            ln: self.ln + rhs.ln,
        }
    }

    /// `None` on division by zero.
    pub fn div(self, rhs: LogNum) -> Option<LogNum> {
        if rhs.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(LogNum::ZERO);
        }
        Some(LogNum {
            negative: self.negative != rhs.negative,
            ln: self.ln - rhs.ln,
        })
    }

    /// Integer power; `None` for a negative power of zero.
    pub fn powi(self, k: i64) -> Option<LogNum> {
        if k == 0 {
            return Some(LogNum::ONE);
        }
        if self.is_zero() {
            return if k > 0 { Some(LogNum::ZERO) } else { None };
        }
        Some(LogNum {
            negative: self.negative && k % 2 != 0,
            ln: self.ln * k as f64,
        })
    }

    /// The nonnegative part as a [`Mass`]; negative values map to zero.
    pub fn to_mass(self) -> Mass {
        if self.is_negative() {
            Mass::ZERO
        } else {
            Mass { ln: self.ln }
        }
    }
}

impl From<Mass> for LogNum {
    fn from(m: Mass) -> LogNum {
        LogNum::from_ln(m.ln())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_1m_exp_matches_linear_in_the_bulk() {
        for &x in &[0.1f64, 0.25, 0.5, 0.9, 0.999] {
            let got = ln_1m_exp(x.ln());
            assert!((got - (1.0 - x).ln()).abs() < 1e-13, "{x}");
        }
        assert_eq!(ln_1m_exp(0.0), f64::NEG_INFINITY);
        // 1 - e^{-1e-20} = 1e-20 to full precision.
        let tiny = ln_1m_exp(-1e-20);
        assert!((tiny - (1e-20f64).ln()).abs() < 1e-12);
    }

    #[test]
    fn mass_arithmetic() {
        let a = Mass::new(0.25).unwrap();
        let b = Mass::new(0.5).unwrap();
        assert!(((a + b).value() - 0.75).abs() < 1e-15);
        assert!(((a * b).value() - 0.125).abs() < 1e-15);
        assert_eq!(a.saturating_sub(b), Mass::ZERO);
        assert!((b.saturating_sub(a).value() - 0.25).abs() < 1e-15);
        assert!((a.complement().value() - 0.75).abs() < 1e-15);
        assert!(Mass::new(-1.0).is_none());
    }

    #[test]
    fn mass_below_f64_keeps_its_log() {
        let m = Mass::from_ln(-1e6).unwrap();
        assert_eq!(m.value(), 0.0);
        assert!(!m.is_zero());
        assert!((m.log10() - (-1e6 / std::f64::consts::LN_10)).abs() < 1e-9);
    }

    #[test]
    fn lognum_signed_ops() {
        let a = LogNum::from_f64(0.3);
        let b = LogNum::from_f64(0.7);
        assert!((a.sub(b).value() + 0.4).abs() < 1e-15);
        assert!((b.sub(a).value() - 0.4).abs() < 1e-15);
        assert!(a.sub(a).is_zero());
        assert!((a.neg().powi(3).unwrap().value() + 0.027).abs() < 1e-15);
        assert!((a.div(b).unwrap().value() - 3.0 / 7.0).abs() < 1e-15);
        assert!(LogNum::ZERO.powi(-1).is_none());
        assert!(a.div(LogNum::ZERO).is_none());
    }
}
