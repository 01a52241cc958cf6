//! Finitely supported measures and measurable test sets on `[0,1]`.

mod atomic;
pub mod grid;
mod logspace;
mod point;
mod set;
mod testfn;

use thiserror::Error;

pub use atomic::{
    convex_combine, dirac, integrate, is_singular, mass, tv_distance, Atom, AtomJson,
    AtomicMeasure, LogX, MeasureJson, PROBABILITY_TOLERANCE,
};
pub use logspace::{ln_1m_exp, ln_add_exp, ln_sum, LogNum, Mass};
pub use point::{Point, ATOM_TOLERANCE};
pub use set::{Interval, MeasurableSet, SetJson};
pub use testfn::{default_test_family, TestFunction, BOUND_CHECK_POINTS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("point {0} is outside [0,1]")]
    PointOutOfRange(f64),
    #[error("log-value {0} is not in [-inf, 0]")]
    InvalidLog(f64),
    #[error("invalid mass {0}")]
    InvalidMass(f64),
    #[error("not a probability measure (total mass {total})")]
    NotProbability { total: f64 },
    #[error("negative weight {0}")]
    NegativeWeight(f64),
    #[error("weights sum to {0}, not 1")]
    WeightSum(f64),
    #[error("test function {label} exceeds bound {bound} at x={x} (value {value})")]
    Unbounded {
        label: String,
        x: f64,
        value: f64,
        bound: f64,
    },
    #[error("malformed measure JSON: {0}")]
    BadJson(String),
}
