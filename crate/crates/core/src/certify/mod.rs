//! Certificate verification.
//!
//! Nothing here searches for certificates. Each check takes a candidate and
//! tests it on explicit probe grids and set families. A failure comes with an
//! exact counterexample; a pass is evidence relative to the grids used.

mod doeblin;
mod theorem1;
mod zwitness;

use thiserror::Error;

use crate::analysis::AnalysisError;
use crate::cli::expr::ExprError;
use crate::kernel::KernelError;
use crate::measure::MeasureError;

pub use doeblin::{
    adversarial_set_family, check_doeblin, DoeblinCertificate, DoeblinCertificateJson,
    DoeblinCounterexample, DoeblinReport, SHELL_DEPTH,
};
pub use theorem1::{invariant_flux_test, theorem1_hypotheses, Theorem1Report};
pub use zwitness::{
    candidate_witnesses, verify_z_witness, LevelMargin, Shape, ShapeSpec, ZCounterexample, ZReport,
    ZWitness, ZWitnessSpec, MARGIN_TOLERANCE,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CertifyError {
    #[error("witness depth must be at least 2, got {0}")]
    Depth(u32),
    #[error("witness generator failed at n = {n}: {what}")]
    Generator { n: u32, what: String },
    #[error("probe count must be at least 1")]
    NoProbes,
    #[error("{0}")]
    BadParameter(String),
    #[error("set family is empty")]
    EmptyFamily,
    #[error("x grid is empty")]
    EmptyGrid,
    #[error("{basis} basis measures but {carriers} carriers")]
    SizeMismatch { basis: usize, carriers: usize },
    #[error("certificate JSON: {0}")]
    Json(String),
    #[error("eps expression: {0}")]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}
