use serde::{Deserialize, Serialize};

use crate::cli::expr::PiExpression;
use crate::measure::{MeasurableSet, Point};

use super::{Builtin, KernelError, PiPiece, TwoJumpChain};

/// Kernel spec file:
/// `{"chain":"mc1".."mc5", "p": number (mc5 only)}` or
/// `{"chain":"custom","pieces":[{"from","to","from_closed","to_closed","pi"}]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "chain", rename_all = "lowercase", deny_unknown_fields)]
pub enum KernelSpec {
    Mc1,
    Mc2,
    Mc3,
    Mc4,
    Mc5 { p: f64 },
    Custom { pieces: Vec<PieceSpec> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceSpec {
    pub from: f64,
    pub to: f64,
    pub from_closed: bool,
    pub to_closed: bool,
    pub pi: String,
}

impl KernelSpec {
    pub fn from_json(text: &str) -> Result<KernelSpec, KernelError> {
        serde_json::from_str(text).map_err(|e| KernelError::Spec(e.to_string()))
    }

    pub fn label(&self) -> &'static str {
        match self {
            KernelSpec::Mc1 => "mc1",
            KernelSpec::Mc2 => "mc2",
            KernelSpec::Mc3 => "mc3",
            KernelSpec::Mc4 => "mc4",
            KernelSpec::Mc5 { .. } => "mc5",
            KernelSpec::Custom { .. } => "custom",
        }
    }

    pub fn build(&self) -> Result<TwoJumpChain, KernelError> {
        match self {
            KernelSpec::Mc1 => Ok(TwoJumpChain::builtin(Builtin::Mc1)),
            KernelSpec::Mc2 => Ok(TwoJumpChain::builtin(Builtin::Mc2)),
            KernelSpec::Mc3 => Ok(TwoJumpChain::builtin(Builtin::Mc3)),
            KernelSpec::Mc4 => Ok(TwoJumpChain::builtin(Builtin::Mc4)),
            KernelSpec::Mc5 { p } => TwoJumpChain::mc5(*p),
            KernelSpec::Custom { pieces } => {
                let mut out = Vec::with_capacity(pieces.len());
                for (i, piece) in pieces.iter().enumerate() {
                    let domain = MeasurableSet::interval(
                        Point::new(piece.from)?,
                        Point::new(piece.to)?,
                        piece.from_closed,
                        piece.to_closed,
                    );
                    let pi =
                        PiExpression::parse_unchecked(&piece.pi).map_err(|e| KernelError::Pi {
                            piece: i,
                            source: e.into(),
                        })?;
                    out.push(PiPiece { domain, pi });
                }
                TwoJumpChain::new("custom", out)
            }
        }
    }
}
