use crate::cli::expr::{Expr, PiExpression};
use crate::measure::{AtomicMeasure, LogNum, Mass, MeasurableSet, Point};

use super::{audit, KernelError, TransitionKernel};

/// One piece of a jump-probability function: `π` applies on `domain`.
#[derive(Clone, Debug, PartialEq)]
pub struct PiPiece {
    pub domain: MeasurableSet,
    pub pi: PiExpression,
}

/// The five chains studied in the examples.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Builtin {
    /// `π(x) = x`.
    Mc1,
    /// `π(x) = 1 − x`.
    Mc2,
    /// `x` on `[0,½]`, `1 − x` on `(½,1]`.
    Mc3,
    /// `1 − x` on `[0,½]`, `x` on `(½,1]`.
    Mc4,
    /// Constant `π(x) = p`.
    Mc5(f64),
}

impl Builtin {
    pub fn label(&self) -> &'static str {
        match self {
            Builtin::Mc1 => "mc1",
            Builtin::Mc2 => "mc2",
            Builtin::Mc3 => "mc3",
            Builtin::Mc4 => "mc4",
            Builtin::Mc5(_) => "mc5",
        }
    }

    /// All five, with `p = ½` for MC5.
    pub fn all_default() -> [Builtin; 5] {
        [
            Builtin::Mc1,
            Builtin::Mc2,
            Builtin::Mc3,
            Builtin::Mc4,
            Builtin::Mc5(0.5),
        ]
    }
}

/// A chain where every interior state `x` jumps to `x²` with probability
/// `π(x)` and to 0 otherwise; 0 and 1 are absorbing.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoJumpChain {
    label: String,
    pieces: Vec<PiPiece>,
}

fn half() -> Point {
    Point::new(0.5).expect("in range")
}

impl TwoJumpChain {
    /// Validates that the piece domains partition `(0,1)`, audits each `π`
    /// on its domain, then audits the kernel rows.
    pub fn new(
        label: impl Into<String>,
        pieces: Vec<PiPiece>,
    ) -> Result<TwoJumpChain, KernelError> {
        let interior = MeasurableSet::interior();
        let mut covered = MeasurableSet::empty();
        for (i, piece) in pieces.iter().enumerate() {
            let overlap = covered.intersection(&piece.domain).intersection(&interior);
            if !overlap.is_empty() {
                return Err(KernelError::BadPartition(format!(
                    "piece {i} overlaps earlier pieces on {overlap}"
                )));
            }
            covered = covered.union(&piece.domain);
            piece
                .pi
                .audit_on(&piece.domain.intersection(&interior))
                .map_err(|source| KernelError::Pi { piece: i, source })?;
        }
        let gap = interior.difference(&covered);
        if !gap.is_empty() {
            return Err(KernelError::BadPartition(format!("{gap} is not covered")));
        }
        let chain = TwoJumpChain {
            label: label.into(),
            pieces,
        };
        audit(&chain)?;
        Ok(chain)
    }

    pub fn builtin(which: Builtin) -> TwoJumpChain {
        let whole = MeasurableSet::unit();
        let left = MeasurableSet::interval(Point::ZERO, half(), true, true);
        let right = MeasurableSet::interval(half(), Point::ONE, false, true);
        let id = || PiExpression::from_expr(Expr::Var);
        let flip =
            || PiExpression::from_expr(Expr::Sub(Box::new(Expr::Num(1.0)), Box::new(Expr::Var)));
        let pieces = match which {
            Builtin::Mc1 => vec![PiPiece {
                domain: whole,
                pi: id(),
            }],
            Builtin::Mc2 => vec![PiPiece {
                domain: whole,
                pi: flip(),
            }],
            Builtin::Mc3 => vec![
                PiPiece {
                    domain: left,
                    pi: id(),
                },
                PiPiece {
                    domain: right,
                    pi: flip(),
                },
            ],
            Builtin::Mc4 => vec![
                PiPiece {
                    domain: left,
                    pi: flip(),
                },
                PiPiece {
                    domain: right,
                    pi: id(),
                },
            ],
            Builtin::Mc5(p) => vec![PiPiece {
                domain: whole,
                pi: PiExpression::constant(p),
            }],
        };
        TwoJumpChain::new(which.label(), pieces).expect("builtin chains are valid")
    }

    pub fn mc5(p: f64) -> Result<TwoJumpChain, KernelError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(KernelError::BadParameter(p));
        }
        Ok(TwoJumpChain::builtin(Builtin::Mc5(p)))
    }

    pub fn pieces(&self) -> &[PiPiece] {
        &self.pieces
    }

    pub fn with_label(mut self, label: impl Into<String>) -> TwoJumpChain {
        self.label = label.into();
        self
    }

    /// `π(x)` as a signed log value; the owning piece is the first whose
    /// domain contains `x`.
    pub fn jump_probability(&self, x: Point) -> Result<LogNum, KernelError> {
        let piece = self
            .pieces
            .iter()
            .find(|p| p.domain.contains(x))
            .ok_or_else(|| KernelError::Uncovered {
                label: self.label.clone(),
                x: x.value(),
            })?;
        piece.pi.eval(x).map_err(|source| KernelError::Eval {
            x: x.value(),
            source,
        })
    }
}

impl TransitionKernel for TwoJumpChain {
    fn label(&self) -> &str {
        &self.label
    }

    fn transition(&self, x: Point) -> Result<AtomicMeasure, KernelError> {
        if !x.is_interior() {
            return Ok(AtomicMeasure::dirac(x));
        }
        let pi = self.jump_probability(x)?;
        let stay = pi.to_mass().min(Mass::ONE);
        let fall = LogNum::ONE.sub(pi).to_mass();
        Ok(AtomicMeasure::new([
            (x.square(), stay),
            (Point::ZERO, fall),
        ]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::kernel_measure;
    use crate::measure::grid;

    #[test]
    fn boundary_half_is_owned_by_the_left_rule() {
        let mc3 = TwoJumpChain::builtin(Builtin::Mc3);
        let mc4 = TwoJumpChain::builtin(Builtin::Mc4);
        let h = half();
        assert_eq!(mc3.jump_probability(h).unwrap().value(), 0.5);
        assert_eq!(mc4.jump_probability(h).unwrap().value(), 0.5);
        let just_right = Point::new(0.5 + 1e-9).unwrap();
        assert!((mc3.jump_probability(just_right).unwrap().value() - (0.5 - 1e-9)).abs() < 1e-15);
        assert!((mc4.jump_probability(just_right).unwrap().value() - (0.5 + 1e-9)).abs() < 1e-15);
    }

    #[test]
    fn rows_have_at_most_two_atoms() {
        for b in Builtin::all_default() {
            let k = TwoJumpChain::builtin(b);
            for x in grid::audit_grid(200) {
                let row = kernel_measure(&k, x).unwrap();
                assert!(row.len() <= 2);
                if !x.is_interior() {
                    assert_eq!(row, AtomicMeasure::dirac(x));
                }
            }
        }
    }

    #[test]
    fn partition_is_enforced() {
        let left = MeasurableSet::interval(Point::ZERO, half(), true, false);
        let pieces = vec![PiPiece {
            domain: left.clone(),
            pi: PiExpression::constant(0.5),
        }];
        assert!(matches!(
            TwoJumpChain::new("gap", pieces),
            Err(KernelError::BadPartition(_))
        ));
        let pieces = vec![
            PiPiece {
                domain: MeasurableSet::unit(),
                pi: PiExpression::constant(0.5),
            },
            PiPiece {
                domain: left,
                pi: PiExpression::constant(0.5),
            },
        ];
        assert!(matches!(
            TwoJumpChain::new("overlap", pieces),
            Err(KernelError::BadPartition(_))
        ));
    }

    #[test]
    fn mc5_parameter_is_checked() {
        assert!(TwoJumpChain::mc5(1.5).is_err());
        assert!(TwoJumpChain::mc5(0.3).is_ok());
    }
}
