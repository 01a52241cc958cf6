use crate::measure::{MeasurableSet, Point};

use super::AnalysisError;

/// `V_{x₀} = {x₀, x₀², x₀⁴, …, x₀^{2^depth}}`, optionally with the absorbers
/// 0 and 1.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectorySet {
    pub seed: Point,
    pub depth: u32,
    pub points: Vec<Point>,
    pub include_absorbers: bool,
}

/// Repeated squaring from `x0`; the logs double exactly.
pub fn trajectory_set(x0: Point, depth: u32) -> Result<TrajectorySet, AnalysisError> {
    if !x0.is_interior() {
        return Err(AnalysisError::NotInterior("trajectory_set"));
    }
    let points = (0..=depth).map(|k| x0.pow2n(k)).collect();
    Ok(TrajectorySet {
        seed: x0,
        depth,
        points,
        include_absorbers: false,
    })
}

impl TrajectorySet {
    pub fn with_absorbers(mut self) -> TrajectorySet {
        self.include_absorbers = true;
        self
    }

    pub fn as_set(&self) -> MeasurableSet {
        let mut set = MeasurableSet::from_points(self.points.iter().copied());
        if self.include_absorbers {
            set = set.union(&MeasurableSet::from_points([Point::ZERO, Point::ONE]));
        }
        set
    }

    pub fn is_disjoint(&self, other: &TrajectorySet) -> bool {
        self.as_set().is_disjoint(&other.as_set())
    }
}

/// Smallest `|ln x − ln y|` over interior points of the two trajectories.
/// Anything above the atom tolerance means no two points coincide.
pub fn min_log_separation(a: &TrajectorySet, b: &TrajectorySet) -> f64 {
    let mut best = f64::INFINITY;
    for x in &a.points {
        for y in &b.points {
            best = best.min((x.log_value() - y.log_value()).abs());
        }
    }
    best
}
