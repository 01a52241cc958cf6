//! Point grids on `[0,1]`.
//!
//! The example chains do their interesting things next to 0 and 1, so every
//! grid here refines geometrically toward the endpoints.

use super::Point;

/// Geometric refinement depth at each endpoint of [`audit_grid`].
pub const ENDPOINT_REFINEMENT: i32 = 32;

/// `{i/n : 0 ≤ i ≤ n} ∪ {2⁻ʲ, 1 − 2⁻ʲ : 1 ≤ j ≤ 32}`, sorted, deduplicated.
pub fn audit_grid(n: usize) -> Vec<Point> {
    let n = n.max(1);
    let mut pts: Vec<Point> = (0..=n)
        .map(|i| Point::new(i as f64 / n as f64).expect("i/n in [0,1]"))
        .collect();
    for j in 1..=ENDPOINT_REFINEMENT {
        let d = 2f64.powi(-j);
        pts.push(Point::new(d).expect("in range"));
        pts.push(Point::one_minus(d).expect("in range"));
    }
    pts.sort();
    pts.dedup();
    pts
}

/// Interior points of [`audit_grid`].
pub fn interior_grid(n: usize) -> Vec<Point> {
    audit_grid(n)
        .into_iter()
        .filter(|p| p.is_interior())
        .collect()
}

/// `{10⁻ʲ, 1 − 10⁻ʲ : 1 ≤ j ≤ j_max} ∪ {½}`, sorted.
pub fn geometric_grid(j_max: u32) -> Vec<Point> {
    let mut pts = vec![Point::new(0.5).expect("in range")];
    for j in 1..=j_max as i32 {
        let d = 10f64.powi(-j);
        pts.push(Point::new(d).expect("in range"));
        pts.push(Point::one_minus(d).expect("in range"));
    }
    pts.sort();
    pts.dedup();
    pts
}

/// `{1 − 10⁻ʲ : 1 ≤ j ≤ j_max}`.
pub fn near_one_grid(j_max: u32) -> Vec<Point> {
    (1..=j_max as i32)
        .map(|j| Point::one_minus(10f64.powi(-j)).expect("in range"))
        .collect()
}

/// `grid ∪ {0, 1}`.
pub fn with_endpoints(grid: &[Point]) -> Vec<Point> {
    let mut pts = grid.to_vec();
    pts.push(Point::ZERO);
    pts.push(Point::ONE);
    pts.sort();
    pts.dedup();
    pts
}
