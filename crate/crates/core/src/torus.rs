//! Flat-torus geometry for a square fundamental domain `[0, L)^2`.
//!
//! Maps on the unit torus use `L = 1`; angle-action maps use `L = 2*pi`.
//! Distances are Euclidean on wrapped coordinate differences.

use crate::linalg::Vec2;

/// Reduce a coordinate into `[0, period)`. The guard after `rem_euclid`
/// catches the rounding case where a tiny negative input lands exactly on
/// `period`.
pub fn wrap_coord(t: f64, period: f64) -> f64 {
    let r = t.rem_euclid(period);
    if r >= period {
        0.0
    } else {
        r
    }
}

/// Reduce a point into the fundamental domain.
pub fn wrap_point(p: Vec2, period: f64) -> Vec2 {
    Vec2::new(wrap_coord(p.x, period), wrap_coord(p.y, period))
}

/// Signed representative of a coordinate difference in `[-period/2, period/2)`.
pub fn signed_wrap(t: f64, period: f64) -> f64 {
    let r = wrap_coord(t, period);
    if r >= 0.5 * period {
        r - period
    } else {
        r
    }
}

/// Shortest displacement `a - b` on the torus, componentwise wrapped.
pub fn displacement(a: Vec2, b: Vec2, period: f64) -> Vec2 {
    Vec2::new(
        signed_wrap(a.x - b.x, period),
        signed_wrap(a.y - b.y, period),
    )
}

/// Flat metric: Euclidean length of the wrapped displacement.
pub fn distance(a: Vec2, b: Vec2, period: f64) -> f64 {
    displacement(a, b, period).norm()
}
