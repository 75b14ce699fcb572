//! Periodic orbit search and per-orbit invariants.
//!
//! Orbits are found by Newton iteration on the wrapped displacement
//! `x -> f^T(x) - x`, seeded from a jittered uniform grid. Working with the
//! componentwise-wrapped displacement is Newton on the torus lift with the
//! nearest integer translation chosen at every iterate, so no explicit
//! translation enumeration is needed; the grid density controls how
//! exhaustively the basins are seeded.
//!
//! Each converged point is reduced to its minimal period, canonicalized to
//! the lexicographically smallest orbit point, and deduplicated against the
//! catalog up to cyclic shifts.

use rayon::prelude::*;
use thiserror::Error;

use crate::linalg::{Eigenvalues, Mat2, Vec2};
use crate::sample;
use crate::systems::{Potential, SystemDef, SystemError};
use crate::torus;

/// Newton convergence target for the wrapped displacement.
const NEWTON_TOL: f64 = 1e-12;
/// Maximum Newton iterations per seed.
const NEWTON_MAX_ITER: u32 = 50;
/// A divisor `d` of `T` counts as a period when `f^d` moves the point less
/// than this.
const MINIMAL_PERIOD_TOL: f64 = 1e-8;
/// Orbits closer than this (pointwise, over the best cyclic shift) merge.
const DEDUP_TOL: f64 = 1e-6;
/// Residual bound every cataloged orbit must satisfy.
const RESIDUAL_BOUND: f64 = 1e-10;
/// Eigenvalue band around the unit circle for classification.
const UNIT_BAND: f64 = 1e-6;
/// Default hard cap on catalog size before the search stops early.
const DEFAULT_MAX_ORBITS: usize = 20_000;

#[derive(Debug, Error, PartialEq)]
pub enum OrbitError {
    #[error("invalid search budget: {0}")]
    InvalidBudget(&'static str),
    #[error("point is not periodic with the given period (residual {residual:.3e})")]
    NotPeriodic { residual: f64 },
    #[error(transparent)]
    System(#[from] SystemError),
}

/// Multiplier spectrum classes for area-preserving surface maps.
///
/// The bands are numeric: saddle when some eigenvalue modulus leaves the
/// `1e-6` unit band, elliptic when both moduli sit in the band but the
/// eigenvalues stay `1e-6` away from 1, parabolic otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrbitClass {
    Saddle,
    Elliptic,
    Parabolic,
}

impl OrbitClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            OrbitClass::Saddle => "saddle",
            OrbitClass::Elliptic => "elliptic",
            OrbitClass::Parabolic => "parabolic",
        }
    }
}

impl std::fmt::Display for OrbitClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

fn classify(eigen: &Eigenvalues) -> OrbitClass {
    let (m1, m2) = eigen.moduli();
    if (m1 - 1.0).abs().max((m2 - 1.0).abs()) > UNIT_BAND {
        OrbitClass::Saddle
    } else if eigen.distances_to_one().0 > UNIT_BAND {
        OrbitClass::Elliptic
    } else {
        OrbitClass::Parabolic
    }
}

fn exponents_of(eigen: &Eigenvalues, period: u32) -> [f64; 2] {
    let t = period as f64;
    match eigen {
        Eigenvalues::Real { small, large } => [small.abs().ln() / t, large.abs().ln() / t],
        Eigenvalues::Complex { re, im } => {
            let l = re.hypot(*im).ln() / t;
            [l, l]
        }
    }
}

/// A periodic orbit: its points (starting at the lexicographically smallest),
/// the derivative multiplier over one period, and derived spectral data.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicOrbit {
    points: Vec<Vec2>,
    multiplier: Mat2,
    eigen: Eigenvalues,
    exponents: [f64; 2],
    class: OrbitClass,
    residual: f64,
}

impl PeriodicOrbit {
    /// Build an orbit from a point that `f^period` returns to within `1e-8`.
    /// The period is reduced to its minimal divisor and the representative
    /// canonicalized; the stored residual is measured at the minimal period.
    pub fn from_point(sys: &SystemDef, x: Vec2, period: u32) -> Result<Self, OrbitError> {
        if period == 0 {
            return Err(OrbitError::InvalidBudget("period must be at least 1"));
        }
        let domain = sys.domain_period();
        let x = torus::wrap_point(x, domain);
        let closing = torus::distance(sys.eval_n(x, period as i64), x, domain);
        if closing > MINIMAL_PERIOD_TOL {
            return Err(OrbitError::NotPeriodic { residual: closing });
        }
        let minimal = (1..=period)
            .filter(|&d| period.is_multiple_of(d))
            .find(|&d| torus::distance(sys.eval_n(x, d as i64), x, domain) <= MINIMAL_PERIOD_TOL)
            .expect("period itself always qualifies");
        let orbit = sys.orbit(x, minimal as usize);
        let rep = orbit
            .iter()
            .copied()
            .min_by(|p, q| {
                (p.x, p.y)
                    .partial_cmp(&(q.x, q.y))
                    .expect("orbit points are finite")
            })
            .expect("orbit is nonempty");
        let points = sys.orbit(rep, minimal as usize);
        let residual = torus::distance(sys.eval_n(rep, minimal as i64), rep, domain);
        let multiplier = sys.cocycle(rep, minimal as i64)?;
        let eigen = multiplier.eigenvalues();
        Ok(PeriodicOrbit {
            points,
            multiplier,
            exponents: exponents_of(&eigen, minimal),
            class: classify(&eigen),
            eigen,
            residual,
        })
    }

    pub fn period(&self) -> u32 {
        self.points.len() as u32
    }

    pub fn representative(&self) -> Vec2 {
        self.points[0]
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    pub fn multiplier(&self) -> Mat2 {
        self.multiplier
    }

    pub fn eigenvalues(&self) -> Eigenvalues {
        self.eigen
    }

    /// Lyapunov exponents of the orbit in ascending order; complex pairs
    /// give the repeated `log sqrt(det) / T`.
    pub fn exponents(&self) -> [f64; 2] {
        self.exponents
    }

    pub fn classification(&self) -> OrbitClass {
        self.class
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// `min(sum of positive exponents, sum of negative exponent magnitudes)`.
    /// For area-preserving maps the two sums agree up to rounding, and the
    /// value is invariant under time reversal because reversal swaps the
    /// arguments of the same `min`.
    pub fn delta(&self) -> f64 {
        let pos: f64 = self.exponents.iter().map(|l| l.max(0.0)).sum();
        let neg: f64 = self.exponents.iter().map(|l| (-l).max(0.0)).sum();
        pos.min(neg)
    }

    /// Orbit average of the potential.
    pub fn potential_average(&self, sys: &SystemDef, pot: &Potential) -> f64 {
        let sum: f64 = self.points.iter().map(|&p| pot.eval(sys, p)).sum();
        sum / self.points.len() as f64
    }

    /// The periodic-orbit pressure functional: `delta` plus the orbit
    /// average of the potential.
    pub fn pressure_value(&self, sys: &SystemDef, pot: &Potential) -> f64 {
        self.delta() + self.potential_average(sys, pot)
    }

    /// The same orbit viewed under the inverse map: points rotate into
    /// reverse order, the multiplier inverts, exponents negate and swap.
    /// `delta` is bitwise unchanged by construction.
    pub fn reversed(&self) -> PeriodicOrbit {
        let t = self.points.len();
        let mut points = Vec::with_capacity(t);
        points.push(self.points[0]);
        points.extend(self.points[1..].iter().rev().copied());
        let multiplier = self
            .multiplier
            .inverse()
            .expect("multiplier of a unimodular cocycle is invertible");
        PeriodicOrbit {
            points,
            multiplier,
            eigen: multiplier.eigenvalues(),
            exponents: [-self.exponents[1], -self.exponents[0]],
            class: self.class,
            residual: self.residual,
        }
    }
}

/// Search statistics carried by every catalog.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchStats {
    pub grid_density: u32,
    pub seed: u64,
    pub newton_max_iter: u32,
    pub seeds_tried: usize,
    pub seeds_discarded: usize,
    pub duplicates_merged: usize,
}

/// Catalog of periodic orbits up to a maximal minimal period, sorted by
/// `(period, representative)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitCatalog {
    orbits: Vec<PeriodicOrbit>,
    max_period: u32,
    exhaustive: bool,
    stats: SearchStats,
}

impl OrbitCatalog {
    pub fn orbits(&self) -> &[PeriodicOrbit] {
        &self.orbits
    }

    pub fn len(&self) -> usize {
        self.orbits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orbits.is_empty()
    }

    pub fn max_period(&self) -> u32 {
        self.max_period
    }

    /// False when the search stopped at its orbit cap; the catalog is then
    /// a valid but possibly incomplete lower-bound witness set.
    pub fn exhaustive(&self) -> bool {
        self.exhaustive
    }

    pub fn stats(&self) -> &SearchStats {
        &self.stats
    }

    /// Number of fixed points of `f^n` represented in the catalog: each
    /// orbit whose minimal period divides `n` contributes all its points.
    pub fn point_count_dividing(&self, n: u32) -> usize {
        self.orbits
            .iter()
            .filter(|o| n.is_multiple_of(o.period()))
            .map(|o| o.period() as usize)
            .sum()
    }

    /// Catalog restricted to orbits passing the predicate. The result is
    /// never marked exhaustive: a subset cannot vouch for completeness.
    pub fn filtered(&self, keep: impl Fn(&PeriodicOrbit) -> bool) -> OrbitCatalog {
        OrbitCatalog {
            orbits: self.orbits.iter().filter(|o| keep(o)).cloned().collect(),
            max_period: self.max_period,
            exhaustive: false,
            stats: self.stats.clone(),
        }
    }
}

fn newton_periodic(sys: &SystemDef, period: u32, start: Vec2) -> Option<Vec2> {
    let domain = sys.domain_period();
    let t = period as i64;
    let mut x = start;
    for _ in 0..NEWTON_MAX_ITER {
        let g = torus::displacement(sys.eval_n(x, t), x, domain);
        let res = g.norm();
        if res < NEWTON_TOL {
            return Some(x);
        }
        let df = sys.cocycle(x, t).ok()?;
        let m = Mat2::new(df.a - 1.0, df.b, df.c, df.d - 1.0);
        let delta = m.solve(g.scale(-1.0), 1e-12 * (1.0 + m.max_abs()))?;
        // Damped acceptance: take the longest step fraction that still
        // reduces the residual; a seed that cannot improve is discarded.
        let mut frac = 1.0;
        let mut improved = false;
        for _ in 0..5 {
            let cand = torus::wrap_point(x + delta.scale(frac), domain);
            let r2 = torus::displacement(sys.eval_n(cand, t), cand, domain).norm();
            if r2 < res {
                x = cand;
                improved = true;
                break;
            }
            frac *= 0.5;
        }
        if !improved {
            return None;
        }
    }
    None
}

fn orbits_match(a: &PeriodicOrbit, b: &PeriodicOrbit, domain: f64) -> bool {
    if a.period() != b.period() {
        return false;
    }
    let t = a.points.len();
    (0..t).any(|shift| {
        (0..t).all(|i| {
            torus::distance(a.points[(i + shift) % t], b.points[i], domain) < DEDUP_TOL
        })
    })
}

/// Newton search for all periodic orbits of minimal period `<= max_period`,
/// with the default catalog cap.
pub fn find_periodic_orbits(
    sys: &SystemDef,
    max_period: u32,
    grid_density: u32,
    seed: u64,
) -> Result<OrbitCatalog, OrbitError> {
    find_periodic_orbits_capped(sys, max_period, grid_density, seed, DEFAULT_MAX_ORBITS)
}

/// As [`find_periodic_orbits`] but with an explicit orbit cap; when the cap
/// is hit the partial catalog is returned with `exhaustive() == false`.
pub fn find_periodic_orbits_capped(
    sys: &SystemDef,
    max_period: u32,
    grid_density: u32,
    seed: u64,
    max_orbits: usize,
) -> Result<OrbitCatalog, OrbitError> {
    if max_period == 0 || max_period > 64 {
        return Err(OrbitError::InvalidBudget("max_period must be in 1..=64"));
    }
    if !(2..=4096).contains(&grid_density) {
        return Err(OrbitError::InvalidBudget("grid_density must be in 2..=4096"));
    }
    if max_orbits == 0 {
        return Err(OrbitError::InvalidBudget("max_orbits must be positive"));
    }

    let domain = sys.domain_period();
    let seeds = sample::jittered_grid(grid_density, domain, 0.1, seed);
    let mut orbits: Vec<PeriodicOrbit> = Vec::new();
    let mut exhaustive = true;
    let mut seeds_tried = 0usize;
    let mut seeds_discarded = 0usize;
    let mut duplicates_merged = 0usize;

    'periods: for t in 1..=max_period {
        let converged: Vec<Option<Vec2>> = seeds
            .par_iter()
            .map(|&s| newton_periodic(sys, t, s))
            .collect();
        seeds_tried += seeds.len();
        for hit in converged {
            let Some(x) = hit else {
                seeds_discarded += 1;
                continue;
            };
            // Reduce to the minimal period and polish there, so the stored
            // residual is measured where it matters.
            let minimal = (1..=t)
                .filter(|d| t % d == 0)
                .find(|&d| {
                    torus::distance(sys.eval_n(x, d as i64), x, domain) <= MINIMAL_PERIOD_TOL
                })
                .expect("the full period always closes within tolerance");
            let polished = if minimal == t {
                x
            } else {
                match newton_periodic(sys, minimal, x) {
                    Some(p) => p,
                    None => {
                        seeds_discarded += 1;
                        continue;
                    }
                }
            };
            let orbit = match PeriodicOrbit::from_point(sys, polished, minimal) {
                Ok(o) => o,
                Err(_) => {
                    seeds_discarded += 1;
                    continue;
                }
            };
            if orbit.residual() > RESIDUAL_BOUND {
                seeds_discarded += 1;
                continue;
            }
            if orbits.iter().any(|o| orbits_match(o, &orbit, domain)) {
                duplicates_merged += 1;
                continue;
            }
            orbits.push(orbit);
            if orbits.len() >= max_orbits {
                exhaustive = false;
                break 'periods;
            }
        }
    }

    orbits.sort_by(|a, b| {
        (a.period(), a.representative().x, a.representative().y)
            .partial_cmp(&(b.period(), b.representative().x, b.representative().y))
            .expect("representatives are finite")
    });

    Ok(OrbitCatalog {
        orbits,
        max_period,
        exhaustive,
        stats: SearchStats {
            grid_density,
            seed,
            newton_max_iter: NEWTON_MAX_ITER,
            seeds_tried,
            seeds_discarded,
            duplicates_merged,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn log_cat() -> f64 {
        ((3.0 + 5f64.sqrt()) / 2.0).ln()
    }

    /// Independent count of fixed points of the n-th cat map iterate:
    /// `|det(A^n - I)|`, in integer arithmetic.
    fn cat_fixed_point_count(n: u32) -> i64 {
        let mut m = [[1i64, 0], [0, 1]];
        let a = [[2i64, 1], [1, 1]];
        for _ in 0..n {
            m = [
                [
                    a[0][0] * m[0][0] + a[0][1] * m[1][0],
                    a[0][0] * m[0][1] + a[0][1] * m[1][1],
                ],
                [
                    a[1][0] * m[0][0] + a[1][1] * m[1][0],
                    a[1][0] * m[0][1] + a[1][1] * m[1][1],
                ],
            ];
        }
        ((m[0][0] - 1) * (m[1][1] - 1) - m[0][1] * m[1][0]).abs()
    }

    #[test]
    fn fixed_point_count_oracle_matches_closed_form() {
        assert_eq!(cat_fixed_point_count(1), 1);
        assert_eq!(cat_fixed_point_count(2), 5);
        assert_eq!(cat_fixed_point_count(3), 16);
        assert_eq!(cat_fixed_point_count(4), 45);
    }

    #[test]
    fn cat_fixed_point_orbit_invariants() {
        let sys = SystemDef::cat_map();
        let orbit = PeriodicOrbit::from_point(&sys, Vec2::ZERO, 1).unwrap();
        assert_eq!(orbit.period(), 1);
        assert_eq!(orbit.classification(), OrbitClass::Saddle);
        assert_eq!(orbit.residual(), 0.0);
        let [lo, hi] = orbit.exponents();
        assert!((hi - log_cat()).abs() < 1e-12);
        assert!((lo + log_cat()).abs() < 1e-12);
        assert!((orbit.delta() - log_cat()).abs() < 1e-12);
        assert!((lo + hi).abs() < 1e-12, "exponents sum to zero");
    }

    #[test]
    fn catalog_counts_match_determinant_oracle_up_to_period_three() {
        let sys = SystemDef::cat_map();
        let catalog = find_periodic_orbits(&sys, 3, 64, 1).unwrap();
        assert!(catalog.exhaustive());
        for n in 1..=3u32 {
            assert_eq!(
                catalog.point_count_dividing(n) as i64,
                cat_fixed_point_count(n),
                "period-dividing-{n} point count"
            );
        }
        // 1 fixed point, 2 orbits of period 2, 5 orbits of period 3.
        let by_period = |t: u32| catalog.orbits().iter().filter(|o| o.period() == t).count();
        assert_eq!(by_period(1), 1);
        assert_eq!(by_period(2), 2);
        assert_eq!(by_period(3), 5);
    }

    #[test]
    fn standard_map_has_exactly_two_fixed_points_at_k_one() {
        let sys = SystemDef::standard_map(1.0).unwrap();
        let catalog = find_periodic_orbits(&sys, 1, 64, 3).unwrap();
        assert_eq!(catalog.len(), 2);
        let saddle = &catalog.orbits()[0];
        let elliptic = &catalog.orbits()[1];
        assert_eq!(saddle.classification(), OrbitClass::Saddle);
        assert!(saddle.representative().norm() < 1e-9);
        assert!((saddle.exponents()[1] - log_cat()).abs() < 1e-9);
        assert_eq!(elliptic.classification(), OrbitClass::Elliptic);
        assert!(torus::distance(elliptic.representative(), Vec2::new(PI, 0.0), sys.domain_period()) < 1e-9);
        let arg = elliptic.eigenvalues().argument().unwrap();
        assert!((arg - PI / 3.0).abs() < 1e-9);
    }

    #[test]
    fn minimal_periods_have_no_closing_divisors() {
        let sys = SystemDef::cat_map();
        let catalog = find_periodic_orbits(&sys, 3, 64, 5).unwrap();
        for orbit in catalog.orbits() {
            let t = orbit.period();
            for d in (1..t).filter(|d| t % d == 0) {
                let moved = torus::distance(
                    sys.eval_n(orbit.representative(), d as i64),
                    orbit.representative(),
                    1.0,
                );
                assert!(moved > MINIMAL_PERIOD_TOL, "divisor {d} of {t} closes");
            }
        }
    }

    #[test]
    fn search_is_reproducible_for_a_fixed_seed() {
        let sys = SystemDef::standard_map(0.8).unwrap();
        let a = find_periodic_orbits(&sys, 2, 32, 11).unwrap();
        let b = find_periodic_orbits(&sys, 2, 32, 11).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn orbit_cap_marks_catalog_non_exhaustive() {
        let sys = SystemDef::cat_map();
        let capped = find_periodic_orbits_capped(&sys, 3, 64, 1, 3).unwrap();
        assert!(!capped.exhaustive());
        assert_eq!(capped.len(), 3);
    }

    #[test]
    fn identity_multiplier_classifies_as_parabolic() {
        let sys = SystemDef::vertical_kick(0.0).unwrap();
        let orbit = PeriodicOrbit::from_point(&sys, Vec2::new(0.3, 0.4), 1).unwrap();
        assert_eq!(orbit.classification(), OrbitClass::Parabolic);
        assert_eq!(orbit.exponents(), [0.0, 0.0]);
        assert_eq!(orbit.delta(), 0.0);
    }

    #[test]
    fn from_point_rejects_wandering_points() {
        let sys = SystemDef::cat_map();
        match PeriodicOrbit::from_point(&sys, Vec2::new(0.1, 0.2), 3) {
            Err(OrbitError::NotPeriodic { residual }) => assert!(residual > 1e-3),
            other => panic!("expected NotPeriodic, got {other:?}"),
        }
    }

    #[test]
    fn from_point_reduces_to_minimal_period() {
        let sys = SystemDef::cat_map();
        let orbit = PeriodicOrbit::from_point(&sys, Vec2::ZERO, 6).unwrap();
        assert_eq!(orbit.period(), 1);
    }

    #[test]
    fn delta_is_bitwise_invariant_under_time_reversal() {
        let sys = SystemDef::cat_map();
        let catalog = find_periodic_orbits(&sys, 3, 64, 2).unwrap();
        for orbit in catalog.orbits() {
            let rev = orbit.reversed();
            assert_eq!(orbit.delta().to_bits(), rev.delta().to_bits());
            assert_eq!(rev.period(), orbit.period());
            // Exponents negate and swap.
            assert_eq!(rev.exponents()[0], -orbit.exponents()[1]);
        }
    }

    #[test]
    fn pressure_values_at_known_orbits() {
        let cat = SystemDef::cat_map();
        let fp = PeriodicOrbit::from_point(&cat, Vec2::ZERO, 1).unwrap();
        let geo = Potential::Geometric { m: 1 };
        // The cat matrix is symmetric, so its norm equals its top eigenvalue
        // and delta cancels the geometric average exactly.
        assert!(fp.pressure_value(&cat, &geo).abs() < 1e-12);

        let smap = SystemDef::standard_map(1.0).unwrap();
        let elliptic = PeriodicOrbit::from_point(&smap, Vec2::new(PI, 0.0), 1).unwrap();
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        let value = elliptic.pressure_value(&smap, &geo);
        assert!((value + golden.ln()).abs() < 1e-12);
        assert_eq!(elliptic.delta(), 0.0);
    }

    #[test]
    fn reversal_of_standard_map_orbit_matches_inverse_system_orbit() {
        let sys = SystemDef::standard_map(1.0).unwrap();
        let orbit = PeriodicOrbit::from_point(&sys, Vec2::ZERO, 1).unwrap();
        let rev = orbit.reversed();
        let direct = PeriodicOrbit::from_point(&sys.inverse(), Vec2::ZERO, 1).unwrap();
        assert!((rev.exponents()[0] - direct.exponents()[0]).abs() < 1e-10);
        assert!((rev.exponents()[1] - direct.exponents()[1]).abs() < 1e-10);
        assert!((rev.delta() - direct.delta()).abs() < 1e-10);
    }
}
