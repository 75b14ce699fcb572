//! Pressure along a one-parameter potential family and the transition point.
//!
//! For the geometric family `t * phi_m`, every orbit in a catalog
//! contributes an affine function of `t`: its exponent term `delta` plus
//! `t` times its orbit average of `phi_m`. The periodic-orbit pressure over
//! the catalog is the pointwise maximum of these lines, hence piecewise
//! linear, convex, and non-increasing (the averages are never positive for
//! area-preserving maps). The transition point `t0` is where the best
//! saddle's line crosses zero: below it the functional is strictly
//! positive, above it the zero-exponent orbits take over.
//!
//! The curve is computed from the periodic formula only. The other
//! estimation routes have no affine structure in `t` and would blur the
//! kink locations this module exists to expose.

use thiserror::Error;

use crate::orbits::{OrbitCatalog, OrbitClass};
use crate::pressure::{grassmann, periodic_pressure, PressureError, PressureEstimate};
use crate::sample;
use crate::systems::{Potential, SystemDef};

/// Matching tolerance for equilibrium candidates when the caller has no
/// opinion; both criteria (exponent and average) use the same knob.
pub const DEFAULT_CANDIDATE_TOL: f64 = 1e-6;

/// Slope gaps below this produce no reported kink: crossings of nearly
/// parallel lines are grid noise, not transitions.
const KINK_SLOPE_GAP: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum TransitionError {
    #[error("catalog holds no orbits")]
    EmptyCatalog,
    #[error("catalog holds no saddle orbit")]
    NoSaddle,
    #[error(
        "saddle at ({x:.6}, {y:.6}) has non-negative potential average {avg:.6}; \
         this cannot happen for a true saddle and signals a numerical fault"
    )]
    NonPositiveDenominator { x: f64, y: f64, avg: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(&'static str),
    #[error(transparent)]
    Pressure(#[from] PressureError),
}

/// One sampled point of the pressure curve with its arg-max orbit.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub t: f64,
    pub value: f64,
    pub orbit_index: usize,
}

/// Piecewise-linear pressure curve `t -> max over orbits of the affine
/// functional`, with the kink locations of the exact envelope.
#[derive(Debug, Clone, PartialEq)]
pub struct PressureCurve {
    pub m: u32,
    pub points: Vec<CurvePoint>,
    /// Ascending crossing parameters where the arg-max orbit changes.
    pub kinks: Vec<f64>,
}

/// Zero crossing of the best saddle line.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionPoint {
    pub t0: f64,
    pub orbit_index: usize,
}

/// Outcome of the sampled sup/inf comparison against a reference entropy.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationReport {
    pub hyperbolic: bool,
    pub variation: f64,
    pub sup: f64,
    pub inf: f64,
    pub entropy_reference: f64,
}

/// Full transition diagnostic for one potential order.
#[derive(Debug, Clone)]
pub struct TransitionReport {
    pub m: u32,
    pub curve: PressureCurve,
    pub transition: TransitionPoint,
    /// Periodic pressure of the family at `t = 1`, the reference the
    /// candidate screen compares orbit averages against.
    pub pressure_at_unit: PressureEstimate,
    /// Catalog indices of equilibrium candidates at `t = 1`.
    pub candidates: Vec<usize>,
    pub candidate_tol: f64,
}

fn check_order(m: u32) -> Result<(), TransitionError> {
    if (1..=64).contains(&m) {
        Ok(())
    } else {
        Err(TransitionError::InvalidInput("potential order m must lie in 1..=64"))
    }
}

/// Per-orbit affine terms `(intercept, slope)` of the functional in `t`.
fn affine_terms(
    catalog: &OrbitCatalog,
    sys: &SystemDef,
    m: u32,
) -> Result<Vec<(f64, f64)>, TransitionError> {
    check_order(m)?;
    if catalog.is_empty() {
        return Err(TransitionError::EmptyCatalog);
    }
    let pot = Potential::Geometric { m };
    Ok(catalog
        .orbits()
        .iter()
        .map(|o| (o.delta(), o.potential_average(sys, &pot)))
        .collect())
}

/// Kinks of the upper envelope of `value = intercept + slope * t` on
/// `t >= 0`, via the ascending-slope hull construction.
fn envelope_kinks(lines: &[(f64, f64)]) -> Vec<f64> {
    let mut sorted: Vec<(f64, f64)> = lines.to_vec();
    sorted.sort_by(|a, b| {
        a.1.partial_cmp(&b.1)
            .expect("finite slopes")
            .then(b.0.partial_cmp(&a.0).expect("finite intercepts"))
    });
    // For equal slopes only the largest intercept can touch the envelope.
    sorted.dedup_by(|next, kept| next.1 == kept.1);
    let cross = |a: &(f64, f64), b: &(f64, f64)| (a.0 - b.0) / (b.1 - a.1);
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for line in sorted {
        while hull.len() >= 2 {
            let last = hull[hull.len() - 1];
            let prev = hull[hull.len() - 2];
            if cross(&line, &prev) <= cross(&last, &prev) {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(line);
    }
    let mut kinks = Vec::new();
    for pair in hull.windows(2) {
        if pair[1].1 - pair[0].1 < KINK_SLOPE_GAP {
            continue;
        }
        let t = cross(&pair[0], &pair[1]);
        if t.is_finite() && t >= 0.0 {
            kinks.push(t);
        }
    }
    kinks
}

/// Periodic pressure of `t * phi_m` over the catalog, sampled on `t_grid`,
/// with the exact kink locations of the underlying affine envelope.
pub fn pressure_curve(
    catalog: &OrbitCatalog,
    sys: &SystemDef,
    m: u32,
    t_grid: &[f64],
) -> Result<PressureCurve, TransitionError> {
    if t_grid.is_empty()
        || t_grid.iter().any(|t| !t.is_finite() || *t < 0.0)
        || t_grid.windows(2).any(|w| w[0] >= w[1])
    {
        return Err(TransitionError::InvalidInput(
            "t grid must be nonempty, finite, nonnegative and strictly ascending",
        ));
    }
    let lines = affine_terms(catalog, sys, m)?;
    let points = t_grid
        .iter()
        .map(|&t| {
            let mut best = f64::NEG_INFINITY;
            let mut idx = 0usize;
            for (i, &(b, s)) in lines.iter().enumerate() {
                let v = b + t * s;
                if v > best {
                    best = v;
                    idx = i;
                }
            }
            CurvePoint { t, value: best, orbit_index: idx }
        })
        .collect();
    Ok(PressureCurve { m, points, kinks: envelope_kinks(&lines) })
}

/// Largest zero crossing `delta / (-average)` over the catalog's saddles,
/// with the realizing orbit.
pub fn transition_point(
    catalog: &OrbitCatalog,
    sys: &SystemDef,
    m: u32,
) -> Result<TransitionPoint, TransitionError> {
    let lines = affine_terms(catalog, sys, m)?;
    let mut best: Option<TransitionPoint> = None;
    let mut saw_saddle = false;
    for (i, orbit) in catalog.orbits().iter().enumerate() {
        if orbit.classification() != OrbitClass::Saddle {
            continue;
        }
        saw_saddle = true;
        let (delta, avg) = lines[i];
        if avg >= 0.0 {
            let rep = orbit.representative();
            return Err(TransitionError::NonPositiveDenominator { x: rep.x, y: rep.y, avg });
        }
        let t = delta / -avg;
        if best.as_ref().is_none_or(|b| t > b.t0) {
            best = Some(TransitionPoint { t0: t, orbit_index: i });
        }
    }
    if !saw_saddle {
        return Err(TransitionError::NoSaddle);
    }
    Ok(best.expect("a saddle was seen"))
}

/// Estimate minus the catalog's best orbit average: a positive margin is
/// finite-data evidence that the potential is hyperbolic, nothing more.
/// The orbit maximum is only a lower bound for the true supremum over
/// invariant measures, so the margin is an upper bound on the real gap.
pub fn hyperbolicity_margin(
    catalog: &OrbitCatalog,
    sys: &SystemDef,
    pot: &Potential,
    est: &PressureEstimate,
) -> Result<f64, TransitionError> {
    if catalog.is_empty() {
        return Err(TransitionError::EmptyCatalog);
    }
    let best = catalog
        .orbits()
        .iter()
        .map(|o| o.potential_average(sys, pot))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(est.value - best)
}

/// Sampled-variation criterion: a potential whose oscillation stays below
/// the entropy is hyperbolic. Sup and inf come from a corner grid of about
/// `sample_budget` points plus local refinement, so the reported variation
/// is a lower bound of the true one and `true` verdicts are the fragile
/// direction; the margin is reported for exactly that reason.
pub fn variation_test(
    sys: &SystemDef,
    pot: &Potential,
    h_top_est: f64,
    sample_budget: u32,
) -> Result<VariationReport, TransitionError> {
    if !h_top_est.is_finite() || h_top_est < 0.0 {
        return Err(TransitionError::InvalidInput("entropy reference must be finite and >= 0"));
    }
    if !(16..=10_000_000).contains(&sample_budget) {
        return Err(TransitionError::InvalidInput("sample budget must lie in 16..=1e7"));
    }
    let period = sys.domain_period();
    let density = ((sample_budget as f64).sqrt().floor() as u32).clamp(4, 1024);
    let spacing = period / density as f64;
    let pts = sample::corner_grid(density, period);
    let mut sup_seed = pts[0];
    let mut inf_seed = pts[0];
    let mut sup = f64::NEG_INFINITY;
    let mut inf = f64::INFINITY;
    for &p in &pts {
        let v = pot.eval(sys, p);
        if v > sup {
            sup = v;
            sup_seed = p;
        }
        if v < inf {
            inf = v;
            inf_seed = p;
        }
    }
    let (_, sup) =
        grassmann::compass_max(|x| pot.eval(sys, x), sup_seed, period, spacing, spacing * 1e-8);
    let (_, neg_inf) =
        grassmann::compass_max(|x| -pot.eval(sys, x), inf_seed, period, spacing, spacing * 1e-8);
    let inf = -neg_inf;
    let variation = sup - inf;
    Ok(VariationReport {
        hyperbolic: variation < h_top_est,
        variation,
        sup,
        inf,
        entropy_reference: h_top_est,
    })
}

/// Catalog indices whose orbits satisfy both equilibrium criteria: largest
/// exponent within `tol` of zero and potential average within `tol` of the
/// estimate. Atomic orbit measures carry no entropy, so these two checks
/// are the whole finite-data criterion. `tol = 0` demands exact equality.
pub fn equilibrium_candidates(
    catalog: &OrbitCatalog,
    sys: &SystemDef,
    pot: &Potential,
    est: &PressureEstimate,
    tol: f64,
) -> Result<Vec<usize>, TransitionError> {
    if !tol.is_finite() || tol < 0.0 {
        return Err(TransitionError::InvalidInput("tolerance must be finite and >= 0"));
    }
    Ok(catalog
        .orbits()
        .iter()
        .enumerate()
        .filter(|(_, o)| {
            o.exponents()[1].abs() <= tol
                && (o.potential_average(sys, pot) - est.value).abs() <= tol
        })
        .map(|(i, _)| i)
        .collect())
}

/// Assembles curve, transition point and the `t = 1` candidate screen.
pub fn transition_report(
    catalog: &OrbitCatalog,
    sys: &SystemDef,
    m: u32,
    t_grid: &[f64],
    candidate_tol: f64,
) -> Result<TransitionReport, TransitionError> {
    let curve = pressure_curve(catalog, sys, m, t_grid)?;
    let transition = transition_point(catalog, sys, m)?;
    let pot = Potential::Geometric { m };
    let pressure_at_unit = periodic_pressure(catalog, sys, &pot)?;
    let candidates = equilibrium_candidates(catalog, sys, &pot, &pressure_at_unit, candidate_tol)?;
    Ok(TransitionReport { m, curve, transition, pressure_at_unit, candidates, candidate_tol })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;
    use crate::orbits::find_periodic_orbits;

    fn log_cat() -> f64 {
        ((3.0 + 5f64.sqrt()) / 2.0).ln()
    }

    fn cat_catalog() -> (SystemDef, OrbitCatalog) {
        let sys = SystemDef::cat_map();
        let catalog = find_periodic_orbits(&sys, 3, 64, 1).unwrap();
        (sys, catalog)
    }

    fn standard_catalog() -> (SystemDef, OrbitCatalog) {
        let sys = SystemDef::standard_map(1.0).unwrap();
        let catalog = find_periodic_orbits(&sys, 1, 48, 3).unwrap();
        assert_eq!(catalog.len(), 2, "two fixed points");
        (sys, catalog)
    }

    #[test]
    fn cat_curve_is_one_shared_line() {
        let (sys, catalog) = cat_catalog();
        let curve = pressure_curve(&catalog, &sys, 1, &[0.0, 0.5, 1.0, 2.0]).unwrap();
        for p in &curve.points {
            let expected = log_cat() * (1.0 - p.t);
            assert!((p.value - expected).abs() < 1e-9, "t={}: {}", p.t, p.value);
        }
        assert!(curve.kinks.is_empty(), "all orbits share one affine line");
        let tp = transition_point(&catalog, &sys, 1).unwrap();
        assert!((tp.t0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn standard_map_fixed_point_family_kinks_at_two() {
        let (sys, catalog) = standard_catalog();
        let grid = [0.0, 0.5, 1.0, 2.0, 3.0];
        let curve = pressure_curve(&catalog, &sys, 1, &grid).unwrap();
        let l = log_cat();
        let g = ((1.0 + 5f64.sqrt()) / 2.0).ln();
        for p in &curve.points {
            let expected = (l * (1.0 - p.t)).max(-g * p.t);
            assert!((p.value - expected).abs() < 1e-9, "t={}", p.t);
        }
        assert_eq!(curve.kinks.len(), 1);
        assert!((curve.kinks[0] - 2.0).abs() < 1e-6, "kink at {}", curve.kinks[0]);
        // Past the kink the elliptic line takes over.
        assert_ne!(curve.points[1].orbit_index, curve.points[4].orbit_index);
        let tp = transition_point(&catalog, &sys, 1).unwrap();
        assert!((tp.t0 - 1.0).abs() < 1e-9);
        assert_eq!(
            catalog.orbits()[tp.orbit_index].classification(),
            OrbitClass::Saddle
        );
    }

    #[test]
    fn curve_is_convex_and_non_increasing() {
        let (sys, catalog) = cat_catalog();
        let grid: Vec<f64> = (0..=30).map(|i| i as f64 * 0.1).collect();
        let curve = pressure_curve(&catalog, &sys, 2, &grid).unwrap();
        let v: Vec<f64> = curve.points.iter().map(|p| p.value).collect();
        for w in v.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "non-increasing");
        }
        for w in v.windows(3) {
            assert!(w[2] - 2.0 * w[1] + w[0] >= -1e-9, "convex second differences");
        }
    }

    #[test]
    fn argsup_line_is_positive_before_its_zero_crossing() {
        let (sys, catalog) = standard_catalog();
        let tp = transition_point(&catalog, &sys, 1).unwrap();
        let orbit = &catalog.orbits()[tp.orbit_index];
        let pot = Potential::Geometric { m: 1 };
        let delta = orbit.delta();
        let slope = orbit.potential_average(&sys, &pot);
        for i in 0..20 {
            let t = tp.t0 * i as f64 / 20.0;
            assert!(delta + t * slope > 0.0, "strictly positive at t={t}");
        }
        assert!((delta + tp.t0 * slope).abs() < 1e-12, "vanishes at the crossing");
    }

    #[test]
    fn saddle_free_catalogs_are_rejected() {
        let (sys, catalog) = standard_catalog();
        let no_saddles = catalog.filtered(|o| o.classification() != OrbitClass::Saddle);
        assert_eq!(no_saddles.len(), 1);
        assert!(matches!(
            transition_point(&no_saddles, &sys, 1),
            Err(TransitionError::NoSaddle)
        ));
        let empty = catalog.filtered(|_| false);
        assert!(matches!(
            pressure_curve(&empty, &sys, 1, &[0.0, 1.0]),
            Err(TransitionError::EmptyCatalog)
        ));
    }

    #[test]
    fn grid_and_order_validation() {
        let (sys, catalog) = cat_catalog();
        let bad = |grid: &[f64]| {
            matches!(
                pressure_curve(&catalog, &sys, 1, grid),
                Err(TransitionError::InvalidInput(_))
            )
        };
        assert!(bad(&[]));
        assert!(bad(&[-0.5, 1.0]));
        assert!(bad(&[0.0, 0.0]));
        assert!(bad(&[1.0, 0.5]));
        assert!(matches!(
            pressure_curve(&catalog, &sys, 0, &[0.0, 1.0]),
            Err(TransitionError::InvalidInput(_))
        ));
    }

    #[test]
    fn margin_examples_match_the_periodic_estimate() {
        let (sys, catalog) = cat_catalog();
        let zero = Potential::zero();
        let est = periodic_pressure(&catalog, &sys, &zero).unwrap();
        let margin = hyperbolicity_margin(&catalog, &sys, &zero, &est).unwrap();
        assert!((margin - log_cat()).abs() < 1e-9);
        // A constant shift moves estimate and orbit maximum together.
        let shifted_pot = Potential::Constant(0.7);
        let shifted_est = periodic_pressure(&catalog, &sys, &shifted_pot).unwrap();
        let shifted = hyperbolicity_margin(&catalog, &sys, &shifted_pot, &shifted_est).unwrap();
        assert!((shifted - margin).abs() < 1e-12);
        // Geometric order one: estimate 0, every average -log lambda; the
        // margin is catalog-bound and still reads as the entropy.
        let geo = Potential::Geometric { m: 1 };
        let geo_est = periodic_pressure(&catalog, &sys, &geo).unwrap();
        assert!(geo_est.value.abs() < 1e-9);
        let geo_margin = hyperbolicity_margin(&catalog, &sys, &geo, &geo_est).unwrap();
        assert!((geo_margin - log_cat()).abs() < 1e-9);
    }

    #[test]
    fn variation_verdicts_follow_the_oscillation() {
        let sys = SystemDef::cat_map();
        let h = log_cat();
        let wide = Potential::Expression(Expr::parse("0.5*cos(x)").unwrap());
        let r = variation_test(&sys, &wide, h, 4096).unwrap();
        assert!(!r.hyperbolic);
        assert!((r.variation - 1.0).abs() < 1e-9);
        let narrow = Potential::Expression(Expr::parse("0.4*cos(x)").unwrap());
        let r = variation_test(&sys, &narrow, h, 4096).unwrap();
        assert!(r.hyperbolic);
        assert!((r.variation - 0.8).abs() < 1e-9);
        let flat = Potential::Constant(3.2);
        let r = variation_test(&sys, &flat, h, 4096).unwrap();
        assert!(r.hyperbolic);
        assert_eq!(r.variation, 0.0);
        assert!(matches!(
            variation_test(&sys, &flat, -1.0, 4096),
            Err(TransitionError::InvalidInput(_))
        ));
    }

    #[test]
    fn candidate_screen_flags_the_constructed_elliptic_equilibrium() {
        let (sys, catalog) = standard_catalog();
        // Choose the cosine amplitude so the elliptic average equals the
        // resulting pressure: -c*cos picks +c at (pi, 0) and -c at (0, 0),
        // which balances the saddle line exactly when c is half its delta.
        let c = ((1.0 + 5f64.sqrt()) / 2.0).ln();
        let text = format!("{:.17e}*cos(x)", -c);
        let pot = Potential::Expression(Expr::parse(&text).unwrap());
        let est = periodic_pressure(&catalog, &sys, &pot).unwrap();
        assert!((est.value - c).abs() < 1e-9);
        let ids = equilibrium_candidates(&catalog, &sys, &pot, &est, 1e-6).unwrap();
        let elliptic_idx = catalog
            .orbits()
            .iter()
            .position(|o| o.classification() == OrbitClass::Elliptic)
            .unwrap();
        assert_eq!(ids, vec![elliptic_idx]);
        // Saddles never pass the exponent gate.
        let (cat_sys, cat_catalog) = cat_catalog();
        let zero = Potential::zero();
        let cat_est = periodic_pressure(&cat_catalog, &cat_sys, &zero).unwrap();
        let none = equilibrium_candidates(&cat_catalog, &cat_sys, &zero, &cat_est, 1e-6).unwrap();
        assert!(none.is_empty());
    }

    #[test]
    fn candidates_grow_with_the_tolerance() {
        let (sys, catalog) = standard_catalog();
        let pot = Potential::Geometric { m: 1 };
        let est = periodic_pressure(&catalog, &sys, &pot).unwrap();
        let mut prev: Vec<usize> = Vec::new();
        for tol in [0.0, 1e-9, 1e-3, 0.5, 2.0] {
            let ids = equilibrium_candidates(&catalog, &sys, &pot, &est, tol).unwrap();
            assert!(prev.iter().all(|i| ids.contains(i)), "monotone in tol");
            prev = ids;
        }
        assert!(matches!(
            equilibrium_candidates(&catalog, &sys, &pot, &est, -1.0),
            Err(TransitionError::InvalidInput(_))
        ));
    }

    #[test]
    fn full_report_is_internally_consistent() {
        let (sys, catalog) = standard_catalog();
        let report =
            transition_report(&catalog, &sys, 1, &[0.0, 0.5, 1.0, 1.5, 2.0, 2.5], 1e-6).unwrap();
        assert_eq!(report.m, 1);
        assert!((report.transition.t0 - 1.0).abs() < 1e-9);
        // At t = 1 the curve and the unit-pressure estimate agree exactly.
        let at_one = report.curve.points.iter().find(|p| p.t == 1.0).unwrap();
        assert_eq!(at_one.value, report.pressure_at_unit.value);
        assert!((report.curve.kinks[0] - 2.0).abs() < 1e-6);
        assert!(report.pressure_at_unit.value.abs() < 1e-9);
        // At t = 1 no orbit passes both gates: the elliptic point has zero
        // exponent but its average sits at -log(golden), well off the
        // pressure, and the saddle fails the exponent gate outright.
        assert!(report.candidates.is_empty());
    }

    #[test]
    fn transition_point_is_the_kink_of_the_positive_part() {
        // For one saddle line b + s*t, t0 = b / -s by construction; cross
        // check the two standard-map orbits against the closed forms.
        let (sys, catalog) = standard_catalog();
        let pot = Potential::Geometric { m: 1 };
        let saddle = catalog
            .orbits()
            .iter()
            .find(|o| o.classification() == OrbitClass::Saddle)
            .unwrap();
        let ratio = saddle.delta() / -saddle.potential_average(&sys, &pot);
        let tp = transition_point(&catalog, &sys, 1).unwrap();
        assert_eq!(tp.t0, ratio);
    }
}
