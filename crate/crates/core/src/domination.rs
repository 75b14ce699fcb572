//! N-domination tests along periodic orbits and finite orbit segments.
//!
//! A splitting of the tangent bundle over an orbit into a weak line E and a
//! strong line F is N-dominated when the growth ratio
//! `r_n = ||Df^n u|| / ||Df^n v||` (unit `u` in E, unit `v` in F) stays at
//! or below one half for every `n >= N`, from every point of the orbit. For
//! a periodic orbit the only candidate invariant lines are the
//! eigendirections of the return map, so the verdict reduces to a finite
//! ratio scan; a finite horizon stands in for "all n", and the report
//! carries that horizon rather than claiming more.
//!
//! Orbits whose multiplier has complex eigenvalues admit no invariant real
//! splitting at all: their verdict is false with that reason. Parabolic
//! boundaries, where the eigendirections collapse onto each other, get an
//! explicit indeterminate verdict instead of a tolerance-driven guess.

use thiserror::Error;

use crate::linalg::{Eigenvalues, Mat2, Vec2};
use crate::orbits::PeriodicOrbit;
use crate::systems::{SystemDef, SystemError};

/// Hard cap on ratio-scan horizons and gap-sequence lengths.
const MAX_HORIZON: u32 = 4096;
/// Eigendirections closer than this (in sine of angle) give no usable
/// splitting.
const ANGLE_TOL: f64 = 1e-8;
/// Domination demands the weak/strong ratio at or below this bound.
const RATIO_BOUND: f64 = 0.5;

#[derive(Debug, Error)]
pub enum DominationError {
    #[error("invalid horizon: {0}")]
    InvalidHorizon(&'static str),
    #[error("verdict is indeterminate: {0}")]
    Indeterminate(String),
    #[error(transparent)]
    System(#[from] SystemError),
}

/// Three-way outcome; the parabolic boundary is reported, never rounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    True,
    False,
    Indeterminate,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::True => "true",
            Verdict::False => "false",
            Verdict::Indeterminate => "indeterminate",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where the candidate splitting came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplittingSource {
    /// Eigendirections of a periodic orbit's return map.
    Eigen,
    /// Finite-time singular directions along a non-periodic segment.
    FiniteTimeSingular,
}

impl SplittingSource {
    pub fn as_str(&self) -> &'static str {
        match self {
            SplittingSource::Eigen => "eigen",
            SplittingSource::FiniteTimeSingular => "finite-time-singular",
        }
    }
}

/// Outcome of a domination scan: the per-n ratio record (worst case over
/// the orbit's points), one verdict per tested N, and enough identity to
/// export the row without the orbit in hand.
#[derive(Debug, Clone)]
pub struct DominationReport {
    pub representative: Vec2,
    /// `None` for finite segments.
    pub period: Option<u32>,
    pub tested: Vec<(u32, Verdict)>,
    /// `r_n` for `n = 1..=horizon`; empty when no splitting exists.
    pub ratios: Vec<f64>,
    pub source: SplittingSource,
    pub horizon: u32,
    pub reason: Option<String>,
}

/// Default ratio-scan horizon for a given N.
pub fn default_horizon(n: u32) -> u32 {
    (4 * n).max(64)
}

/// Weak and strong eigendirections of the return map, or the reason they
/// cannot be distinguished. Callers handle the complex case beforehand.
fn eigen_splitting(m: &Mat2, small: f64, large: f64) -> Result<(Vec2, Vec2), String> {
    match (m.real_eigenvector(small), m.real_eigenvector(large)) {
        (Some(weak), Some(strong)) => {
            if weak.cross(strong).abs() < ANGLE_TOL {
                Err("eigendirections parallel within 1e-8 (parabolic boundary)".to_string())
            } else {
                Ok((weak, strong))
            }
        }
        _ => Err("multiplier is numerically scalar; no distinguished directions".to_string()),
    }
}

/// Worst-case ratio record `r_n`, maximized over every starting point of
/// the orbit.
///
/// Only one period of per-step log increments is ever measured; longer
/// horizons are exact periodic extensions of it. The strong direction is
/// pushed forward, where it attracts nearby lines, and the weak direction
/// is pulled backward through the inverse Jacobians, where it attracts in
/// turn, so roundoff contamination decays in both sweeps. Pushing the weak
/// line forward instead would amplify contamination by the squared
/// eigenvalue ratio per step and corrupt the record past a dozen steps.
fn ratio_record(
    sys: &SystemDef,
    orbit: &PeriodicOrbit,
    weak: Vec2,
    strong: Vec2,
    horizon: u32,
) -> Vec<f64> {
    let pts = orbit.points();
    let t = pts.len();
    let jac: Vec<Mat2> = pts.iter().map(|&p| sys.jacobian(p)).collect();
    let mut dv = vec![0.0f64; t];
    let mut v = strong;
    for i in 0..t {
        let pv = jac[i].mul_vec(v);
        let n = pv.norm();
        dv[i] = n.ln();
        v = pv.scale(1.0 / n);
    }
    let mut du = vec![0.0f64; t];
    let mut u = weak;
    for i in (0..t).rev() {
        let inv = jac[i].inverse().expect("area-preserving Jacobians are invertible");
        let pu = inv.mul_vec(u);
        let n = pu.norm();
        // ||Df(x_i) u_i|| = 1 / ||Df(x_i)^{-1} u_{i+1}|| on the weak line.
        du[i] = -n.ln();
        u = pu.scale(1.0 / n);
    }
    let prefix = |d: &[f64]| {
        let mut a = vec![0.0f64; t + 1];
        for i in 0..t {
            a[i + 1] = a[i] + d[i];
        }
        a
    };
    let au = prefix(&du);
    let av = prefix(&dv);
    let (lu, lv) = (au[t], av[t]);
    // Cyclic window sum of the increments: full periods plus a partial run.
    let window = |a: &[f64], total: f64, j: usize, n: usize| -> f64 {
        let rem = n % t;
        let end = j + rem;
        let partial =
            if end <= t { a[end] - a[j] } else { total - a[j] + a[end - t] };
        (n / t) as f64 * total + partial
    };
    (1..=horizon as usize)
        .map(|n| {
            let worst = (0..t)
                .map(|j| window(&au, lu, j, n) - window(&av, lv, j, n))
                .fold(f64::NEG_INFINITY, f64::max);
            worst.exp()
        })
        .collect()
}

/// Domination scan over several N values at once, sharing one ratio record.
pub fn n_domination_scan(
    sys: &SystemDef,
    orbit: &PeriodicOrbit,
    n_values: &[u32],
    horizon: u32,
) -> Result<DominationReport, DominationError> {
    if n_values.is_empty() || n_values.iter().any(|&n| n < 1) {
        return Err(DominationError::InvalidHorizon("tested N values must be nonempty and >= 1"));
    }
    let n_max = *n_values.iter().max().expect("nonempty");
    if horizon < n_max || horizon > MAX_HORIZON {
        return Err(DominationError::InvalidHorizon(
            "horizon must satisfy max(N) <= horizon <= 4096",
        ));
    }
    let base = DominationReport {
        representative: orbit.representative(),
        period: Some(orbit.period()),
        tested: Vec::new(),
        ratios: Vec::new(),
        source: SplittingSource::Eigen,
        horizon,
        reason: None,
    };
    let (small, large) = match orbit.eigenvalues() {
        Eigenvalues::Complex { .. } => {
            return Ok(DominationReport {
                tested: n_values.iter().map(|&n| (n, Verdict::False)).collect(),
                reason: Some(
                    "no invariant splitting: multiplier eigenvalues are complex".to_string(),
                ),
                ..base
            });
        }
        Eigenvalues::Real { small, large } => (small, large),
    };
    let multiplier = orbit.multiplier();
    let (weak, strong) = match eigen_splitting(&multiplier, small, large) {
        Ok(pair) => pair,
        Err(reason) => {
            return Ok(DominationReport {
                tested: n_values.iter().map(|&n| (n, Verdict::Indeterminate)).collect(),
                reason: Some(reason),
                ..base
            });
        }
    };
    let ratios = ratio_record(sys, orbit, weak, strong, horizon);
    // ok_from[i]: every ratio from index i on stays within the bound; the
    // suffix structure makes verdicts monotone in N by construction.
    let mut ok_from = vec![false; horizon as usize + 1];
    ok_from[horizon as usize] = true;
    for i in (0..horizon as usize).rev() {
        ok_from[i] = ok_from[i + 1] && ratios[i] <= RATIO_BOUND;
    }
    let tested: Vec<(u32, Verdict)> = n_values
        .iter()
        .map(|&n| {
            let v = if ok_from[n as usize - 1] { Verdict::True } else { Verdict::False };
            (n, v)
        })
        .collect();
    let reason = if tested.iter().any(|&(_, v)| v == Verdict::False) {
        let last_bad = (1..=horizon).rev().find(|&n| ratios[n as usize - 1] > RATIO_BOUND);
        last_bad.map(|n| {
            format!("ratio {:.6} exceeds 1/2 at n = {}", ratios[n as usize - 1], n)
        })
    } else {
        None
    };
    Ok(DominationReport { tested, ratios, reason, ..base })
}

/// Single-N domination verdict with its report.
pub fn n_domination_test(
    sys: &SystemDef,
    orbit: &PeriodicOrbit,
    n: u32,
    horizon: u32,
) -> Result<(Verdict, DominationReport), DominationError> {
    let report = n_domination_scan(sys, orbit, &[n], horizon)?;
    Ok((report.tested[0].1, report))
}

/// True when the orbit's period reaches `t_min` and no candidate splitting
/// is N-dominated. An indeterminate domination verdict is propagated as an
/// error: weakness must not be claimed off a parabolic boundary.
pub fn weakness_test(
    sys: &SystemDef,
    orbit: &PeriodicOrbit,
    t_min: u32,
    n: u32,
    horizon: u32,
) -> Result<bool, DominationError> {
    if orbit.period() < t_min {
        return Ok(false);
    }
    let (verdict, report) = n_domination_test(sys, orbit, n, horizon)?;
    match verdict {
        Verdict::True => Ok(false),
        Verdict::False => Ok(true),
        Verdict::Indeterminate => Err(DominationError::Indeterminate(
            report.reason.unwrap_or_else(|| "parabolic multiplier".to_string()),
        )),
    }
}

/// Finite-time singular-value gap `g_n = sigma_2 / sigma_1` of the
/// derivative cocycle along the forward orbit of `x`, for `n = 1..=n_max`.
///
/// `sigma_1` comes from a running, renormalized matrix product and
/// `sigma_2` from the exactly accumulated determinant logs, never from the
/// product matrix itself: for a hyperbolic segment of length 30 the direct
/// determinant would lose all its digits to cancellation.
pub fn domination_gap(
    sys: &SystemDef,
    x: Vec2,
    n_max: u32,
) -> Result<Vec<f64>, DominationError> {
    if !(1..=MAX_HORIZON).contains(&n_max) {
        return Err(DominationError::InvalidHorizon("n_max must lie in 1..=4096"));
    }
    let mut p = x;
    let mut r = Mat2::IDENTITY;
    let mut log_scale = 0.0f64;
    let mut log_det = 0.0f64;
    let mut out = Vec::with_capacity(n_max as usize);
    for _ in 0..n_max {
        let j = sys.jacobian(p);
        log_det += j.det().abs().ln();
        r = j.mul_mat(&r);
        let m = r.max_abs();
        r = r.scale(1.0 / m);
        log_scale += m.ln();
        let (s1, _) = r.singular_values();
        let log_s1 = log_scale + s1.ln();
        // sigma1 * sigma2 = |det|, so the ratio needs no small singular value.
        out.push((log_det - 2.0 * log_s1).exp().min(1.0));
        p = sys.eval(p);
    }
    Ok(out)
}

/// Gap sequence packaged as a report row, for uniform export alongside the
/// periodic-orbit verdicts.
pub fn segment_report(
    sys: &SystemDef,
    x: Vec2,
    n_max: u32,
) -> Result<DominationReport, DominationError> {
    let ratios = domination_gap(sys, x, n_max)?;
    Ok(DominationReport {
        representative: x,
        period: None,
        tested: Vec::new(),
        ratios,
        source: SplittingSource::FiniteTimeSingular,
        horizon: n_max,
        reason: None,
    })
}
