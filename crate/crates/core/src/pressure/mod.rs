//! Topological pressure estimators and their cross-validation.
//!
//! Four routes are implemented, each with an explicit bound character:
//!
//! * [`periodic_pressure`] maximizes the periodic-orbit functional over a
//!   finite catalog; always a lower bound for the supremum it samples.
//! * [`grassmann::sigma_k`] / [`grassmann::grassmann_pressure`] search the
//!   Grassmann bundle for volume-growth suprema; each finite-horizon supremum
//!   is an upper bound, so the headline takes the minimum over horizons.
//! * [`bowen::bowen_pressure`] estimates spanning-set growth on a grid; its
//!   successive-difference headline is a heuristic, flagged as such.
//! * [`sft::sft_pressure`] is exact (to eigenvalue tolerance) on symbolic
//!   models and serves as the oracle the smooth estimators are checked
//!   against.

pub mod bowen;
pub mod grassmann;
pub mod sft;

use thiserror::Error;

use crate::orbits::{OrbitCatalog, PeriodicOrbit};
use crate::systems::{Potential, SystemDef, SystemError};

#[derive(Debug, Error, PartialEq)]
pub enum PressureError {
    #[error("orbit catalog is empty")]
    EmptyCatalog,
    #[error("invalid estimator budget: {0}")]
    InvalidBudget(&'static str),
    #[error("estimator produced no usable data: {0}")]
    NoUsableData(&'static str),
    #[error(transparent)]
    System(#[from] SystemError),
}

/// Which estimator produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Bowen,
    Periodic,
    Grassmann,
    Sft,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Bowen => "bowen",
            Method::Periodic => "periodic",
            Method::Grassmann => "grassmann",
            Method::Sft => "sft",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How a headline value relates to the quantity it estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    Lower,
    Upper,
    TwoSided,
    Heuristic,
}

impl BoundKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundKind::Lower => "lower",
            BoundKind::Upper => "upper",
            BoundKind::TwoSided => "two-sided",
            BoundKind::Heuristic => "heuristic",
        }
    }
}

impl std::fmt::Display for BoundKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One point of a per-horizon diagnostic series; the meaning of `value`
/// depends on the method and is documented at each constructor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesPoint {
    pub n: u32,
    pub value: f64,
}

/// A pressure value with its provenance: method, bound character, the
/// per-horizon diagnostic series, parameter record, and warning flags.
#[derive(Debug, Clone, PartialEq)]
pub struct PressureEstimate {
    pub value: f64,
    pub method: Method,
    pub bound: BoundKind,
    /// Per-horizon diagnostics. Periodic: best functional value over orbits
    /// of period up to `n`. Grassmann: the per-`n` supremum. Bowen: the
    /// successive difference at `n`. Transfer matrix: normalized log trace.
    pub series: Vec<SeriesPoint>,
    /// Human-readable parameter record (budgets, grids, witnesses).
    pub params: String,
    /// Non-fatal warnings accumulated during estimation.
    pub flags: Vec<String>,
    /// The arg-max orbit for the periodic route.
    pub witness: Option<PeriodicOrbit>,
}

impl PressureEstimate {
    pub fn has_flags(&self) -> bool {
        !self.flags.is_empty()
    }
}

/// Maximum of the periodic-orbit functional `delta + orbit average` over a
/// catalog. A finite catalog samples an infinite supremum, so the result is
/// a lower bound; a non-exhaustive catalog additionally flags that even the
/// catalog itself was truncated.
pub fn periodic_pressure(
    catalog: &OrbitCatalog,
    sys: &SystemDef,
    pot: &Potential,
) -> Result<PressureEstimate, PressureError> {
    if catalog.is_empty() {
        return Err(PressureError::EmptyCatalog);
    }
    let values: Vec<f64> = catalog
        .orbits()
        .iter()
        .map(|o| o.pressure_value(sys, pot))
        .collect();
    let best_index = (0..values.len())
        .max_by(|&i, &j| {
            values[i]
                .partial_cmp(&values[j])
                .expect("orbit functionals are finite")
                // On ties keep the earlier (smaller-period, smaller-point) orbit.
                .then(std::cmp::Ordering::Greater)
        })
        .expect("catalog is nonempty");
    let witness = catalog.orbits()[best_index].clone();

    let mut series = Vec::new();
    let mut best_so_far = f64::NEG_INFINITY;
    let mut cursor = 0usize;
    for n in 1..=catalog.max_period() {
        while cursor < values.len() && catalog.orbits()[cursor].period() <= n {
            best_so_far = best_so_far.max(values[cursor]);
            cursor += 1;
        }
        if best_so_far.is_finite() {
            series.push(SeriesPoint { n, value: best_so_far });
        }
    }

    let mut flags = Vec::new();
    if !catalog.exhaustive() {
        flags.push("orbit search hit its cap; the lower bound may be loose".to_string());
    }
    Ok(PressureEstimate {
        value: values[best_index],
        method: Method::Periodic,
        bound: BoundKind::Lower,
        series,
        params: format!(
            "max_period={} orbits={} witness_period={} witness=({:.6},{:.6})",
            catalog.max_period(),
            catalog.len(),
            witness.period(),
            witness.representative().x,
            witness.representative().y,
        ),
        flags,
        witness: Some(witness),
    })
}

/// Budgets for [`cross_validate`]: one orbit search, one grid estimator,
/// one Grassmann search, and the slack allowed between routes.
#[derive(Debug, Clone)]
pub struct ValidationBudget {
    pub max_period: u32,
    pub orbit_grid: u32,
    pub seed: u64,
    pub bowen: bowen::BowenBudget,
    pub sigma: grassmann::SigmaBudget,
    /// Allowed slack in the ordering `periodic <= grassmann + tolerance`
    /// and in the spread flag.
    pub tolerance: f64,
}

/// Outcome of running the three smooth-system estimators side by side.
#[derive(Debug, Clone)]
pub struct CrossValidation {
    /// Estimates in order: periodic, grassmann, bowen.
    pub estimates: Vec<PressureEstimate>,
    /// Max minus min of the headline values.
    pub spread: f64,
    /// Ordering or spread violations, empty when consistent.
    pub violations: Vec<String>,
    pub consistent: bool,
}

/// Run the periodic, Grassmann, and Bowen estimators on the same system and
/// potential and check the orderings their bound kinds promise: the periodic
/// lower bound must not exceed the Grassmann upper bound by more than the
/// declared tolerance, and the overall spread is flagged when it exceeds it.
pub fn cross_validate(
    sys: &SystemDef,
    pot: &Potential,
    budget: &ValidationBudget,
) -> Result<CrossValidation, PressureError> {
    // NaN must be rejected along with non-positive values.
    if budget.tolerance.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return Err(PressureError::InvalidBudget("tolerance must be positive"));
    }
    let catalog =
        crate::orbits::find_periodic_orbits(sys, budget.max_period, budget.orbit_grid, budget.seed)
            .map_err(|_| PressureError::InvalidBudget("orbit search budget rejected"))?;
    let periodic = periodic_pressure(&catalog, sys, pot)?;
    let grassmann = grassmann::grassmann_pressure(sys, pot, &budget.sigma)?;
    let bowen = bowen::bowen_pressure(sys, pot, &budget.bowen)?;

    let mut violations = Vec::new();
    if periodic.value > grassmann.value + budget.tolerance {
        violations.push(format!(
            "periodic lower bound {:.6} exceeds grassmann upper bound {:.6} plus tolerance {:.1e}",
            periodic.value, grassmann.value, budget.tolerance
        ));
    }
    let values = [periodic.value, grassmann.value, bowen.value];
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let spread = hi - lo;
    if spread > budget.tolerance {
        violations.push(format!(
            "method spread {:.6} exceeds tolerance {:.1e}",
            spread, budget.tolerance
        ));
    }
    Ok(CrossValidation {
        consistent: violations.is_empty(),
        estimates: vec![periodic, grassmann, bowen],
        spread,
        violations,
    })
}
