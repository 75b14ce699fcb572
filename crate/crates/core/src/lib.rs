//! Numerical dynamics toolkit for conservative maps of the two-torus and
//! shifts of finite type.
//!
//! The crate estimates topological pressure by several independent routes and
//! cross-checks them:
//!
//! * **Periodic orbits.** Newton search on the torus lift produces a catalog
//!   of periodic orbits; each orbit contributes its unstable exponent sum
//!   plus the orbit average of the potential. The supremum over the catalog
//!   is a lower bound for the pressure.
//! * **Spanning sets.** A greedy cover of a grid by Bowen balls approximates
//!   the partition sums `Q_n`; successive differences of `log Q_n` cancel
//!   the radius-dependent offset and give a heuristic headline value.
//! * **Singular values over the Grassmannian.** For each plane dimension `k`
//!   the supremum of `(1/n)(log|Jac(f^n, E)| + S_n phi)` is sampled over
//!   basepoints and tangent planes; the per-`n` suprema are non-increasing
//!   upper bounds and the maximum over `k` bounds the pressure from above.
//! * **Transfer matrices.** For shifts of finite type the pressure is the
//!   log spectral radius of the weighted transition matrix, exact to
//!   eigenvalue precision, and serves as the oracle in cross-method tests.
//!
//! On top of the estimators sit diagnostics for uniform hyperbolicity:
//! `N`-domination tests along periodic orbits, singular-value gap curves,
//! and the piecewise-affine pressure curve `t -> P(t * phi_m)` of the
//! geometric potential together with its zero crossing.
//!
//! All sampling is driven by explicit seeds and every parallel reduction is
//! ordered, so results are bit-reproducible for a fixed configuration.

/// Crate version, for embedding in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod domination;
pub mod export;
pub mod expr;
pub mod linalg;
pub mod orbits;
pub mod pressure;
pub mod sample;
pub mod systems;
pub mod torus;
pub mod transition;

pub use domination::{
    domination_gap, n_domination_scan, n_domination_test, weakness_test, DominationReport,
    Verdict,
};
pub use linalg::{Eigenvalues, Mat2, Vec2};
pub use orbits::{find_periodic_orbits, OrbitCatalog, OrbitClass, PeriodicOrbit};
pub use pressure::{BoundKind, Method, PressureEstimate};
pub use systems::{Potential, SystemDef, TangentFrame};
pub use transition::{pressure_curve, transition_point, transition_report, TransitionReport};
