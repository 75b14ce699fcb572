//! Conservative maps of the two-torus and the potentials evaluated along
//! their orbits.
//!
//! Every map kind carries an exact inverse and an analytic Jacobian, so
//! derivative cocycles are available in both time directions without finite
//! differencing. All kinds preserve area: integer unimodular matrices,
//! shear kicks, and the Chirikov family all have Jacobian determinant one
//! (up to sign for orientation-reversing linear maps).
//!
//! Conventions:
//! * linear maps and kicks live on `[0, 1)^2`;
//! * the standard family lives on `[0, 2*pi)^2` in `(angle, momentum)`
//!   coordinates `x' = x + p + K sin x`, `p' = p + K sin x`;
//! * compositions must share a fundamental domain.

use std::f64::consts::TAU;

use thiserror::Error;

use crate::expr::Expr;
use crate::linalg::{Mat2, Vec2};
use crate::torus;

/// Entry magnitudes of long derivative products are renormalized once they
/// pass this threshold; only the accumulated log magnitude is kept exact.
const RESCALE_THRESHOLD: f64 = 1e100;

/// Hard ceiling for raw (un-rescaled) cocycle entries.
const OVERFLOW_CEILING: f64 = 1e300;

#[derive(Debug, Error, PartialEq)]
pub enum SystemError {
    #[error("linear torus matrix must have determinant +-1, got {det}")]
    NotUnimodular { det: i64 },
    #[error("linear torus matrix entries must not exceed 1e6 in magnitude")]
    EntryTooLarge,
    #[error("map parameter must be finite")]
    NonFiniteParameter,
    #[error("composed system needs at least one stage")]
    EmptyComposition,
    #[error("composed stages must share one fundamental domain ({a} vs {b})")]
    MixedDomains { a: f64, b: f64 },
    #[error("cocycle entries exceeded 1e300 after {steps} steps")]
    CocycleOverflow { steps: u32 },
    #[error("tangent frame must hold 1 or 2 vectors, got {k}")]
    FrameDimension { k: usize },
    #[error("tangent frame vectors must be orthonormal within 1e-12")]
    FrameNotOrthonormal,
}

#[derive(Debug, Clone, PartialEq)]
enum MapKind {
    /// `x -> A x (mod 1)` for an integer matrix with `|det A| = 1`.
    LinearTorus { fwd: [[i64; 2]; 2], bwd: [[i64; 2]; 2] },
    /// Chirikov family on `[0, 2*pi)^2`.
    StandardMap { k: f64 },
    /// Conservative shear `(x, y) -> (x, y + a sin(2*pi*x))` on `[0, 1)^2`.
    VerticalKick { amplitude: f64 },
    /// Composition, first stage applied first.
    Composed { stages: Vec<SystemDef> },
}

/// A torus diffeomorphism with a chosen iteration direction.
///
/// `inverse` flips the direction without rebuilding anything; forward and
/// backward evaluation, Jacobians and cocycles all honor the flag.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemDef {
    kind: MapKind,
    reversed: bool,
}

fn int_mat_to_f64(m: &[[i64; 2]; 2]) -> Mat2 {
    Mat2::new(
        m[0][0] as f64,
        m[0][1] as f64,
        m[1][0] as f64,
        m[1][1] as f64,
    )
}

fn int_mat_mul(a: &[[i64; 2]; 2], b: &[[i64; 2]; 2]) -> [[i64; 2]; 2] {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

impl SystemDef {
    pub fn linear_torus(matrix: [[i64; 2]; 2]) -> Result<Self, SystemError> {
        if matrix.iter().flatten().any(|e| e.abs() > 1_000_000) {
            return Err(SystemError::EntryTooLarge);
        }
        let det = matrix[0][0] * matrix[1][1] - matrix[0][1] * matrix[1][0];
        if det.abs() != 1 {
            return Err(SystemError::NotUnimodular { det });
        }
        // 1/det = det for det = +-1, so the integer inverse is det * adjugate.
        let bwd = [
            [det * matrix[1][1], -det * matrix[0][1]],
            [-det * matrix[1][0], det * matrix[0][0]],
        ];
        Ok(SystemDef {
            kind: MapKind::LinearTorus { fwd: matrix, bwd },
            reversed: false,
        })
    }

    /// Arnold cat map `[[2, 1], [1, 1]]`.
    pub fn cat_map() -> Self {
        SystemDef::linear_torus([[2, 1], [1, 1]]).expect("cat map matrix is unimodular")
    }

    pub fn standard_map(k: f64) -> Result<Self, SystemError> {
        if !k.is_finite() {
            return Err(SystemError::NonFiniteParameter);
        }
        Ok(SystemDef {
            kind: MapKind::StandardMap { k },
            reversed: false,
        })
    }

    pub fn vertical_kick(amplitude: f64) -> Result<Self, SystemError> {
        if !amplitude.is_finite() {
            return Err(SystemError::NonFiniteParameter);
        }
        Ok(SystemDef {
            kind: MapKind::VerticalKick { amplitude },
            reversed: false,
        })
    }

    pub fn composed(stages: Vec<SystemDef>) -> Result<Self, SystemError> {
        if stages.is_empty() {
            return Err(SystemError::EmptyComposition);
        }
        let period = stages[0].domain_period();
        for s in &stages[1..] {
            if s.domain_period() != period {
                return Err(SystemError::MixedDomains {
                    a: period,
                    b: s.domain_period(),
                });
            }
        }
        Ok(SystemDef {
            kind: MapKind::Composed { stages },
            reversed: false,
        })
    }

    /// The inverse system: same orbit structure with time reversed.
    pub fn inverse(&self) -> SystemDef {
        SystemDef {
            kind: self.kind.clone(),
            reversed: !self.reversed,
        }
    }

    pub fn is_reversed(&self) -> bool {
        self.reversed
    }

    /// Side length of the square fundamental domain.
    pub fn domain_period(&self) -> f64 {
        match &self.kind {
            MapKind::LinearTorus { .. } | MapKind::VerticalKick { .. } => 1.0,
            MapKind::StandardMap { .. } => TAU,
            MapKind::Composed { stages } => stages[0].domain_period(),
        }
    }

    pub fn dimension(&self) -> usize {
        2
    }

    /// Every supported kind preserves area (determinant `+-1` pointwise).
    pub fn is_conservative(&self) -> bool {
        true
    }

    /// Effective integer matrix if the whole system acts linearly; enables
    /// exact-lattice shortcuts. Kicks qualify only at amplitude zero.
    pub fn as_linear(&self) -> Option<[[i64; 2]; 2]> {
        fn kind_matrix(sys: &SystemDef) -> Option<[[i64; 2]; 2]> {
            match &sys.kind {
                MapKind::LinearTorus { fwd, bwd } => {
                    Some(if sys.reversed { *bwd } else { *fwd })
                }
                MapKind::VerticalKick { amplitude } if *amplitude == 0.0 => {
                    Some([[1, 0], [0, 1]])
                }
                MapKind::VerticalKick { .. } | MapKind::StandardMap { .. } => None,
                MapKind::Composed { stages } => {
                    let mut acc = [[1, 0], [0, 1]];
                    if sys.reversed {
                        for s in stages.iter().rev() {
                            acc = int_mat_mul(&kind_matrix(&s.inverse())?, &acc);
                        }
                    } else {
                        for s in stages {
                            acc = int_mat_mul(&kind_matrix(s)?, &acc);
                        }
                    }
                    Some(acc)
                }
            }
        }
        kind_matrix(self)
    }

    /// Short human-readable tag for manifests and summaries.
    pub fn describe(&self) -> String {
        let base = match &self.kind {
            MapKind::LinearTorus { fwd, .. } => format!(
                "linear-torus [[{},{}],[{},{}]]",
                fwd[0][0], fwd[0][1], fwd[1][0], fwd[1][1]
            ),
            MapKind::StandardMap { k } => format!("standard-map k={k}"),
            MapKind::VerticalKick { amplitude } => format!("vertical-kick a={amplitude}"),
            MapKind::Composed { stages } => {
                let inner: Vec<String> = stages.iter().map(|s| s.describe()).collect();
                format!("composed[{}]", inner.join("; "))
            }
        };
        if self.reversed {
            format!("{base} (reversed)")
        } else {
            base
        }
    }

    fn eval_dir(&self, x: Vec2, forward: bool) -> Vec2 {
        let fwd = forward != self.reversed;
        let period = self.domain_period();
        match &self.kind {
            MapKind::LinearTorus { fwd: m, bwd } => {
                let mat = if fwd { m } else { bwd };
                torus::wrap_point(int_mat_to_f64(mat).mul_vec(x), period)
            }
            MapKind::StandardMap { k } => {
                if fwd {
                    let kick = k * x.x.sin();
                    Vec2::new(
                        torus::wrap_coord(x.x + x.y + kick, period),
                        torus::wrap_coord(x.y + kick, period),
                    )
                } else {
                    let xm = torus::wrap_coord(x.x - x.y, period);
                    Vec2::new(xm, torus::wrap_coord(x.y - k * xm.sin(), period))
                }
            }
            MapKind::VerticalKick { amplitude } => {
                let shift = amplitude * (TAU * x.x).sin();
                let y = if fwd { x.y + shift } else { x.y - shift };
                Vec2::new(x.x, torus::wrap_coord(y, period))
            }
            MapKind::Composed { stages } => {
                if fwd {
                    stages.iter().fold(x, |p, s| s.eval_dir(p, true))
                } else {
                    stages.iter().rev().fold(x, |p, s| s.eval_dir(p, false))
                }
            }
        }
    }

    /// One application of the map (reduced into the fundamental domain).
    pub fn eval(&self, x: Vec2) -> Vec2 {
        self.eval_dir(x, true)
    }

    /// `n`-fold application; negative `n` iterates the inverse.
    pub fn eval_n(&self, x: Vec2, n: i64) -> Vec2 {
        let forward = n >= 0;
        let mut p = x;
        for _ in 0..n.unsigned_abs() {
            p = self.eval_dir(p, forward);
        }
        p
    }

    /// The first `n` orbit points `x, f(x), ..., f^{n-1}(x)`.
    pub fn orbit(&self, x: Vec2, n: usize) -> Vec<Vec2> {
        let mut pts = Vec::with_capacity(n);
        let mut p = x;
        for _ in 0..n {
            pts.push(p);
            p = self.eval(p);
        }
        pts
    }

    fn jacobian_dir(&self, x: Vec2, forward: bool) -> Mat2 {
        let fwd = forward != self.reversed;
        match &self.kind {
            MapKind::LinearTorus { fwd: m, bwd } => {
                int_mat_to_f64(if fwd { m } else { bwd })
            }
            MapKind::StandardMap { k } => {
                if fwd {
                    let c = k * x.x.cos();
                    Mat2::new(1.0 + c, 1.0, c, 1.0)
                } else {
                    let xm = torus::wrap_coord(x.x - x.y, self.domain_period());
                    let c = k * xm.cos();
                    Mat2::new(1.0, -1.0, -c, 1.0 + c)
                }
            }
            MapKind::VerticalKick { amplitude } => {
                let slope = amplitude * TAU * (TAU * x.x).cos();
                if fwd {
                    Mat2::new(1.0, 0.0, slope, 1.0)
                } else {
                    Mat2::new(1.0, 0.0, -slope, 1.0)
                }
            }
            MapKind::Composed { stages } => {
                let mut jac = Mat2::IDENTITY;
                let mut p = x;
                if fwd {
                    for s in stages {
                        jac = s.jacobian_dir(p, true).mul_mat(&jac);
                        p = s.eval_dir(p, true);
                    }
                } else {
                    for s in stages.iter().rev() {
                        jac = s.jacobian_dir(p, false).mul_mat(&jac);
                        p = s.eval_dir(p, false);
                    }
                }
                jac
            }
        }
    }

    /// Analytic derivative of the map at `x`.
    pub fn jacobian(&self, x: Vec2) -> Mat2 {
        self.jacobian_dir(x, true)
    }

    /// Derivative cocycle `D_x f^n`, the ordered Jacobian product along the
    /// orbit. Negative `n` uses the exact inverse branch. Errors once raw
    /// entries pass `1e300`; use [`SystemDef::cocycle_log_norm`] for long
    /// products.
    pub fn cocycle(&self, x: Vec2, n: i64) -> Result<Mat2, SystemError> {
        if n < 0 {
            return self.inverse().cocycle(x, -n);
        }
        let mut acc = Mat2::IDENTITY;
        let mut p = x;
        for i in 0..n {
            acc = self.jacobian(p).mul_mat(&acc);
            if acc.max_abs() > OVERFLOW_CEILING {
                return Err(SystemError::CocycleOverflow {
                    steps: (i + 1) as u32,
                });
            }
            p = self.eval(p);
        }
        Ok(acc)
    }

    /// `log ||D_x f^n||` (spectral norm), immune to overflow: the running
    /// product is scalar-rescaled once entries pass `1e100`, which leaves
    /// singular directions untouched and keeps the log exact.
    pub fn cocycle_log_norm(&self, x: Vec2, n: u32) -> f64 {
        let mut acc = Mat2::IDENTITY;
        let mut log_scale = 0.0;
        let mut p = x;
        for _ in 0..n {
            acc = self.jacobian(p).mul_mat(&acc);
            let m = acc.max_abs();
            if m > RESCALE_THRESHOLD {
                acc = acc.scale(1.0 / m);
                log_scale += m.ln();
            }
            p = self.eval(p);
        }
        log_scale + acc.spectral_norm().ln()
    }

    /// Log expansion of `n` steps of the cocycle on a tangent frame:
    /// `log |Jac(f^n, span)|`, computed stepwise with QR re-orthonormalization
    /// so only logarithms of single-step factors accumulate.
    pub fn log_jacobian_on_frame(&self, frame: &TangentFrame, n: u32) -> f64 {
        let mut p = frame.base;
        let mut u = frame.vectors[0];
        let mut v = frame.vectors.get(1).copied();
        let mut acc = 0.0;
        for _ in 0..n {
            let jac = self.jacobian(p);
            let w = jac.mul_vec(u);
            let r11 = w.norm();
            acc += r11.ln();
            u = w.scale(1.0 / r11);
            if let Some(v0) = v {
                let w2 = jac.mul_vec(v0);
                let r12 = u.dot(w2);
                let w2 = w2 - u.scale(r12);
                let r22 = w2.norm();
                acc += r22.ln();
                v = Some(w2.scale(1.0 / r22));
            }
            p = self.eval(p);
        }
        acc
    }

    /// Birkhoff sum `S_n phi(x) = sum_{i<n} phi(f^i x)`.
    pub fn birkhoff_sum(&self, pot: &Potential, x: Vec2, n: u32) -> f64 {
        let mut acc = 0.0;
        let mut p = x;
        for _ in 0..n {
            acc += pot.eval(self, p);
            p = self.eval(p);
        }
        acc
    }

    /// Orbit average `(1/n) S_n phi(x)`; `n >= 1`.
    pub fn birkhoff_average(&self, pot: &Potential, x: Vec2, n: u32) -> f64 {
        debug_assert!(n >= 1);
        self.birkhoff_sum(pot, x, n) / n as f64
    }

    /// Dynamical (Bowen) distance `max_{0 <= i < n} d(f^i x, f^i y)`; `n >= 1`.
    pub fn bowen_distance(&self, x: Vec2, y: Vec2, n: u32) -> f64 {
        debug_assert!(n >= 1);
        let period = self.domain_period();
        let mut best = 0.0f64;
        let (mut a, mut b) = (x, y);
        for _ in 0..n {
            best = best.max(torus::distance(a, b, period));
            a = self.eval(a);
            b = self.eval(b);
        }
        best
    }
}

/// Orthonormal tangent frame at a basepoint; spans a 1- or 2-dimensional
/// subspace used for Jacobian volume growth.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentFrame {
    base: Vec2,
    vectors: Vec<Vec2>,
}

impl TangentFrame {
    pub fn new(base: Vec2, vectors: Vec<Vec2>) -> Result<Self, SystemError> {
        let k = vectors.len();
        if k == 0 || k > 2 {
            return Err(SystemError::FrameDimension { k });
        }
        for v in &vectors {
            if (v.norm() - 1.0).abs() > 1e-12 {
                return Err(SystemError::FrameNotOrthonormal);
            }
        }
        if k == 2 && vectors[0].dot(vectors[1]).abs() > 1e-12 {
            return Err(SystemError::FrameNotOrthonormal);
        }
        Ok(TangentFrame { base, vectors })
    }

    /// Frame spanning the line at angle `theta` from the positive x-axis.
    pub fn line(base: Vec2, theta: f64) -> Self {
        TangentFrame {
            base,
            vectors: vec![Vec2::new(theta.cos(), theta.sin())],
        }
    }

    /// Full tangent space at the basepoint.
    pub fn plane(base: Vec2) -> Self {
        TangentFrame {
            base,
            vectors: vec![Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)],
        }
    }

    pub fn base(&self) -> Vec2 {
        self.base
    }

    pub fn k(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[Vec2] {
        &self.vectors
    }
}

/// Weight function evaluated along orbits.
#[derive(Debug, Clone, PartialEq)]
pub enum Potential {
    Constant(f64),
    /// Smooth trigonometric polynomial, see [`crate::expr`].
    Expression(Expr),
    /// Geometric potential `phi_m(x) = -(1/m) log ||D_x f^m||`; `m >= 1`.
    Geometric { m: u32 },
}

impl Potential {
    pub fn zero() -> Self {
        Potential::Constant(0.0)
    }

    pub fn eval(&self, sys: &SystemDef, x: Vec2) -> f64 {
        match self {
            Potential::Constant(c) => *c,
            Potential::Expression(e) => e.eval(x, sys.domain_period()),
            Potential::Geometric { m } => {
                assert!(*m >= 1, "geometric potential needs m >= 1");
                -sys.cocycle_log_norm(x, *m) / *m as f64
            }
        }
    }

    /// Per-step value when the potential does not depend on the basepoint:
    /// constants always, and the geometric potential on globally linear
    /// systems (the derivative is the same matrix everywhere).
    pub fn spatially_constant_value(&self, sys: &SystemDef) -> Option<f64> {
        match self {
            Potential::Constant(c) => Some(*c),
            Potential::Expression(_) => None,
            Potential::Geometric { .. } => {
                if sys.as_linear().is_some() {
                    Some(self.eval(sys, Vec2::ZERO))
                } else {
                    None
                }
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Potential::Constant(c) => format!("constant {c}"),
            Potential::Expression(e) => format!("expression {e}"),
            Potential::Geometric { m } => format!("geometric m={m}"),
        }
    }
}
