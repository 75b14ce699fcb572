//! Closed-form kernels for 2x2 real matrices.
//!
//! Derivatives of surface maps never leave dimension two, so instead of an
//! iterative factorization library this module carries the explicit
//! trace/determinant formulas: eigenvalues, singular values, inverses and
//! linear solves all in closed form. The formulas are arranged to avoid
//! cancellation (larger root first, smaller root recovered from the
//! determinant).

/// Column vector in the plane; doubles as a torus point and a tangent vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn scale(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// Signed area of the parallelogram spanned with `other`.
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Unit vector in the same direction, or `None` below the given floor.
    pub fn unit(self, floor: f64) -> Option<Vec2> {
        let n = self.norm();
        if n <= floor {
            None
        } else {
            Some(self.scale(1.0 / n))
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl std::ops::Add for Vec2 {
    type Output = Vec2;

    fn add(self, other: Vec2) -> Vec2 {
        Vec2::new(self.x + other.x, self.y + other.y)
    }
}

impl std::ops::Sub for Vec2 {
    type Output = Vec2;

    fn sub(self, other: Vec2) -> Vec2 {
        Vec2::new(self.x - other.x, self.y - other.y)
    }
}

/// Row-major 2x2 matrix `[[a, b], [c, d]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

/// Eigenvalue pair of a real 2x2 matrix.
///
/// Real pairs are ordered by modulus (then by value for equal moduli);
/// complex pairs are conjugate, stored with `im > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Eigenvalues {
    Real { small: f64, large: f64 },
    Complex { re: f64, im: f64 },
}

impl Eigenvalues {
    /// Moduli in ascending order. A complex conjugate pair has equal moduli
    /// `sqrt(det)`, which is well defined because a negative determinant
    /// forces a real spectrum.
    pub fn moduli(&self) -> (f64, f64) {
        match *self {
            Eigenvalues::Real { small, large } => (small.abs(), large.abs()),
            Eigenvalues::Complex { re, im } => {
                let m = re.hypot(im);
                (m, m)
            }
        }
    }

    /// Distances `|lambda - 1|` for both eigenvalues, ascending.
    pub fn distances_to_one(&self) -> (f64, f64) {
        match *self {
            Eigenvalues::Real { small, large } => {
                let (p, q) = ((small - 1.0).abs(), (large - 1.0).abs());
                (p.min(q), p.max(q))
            }
            Eigenvalues::Complex { re, im } => {
                let d = (re - 1.0).hypot(im);
                (d, d)
            }
        }
    }

    pub fn is_complex(&self) -> bool {
        matches!(self, Eigenvalues::Complex { .. })
    }

    /// Argument of the eigenvalue in the upper half plane, if complex.
    pub fn argument(&self) -> Option<f64> {
        match *self {
            Eigenvalues::Complex { re, im } => Some(im.atan2(re)),
            Eigenvalues::Real { .. } => None,
        }
    }
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2 {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
    };

    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2 { a, b, c, d }
    }

    pub fn from_rows(r0: [f64; 2], r1: [f64; 2]) -> Self {
        Mat2::new(r0[0], r0[1], r1[0], r1[1])
    }

    pub fn col0(&self) -> Vec2 {
        Vec2::new(self.a, self.c)
    }

    pub fn col1(&self) -> Vec2 {
        Vec2::new(self.b, self.d)
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    pub fn transpose(&self) -> Mat2 {
        Mat2::new(self.a, self.c, self.b, self.d)
    }

    pub fn scale(&self, s: f64) -> Mat2 {
        Mat2::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    /// Largest entry magnitude; cheap overflow sentinel for long products.
    pub fn max_abs(&self) -> f64 {
        self.a
            .abs()
            .max(self.b.abs())
            .max(self.c.abs())
            .max(self.d.abs())
    }

    pub fn mul_vec(&self, v: Vec2) -> Vec2 {
        Vec2::new(self.a * v.x + self.b * v.y, self.c * v.x + self.d * v.y)
    }

    pub fn mul_mat(&self, rhs: &Mat2) -> Mat2 {
        Mat2::new(
            self.a * rhs.a + self.b * rhs.c,
            self.a * rhs.b + self.b * rhs.d,
            self.c * rhs.a + self.d * rhs.c,
            self.c * rhs.b + self.d * rhs.d,
        )
    }

    /// Exact adjugate-over-determinant inverse; `None` when the determinant
    /// underflows to subnormal territory.
    pub fn inverse(&self) -> Option<Mat2> {
        let det = self.det();
        if det.abs() < 1e-300 {
            return None;
        }
        let inv = 1.0 / det;
        Some(Mat2::new(
            self.d * inv,
            -self.b * inv,
            -self.c * inv,
            self.a * inv,
        ))
    }

    /// Solve `self * x = rhs` by Cramer's rule; `None` for a determinant
    /// smaller than `det_floor` in magnitude.
    pub fn solve(&self, rhs: Vec2, det_floor: f64) -> Option<Vec2> {
        let det = self.det();
        if det.abs() < det_floor {
            return None;
        }
        Some(Vec2::new(
            (rhs.x * self.d - self.b * rhs.y) / det,
            (self.a * rhs.y - rhs.x * self.c) / det,
        ))
    }

    /// Singular values `(sigma1, sigma2)` with `sigma1 >= sigma2 >= 0`.
    ///
    /// `sigma1` comes from the larger eigenvalue of `M^T M`; the smaller one
    /// is recovered as `|det|/sigma1` to dodge the cancellation in the
    /// direct formula.
    pub fn singular_values(&self) -> (f64, f64) {
        let t = self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d;
        let e = self.det().abs();
        let disc = (t * t - 4.0 * e * e).max(0.0).sqrt();
        let s1 = ((t + disc) * 0.5).sqrt();
        let s2 = if s1 > 0.0 { e / s1 } else { 0.0 };
        (s1, s2)
    }

    /// Operator norm with respect to the Euclidean metric.
    pub fn spectral_norm(&self) -> f64 {
        self.singular_values().0
    }

    /// Eigenvalues via the stable quadratic formula: the root of larger
    /// magnitude is computed directly, the other as `det / larger`.
    pub fn eigenvalues(&self) -> Eigenvalues {
        let tr = self.trace();
        let det = self.det();
        let disc = tr * tr - 4.0 * det;
        if disc < 0.0 {
            return Eigenvalues::Complex {
                re: 0.5 * tr,
                im: 0.5 * (-disc).sqrt(),
            };
        }
        let sq = disc.sqrt();
        let big = if tr >= 0.0 {
            0.5 * (tr + sq)
        } else {
            0.5 * (tr - sq)
        };
        let (r1, r2) = if big == 0.0 {
            // trace = 0 with det <= 0: symmetric roots, no cancellation.
            (-0.5 * sq, 0.5 * sq)
        } else {
            (det / big, big)
        };
        let (small, large) = if r1.abs() < r2.abs()
            || (r1.abs() == r2.abs() && r1 <= r2)
        {
            (r1, r2)
        } else {
            (r2, r1)
        };
        Eigenvalues::Real { small, large }
    }

    /// Unit eigenvector for a real eigenvalue, built from whichever row of
    /// `M - lambda I` is better conditioned. `None` when the matrix is a
    /// multiple of the identity (every direction is an eigenvector).
    pub fn real_eigenvector(&self, lambda: f64) -> Option<Vec2> {
        let cand1 = Vec2::new(self.b, lambda - self.a);
        let cand2 = Vec2::new(lambda - self.d, self.c);
        let scale = self.max_abs().max(lambda.abs()).max(1.0);
        let pick = if cand1.norm_sq() >= cand2.norm_sq() {
            cand1
        } else {
            cand2
        };
        pick.unit(1e-14 * scale)
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.c.is_finite() && self.d.is_finite()
    }
}
