//! Inversive geometry on the Riemann sphere and in hyperbolic 3-space.
//!
//! The objects here are the shared vocabulary of the whole crate: points on
//! the sphere, generalized circles in Hermitian-coefficient form, Moebius
//! maps as det-normalized 2x2 complex matrices, and the upper half-space
//! model of hyperbolic 3-space together with distances and Busemann values.
//!
//! Conventions:
//! * A generalized circle with coefficients `(a, b, c)` is the locus
//!   `a|z|^2 + b z + conj(b z) + c = 0` with `a, c` real. Canonical
//!   normalization is `|b|^2 - ac = 1`, with `a > 0` for true circles and
//!   `|b| = 1` for lines. Center is `-conj(b)/a`, radius `1/a`.
//! * The Busemann value is `beta_xi(x, y) = lim d(xi_s, x) - d(xi_s, y)`
//!   along a geodesic ray toward `xi`; toward infinity this reduces to
//!   `log t_y - log t_x`.

use num_complex::Complex64;
use thiserror::Error;

/// Tolerance for algebraic identities that hold up to rounding only.
pub const TOL_ALGEBRAIC: f64 = 1e-12;
/// Tolerance for identities checked through transported or sampled data.
pub const TOL_TRANSPORTED: f64 = 1e-9;
/// Tolerance for limit-based quantities (finite-difference, truncation).
pub const TOL_LIMIT: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum MoebiusError {
    #[error("matrix is not invertible (|det| = {0:.3e})")]
    NonInvertible(f64),
    #[error("cross-ratio requires four pairwise distinct points")]
    DegenerateQuadruple,
    #[error("coefficients do not describe a non-degenerate circle or line")]
    DegenerateCircle,
}

/// A point of the Riemann sphere: a finite complex number or infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpherePoint {
    Finite(Complex64),
    Infinity,
}

impl SpherePoint {
    pub fn finite(re: f64, im: f64) -> Self {
        assert!(
            re.is_finite() && im.is_finite(),
            "finite point with non-finite coordinates"
        );
        SpherePoint::Finite(Complex64::new(re, im))
    }

    pub fn from_complex(z: Complex64) -> Self {
        if z.re.is_finite() && z.im.is_finite() {
            SpherePoint::Finite(z)
        } else {
            SpherePoint::Infinity
        }
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, SpherePoint::Infinity)
    }

    /// Finite value, or None at infinity.
    pub fn as_complex(&self) -> Option<Complex64> {
        match self {
            SpherePoint::Finite(z) => Some(*z),
            SpherePoint::Infinity => None,
        }
    }

    /// Chordal distance on the sphere (bounded metric, 2 between antipodes).
    pub fn chordal_distance(&self, other: &SpherePoint) -> f64 {
        match (self, other) {
            (SpherePoint::Finite(z), SpherePoint::Finite(w)) => {
                2.0 * (z - w).norm() / ((1.0 + z.norm_sqr()) * (1.0 + w.norm_sqr())).sqrt()
            }
            (SpherePoint::Finite(z), SpherePoint::Infinity)
            | (SpherePoint::Infinity, SpherePoint::Finite(z)) => 2.0 / (1.0 + z.norm_sqr()).sqrt(),
            (SpherePoint::Infinity, SpherePoint::Infinity) => 0.0,
        }
    }
}

/// A Moebius transformation `z -> (az + b)/(cz + d)`, stored det-normalized
/// (`ad - bc = 1`). Maps differing by a global sign act identically.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoebiusMap {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl MoebiusMap {
    /// Builds a map from matrix entries and normalizes the determinant to 1.
    pub fn new(
        a: Complex64,
        b: Complex64,
        c: Complex64,
        d: Complex64,
    ) -> Result<Self, MoebiusError> {
        let det = a * d - b * c;
        if det.norm() < 1e-300 {
            return Err(MoebiusError::NonInvertible(det.norm()));
        }
        let s = det.sqrt();
        Ok(MoebiusMap {
            a: a / s,
            b: b / s,
            c: c / s,
            d: d / s,
        })
    }

    pub fn from_reals(a: f64, b: f64, c: f64, d: f64) -> Result<Self, MoebiusError> {
        Self::new(
            Complex64::new(a, 0.0),
            Complex64::new(b, 0.0),
            Complex64::new(c, 0.0),
            Complex64::new(d, 0.0),
        )
    }

    pub fn identity() -> Self {
        MoebiusMap {
            a: Complex64::new(1.0, 0.0),
            b: Complex64::new(0.0, 0.0),
            c: Complex64::new(0.0, 0.0),
            d: Complex64::new(1.0, 0.0),
        }
    }

    /// `z -> z + t`.
    pub fn translation(t: Complex64) -> Self {
        MoebiusMap {
            a: Complex64::new(1.0, 0.0),
            b: t,
            c: Complex64::new(0.0, 0.0),
            d: Complex64::new(1.0, 0.0),
        }
    }

    /// `z -> k z` for `k != 0`.
    pub fn scaling(k: Complex64) -> Result<Self, MoebiusError> {
        Self::new(
            k,
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
        )
    }

    /// Disk-swap map sending the exterior of the disk `(c1, r1)` onto the
    /// interior of the disk `(c2, r2)`: `z -> c2 + r1 r2 / (c1 - z)`.
    ///
    /// This is the standard pairing generator for Schottky data; it is
    /// loxodromic exactly when the two disks are disjoint.
    pub fn pairing(c1: Complex64, r1: f64, c2: Complex64, r2: f64) -> Result<Self, MoebiusError> {
        assert!(r1 > 0.0 && r2 > 0.0);
        Self::new(-c2, c1 * c2 + r1 * r2, -Complex64::new(1.0, 0.0), c1)
    }

    pub fn det(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> Complex64 {
        self.a + self.d
    }

    pub fn inverse(&self) -> Self {
        // For det = 1 the inverse is (d, -b; -c, a).
        MoebiusMap {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    pub fn compose(&self, rhs: &MoebiusMap) -> Self {
        MoebiusMap {
            a: self.a * rhs.a + self.b * rhs.c,
            b: self.a * rhs.b + self.b * rhs.d,
            c: self.c * rhs.a + self.d * rhs.c,
            d: self.c * rhs.b + self.d * rhs.d,
        }
    }

    /// Projective equality: equal entrywise up to a global sign flip.
    pub fn projectively_eq(&self, other: &MoebiusMap, tol: f64) -> bool {
        let diff = |s: &MoebiusMap, o: &MoebiusMap, flip: f64| -> f64 {
            (s.a - o.a * flip).norm()
                + (s.b - o.b * flip).norm()
                + (s.c - o.c * flip).norm()
                + (s.d - o.d * flip).norm()
        };
        diff(self, other, 1.0) < tol || diff(self, other, -1.0) < tol
    }

    /// Applies the map to a sphere point, with the usual pole conventions:
    /// `-d/c -> infinity` and `infinity -> a/c` (or infinity when `c = 0`).
    pub fn apply(&self, z: SpherePoint) -> SpherePoint {
        match z {
            SpherePoint::Infinity => {
                if self.c.norm() == 0.0 {
                    SpherePoint::Infinity
                } else {
                    SpherePoint::from_complex(self.a / self.c)
                }
            }
            SpherePoint::Finite(z) => {
                let denom = self.c * z + self.d;
                if denom.norm() == 0.0 {
                    SpherePoint::Infinity
                } else {
                    SpherePoint::from_complex((self.a * z + self.b) / denom)
                }
            }
        }
    }

    /// Transports a generalized circle: the result's locus is the image of
    /// the input's locus under this map.
    pub fn apply_circle(&self, circle: &GeneralizedCircle) -> GeneralizedCircle {
        // Hermitian transport by the inverse on both sides: with v = (z, 1)
        // and H = [[a, b], [conj(b), c]], the locus is v H conj(v)^T = 0, so
        // the image circle has H' = (M^-1)^T H conj(M^-1).
        let inv = self.inverse();
        let (p, q, r, s) = (inv.a, inv.b, inv.c, inv.d);
        let ca = Complex64::new(circle.a, 0.0);
        let cb = circle.b;
        let cbc = circle.b.conj();
        let cc = Complex64::new(circle.c, 0.0);
        // H' = N^T H conj(N) with N = M^-1.
        let h11 = p * (ca * p.conj() + cb * r.conj()) + r * (cbc * p.conj() + cc * r.conj());
        let h12 = p * (ca * q.conj() + cb * s.conj()) + r * (cbc * q.conj() + cc * s.conj());
        let h22 = q * (ca * q.conj() + cb * s.conj()) + s * (cbc * q.conj() + cc * s.conj());
        GeneralizedCircle::normalize(h11.re, h12, h22.re)
            .expect("Moebius transport preserves non-degeneracy")
    }

    /// Isometric extension to the upper half-space.
    ///
    /// With `w = cz + d` and `denom = |w|^2 + |c|^2 t^2`, the image is
    /// `z' = ((az + b) conj(w) + a conj(c) t^2) / denom`, `t' = t / denom`.
    pub fn apply_h3(&self, p: &H3Point) -> H3Point {
        let w = self.c * p.z + self.d;
        let denom = w.norm_sqr() + self.c.norm_sqr() * p.t * p.t;
        let z = ((self.a * p.z + self.b) * w.conj() + self.a * self.c.conj() * p.t * p.t) / denom;
        H3Point::new(z, p.t / denom)
    }
}

/// A circle or line on the sphere in Hermitian-coefficient form; see the
/// module docs for the locus convention.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralizedCircle {
    pub a: f64,
    pub b: Complex64,
    pub c: f64,
}

impl GeneralizedCircle {
    /// Canonically normalizes raw coefficients: discriminant 1, `a > 0` for
    /// circles, `|b| = 1` with a fixed sign convention for lines.
    pub fn normalize(a: f64, b: Complex64, c: f64) -> Result<Self, MoebiusError> {
        let disc = b.norm_sqr() - a * c;
        if !(disc > 0.0) || !disc.is_finite() {
            return Err(MoebiusError::DegenerateCircle);
        }
        let s = disc.sqrt();
        let (mut a, mut b, mut c) = (a / s, b / s, c / s);
        if a != 0.0 {
            if a < 0.0 {
                a = -a;
                b = -b;
                c = -c;
            }
        } else if b.re < 0.0 || (b.re == 0.0 && b.im < 0.0) {
            b = -b;
            c = -c;
        }
        Ok(GeneralizedCircle { a, b, c })
    }

    pub fn from_center_radius(center: Complex64, radius: f64) -> Self {
        assert!(radius > 0.0 && radius.is_finite());
        let a = 1.0 / radius;
        let b = -a * center.conj();
        let c = a * center.norm_sqr() - radius;
        GeneralizedCircle { a, b, c }
    }

    pub fn unit_circle() -> Self {
        Self::from_center_radius(Complex64::new(0.0, 0.0), 1.0)
    }

    /// The line through `point` with unit normal `normal`.
    pub fn line(point: Complex64, normal: Complex64) -> Result<Self, MoebiusError> {
        let n = normal / Complex64::new(normal.norm(), 0.0);
        // Locus 2 Re(b z) + c = 0 with b = conj(n): gradient is the normal.
        let b = n.conj();
        let c = -2.0 * (b * point).re;
        Self::normalize(0.0, b, c)
    }

    pub fn real_axis() -> Self {
        Self::line(Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0)).unwrap()
    }

    pub fn is_line(&self) -> bool {
        self.a == 0.0
    }

    /// Center for a true circle; None for lines.
    pub fn center(&self) -> Option<Complex64> {
        if self.is_line() {
            None
        } else {
            Some(-self.b.conj() / self.a)
        }
    }

    /// Radius for a true circle; None for lines.
    pub fn radius(&self) -> Option<f64> {
        if self.is_line() {
            None
        } else {
            Some(1.0 / self.a)
        }
    }

    /// Signed locus value; zero (up to rounding) exactly on the circle.
    pub fn eval(&self, z: SpherePoint) -> f64 {
        match z {
            SpherePoint::Finite(z) => self.a * z.norm_sqr() + 2.0 * (self.b * z).re + self.c,
            // Infinity lies on every line and on no circle; report the
            // leading coefficient so lines evaluate to zero there.
            SpherePoint::Infinity => self.a,
        }
    }

    /// Inversion (reflection) in this circle: the conjugate-Moebius
    /// involution fixing the locus pointwise, `z -> (-conj(b) conj(z) - c)
    /// / (a conj(z) + b)`.
    pub fn invert(&self, z: SpherePoint) -> SpherePoint {
        match z {
            SpherePoint::Infinity => {
                if self.is_line() {
                    SpherePoint::Infinity
                } else {
                    SpherePoint::from_complex(-self.b.conj() / self.a)
                }
            }
            SpherePoint::Finite(z) => {
                let zc = z.conj();
                let denom = self.a * zc + self.b;
                if denom.norm() == 0.0 {
                    SpherePoint::Infinity
                } else {
                    SpherePoint::from_complex((-self.b.conj() * zc - self.c) / denom)
                }
            }
        }
    }
}

/// A point of the upper half-space model of hyperbolic 3-space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct H3Point {
    /// Horizontal (boundary-plane) coordinate.
    pub z: Complex64,
    /// Height above the boundary plane; always positive.
    pub t: f64,
}

impl H3Point {
    pub fn new(z: Complex64, t: f64) -> Self {
        assert!(t > 0.0 && t.is_finite(), "height must be positive");
        H3Point { z, t }
    }

    /// The standard basepoint (0, 1).
    pub fn base() -> Self {
        H3Point::new(Complex64::new(0.0, 0.0), 1.0)
    }
}

/// Hyperbolic distance in the upper half-space model.
pub fn h3_distance(p: &H3Point, q: &H3Point) -> f64 {
    let horizontal = (p.z - q.z).norm_sqr();
    let vertical = (p.t - q.t) * (p.t - q.t);
    let arg = 1.0 + (horizontal + vertical) / (2.0 * p.t * q.t);
    arg.acosh()
}

/// Busemann value at infinity: `log t_q - log t_p`.
pub fn busemann_at_infinity(p: &H3Point, q: &H3Point) -> f64 {
    q.t.ln() - p.t.ln()
}

/// Busemann value at an arbitrary boundary point, computed by transporting
/// `xi` to infinity with a Moebius map and using the cocycle invariance
/// `beta_{m xi}(m x, m y) = beta_xi(x, y)`.
pub fn busemann(xi: SpherePoint, p: &H3Point, q: &H3Point) -> f64 {
    match xi {
        SpherePoint::Infinity => busemann_at_infinity(p, q),
        SpherePoint::Finite(s) => {
            // z -> -1/(z - s) sends s to infinity and has determinant 1.
            let m = MoebiusMap {
                a: Complex64::new(0.0, 0.0),
                b: Complex64::new(-1.0, 0.0),
                c: Complex64::new(1.0, 0.0),
                d: -s,
            };
            busemann_at_infinity(&m.apply_h3(p), &m.apply_h3(q))
        }
    }
}

/// Cross-ratio `((z1 - z3)(z2 - z4)) / ((z1 - z4)(z2 - z3))`, with the
/// factors containing a point at infinity cancelled in the limit. Real
/// output (up to rounding) characterizes concyclic quadruples.
pub fn cross_ratio(
    z1: SpherePoint,
    z2: SpherePoint,
    z3: SpherePoint,
    z4: SpherePoint,
) -> Result<Complex64, MoebiusError> {
    let pts = [z1, z2, z3, z4];
    for i in 0..4 {
        for j in (i + 1)..4 {
            if pts[i] == pts[j] {
                return Err(MoebiusError::DegenerateQuadruple);
            }
        }
    }
    let value = match (z1, z2, z3, z4) {
        (
            SpherePoint::Infinity,
            SpherePoint::Finite(b),
            SpherePoint::Finite(c),
            SpherePoint::Finite(d),
        ) => (b - d) / (b - c),
        (
            SpherePoint::Finite(a),
            SpherePoint::Infinity,
            SpherePoint::Finite(c),
            SpherePoint::Finite(d),
        ) => (a - c) / (a - d),
        (
            SpherePoint::Finite(a),
            SpherePoint::Finite(b),
            SpherePoint::Infinity,
            SpherePoint::Finite(d),
        ) => (b - d) / (a - d),
        (
            SpherePoint::Finite(a),
            SpherePoint::Finite(b),
            SpherePoint::Finite(c),
            SpherePoint::Infinity,
        ) => (a - c) / (b - c),
        (
            SpherePoint::Finite(a),
            SpherePoint::Finite(b),
            SpherePoint::Finite(c),
            SpherePoint::Finite(d),
        ) => ((a - c) * (b - d)) / ((a - d) * (b - c)),
        _ => unreachable!("at most one point can be infinity after the distinctness check"),
    };
    Ok(value)
}
