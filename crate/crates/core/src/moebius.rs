//! 2x2 complex matrices and their action on the Riemann sphere.

use crate::error::{Error, Result};
use crate::point::Point;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::ops::Mul;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2 {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
}

/// A projective class of an invertible [`Mat2`].
pub type MoebiusMap = Mat2;

impl Mat2 {
    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Mat2 {
        Mat2 { a, b, c, d }
    }

    pub fn identity() -> Mat2 {
        let (o, l) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
        Mat2::new(l, o, o, l)
    }

    pub fn det(&self) -> C64 {
        self.a * self.d - self.b * self.c
    }

    pub fn scale(&self, s: C64) -> Mat2 {
        Mat2::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    pub fn add(&self, o: &Mat2) -> Mat2 {
        Mat2::new(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)
    }

    pub fn sub(&self, o: &Mat2) -> Mat2 {
        Mat2::new(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Mat2 {
        Mat2::new(self.a.conj(), self.c.conj(), self.b.conj(), self.d.conj())
    }

    pub fn inverse_tol(&self, tol: f64) -> Result<Mat2> {
        let det = self.det();
        if det.norm() < tol {
            return Err(Error::SingularMatrix(det.norm()));
        }
        Ok(Mat2::new(self.d / det, -self.b / det, -self.c / det, self.a / det))
    }

    pub fn inverse(&self) -> Result<Mat2> {
        self.inverse_tol(1e-300)
    }

    /// Representative with unit determinant (one of the two square roots).
    pub fn normalized(&self) -> Mat2 {
        self.scale(1.0 / self.det().sqrt())
    }

    pub fn max_abs(&self) -> f64 {
        [self.a, self.b, self.c, self.d]
            .iter()
            .map(|x| x.norm())
            .fold(0.0, f64::max)
    }

    /// `M^H M = I` after normalizing to unit determinant.
    pub fn is_su2(&self, tol: f64) -> bool {
        if self.det().norm() == 0.0 {
            return false;
        }
        let m = self.normalized();
        m.adjoint().mul(m).sub(&Mat2::identity()).max_abs() < tol
    }

    /// Equality as Moebius maps: proportional matrices.
    pub fn projectively_eq(&self, o: &Mat2, tol: f64) -> bool {
        let (x, y) = (self.normalized(), o.normalized());
        x.sub(&y).max_abs() < tol * x.max_abs().max(1.0)
            || x.add(&y).max_abs() < tol * x.max_abs().max(1.0)
    }

    pub fn is_identity_map(&self, tol: f64) -> bool {
        self.projectively_eq(&Mat2::identity(), tol)
    }

    pub fn apply(&self, w: Point) -> Point {
        let zero = C64::new(0.0, 0.0);
        match w {
            Point::Infinity => {
                if self.c == zero {
                    Point::Infinity
                } else {
                    Point::Finite(self.a / self.c)
                }
            }
            Point::Finite(w) => {
                let den = self.c * w + self.d;
                if den == zero {
                    Point::Infinity
                } else {
                    Point::Finite((self.a * w + self.b) / den)
                }
            }
        }
    }

    /// Applies to a finite point known to map to a finite point.
    pub fn apply_c(&self, w: C64) -> C64 {
        (self.a * w + self.b) / (self.c * w + self.d)
    }

    /// `d/dw` of the map at `w`.
    pub fn derivative_at(&self, w: C64) -> C64 {
        let den = self.c * w + self.d;
        self.det() / (den * den)
    }

    /// Map sending `(z1, z2, z3)` to `(0, 1, inf)`.
    fn to_standard(z: [Point; 3]) -> Mat2 {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        match z {
            [Point::Infinity, Point::Finite(z2), Point::Finite(z3)] => {
                Mat2::new(zero, z2 - z3, one, -z3)
            }
            [Point::Finite(z1), Point::Infinity, Point::Finite(z3)] => {
                Mat2::new(one, -z1, one, -z3)
            }
            [Point::Finite(z1), Point::Finite(z2), Point::Infinity] => {
                Mat2::new(one, -z1, zero, z2 - z1)
            }
            [Point::Finite(z1), Point::Finite(z2), Point::Finite(z3)] => Mat2::new(
                z2 - z3,
                -z1 * (z2 - z3),
                z2 - z1,
                -z3 * (z2 - z1),
            ),
            _ => panic!("points must be distinct"),
        }
    }

    /// Unique map with `M(z_i) = w_i` for three distinct points in each triple.
    pub fn from_three_points(z: [Point; 3], w: [Point; 3]) -> Result<Mat2> {
        let s = Mat2::to_standard(z);
        let t = Mat2::to_standard(w);
        let m = t.inverse()? * s;
        if m.det().norm() == 0.0 {
            return Err(Error::SingularMatrix(0.0));
        }
        Ok(m.normalized())
    }

    /// Rotation of the sphere (an element of SU(2)) sending `p` to infinity.
    pub fn rotation_to_infinity(p: Point) -> Mat2 {
        match p {
            Point::Infinity => Mat2::identity(),
            Point::Finite(p) => {
                let one = C64::new(1.0, 0.0);
                Mat2::new(p.conj(), one, -one, p).normalized()
            }
        }
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn basics() {
        assert!(Mat2::identity().is_su2(1e-10));
        let d = Mat2::new(c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.5, 0.0));
        assert!(!d.is_su2(1e-10));
        let j = Mat2::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0));
        assert_eq!(j.apply(Point::finite(0.0, 0.0)), Point::Infinity);
        assert_eq!(j.apply(Point::Infinity), Point::finite(0.0, 0.0));
        let sing = Mat2::new(c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(4.0, 0.0));
        assert!(matches!(sing.inverse_tol(1e-12), Err(Error::SingularMatrix(_))));
    }

    #[test]
    fn three_point_fit() {
        let m = Mat2::new(c(1.0, 2.0), c(-0.5, 0.1), c(0.3, 0.0), c(2.0, -1.0));
        let z = [Point::finite(0.1, 0.0), Point::finite(-1.0, 2.0), Point::Infinity];
        let w = z.map(|p| m.apply(p));
        let fit = Mat2::from_three_points(z, w).unwrap();
        assert!(fit.projectively_eq(&m, 1e-12));
    }

    #[test]
    fn rotation_sends_point_to_infinity() {
        let p = c(0.3, -1.2);
        let r = Mat2::rotation_to_infinity(Point::Finite(p));
        assert_eq!(r.apply(Point::Finite(p)), Point::Infinity);
        assert!(r.is_su2(1e-12));
    }
}
