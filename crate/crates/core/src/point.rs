use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;

/// A point of the Riemann sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Point {
    Finite(Complex64),
    Infinity,
}

impl Point {
    pub fn finite(re: f64, im: f64) -> Self {
        Point::Finite(Complex64::new(re, im))
    }

    pub fn as_finite(&self) -> Option<Complex64> {
        match self {
            Point::Finite(z) => Some(*z),
            Point::Infinity => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Point::Infinity)
    }

    /// Chordal distance on the unit sphere (diameter 2).
    pub fn chordal_distance(&self, other: &Point) -> f64 {
        match (self, other) {
            (Point::Infinity, Point::Infinity) => 0.0,
            (Point::Finite(a), Point::Infinity) | (Point::Infinity, Point::Finite(a)) => {
                2.0 / (1.0 + a.norm_sqr()).sqrt()
            }
            (Point::Finite(a), Point::Finite(b)) => {
                2.0 * (a - b).norm() / ((1.0 + a.norm_sqr()) * (1.0 + b.norm_sqr())).sqrt()
            }
        }
    }

    pub fn approx_eq(&self, other: &Point, tol: f64) -> bool {
        self.chordal_distance(other) <= tol
    }
}

impl From<Complex64> for Point {
    fn from(z: Complex64) -> Self {
        Point::Finite(z)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Infinity => write!(f, "inf"),
            Point::Finite(z) if z.im == 0.0 => write!(f, "{}", z.re),
            Point::Finite(z) => write!(f, "{}{:+}i", z.re, z.im),
        }
    }
}
