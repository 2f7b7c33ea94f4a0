//! Surface descriptions: topology, holomorphic data, local geometry in charts.

mod divisor;
mod monodromy;

pub use divisor::{
    branch_divisor, end_order, fundamental_divisor, h1, h1_exact_genus0, index_bound,
    l2star_membership, Bound, Divisor,
};
pub use monodromy::{loop_for_puncture, monodromy_report, MonodromyReport};
pub(crate) use monodromy::phi;
pub use monodromy::singular_points;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::moebius::Mat2;
use crate::point::Point;
use crate::schwarzian::{schwarzian, QuadDifferential};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq)]
pub enum Topology {
    /// Riemann sphere minus finitely many points.
    Sphere { punctures: Vec<Point> },
    /// `C / (omega1 Z + omega2 Z)`.
    Torus { omega1: C64, omega2: C64 },
}

/// A developing map known through its Schwarzian: `f` solves
/// `S{f, g} = -sigma` and is continued numerically from `base`.
#[derive(Debug, Clone, PartialEq)]
pub struct Development {
    /// Coefficient of `sigma` (dz^2).
    pub sigma: Expr,
    pub base: C64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BryantF {
    Expr(Expr),
    Developed(Development),
}

#[derive(Debug, Clone, PartialEq)]
pub enum SurfaceData {
    /// Gauss map `g` and `eta` (coefficient of dz).
    Weierstrass { g: Expr, eta: Expr },
    Bryant { f: BryantF, g: Expr },
    /// Conformal factor `e^{2 lambda}` (real part is used) and `sigma`.
    Intrinsic { conformal_factor: Expr, sigma: Expr },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sidedness {
    TwoSided,
    OneSided,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceSpec {
    pub name: String,
    pub topology: Topology,
    pub data: SurfaceData,
    /// Associated-family angle: `sigma -> e^{i phase} sigma`.
    pub phase: f64,
    pub sidedness: Sidedness,
}

impl SurfaceSpec {
    pub fn sphere(name: &str, punctures: Vec<Point>, data: SurfaceData) -> SurfaceSpec {
        SurfaceSpec {
            name: name.to_string(),
            topology: Topology::Sphere { punctures },
            data,
            phase: 0.0,
            sidedness: Sidedness::TwoSided,
        }
    }

    pub fn genus(&self) -> u32 {
        match self.topology {
            Topology::Sphere { .. } => 0,
            Topology::Torus { .. } => 1,
        }
    }

    pub fn punctures(&self) -> &[Point] {
        match &self.topology {
            Topology::Sphere { punctures } => punctures,
            Topology::Torus { .. } => &[],
        }
    }

    fn exprs(&self) -> Vec<&Expr> {
        match &self.data {
            SurfaceData::Weierstrass { g, eta } => vec![g, eta],
            SurfaceData::Bryant { f, g } => match f {
                BryantF::Expr(f) => vec![f, g],
                BryantF::Developed(d) => vec![&d.sigma, g],
            },
            SurfaceData::Intrinsic {
                conformal_factor,
                sigma,
            } => vec![conformal_factor, sigma],
        }
    }

    /// Checks distinct punctures and bound parameters.
    pub fn validate(&self) -> Result<()> {
        let p = self.punctures();
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                if p[i].approx_eq(&p[j], 1e-12) {
                    return Err(Error::Scene(format!("puncture {} listed twice", p[i])));
                }
            }
        }
        for e in self.exprs() {
            if let Some(name) = e.params().into_iter().next() {
                return Err(Error::UnboundParameter(name));
            }
        }
        if let Topology::Torus { omega1, omega2 } = self.topology {
            if (omega1.conj() * omega2).im.abs() < 1e-12 {
                return Err(Error::Scene("torus lattice generators are collinear".into()));
            }
        }
        Ok(())
    }

    /// Gauss map, when the data provide one.
    pub fn gauss_map(&self) -> Option<&Expr> {
        match &self.data {
            SurfaceData::Weierstrass { g, .. } | SurfaceData::Bryant { g, .. } => Some(g),
            SurfaceData::Intrinsic { .. } => None,
        }
    }

    /// `(g, eta)`; for Bryant data `eta = -S{f,g} / g'` (or `sigma / g'`).
    pub fn weierstrass_pair(&self) -> Result<(Expr, Expr)> {
        match &self.data {
            SurfaceData::Weierstrass { g, eta } => Ok((g.clone(), eta.clone())),
            SurfaceData::Bryant { f, g } => {
                if !g.depends_on_z() {
                    return Err(Error::DegenerateData("constant Gauss map".into()));
                }
                let sigma = match f {
                    BryantF::Expr(f) => Expr::neg(schwarzian(f, g)?.coeff),
                    BryantF::Developed(d) => d.sigma.clone(),
                };
                Ok((g.clone(), Expr::div(sigma, g.derivative())))
            }
            SurfaceData::Intrinsic { .. } => Err(Error::Unsupported(
                "intrinsic data carry no Weierstrass pair".into(),
            )),
        }
    }

    /// `sigma` including the associated-family phase.
    pub fn sigma(&self) -> Result<QuadDifferential> {
        let base = match &self.data {
            SurfaceData::Intrinsic { sigma, .. } => sigma.clone(),
            SurfaceData::Bryant {
                f: BryantF::Developed(d),
                ..
            } => d.sigma.clone(),
            _ => {
                let (g, eta) = self.weierstrass_pair()?;
                Expr::mul(eta, g.derivative())
            }
        };
        Ok(QuadDifferential::new(Expr::mul(
            Expr::constant(C64::from_polar(1.0, self.phase)),
            base,
        )))
    }

    /// Associated family member: `sigma -> e^{i theta} sigma`. The metric and
    /// curvature evaluation paths do not read the phase.
    pub fn associated_family(&self, theta: f64) -> SurfaceSpec {
        let mut s = self.clone();
        s.phase += theta;
        s.name = format!("{}@{theta}", self.name);
        s
    }

    pub fn evaluator(&self) -> Result<Evaluator> {
        Evaluator::new(self)
    }
}

/// Coordinate in which a point is given: the global `z` or `w = 1/z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChartPos {
    Z(C64),
    W(C64),
}

impl ChartPos {
    pub fn from_point(p: Point) -> ChartPos {
        match p {
            Point::Infinity => ChartPos::W(C64::new(0.0, 0.0)),
            Point::Finite(z) if z.norm() > 4.0 => ChartPos::W(1.0 / z),
            Point::Finite(z) => ChartPos::Z(z),
        }
    }

    pub fn point(&self) -> Point {
        match *self {
            ChartPos::Z(z) => Point::Finite(z),
            ChartPos::W(w) if w == C64::new(0.0, 0.0) => Point::Infinity,
            ChartPos::W(w) => Point::Finite(1.0 / w),
        }
    }

    /// Expresses a point given by a local coordinate `xi` through a Moebius
    /// chart `z = m(xi)`, returning the position and `d(chart)/d(xi)`.
    pub fn through_moebius(m: &Mat2, xi: C64) -> (ChartPos, C64) {
        let num = m.a * xi + m.b;
        let den = m.c * xi + m.d;
        if den.norm() >= 0.25 * num.norm() {
            (ChartPos::Z(num / den), m.det() / (den * den))
        } else {
            (ChartPos::W(den / num), -m.det() / (num * num))
        }
    }
}

/// Intrinsic quantities in a local coordinate `xi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalGeometry {
    pub e2l: f64,
    pub curvature: f64,
    /// `2 K e^{2 lambda}` (the Jacobi potential density).
    pub potential: f64,
    /// `sigma` coefficient of `d xi^2`.
    pub sigma: C64,
}

#[derive(Debug, Clone)]
enum EvalKind {
    Gauss {
        g: [Expr; 2],
        dg: [Expr; 2],
        eta: [Expr; 2],
    },
    Intrinsic {
        e2l: [Expr; 2],
        sigma: [Expr; 2],
    },
}

/// Precompiled chart expressions for pointwise evaluation.
#[derive(Debug, Clone)]
pub struct Evaluator {
    kind: EvalKind,
    phase: C64,
}

fn inv_z() -> Expr {
    Expr::div(Expr::real(1.0), Expr::z())
}

/// `-8 |g'|^2 / (1 + |g|^2)^2`, evaluated stably for large `|g|`.
pub fn spherical_potential(g: C64, dg: C64) -> f64 {
    let n = g.norm_sqr();
    if n <= 1.0 {
        -8.0 * dg.norm_sqr() / ((1.0 + n) * (1.0 + n))
    } else {
        let h = 1.0 / n;
        -8.0 * dg.norm_sqr() * h * h / ((1.0 + h) * (1.0 + h))
    }
}

impl Evaluator {
    pub fn new(s: &SurfaceSpec) -> Result<Evaluator> {
        let phase = C64::from_polar(1.0, s.phase);
        let kind = match &s.data {
            SurfaceData::Intrinsic {
                conformal_factor,
                sigma,
            } => EvalKind::Intrinsic {
                e2l: [conformal_factor.clone(), conformal_factor.substitute(&inv_z())],
                sigma: [
                    sigma.clone(),
                    QuadDifferential::new(sigma.clone()).at_infinity_chart(),
                ],
            },
            _ => {
                let (g, eta) = s.weierstrass_pair()?;
                let g_w = g.substitute(&inv_z());
                let eta_w = Expr::mul(
                    eta.substitute(&inv_z()),
                    Expr::neg(Expr::powi(Expr::z(), -2)),
                );
                EvalKind::Gauss {
                    dg: [g.derivative(), g_w.derivative()],
                    g: [g, g_w],
                    eta: [eta, eta_w],
                }
            }
        };
        Ok(Evaluator { kind, phase })
    }

    /// Local geometry at `pos`, in a coordinate `xi` with `d(chart)/d(xi) = scale`.
    pub fn local(&self, pos: ChartPos, scale: C64) -> Result<LocalGeometry> {
        let (i, c) = match pos {
            ChartPos::Z(z) => (0, z),
            ChartPos::W(w) => (1, w),
        };
        match &self.kind {
            EvalKind::Gauss { g, dg, eta } => {
                let gv = g[i].eval(c)?;
                let dgv = dg[i].eval(c)? * scale;
                let etav = eta[i].eval(c)? * scale;
                let e2l = metric_from_pair(gv, etav);
                let raw = etav * dgv;
                let curvature = -raw.norm_sqr() / (e2l * e2l);
                Ok(LocalGeometry {
                    e2l,
                    curvature,
                    potential: spherical_potential(gv, dgv),
                    sigma: self.phase * raw,
                })
            }
            EvalKind::Intrinsic { e2l, sigma } => {
                let mut rho = e2l[i].eval(c)?.re * scale.norm_sqr();
                if i == 1 {
                    rho /= c.norm_sqr() * c.norm_sqr();
                }
                let raw = sigma[i].eval(c)? * scale * scale;
                let curvature = -raw.norm_sqr() / (rho * rho);
                Ok(LocalGeometry {
                    e2l: rho,
                    curvature,
                    potential: 2.0 * curvature * rho,
                    sigma: self.phase * raw,
                })
            }
        }
    }

    /// Local geometry at a global point in its natural coordinate.
    pub fn at(&self, z: C64) -> Result<LocalGeometry> {
        self.local(ChartPos::Z(z), C64::new(1.0, 0.0))
    }

    /// `(g, dg/dchart, eta)` at a chart position (Gauss-map data only).
    pub fn gauss_data(&self, pos: ChartPos) -> Result<(C64, C64, C64)> {
        let (i, c) = match pos {
            ChartPos::Z(z) => (0, z),
            ChartPos::W(w) => (1, w),
        };
        match &self.kind {
            EvalKind::Gauss { g, dg, eta } => Ok((g[i].eval(c)?, dg[i].eval(c)?, eta[i].eval(c)?)),
            EvalKind::Intrinsic { .. } => Err(Error::Unsupported("no Gauss map".into())),
        }
    }
}

/// `(1/4) (1 + |g|^2)^2 |eta|^2`.
pub fn metric_from_pair(g: C64, eta: C64) -> f64 {
    let s = 1.0 + g.norm_sqr();
    0.25 * s * s * eta.norm_sqr()
}
