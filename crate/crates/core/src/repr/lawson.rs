use super::auto_path;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::jet::Jet;
use crate::schwarzian::schwarzian_z;
use crate::surface::{singular_points, BryantF, Development, SurfaceData, SurfaceSpec};
use num_complex::Complex64 as C64;
use ode_solvers::{Dop853, OutputType, SVector, System};
use std::cell::Cell;

// Eight real components of (p1, p1', p2, p2') plus the path parameter. The
// parameter is carried as a state so the system is autonomous: the stage
// abscissa c12 in ode_solvers 0.6.2's DOP853 tableau is 0 instead of 1.
type State = SVector<f64, 9>;

/// Taylor expansions of a fundamental system `(p1, p2)` of
/// `p'' + (q/2) p = 0` about `center`; `f = p1 / p2`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalDevelopment {
    pub center: C64,
    pub p1: Vec<C64>,
    pub p2: Vec<C64>,
}

fn taylor_solution(q: &[C64], p0: C64, dp0: C64) -> Vec<C64> {
    let n = q.len() + 1;
    let mut p = vec![C64::new(0.0, 0.0); n + 1];
    p[0] = p0;
    p[1] = dp0;
    for k in 0..n - 1 {
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..=k.min(q.len() - 1) {
            acc += 0.5 * q[i] * p[k - i];
        }
        p[k + 2] = -acc / ((k + 2) as f64 * (k + 1) as f64);
    }
    p
}

/// Taylor coefficients (in `t`) of `sum c_n (d + t)^n` through `t^k`.
fn shifted(c: &[C64], d: C64, k: usize) -> Vec<C64> {
    let mut work = c.to_vec();
    let mut out = Vec::with_capacity(k + 1);
    for _ in 0..=k {
        // Horner value of the current series, then its derivative series.
        let mut v = C64::new(0.0, 0.0);
        for a in work.iter().rev() {
            v = v * d + a;
        }
        out.push(v);
        work = work
            .iter()
            .enumerate()
            .skip(1)
            .map(|(n, a)| a * n as f64)
            .collect();
        if work.is_empty() {
            work.push(C64::new(0.0, 0.0));
        }
    }
    let mut fact = 1.0;
    for (j, o) in out.iter_mut().enumerate() {
        if j > 0 {
            fact *= j as f64;
        }
        *o /= fact;
    }
    out
}

impl LocalDevelopment {
    /// `init = (p1, p1', p2, p2')` at `center`.
    pub fn new(q: &Expr, center: C64, init: [C64; 4], order: usize) -> Result<LocalDevelopment> {
        let qj = q.jet(center, order)?;
        Ok(LocalDevelopment {
            center,
            p1: taylor_solution(&qj.coeffs, init[0], init[1]),
            p2: taylor_solution(&qj.coeffs, init[2], init[3]),
        })
    }

    /// `(p1, p1', p2, p2')` at `z`.
    pub fn state(&self, z: C64) -> [C64; 4] {
        let d = z - self.center;
        let a = shifted(&self.p1, d, 1);
        let b = shifted(&self.p2, d, 1);
        [a[0], a[1], b[0], b[1]]
    }

    /// Jet of `f = p1 / p2` at `z`.
    pub fn f_jet(&self, z: C64, k: usize) -> Result<Jet> {
        let d = z - self.center;
        let a = Jet {
            center: z,
            coeffs: shifted(&self.p1, d, k),
        };
        let b = Jet {
            center: z,
            coeffs: shifted(&self.p2, d, k),
        };
        a.div(&b)
    }
}

struct Segment<'a> {
    q: &'a Expr,
    a: C64,
    d: C64,
    failed: &'a Cell<bool>,
}

impl System<f64, State> for Segment<'_> {
    fn system(&self, _t: f64, y: &State, dy: &mut State) {
        let z = self.a + self.d * y[8];
        let q = match self.q.eval(z) {
            Ok(v) => v,
            Err(_) => {
                self.failed.set(true);
                C64::new(0.0, 0.0)
            }
        };
        for k in 0..2 {
            let p = C64::new(y[4 * k], y[4 * k + 1]);
            let dp = C64::new(y[4 * k + 2], y[4 * k + 3]);
            let v = self.d * dp;
            let w = -self.d * 0.5 * q * p;
            dy[4 * k] = v.re;
            dy[4 * k + 1] = v.im;
            dy[4 * k + 2] = w.re;
            dy[4 * k + 3] = w.im;
        }
        dy[8] = 1.0;
    }
}

/// Continues `(p1, p1', p2, p2')` along a polyline with an 8th-order
/// adaptive Runge-Kutta method.
pub fn develop_along(q: &Expr, path: &[C64], init: [C64; 4], tol: f64) -> Result<[C64; 4]> {
    let mut y = State::from_fn(|i, _| {
        if i == 8 {
            return 0.0;
        }
        let c = init[i / 2];
        if i % 2 == 0 {
            c.re
        } else {
            c.im
        }
    });
    for w in path.windows(2) {
        let failed = Cell::new(false);
        let seg = Segment {
            q,
            a: w[0],
            d: w[1] - w[0],
            failed: &failed,
        };
        let rtol = tol.max(1e-12);
        let mut solver = Dop853::from_param(
            seg,
            0.0,
            1.0,
            1.0,
            y,
            rtol,
            rtol,
            0.9,
            0.0,
            0.333,
            6.0,
            1.0,
            0.0,
            100_000,
            u32::MAX,
            OutputType::Sparse,
        );
        solver
            .integrate()
            .map_err(|e| Error::NotConverged(format!("development stalled: {e:?}")))?;
        let last = *solver
            .y_out()
            .last()
            .ok_or_else(|| Error::NotConverged("no output".into()))?;
        y = last;
        y[8] = 0.0;
        if failed.get() || !y.iter().all(|v| v.is_finite()) {
            return Err(Error::PathThroughSingularity(format!(
                "development blew up between {} and {}",
                w[0], w[1]
            )));
        }
    }
    Ok([0, 2, 4, 6].map(|i| C64::new(y[i], y[i + 1])))
}

fn develop_failed(q: &Expr, path: &[C64]) -> Option<Error> {
    path.iter()
        .find_map(|z| q.eval(*z).err())
        .map(|e| Error::PathThroughSingularity(e.to_string()))
}

/// `q = S_z(g) - sigma`, the potential whose solutions give `f`.
fn schwarzian_potential(s: &SurfaceSpec) -> Result<(Expr, Expr, C64)> {
    let SurfaceData::Bryant {
        f: BryantF::Developed(dev),
        g,
    } = &s.data
    else {
        return Err(Error::Unsupported("not a developed Bryant scene".into()));
    };
    let sigma = s.sigma()?.coeff;
    Ok((Expr::sub(schwarzian_z(g), sigma), g.clone(), dev.base))
}

fn avoid_points(s: &SurfaceSpec, g: &Expr, sigma: &Expr) -> Vec<C64> {
    let mut pts = singular_points(s);
    for e in [g.derivative(), sigma.clone()] {
        if let Some(d) = e.to_rational().and_then(|r| r.divisor(1e-6)) {
            pts.extend(d.iter().filter_map(|(p, _)| p.as_finite()));
        }
    }
    pts
}

const STANDARD_INIT: [C64; 4] = [
    C64::new(0.0, 0.0),
    C64::new(1.0, 0.0),
    C64::new(1.0, 0.0),
    C64::new(0.0, 0.0),
];

/// Local development at `z`, continued from the scene's base point.
pub(crate) fn base_development(s: &SurfaceSpec, z: C64) -> Result<LocalDevelopment> {
    let (q, g, base) = schwarzian_potential(s)?;
    let avoid = avoid_points(s, &g, &s.sigma()?.coeff);
    let path = auto_path(base, z, &avoid, 0.05)?;
    let state = if path.len() == 2 && (z - base).norm() < 1e-15 {
        STANDARD_INIT
    } else {
        develop_along(&q, &path, STANDARD_INIT, 1e-13)
            .map_err(|e| develop_failed(&q, &path).unwrap_or(e))?
    };
    LocalDevelopment::new(&q, z, state, 40)
}

fn choose_base(q: &Expr, avoid: &[C64]) -> Result<C64> {
    let cands = [
        C64::new(0.5, 0.3),
        C64::new(-0.4, 0.6),
        C64::new(0.7, -0.45),
        C64::new(1.3, 0.9),
        C64::new(-1.1, -0.8),
    ];
    cands
        .into_iter()
        .find(|b| avoid.iter().all(|p| (b - p).norm() > 0.1) && q.eval(*b).is_ok())
        .ok_or_else(|| Error::DegenerateData("no regular base point found".into()))
}

/// Bryant data with the same metric and `sigma`: `g` is kept and `f` solves
/// `S{f, g} = -sigma`, developed numerically from a base point.
pub fn lawson_min_to_bryant(s: &SurfaceSpec) -> Result<SurfaceSpec> {
    let (g, eta) = match &s.data {
        SurfaceData::Weierstrass { g, eta } => (g, eta),
        SurfaceData::Bryant { .. } => return Ok(s.clone()),
        SurfaceData::Intrinsic { .. } => {
            return Err(Error::Unsupported("intrinsic scenes are already shared".into()))
        }
    };
    let mut out = s.clone();
    out.name = format!("{}-bryant", s.name);
    if !g.depends_on_z() {
        // sigma vanishes: totally umbilic, recorded intrinsically.
        let g0 = g.const_value()?;
        let eta0 = eta.const_value().map_err(|_| {
            Error::Unsupported("constant Gauss map with non-constant eta".into())
        })?;
        out.data = SurfaceData::Intrinsic {
            conformal_factor: Expr::real(crate::surface::metric_from_pair(g0, eta0)),
            sigma: Expr::real(0.0),
        };
        return Ok(out);
    }
    let sigma = Expr::mul(eta.clone(), g.derivative());
    let q = Expr::sub(
        schwarzian_z(g),
        Expr::mul(Expr::constant(C64::from_polar(1.0, s.phase)), sigma.clone()),
    );
    let base = choose_base(&q, &avoid_points(s, g, &sigma))?;
    out.data = SurfaceData::Bryant {
        f: BryantF::Developed(Development { sigma, base }),
        g: g.clone(),
    };
    Ok(out)
}

/// Weierstrass data `(g, eta = sigma / g')` with the same metric and `sigma`.
pub fn lawson_bryant_to_min(s: &SurfaceSpec) -> Result<SurfaceSpec> {
    match &s.data {
        SurfaceData::Weierstrass { .. } => return Ok(s.clone()),
        SurfaceData::Intrinsic { .. } => {
            return Err(Error::Unsupported("intrinsic scenes are already shared".into()))
        }
        SurfaceData::Bryant { .. } => {}
    }
    let (g, eta) = s.weierstrass_pair()?;
    let probes = [C64::new(0.31, 0.17), C64::new(-0.6, 0.45), C64::new(1.7, -0.9)];
    let umbilic = probes
        .iter()
        .filter_map(|z| eta.eval(*z).ok())
        .all(|v| v.norm() < 1e-13);
    if umbilic {
        return Err(Error::DegenerateData("sigma vanishes: totally umbilic".into()));
    }
    let mut out = s.clone();
    out.name = format!("{}-minimal", s.name);
    out.data = SurfaceData::Weierstrass { g, eta };
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::point::Point;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn taylor_development_solves_schwarzian() {
        let q = parse("z^2 + 1").unwrap();
        let dev = LocalDevelopment::new(&q, c(0.1, 0.0), STANDARD_INIT, 40).unwrap();
        let z = c(0.3, 0.2);
        let f = dev.f_jet(z, 3).unwrap();
        let (d1, d2, d3) = (f.coeffs[1], 2.0 * f.coeffs[2], 6.0 * f.coeffs[3]);
        let s = d3 / d1 - 1.5 * (d2 / d1) * (d2 / d1);
        assert!((s - q.eval(z).unwrap()).norm() < 1e-12, "{s}");
    }

    #[test]
    fn ode_continuation_matches_taylor() {
        let q = parse("c(0.5,0.2)*z^2 - 1").unwrap();
        let dev = LocalDevelopment::new(&q, c(0.0, 0.0), STANDARD_INIT, 60).unwrap();
        let path = [c(0.0, 0.0), c(0.4, 0.1), c(0.6, -0.3)];
        let y = develop_along(&q, &path, STANDARD_INIT, 1e-13).unwrap();
        let t = dev.state(c(0.6, -0.3));
        for k in 0..4 {
            assert!((y[k] - t[k]).norm() < 1e-10, "{k}: {} vs {}", y[k], t[k]);
        }
    }

    #[test]
    fn roundtrip_returns_identical_eta() {
        let s = SurfaceSpec::sphere(
            "cat",
            vec![Point::finite(0.0, 0.0), Point::Infinity],
            SurfaceData::Weierstrass {
                g: Expr::z(),
                eta: parse("z^-2").unwrap(),
            },
        );
        let b = lawson_min_to_bryant(&s).unwrap();
        let m = lawson_bryant_to_min(&b).unwrap();
        assert_eq!(m.weierstrass_pair().unwrap(), s.weierstrass_pair().unwrap());
    }

    #[test]
    fn plane_goes_to_intrinsic_flat_data() {
        let s = SurfaceSpec::sphere(
            "plane",
            vec![Point::Infinity],
            SurfaceData::Weierstrass {
                g: Expr::real(0.0),
                eta: Expr::real(1.0),
            },
        );
        let b = lawson_min_to_bryant(&s).unwrap();
        assert!(matches!(b.data, SurfaceData::Intrinsic { .. }));
        let l = b.evaluator().unwrap().at(c(0.2, 0.2)).unwrap();
        assert_eq!(l.e2l, 0.25);
        assert_eq!(l.curvature, 0.0);
    }

    #[test]
    fn umbilic_bryant_data_rejected() {
        let s = SurfaceSpec::sphere(
            "umb",
            vec![Point::Infinity],
            SurfaceData::Bryant {
                f: BryantF::Expr(parse("(2*z + 1)/(z + 3)").unwrap()),
                g: Expr::z(),
            },
        );
        assert!(matches!(lawson_bryant_to_min(&s), Err(Error::DegenerateData(_))));
    }
}
