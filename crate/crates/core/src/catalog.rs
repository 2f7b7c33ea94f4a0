//! Built-in example scenes.

use crate::error::{Error, Result};
use crate::expr::{parse, Expr};
use crate::moebius::Mat2;
use crate::point::Point;
use crate::scene::Scene;
use crate::surface::{monodromy_report, BryantF, SurfaceData, SurfaceSpec, Topology};
use num_complex::Complex64 as C64;
use std::collections::BTreeMap;

/// Names accepted by [`builtin`], with their parameters and defaults.
pub const BUILTINS: &[(&str, &[(&str, f64)])] = &[
    ("plane", &[]),
    ("torus", &[]),
    ("catenoid", &[]),
    ("enneper", &[]),
    ("scherk", &[]),
    ("horosphere", &[]),
    ("cousin", &[("mu", 1.0)]),
    ("uy72", &[("mu", 2.0)]),
    ("uy73", &[("mu", 2.0), ("m", 3.0), ("a", 0.5)]),
];

/// Examples for which index estimates are meaningful: two-sided, framed,
/// with regular ends and Gauss-map data.
pub const SPECTRAL_EXAMPLES: &[&str] = &["plane", "torus", "catenoid", "enneper", "scherk"];

fn weierstrass(g: &str, eta: &str) -> SurfaceData {
    SurfaceData::Weierstrass {
        g: parse(g).expect("catalog expression"),
        eta: parse(eta).expect("catalog expression"),
    }
}

fn origin() -> Point {
    Point::finite(0.0, 0.0)
}

fn is_int(x: f64) -> bool {
    (x - x.round()).abs() < 1e-12
}

/// `z^p`, exact integer power when possible, principal branch otherwise.
fn z_pow(p: f64) -> Expr {
    if is_int(p) {
        Expr::powi(Expr::z(), p.round() as i32)
    } else {
        Expr::pow(Expr::z(), Expr::real(p), Some(0))
    }
}

/// Built-in scene `name`; parameters not given in `params` take the
/// defaults listed in [`BUILTINS`].
pub fn builtin(name: &str, params: &BTreeMap<String, f64>) -> Result<Scene> {
    let Some((_, defaults)) = BUILTINS.iter().find(|(n, _)| *n == name) else {
        let known: Vec<&str> = BUILTINS.iter().map(|(n, _)| *n).collect();
        return Err(Error::Scene(format!(
            "unknown example `{name}` (known: {})",
            known.join(", ")
        )));
    };
    let mut p: BTreeMap<String, f64> = defaults.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    for (k, v) in params {
        if !p.contains_key(k) {
            return Err(Error::Scene(format!("example `{name}` has no parameter `{k}`")));
        }
        p.insert(k.clone(), *v);
    }
    let surface = match name {
        "plane" => SurfaceSpec::sphere(name, vec![Point::Infinity], weierstrass("0", "1")),
        "torus" => SurfaceSpec {
            name: name.into(),
            topology: Topology::Torus {
                omega1: C64::new(1.0, 0.0),
                omega2: C64::new(0.0, 1.0),
            },
            data: weierstrass("0", "1"),
            phase: 0.0,
            sidedness: crate::surface::Sidedness::TwoSided,
        },
        "catenoid" => SurfaceSpec::sphere(
            name,
            vec![origin(), Point::Infinity],
            weierstrass("z", "z^-2"),
        ),
        "enneper" => SurfaceSpec::sphere(name, vec![Point::Infinity], weierstrass("z", "1")),
        "scherk" => SurfaceSpec::sphere(
            name,
            vec![
                Point::finite(1.0, 0.0),
                Point::finite(0.0, 1.0),
                Point::finite(-1.0, 0.0),
                Point::finite(0.0, -1.0),
            ],
            weierstrass("z", "4/(z^4 - 1)"),
        ),
        "horosphere" => SurfaceSpec::sphere(
            name,
            vec![Point::Infinity],
            SurfaceData::Intrinsic {
                conformal_factor: Expr::real(1.0),
                sigma: Expr::real(0.0),
            },
        ),
        "cousin" => {
            let mu = p["mu"];
            if mu <= 0.0 {
                return Err(Error::Scene("cousin: mu must be positive".into()));
            }
            SurfaceSpec::sphere(
                name,
                vec![origin(), Point::Infinity],
                SurfaceData::Bryant {
                    f: BryantF::Expr(Expr::z()),
                    g: z_pow(-(2.0 * mu + 1.0)),
                },
            )
        }
        "uy72" => {
            let mu = p["mu"];
            let g = parse("((z - 1)/(z + 1))^{mu}[0] * (z - mu)/(z + mu)")?.bind(&p);
            let eta = parse("(z + mu)^2 / (z^2 - 1)^2")?.bind(&p);
            if mu == 0.0 {
                return Err(Error::Scene("uy72: mu must be nonzero".into()));
            }
            SurfaceSpec::sphere(
                name,
                vec![Point::finite(1.0, 0.0), Point::finite(-1.0, 0.0)],
                SurfaceData::Weierstrass { g, eta },
            )
        }
        "uy73" => {
            let (mu, m) = (p["mu"], p["m"]);
            if !is_int(m) || m < 1.0 {
                return Err(Error::Scene("uy73: m must be a positive integer".into()));
            }
            let mi = m.round() as i32;
            let a = Expr::real(p["a"]);
            let zm = Expr::powi(Expr::z(), mi);
            let g = Expr::mul(
                z_pow(mu),
                Expr::div(
                    Expr::add(zm.clone(), a.clone()),
                    Expr::add(Expr::mul(a.clone(), zm.clone()), Expr::real(1.0)),
                ),
            );
            let lead = Expr::add(Expr::mul(a, zm), Expr::real(1.0));
            let eta = Expr::mul(Expr::powi(lead, 2), Expr::powi(Expr::z(), -2));
            SurfaceSpec::sphere(
                name,
                vec![origin(), Point::Infinity],
                SurfaceData::Weierstrass { g, eta },
            )
        }
        _ => unreachable!(),
    };
    let mut scene = Scene::new(surface);
    scene.parameters = p;
    scene.note = Some(format!("built-in example `{name}`"));
    scene.validate()?;
    Ok(scene)
}

/// Closed-form frame of the catenoid cousin with parameter `mu`.
pub fn cousin_frame(mu: f64, z: C64) -> Mat2 {
    let c = 1.0 / (2.0 * mu + 1.0).sqrt();
    let zm = z.powf(mu);
    let zi = 1.0 / zm;
    Mat2::new(
        (mu + 1.0) * zm,
        mu * zi / z,
        mu * zm * z,
        (mu + 1.0) * zi,
    )
    .scale(C64::new(c, 0.0))
}

/// Closed-form `F^{-1} dF / dz` of [`cousin_frame`].
pub fn cousin_log_derivative(mu: f64, z: C64) -> Mat2 {
    let k = mu * (mu + 1.0) / (2.0 * mu + 1.0);
    let z2m = z.powf(2.0 * mu);
    Mat2::new(1.0 / z, -1.0 / (z2m * z * z), z2m, -1.0 / z).scale(C64::new(k, 0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UyExample {
    /// `g = ((z-1)/(z+1))^mu (z-mu)/(z+mu)`.
    Ex72,
    /// `g = z^mu (z^m + a)/(a z^m + 1)`.
    Ex73,
}

/// Parameter values excluded from the admissible range.
fn uy_excluded(ex: UyExample, mu: f64, m: u32) -> bool {
    let mut bad = vec![0.0, 1.0, -1.0];
    if ex == UyExample::Ex73 {
        bad.extend([m as f64, -(m as f64)]);
    }
    bad.iter().any(|b| (mu - b).abs() < 1e-12)
}

/// Closed-form framedness criterion: `mu` an integer outside the excluded set.
pub fn uy_closed_form(ex: UyExample, mu: f64, m: u32) -> bool {
    is_int(mu) && !uy_excluded(ex, mu, m)
}

/// Framedness of the example from the monodromy of its Gauss map. Parameters
/// must be admissible (`mu` not in `{0, +-1}`, and not `+-m` for `Ex73`).
pub fn umehara_yamada_framedness(ex: UyExample, mu: f64, m: u32) -> Result<bool> {
    if uy_excluded(ex, mu, m) || m == 0 {
        return Err(Error::DegenerateData(format!(
            "parameters mu = {mu}, m = {m} are outside the admissible range"
        )));
    }
    let mut p = BTreeMap::new();
    p.insert("mu".to_string(), mu);
    let name = match ex {
        UyExample::Ex72 => "uy72",
        UyExample::Ex73 => {
            p.insert("m".to_string(), m as f64);
            "uy73"
        }
    };
    let s = builtin(name, &p)?;
    Ok(monodromy_report(&s.surface, 512)?.framed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn all_builtins_load() {
        for (name, _) in BUILTINS {
            builtin(name, &BTreeMap::new()).unwrap();
        }
        assert!(builtin("nope", &BTreeMap::new()).is_err());
        let mut p = BTreeMap::new();
        p.insert("nu".to_string(), 1.0);
        assert!(builtin("cousin", &p).is_err());
    }

    #[test]
    fn cousin_frame_is_unimodular() {
        for mu in [0.5, 1.0, 1.5] {
            let f = cousin_frame(mu, c(0.7, 0.4));
            assert!((f.det() - 1.0).norm() < 1e-13);
            assert!(cousin_log_derivative(mu, c(0.7, 0.4)).det().norm() < 1e-13);
        }
    }

    #[test]
    fn uy_framedness_matches_closed_form() {
        for (ex, mu, m) in [
            (UyExample::Ex72, 2.0, 0),
            (UyExample::Ex72, 1.5, 0),
            (UyExample::Ex72, -2.0, 0),
            (UyExample::Ex72, 0.3, 0),
            (UyExample::Ex73, 2.0, 3),
            (UyExample::Ex73, 2.5, 3),
            (UyExample::Ex73, 4.0, 2),
        ] {
            let got = umehara_yamada_framedness(ex, mu, m.max(1)).unwrap();
            assert_eq!(got, uy_closed_form(ex, mu, m.max(1)), "{ex:?} mu={mu} m={m}");
        }
        assert!(umehara_yamada_framedness(UyExample::Ex72, 1.0, 1).is_err());
    }
}
